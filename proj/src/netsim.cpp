#include "dosn/netsim.hpp"

namespace dosn {

void Substrate::charge_send(UserId sender, std::size_t payload) {
    auto& t = traffic_[sender];
    t.bytes_sent += payload + kEnvelopeBytes;
    t.messages_sent += 1;
}

void Substrate::charge_receive(UserId reader, std::size_t payload) {
    auto& t = traffic_[reader];
    t.bytes_received += payload;
    t.messages_received += 1;
}

BlobRef Substrate::dht_put(const std::string& key, Parcel blob, std::set<UserId> replicas, UserId sender) {
    if (dht_.count(key)) throw SimError("key exists");
    charge_send(sender, blob.size());
    BlobRef ref{key, blob.size(), std::move(replicas)};
    dht_.emplace(key, StoredBlob{std::move(blob), ref});
    return ref;
}

const Parcel& Substrate::dht_get(const std::string& key, UserId reader) {
    auto it = dht_.find(key);
    if (it == dht_.end()) throw SimError("not found");
    charge_receive(reader, it->second.body.size());
    return it->second.body;
}

const Parcel& Substrate::dht_peek(const std::string& key) const {
    auto it = dht_.find(key);
    if (it == dht_.end()) throw SimError("not found");
    return it->second.body;
}

bool Substrate::dht_contains(const std::string& key) const { return dht_.count(key) > 0; }

const BlobRef& Substrate::dht_ref(const std::string& key) const {
    auto it = dht_.find(key);
    if (it == dht_.end()) throw SimError("not found");
    return it->second.ref;
}

void Substrate::dht_replicate(const std::string& key, UserId new_replica, UserId payer) {
    auto it = dht_.find(key);
    if (it == dht_.end()) throw SimError("not found");
    charge_send(payer, it->second.body.size());
    it->second.ref.replicas.insert(new_replica);
}

void Substrate::dht_drop_replica(const std::string& key, UserId replica) {
    auto it = dht_.find(key);
    if (it == dht_.end()) throw SimError("not found");
    it->second.ref.replicas.erase(replica);
}

void Substrate::mailbox_append(UserId owner, Parcel msg, UserId sender) {
    charge_send(sender, msg.size());
    mailboxes_[owner].push_back(std::move(msg));
}

std::vector<Parcel> Substrate::mailbox_drain(UserId owner) {
    auto it = mailboxes_.find(owner);
    if (it == mailboxes_.end()) return {};
    std::vector<Parcel> out = std::move(it->second);
    it->second.clear();
    auto& t = traffic_[owner];
    for (const auto& m : out) {
        t.bytes_received += m.size();
        t.messages_received += 1;
    }
    return out;
}

std::uint64_t Substrate::gml_append(GroupId g, Parcel msg, UserId sender) {
    charge_send(sender, msg.size());
    auto& list = gmls_[g];
    std::uint64_t seq = list.empty() ? 1 : list.back().seq + 1;
    list.push_back({seq, sender, std::move(msg)});
    return seq;
}

std::vector<const GmlEntry*> Substrate::gml_read_since(GroupId g, std::uint64_t from_seq, UserId reader) {
    std::vector<const GmlEntry*> out;
    auto it = gmls_.find(g);
    if (it == gmls_.end()) return out;
    auto& t = traffic_[reader];
    for (const auto& e : it->second) {
        if (e.seq <= from_seq) continue;
        t.bytes_received += e.body.size();
        t.messages_received += 1;
        out.push_back(&e);
    }
    return out;
}

std::uint64_t Substrate::gml_last_seq(GroupId g) const {
    auto it = gmls_.find(g);
    if (it == gmls_.end() || it->second.empty()) return 0;
    return it->second.back().seq;
}

void Substrate::reset_traffic() {
    for (auto& [u, t] : traffic_) t = TrafficLedger{};
}

} // namespace dosn
