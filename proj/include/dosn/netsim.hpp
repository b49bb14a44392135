#pragma once

#include <any>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dosn/ids.hpp"

namespace dosn {

// Payload-only byte accounting; DHT routing and maintenance traffic are not
// modelled. Senders additionally pay a fixed per-message envelope.
inline constexpr std::size_t kEnvelopeBytes = 24; // sender id 8 + seq 8 + kind 8

struct TrafficLedger {
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_received = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_received = 0;
};

// Type-erased message/blob with an explicit accounted size. The accounted
// size follows the canonical-size rules of the crypto layer, not the in-memory
// representation.
class Parcel {
public:
    Parcel() = default;
    template <class T>
    Parcel(T body, std::size_t accounted_size)
        : body_(std::move(body)), size_(accounted_size) {}

    template <class T> const T& as() const {
        const T* p = std::any_cast<T>(&body_);
        if (!p) throw SimError("parcel type mismatch");
        return *p;
    }
    std::size_t size() const { return size_; }

private:
    std::any body_;
    std::size_t size_ = 0;
};

struct BlobRef {
    std::string key;
    std::size_t size = 0;
    std::set<UserId> replicas;
};

struct GmlEntry {
    std::uint64_t seq = 0;
    UserId sender;
    Parcel body;
};

// In-memory DOSN substrate: DHT blob store with replica placement metadata,
// append-only per-user Private Mailboxes, append-only per-group Group Message
// Lists, and per-principal traffic ledgers. Single-threaded, owned by one
// simulation run.
class Substrate {
public:
    BlobRef dht_put(const std::string& key, Parcel blob, std::set<UserId> replicas, UserId sender);
    const Parcel& dht_get(const std::string& key, UserId reader);
    const Parcel& dht_peek(const std::string& key) const; // inspection, no traffic charge
    bool dht_contains(const std::string& key) const;
    const BlobRef& dht_ref(const std::string& key) const;

    // Replica reassignment; the payer is charged one copy transfer.
    void dht_replicate(const std::string& key, UserId new_replica, UserId payer);
    void dht_drop_replica(const std::string& key, UserId replica);

    void mailbox_append(UserId owner, Parcel msg, UserId sender);
    std::vector<Parcel> mailbox_drain(UserId owner);

    std::uint64_t gml_append(GroupId g, Parcel msg, UserId sender);
    std::vector<const GmlEntry*> gml_read_since(GroupId g, std::uint64_t from_seq, UserId reader);
    std::uint64_t gml_last_seq(GroupId g) const;

    TrafficLedger& traffic(UserId u) { return traffic_[u]; }
    const std::map<UserId, TrafficLedger>& all_traffic() const { return traffic_; }
    void reset_traffic();

private:
    struct StoredBlob {
        Parcel body;
        BlobRef ref;
    };
    void charge_send(UserId sender, std::size_t payload);
    void charge_receive(UserId reader, std::size_t payload);

    std::map<std::string, StoredBlob> dht_;
    std::map<UserId, std::vector<Parcel>> mailboxes_;
    std::map<GroupId, std::vector<GmlEntry>> gmls_;
    std::map<UserId, TrafficLedger> traffic_;
};

} // namespace dosn
