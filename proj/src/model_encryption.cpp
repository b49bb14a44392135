#include "dosn/model_encryption.hpp"

#include <cstring>

namespace dosn {

namespace {

Bytes secret_bytes(const SymKey& k) {
    return Bytes(k.secret.begin(), k.secret.end());
}

// (version u32 LE, secret) pairs
Bytes serialize_key_list(const std::vector<SymKey>& keys) {
    Bytes out;
    out.reserve(keys.size() * (4 + kSymKeyBytes));
    for (const auto& k : keys) {
        for (int i = 0; i < 4; ++i)
            out.push_back(static_cast<std::uint8_t>((k.version >> (8 * i)) & 0xff));
        out.insert(out.end(), k.secret.begin(), k.secret.end());
    }
    return out;
}

std::vector<std::pair<std::uint32_t, std::array<std::uint8_t, kSymKeyBytes>>>
parse_key_list(const Bytes& buf) {
    constexpr std::size_t stride = 4 + kSymKeyBytes;
    if (buf.size() % stride != 0) throw SimError("malformed key list");
    std::vector<std::pair<std::uint32_t, std::array<std::uint8_t, kSymKeyBytes>>> out;
    for (std::size_t off = 0; off < buf.size(); off += stride) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[off + i]) << (8 * i);
        std::array<std::uint8_t, kSymKeyBytes> sec{};
        std::memcpy(sec.data(), buf.data() + off + 4, kSymKeyBytes);
        out.emplace_back(v, sec);
    }
    return out;
}

} // namespace

EncryptionGroup::EncryptionGroup(World& w, GroupId g, UserId owner, GroupType gtype)
    : w_(w), gid_(g), owner_(owner), gtype_(gtype), store_(g) {
    w_.register_group(g);
    current_ = w_.crypto.gen_sym(w_.ops(owner_));
    key_history_.push_back(current_);
    members_.insert(owner_);
    remember(owner_, current_);
}

void EncryptionGroup::remember(UserId u, const SymKey& key) {
    states_[u].group_keys[key.version] = key;
}

ContentStore::KeyLookup EncryptionGroup::lookup_for(UserId u) const {
    return [this, u](const KeyRef& ref) -> const SymKey* {
        auto st = states_.find(u);
        if (st == states_.end()) return nullptr;
        if (ref.key_id != current_.key_id) return nullptr;
        auto it = st->second.group_keys.find(ref.version);
        return it == st->second.group_keys.end() ? nullptr : &it->second;
    };
}

ContentId EncryptionGroup::publish(UserId author, SharedBytes content) {
    if (!members_.count(author)) throw SimError("not a member");
    return store_.publish(w_, author, std::move(content), current_);
}

void EncryptionGroup::deliver_key_asym(UserId to, const SymKey& key) {
    Sealed s = w_.crypto.seal_asym(to, secret_bytes(key), w_.ops(owner_));
    EncPacket pkt = EncKeyPacket{gid_, key.key_id, key.version, std::move(s)};
    w_.net.mailbox_append(to, Parcel(std::move(pkt), kAsymPacketBytes), owner_);
}

void EncryptionGroup::join(UserId u) {
    if (members_.count(u)) throw SimError("already member");
    auto& led = w_.ops(owner_);

    if (secrecy_flags(gtype_).join_bs) {
        // G2: fresh group key; asym to the joiner, sealed under the previous
        // version onto the GML for everyone else.
        SymKey old = current_;
        current_ = w_.crypto.rotate_sym(current_, led);
        key_history_.push_back(current_);
        remember(owner_, current_);
        deliver_key_asym(u, current_);
        Sealed s = w_.crypto.seal_sym(old, secret_bytes(current_), led);
        EncPacket pkt = EncKeyPacket{gid_, current_.key_id, current_.version, std::move(s)};
        w_.net.gml_append(gid_, Parcel(std::move(pkt), kSymKeyBytes), owner_);
    } else {
        // G3/G4: the group key does not change.
        deliver_key_asym(u, current_);
        if (gtype_ == GroupType::G4 && key_history_.size() > 1) {
            // Old key versions ride symmetrically under the current key so the
            // joiner can open contents sealed before earlier rotations.
            std::vector<SymKey> old(key_history_.begin(), key_history_.end() - 1);
            Bytes listing = serialize_key_list(old);
            std::size_t sz = listing.size();
            Sealed s = w_.crypto.seal_sym(current_, make_shared_bytes(std::move(listing)), led);
            EncPacket pkt = EncKeyHistoryPacket{gid_, current_.key_id, std::move(s)};
            w_.net.mailbox_append(u, Parcel(std::move(pkt), sz), owner_);
        }
    }
    members_.insert(u);
    // First contact starts past the backlog; a rejoining member keeps her
    // cursor so entries from her earlier membership stay reachable.
    if (!states_.count(u)) states_[u].gml_cursor = w_.net.gml_last_seq(gid_);
}

void EncryptionGroup::leave(UserId u) {
    if (u == owner_) throw SimError("owner cannot leave");
    if (!members_.count(u)) throw SimError("not a member");
    members_.erase(u);
    auto& led = w_.ops(owner_);

    current_ = w_.crypto.rotate_sym(current_, led);
    key_history_.push_back(current_);
    remember(owner_, current_);
    for (UserId m : members_) {
        if (m == owner_) continue;
        deliver_key_asym(m, current_);
    }

    if (secrecy_flags(gtype_).leave_bs)
        store_.rekey_all(w_, owner_, lookup_for(owner_), current_);
}

void EncryptionGroup::sync(UserId u) {
    auto& st = states_[u];
    auto& led = w_.ops(u);

    auto take_key_packet = [&](const EncKeyPacket& pkt, bool from_mailbox) {
        if (pkt.group != gid_) return;
        std::optional<SharedBytes> material;
        if (from_mailbox && pkt.sealed.scheme == Sealed::Scheme::Asym) {
            material = w_.crypto.open_asym(u, pkt.sealed, led);
        } else {
            auto sealing = st.group_keys.find(pkt.sealed.sym_ref.version);
            if (sealing == st.group_keys.end()) return; // seals a version u never held
            material = w_.crypto.open_sym(sealing->second, pkt.sealed, led);
        }
        if (!material) return;
        SymKey k{pkt.key_id, pkt.version, {}};
        std::memcpy(k.secret.data(), (*material)->data(), kSymKeyBytes);
        st.group_keys[k.version] = k;
    };

    auto take_history_packet = [&](const EncKeyHistoryPacket& pkt) {
        if (pkt.group != gid_) return;
        auto sealing = st.group_keys.find(pkt.sealed.sym_ref.version);
        if (sealing == st.group_keys.end()) return;
        auto listing = w_.crypto.open_sym(sealing->second, pkt.sealed, led);
        if (!listing) return;
        for (const auto& [version, secret] : parse_key_list(**listing))
            st.group_keys[version] = SymKey{pkt.key_id, version, secret};
    };

    for (const Parcel& p : w_.net.mailbox_drain(u)) {
        const auto& pkt = p.as<EncPacket>();
        if (const auto* key = std::get_if<EncKeyPacket>(&pkt))
            take_key_packet(*key, true);
        else
            take_history_packet(std::get<EncKeyHistoryPacket>(pkt));
    }
    for (const GmlEntry* e : w_.net.gml_read_since(gid_, st.gml_cursor, u)) {
        st.gml_cursor = e->seq;
        const auto& pkt = e->body.as<EncPacket>();
        if (const auto* key = std::get_if<EncKeyPacket>(&pkt))
            take_key_packet(*key, false);
    }
}

std::optional<SharedBytes> EncryptionGroup::access(UserId u, ContentId c) {
    return store_.access(w_, u, c, lookup_for(u));
}

AccessDecision EncryptionGroup::decide(UserId u, ContentId c) {
    return access(u, c) ? AccessDecision::Permit : AccessDecision::Deny;
}

const EncMemberState& EncryptionGroup::member_state(UserId u) const {
    auto it = states_.find(u);
    if (it == states_.end()) throw SimError("no state for user");
    return it->second;
}

} // namespace dosn
