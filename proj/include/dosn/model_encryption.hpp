#pragma once

#include <map>
#include <set>
#include <variant>
#include <vector>

#include "dosn/content_store.hpp"
#include "dosn/core.hpp"
#include "dosn/world.hpp"

namespace dosn {

// Wire packets of the encryption model. A packet's accounted size is exactly
// the canonical size of the sealed payload; ids and version tags ride in the
// per-message envelope.
struct EncKeyPacket {
    GroupId group;
    std::uint64_t key_id = 0;
    std::uint32_t version = 0; // version being delivered
    Sealed sealed;             // asym (mailbox) or sym under an older version (GML)
};

struct EncKeyHistoryPacket {
    GroupId group;
    std::uint64_t key_id = 0;
    Sealed sealed; // (version, secret) list sealed under the current group key
};

using EncPacket = std::variant<EncKeyPacket, EncKeyHistoryPacket>;

struct EncMemberState {
    std::map<std::uint32_t, SymKey> group_keys; // version -> key material
    std::uint64_t gml_cursor = 0;
};

// Encryption-based enforcement: one symmetric group key per group, a fresh
// symmetric key per content, asymmetric distribution of the group key on join
// and per-member asymmetric redistribution on leave. Drive one group per
// substrate run; mailbox packets for other groups are discarded on sync.
class EncryptionGroup {
public:
    EncryptionGroup(World& w, GroupId g, UserId owner, GroupType gtype);

    ContentId publish(UserId author, SharedBytes content);
    void join(UserId u);
    void leave(UserId u);

    // Drains u's mailbox and reads the GML past u's cursor, refreshing her
    // local key state. Access checks assume the caller synced first.
    void sync(UserId u);

    // Deny is a value (nullopt); unknown content is an error.
    std::optional<SharedBytes> access(UserId u, ContentId c);
    AccessDecision decide(UserId u, ContentId c);

    GroupType gtype() const { return gtype_; }
    UserId owner() const { return owner_; }
    const std::set<UserId>& members() const { return members_; }
    std::uint32_t current_version() const { return current_.version; }
    const std::vector<SymKey>& key_history() const { return key_history_; }
    const EncMemberState& member_state(UserId u) const;
    const ContentStore& store() const { return store_; }

private:
    void deliver_key_asym(UserId to, const SymKey& key);
    void remember(UserId u, const SymKey& key);
    ContentStore::KeyLookup lookup_for(UserId u) const;

    World& w_;
    GroupId gid_;
    UserId owner_;
    GroupType gtype_;
    SymKey current_;
    std::vector<SymKey> key_history_; // every version ever distributed
    std::set<UserId> members_;
    ContentStore store_;
    std::map<UserId, EncMemberState> states_;
};

} // namespace dosn
