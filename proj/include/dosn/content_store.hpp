#pragma once

#include <functional>
#include <map>
#include <optional>

#include "dosn/world.hpp"

namespace dosn {

// Per-content DHT records shared by the two cryptographic models: the content
// sealed under a per-content symmetric key, plus that key sealed under the
// group key current at publish (or re-key) time.
class ContentStore {
public:
    struct Record {
        std::uint32_t generation = 0; // bumped by each re-key
        KeyRef content_key_ref;
    };

    // Resolves the group key that seals a given key blob: the owner resolves
    // from her full history, members from their synced state. Returns nullptr
    // when the resolver does not hold that version.
    using KeyLookup = std::function<const SymKey*(const KeyRef&)>;

    explicit ContentStore(GroupId g) : gid_(g) {}

    ContentId publish(World& w, UserId author, SharedBytes content, const SymKey& group_key);

    // Backward secrecy on leave: every content gets a fresh content key,
    // re-sealed under the latest group key and re-stored.
    void rekey_all(World& w, UserId owner, const KeyLookup& owner_keys, const SymKey& new_group_key);

    std::optional<SharedBytes> access(World& w, UserId u, ContentId c, const KeyLookup& user_keys) const;

    std::size_t count() const { return recs_.size(); }
    std::vector<ContentId> ids() const;
    const Sealed& key_blob(const World& w, ContentId c) const;
    const Sealed& blob(const World& w, ContentId c) const;

private:
    std::string blob_key(ContentId c, std::uint32_t gen) const;
    std::string keyblob_key(ContentId c, std::uint32_t gen) const;

    GroupId gid_;
    std::map<ContentId, Record> recs_;
};

} // namespace dosn
