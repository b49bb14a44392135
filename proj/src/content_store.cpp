#include "dosn/content_store.hpp"

#include <cstring>

namespace dosn {

namespace {
Bytes secret_bytes(const SymKey& k) {
    return Bytes(k.secret.begin(), k.secret.end());
}

SymKey key_from(const KeyRef& ref, const SharedBytes& material) {
    SymKey k{ref.key_id, ref.version, {}};
    std::memcpy(k.secret.data(), material->data(), kSymKeyBytes);
    return k;
}
} // namespace

std::string ContentStore::blob_key(ContentId c, std::uint32_t gen) const {
    return "g" + std::to_string(gid_.v) + "/c" + std::to_string(c.v) + "/" + std::to_string(gen);
}

std::string ContentStore::keyblob_key(ContentId c, std::uint32_t gen) const {
    return "g" + std::to_string(gid_.v) + "/k" + std::to_string(c.v) + "/" + std::to_string(gen);
}

ContentId ContentStore::publish(World& w, UserId author, SharedBytes content, const SymKey& group_key) {
    ContentId c = w.next_content_id();
    auto& led = w.ops(author);

    SymKey content_key = w.crypto.gen_sym(led);
    Sealed sealed_content = w.crypto.seal_sym(content_key, std::move(content), led);
    Sealed sealed_key = w.crypto.seal_sym(group_key, secret_bytes(content_key), led);

    Record rec;
    rec.content_key_ref = ref_of(content_key);
    std::size_t content_size = sealed_content.canonical_size;
    w.net.dht_put(blob_key(c, 0), Parcel(std::move(sealed_content), content_size), {}, author);
    w.net.dht_put(keyblob_key(c, 0), Parcel(std::move(sealed_key), kSymKeyBytes), {}, author);
    recs_.emplace(c, rec);
    return c;
}

void ContentStore::rekey_all(World& w, UserId owner, const KeyLookup& owner_keys, const SymKey& new_group_key) {
    auto& led = w.ops(owner);
    for (auto& [c, rec] : recs_) {
        const auto& kb = w.net.dht_get(keyblob_key(c, rec.generation), owner).as<Sealed>();
        const SymKey* seal_key = owner_keys(kb.sym_ref);
        if (!seal_key) throw SimError("owner missing group key version");
        auto key_material = w.crypto.open_sym(*seal_key, kb, led);
        if (!key_material) throw SimError("owner failed to open content key");
        SymKey content_key = key_from(rec.content_key_ref, *key_material);

        const auto& cb = w.net.dht_get(blob_key(c, rec.generation), owner).as<Sealed>();
        auto plain = w.crypto.open_sym(content_key, cb, led);
        if (!plain) throw SimError("owner failed to open content");

        SymKey fresh = w.crypto.gen_sym(led);
        Sealed new_content = w.crypto.seal_sym(fresh, *plain, led);
        Sealed new_key = w.crypto.seal_sym(new_group_key, secret_bytes(fresh), led);

        rec.generation += 1;
        rec.content_key_ref = ref_of(fresh);
        std::size_t content_size = new_content.canonical_size;
        w.net.dht_put(blob_key(c, rec.generation), Parcel(std::move(new_content), content_size), {}, owner);
        w.net.dht_put(keyblob_key(c, rec.generation), Parcel(std::move(new_key), kSymKeyBytes), {}, owner);
    }
}

std::optional<SharedBytes> ContentStore::access(World& w, UserId u, ContentId c, const KeyLookup& user_keys) const {
    auto rec = recs_.find(c);
    if (rec == recs_.end()) throw SimError("unknown content");
    auto& led = w.ops(u);

    const auto& kb = w.net.dht_get(keyblob_key(c, rec->second.generation), u).as<Sealed>();
    const SymKey* group_key = user_keys(kb.sym_ref);
    if (!group_key) return std::nullopt;
    auto key_material = w.crypto.open_sym(*group_key, kb, led);
    if (!key_material) return std::nullopt;
    SymKey content_key = key_from(rec->second.content_key_ref, *key_material);

    const auto& cb = w.net.dht_get(blob_key(c, rec->second.generation), u).as<Sealed>();
    return w.crypto.open_sym(content_key, cb, led);
}

std::vector<ContentId> ContentStore::ids() const {
    std::vector<ContentId> out;
    out.reserve(recs_.size());
    for (const auto& [c, rec] : recs_) out.push_back(c);
    return out;
}

const Sealed& ContentStore::key_blob(const World& w, ContentId c) const {
    auto rec = recs_.find(c);
    if (rec == recs_.end()) throw SimError("unknown content");
    return w.net.dht_peek(keyblob_key(c, rec->second.generation)).as<Sealed>();
}

const Sealed& ContentStore::blob(const World& w, ContentId c) const {
    auto rec = recs_.find(c);
    if (rec == recs_.end()) throw SimError("unknown content");
    return w.net.dht_peek(blob_key(c, rec->second.generation)).as<Sealed>();
}

} // namespace dosn
