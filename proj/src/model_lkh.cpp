#include "dosn/model_lkh.hpp"

#include <cstring>
#include <deque>
#include <limits>

namespace dosn {

namespace {

Bytes secret_bytes(const SymKey& k) {
    return Bytes(k.secret.begin(), k.secret.end());
}

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

// --------------------------------------------------------------------------
// KeyTree

std::size_t KeyTree::Node::depth() const {
    std::size_t d = 0;
    for (const Node* n = parent; n; n = n->parent) ++d;
    return d;
}

KeyTree::KeyTree(int degree) : degree_(degree) {
    if (degree < 2) throw SimError("degree must be at least 2");
    root_ = std::make_unique<Node>();
    root_->node_id = alloc_node_id();
}

KeyTree::Node* KeyTree::leaf_of(UserId u) {
    auto it = leaves_.find(u);
    if (it == leaves_.end()) throw SimError("not a member");
    return it->second;
}

std::size_t KeyTree::height() const {
    std::size_t h = 0;
    for (const auto& [u, n] : leaves_) h = std::max(h, n->depth());
    return h;
}

std::size_t KeyTree::max_arity() const {
    std::size_t m = 0;
    std::deque<const Node*> q{root_.get()};
    while (!q.empty()) {
        const Node* n = q.front();
        q.pop_front();
        m = std::max(m, n->children.size());
        for (const auto& ch : n->children) q.push_back(ch.get());
    }
    return m;
}

bool KeyTree::has_vacant_slot() const {
    std::deque<const Node*> q{root_.get()};
    while (!q.empty()) {
        const Node* n = q.front();
        q.pop_front();
        if (n->is_slot()) return true;
        for (const auto& ch : n->children) q.push_back(ch.get());
    }
    return false;
}

KeyTree::Spot KeyTree::find_spot() {
    Spot best;
    std::size_t best_leaf_depth = std::numeric_limits<std::size_t>::max();
    std::deque<std::pair<Node*, std::size_t>> q;
    q.emplace_back(root_.get(), 0);
    while (!q.empty()) {
        auto [n, d] = q.front();
        q.pop_front();
        if (best_leaf_depth <= d) break; // BFS depth is non-decreasing
        if (n->is_slot()) {
            best = {n, nullptr};
            best_leaf_depth = d;
            continue;
        }
        if (n->is_member_leaf()) continue;
        if (n->children.size() < static_cast<std::size_t>(degree_) && d + 1 < best_leaf_depth) {
            best = {nullptr, n};
            best_leaf_depth = d + 1;
        }
        for (auto& ch : n->children) q.emplace_back(ch.get(), d + 1);
    }
    return best;
}

KeyTree::Node* KeyTree::split_for_growth(std::uint64_t new_node_id) {
    Node* leaf = nullptr;
    std::deque<Node*> q{root_.get()};
    while (!q.empty()) {
        Node* n = q.front();
        q.pop_front();
        if (n->is_member_leaf()) {
            leaf = n;
            break;
        }
        for (auto& ch : n->children) q.push_back(ch.get());
    }
    if (!leaf) throw SimError("cannot grow an empty tree");

    Node* parent = leaf->parent;
    for (auto& slot : parent->children) {
        if (slot.get() != leaf) continue;
        auto moved = std::move(slot);
        auto internal = std::make_unique<Node>();
        internal->node_id = new_node_id;
        internal->parent = parent;
        moved->parent = internal.get();
        internal->children.push_back(std::move(moved));
        slot = std::move(internal);
        return slot.get();
    }
    throw SimError("corrupt tree: leaf missing from parent");
}

KeyTree::Node* KeyTree::attach_leaf(Node* parent, std::uint64_t new_node_id, UserId member) {
    if (parent->children.size() >= static_cast<std::size_t>(degree_))
        throw SimError("node is full");
    auto leaf = std::make_unique<Node>();
    leaf->node_id = new_node_id;
    leaf->parent = parent;
    leaf->member = member;
    parent->children.push_back(std::move(leaf));
    Node* n = parent->children.back().get();
    leaves_[member] = n;
    return n;
}

KeyTree::Node* KeyTree::rebind_slot(Node* slot, UserId member) {
    if (!slot->is_slot()) throw SimError("not a vacant slot");
    slot->vacant = false;
    slot->member = member;
    leaves_[member] = slot;
    return slot;
}

void KeyTree::vacate_leaf(UserId u) {
    Node* n = leaf_of(u);
    n->member = kNobody;
    n->vacant = true;
    leaves_.erase(u);
}

// --------------------------------------------------------------------------
// LkhGroup

LkhGroup::LkhGroup(World& w, GroupId g, UserId owner, GroupType gtype, int degree)
    : w_(w), gid_(g), owner_(owner), gtype_(gtype), tree_(degree), store_(g) {
    w_.register_group(g);
    tree_.root().key = w_.crypto.gen_sym(w_.ops(owner_));
    root_history_.push_back(tree_.root().key);
}

SymKey LkhGroup::fresh_node_key(KeyTree::Node& n) {
    n.key = w_.crypto.gen_sym(w_.ops(owner_));
    return n.key;
}

void LkhGroup::rotate_node(KeyTree::Node& n) {
    n.key = w_.crypto.rotate_sym(n.key, w_.ops(owner_));
}

void LkhGroup::push_root_version() {
    root_history_.push_back(tree_.root().key);
}

std::vector<KeyTree::Node*> LkhGroup::path_to_root(KeyTree::Node* from) const {
    std::vector<KeyTree::Node*> path;
    for (KeyTree::Node* n = from; n; n = n->parent) path.push_back(n);
    return path;
}

ContentStore::KeyLookup LkhGroup::owner_lookup() const {
    return [this](const KeyRef& ref) -> const SymKey* {
        for (const auto& k : root_history_)
            if (ref_of(k) == ref) return &k;
        return nullptr;
    };
}

ContentStore::KeyLookup LkhGroup::member_lookup(UserId u) const {
    return [this, u](const KeyRef& ref) -> const SymKey* {
        auto st = states_.find(u);
        if (st == states_.end()) return nullptr;
        auto kit = st->second.keys.find(ref.key_id);
        if (kit == st->second.keys.end()) return nullptr;
        auto vit = kit->second.find(ref.version);
        return vit == kit->second.end() ? nullptr : &vit->second;
    };
}

ContentId LkhGroup::publish(UserId author, SharedBytes content) {
    if (!is_member(author)) throw SimError("not a member");
    return store_.publish(w_, author, std::move(content), root_key());
}

void LkhGroup::send_new_internal_key(KeyTree::Node& internal, const SymKey& moved_leaf_key, UserId moved) {
    RekeyMessage msg{gid_, {}};
    Sealed s = w_.crypto.seal_sym(moved_leaf_key, secret_bytes(internal.key), w_.ops(owner_));
    msg.entries.push_back({RekeyEntry::Kind::NodeKey, internal.key.key_id, internal.key.version, std::move(s)});
    std::size_t sz = msg.accounted();
    w_.net.mailbox_append(moved, Parcel(std::move(msg), sz), owner_);
}

void LkhGroup::join(UserId u) {
    if (is_member(u)) throw SimError("already member");
    auto& led = w_.ops(owner_);
    const bool with_bs = secrecy_flags(gtype_).join_bs;

    // Leaf placement: reuse the leftmost vacant slot at minimal depth, else
    // fill a child gap, else grow a level by a local split.
    KeyTree::Node* leaf = nullptr;
    KeyTree::Node* fresh_internal = nullptr;
    UserId moved = kNobody;
    SymKey moved_leaf_key;
    auto spot = tree_.find_spot();
    if (spot.reuse) {
        leaf = tree_.rebind_slot(spot.reuse, u);
        rotate_node(*leaf); // never hand a reused slot's key material to a new member
    } else if (spot.append) {
        leaf = tree_.attach_leaf(spot.append, tree_.alloc_node_id(), u);
        fresh_node_key(*leaf);
    } else {
        fresh_internal = tree_.split_for_growth(tree_.alloc_node_id());
        moved = fresh_internal->children.front()->member;
        moved_leaf_key = fresh_internal->children.front()->key;
        fresh_node_key(*fresh_internal);
        leaf = tree_.attach_leaf(fresh_internal, tree_.alloc_node_id(), u);
        fresh_node_key(*leaf);
    }

    auto path = path_to_root(leaf->parent);

    if (with_bs) {
        // G2: refresh every pre-existing key on the path; existing members
        // recover each new version from its previous one via the GML.
        RekeyMessage member_msg{gid_, {}};
        for (KeyTree::Node* node : path) {
            if (node == fresh_internal) continue;
            SymKey prev = node->key;
            rotate_node(*node);
            Sealed s = w_.crypto.seal_sym(prev, secret_bytes(node->key), led);
            member_msg.entries.push_back(
                {RekeyEntry::Kind::NodeKey, node->key.key_id, node->key.version, std::move(s)});
        }
        push_root_version();
        std::size_t sz = member_msg.accounted();
        w_.net.gml_append(gid_, Parcel(std::move(member_msg), sz), owner_);
    }

    // The joiner's bundle: her leaf key asymmetrically sealed, then the path
    // keys (and, for G4, the old root versions) under the leaf key.
    RekeyMessage bundle{gid_, {}};
    {
        Sealed s = w_.crypto.seal_asym(u, secret_bytes(leaf->key), led);
        bundle.entries.push_back({RekeyEntry::Kind::NodeKey, leaf->key.key_id, leaf->key.version, std::move(s)});
    }
    for (KeyTree::Node* node : path) {
        Sealed s = w_.crypto.seal_sym(leaf->key, secret_bytes(node->key), led);
        bundle.entries.push_back({RekeyEntry::Kind::NodeKey, node->key.key_id, node->key.version, std::move(s)});
    }
    if (!with_bs && gtype_ == GroupType::G4 && root_history_.size() > 1) {
        std::vector<SymKey> old(root_history_.begin(), root_history_.end() - 1);
        Sealed s = w_.crypto.seal_sym(leaf->key, make_shared_bytes(serialize_key_list(old)), led);
        bundle.entries.push_back({RekeyEntry::Kind::RootHistory, root_key().key_id, 0, std::move(s)});
    }
    std::size_t sz = bundle.accounted();
    w_.net.mailbox_append(u, Parcel(std::move(bundle), sz), owner_);

    if (fresh_internal) send_new_internal_key(*fresh_internal, moved_leaf_key, moved);

    // First contact starts past the backlog; a rejoining member keeps her
    // cursor so entries from her earlier membership stay reachable.
    if (!states_.count(u)) states_[u].gml_cursor = w_.net.gml_last_seq(gid_);
}

void LkhGroup::leave(UserId u) {
    if (u == owner_) throw SimError("owner cannot leave");
    if (!tree_.has_member(u)) throw SimError("not a member");
    auto& led = w_.ops(owner_);

    KeyTree::Node* leaf = tree_.leaf_of(u);
    tree_.vacate_leaf(u);
    rotate_node(*leaf); // retire the departed member's slot key

    // Refresh the path bottom-up; each refreshed key is sealed under each of
    // its children's current keys, so every parent rides on the latest child
    // versions.
    RekeyMessage msg{gid_, {}};
    for (KeyTree::Node* node : path_to_root(leaf->parent)) {
        rotate_node(*node);
        for (const auto& ch : node->children) {
            Sealed s = w_.crypto.seal_sym(ch->key, secret_bytes(node->key), led);
            msg.entries.push_back(
                {RekeyEntry::Kind::NodeKey, node->key.key_id, node->key.version, std::move(s)});
        }
    }
    push_root_version();
    std::size_t sz = msg.accounted();
    w_.net.gml_append(gid_, Parcel(std::move(msg), sz), owner_);

    if (secrecy_flags(gtype_).leave_bs)
        store_.rekey_all(w_, owner_, owner_lookup(), root_key());
}

void LkhGroup::sync(UserId u) {
    auto& st = states_[u];
    auto& led = w_.ops(u);

    auto cached_for = [&](const KeyRef& ref) -> const SymKey* {
        auto kit = st.keys.find(ref.key_id);
        if (kit == st.keys.end()) return nullptr;
        auto vit = kit->second.find(ref.version);
        return vit == kit->second.end() ? nullptr : &vit->second;
    };

    auto process = [&](const RekeyEntry& e, bool from_mailbox) {
        if (e.kind == RekeyEntry::Kind::RootHistory) {
            const SymKey* sealing = cached_for(e.sealed.sym_ref);
            if (!sealing) return;
            auto listing = w_.crypto.open_sym(*sealing, e.sealed, led);
            if (!listing) return;
            for (const auto& [version, secret] : parse_key_list(**listing))
                st.keys[e.key_id][version] = SymKey{e.key_id, version, secret};
            return;
        }
        std::optional<SharedBytes> material;
        if (e.sealed.scheme == Sealed::Scheme::Asym) {
            if (!from_mailbox) return;
            material = w_.crypto.open_asym(u, e.sealed, led);
        } else {
            const SymKey* sealing = cached_for(e.sealed.sym_ref);
            if (!sealing) return; // not on this member's path
            material = w_.crypto.open_sym(*sealing, e.sealed, led);
        }
        if (!material) return;
        SymKey k{e.key_id, e.new_version, {}};
        std::memcpy(k.secret.data(), (*material)->data(), kSymKeyBytes);
        st.keys[e.key_id][e.new_version] = k;
    };

    for (const Parcel& p : w_.net.mailbox_drain(u)) {
        const auto& msg = p.as<RekeyMessage>();
        if (msg.group != gid_) continue;
        for (const auto& e : msg.entries) process(e, true);
    }
    for (const GmlEntry* entry : w_.net.gml_read_since(gid_, st.gml_cursor, u)) {
        st.gml_cursor = entry->seq;
        const auto& msg = entry->body.as<RekeyMessage>();
        if (msg.group != gid_) continue;
        for (const auto& e : msg.entries) process(e, false);
    }
}

std::optional<SharedBytes> LkhGroup::access(UserId u, ContentId c) {
    if (u == owner_) return store_.access(w_, u, c, owner_lookup());
    return store_.access(w_, u, c, member_lookup(u));
}

AccessDecision LkhGroup::decide(UserId u, ContentId c) {
    return access(u, c) ? AccessDecision::Permit : AccessDecision::Deny;
}

std::set<UserId> LkhGroup::members() const {
    std::set<UserId> out{owner_};
    std::deque<const KeyTree::Node*> q{&tree_.root()};
    while (!q.empty()) {
        const auto* n = q.front();
        q.pop_front();
        if (n->is_member_leaf()) out.insert(n->member);
        for (const auto& ch : n->children) q.push_back(ch.get());
    }
    return out;
}

const LkhMemberState& LkhGroup::member_state(UserId u) const {
    auto it = states_.find(u);
    if (it == states_.end()) throw SimError("no state for user");
    return it->second;
}

} // namespace dosn
