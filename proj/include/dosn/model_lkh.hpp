#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "dosn/content_store.hpp"
#include "dosn/core.hpp"
#include "dosn/world.hpp"

namespace dosn {

// One refreshed key on the wire: 8B key id + 8B version + the sealed key
// (32B canonical, 256B when asymmetrically sealed to a joiner).
struct RekeyEntry {
    enum class Kind { NodeKey, RootHistory };
    Kind kind = Kind::NodeKey;
    std::uint64_t key_id = 0;
    std::uint32_t new_version = 0;
    Sealed sealed;

    std::size_t accounted() const { return 16 + sealed.canonical_size; }
};

struct RekeyMessage {
    GroupId group;
    std::vector<RekeyEntry> entries;

    std::size_t accounted() const {
        std::size_t s = 0;
        for (const auto& e : entries) s += e.accounted();
        return s;
    }
};

struct LkhMemberState {
    // key_id -> version -> key; holds the member's leaf, her path keys, and
    // every root version she is entitled to.
    std::map<std::uint64_t, std::map<std::uint32_t, SymKey>> keys;
    std::uint64_t gml_cursor = 0;
};

// Degree-d logical key hierarchy owned by the group owner. Leaves are bound
// to members; a removed member's position stays behind as a keyed vacant slot
// that later joins reuse. No rebalancing is ever performed; when the tree is
// full a new level grows by splitting the shallowest leftmost leaf.
class KeyTree {
public:
    struct Node {
        std::uint64_t node_id = 0;
        SymKey key;
        Node* parent = nullptr;
        std::vector<std::unique_ptr<Node>> children;
        UserId member;      // member leaf when != nobody
        bool vacant = false;

        bool is_member_leaf() const { return member != kNobody; }
        bool is_slot() const { return vacant; }
        bool is_internal() const { return !children.empty(); }
        std::size_t depth() const;
    };

    explicit KeyTree(int degree);

    int degree() const { return degree_; }
    Node& root() { return *root_; }
    const Node& root() const { return *root_; }
    bool has_member(UserId u) const { return leaves_.count(u) > 0; }
    Node* leaf_of(UserId u);
    std::size_t member_count() const { return leaves_.size(); }
    std::size_t height() const;        // max member-leaf depth, 0 for root-only
    std::size_t max_arity() const;     // widest node, tests
    bool has_vacant_slot() const;

    // Placement of a new member leaf: leftmost reusable slot or child gap at
    // minimal leaf depth; nullptr when the tree is full and must grow.
    struct Spot {
        Node* reuse = nullptr;  // vacant slot to rebind
        Node* append = nullptr; // internal node (or root) with a child gap
    };
    Spot find_spot();

    // Grows a level: the shallowest leftmost member leaf moves one level down
    // under a fresh internal node. Returns that internal node; the moved
    // member must be sent its key.
    Node* split_for_growth(std::uint64_t new_node_id);

    Node* attach_leaf(Node* parent, std::uint64_t new_node_id, UserId member);
    Node* rebind_slot(Node* slot, UserId member);
    void vacate_leaf(UserId u);

    std::uint64_t alloc_node_id() { return next_node_id_++; }

private:
    int degree_;
    std::unique_ptr<Node> root_;
    std::map<UserId, Node*> leaves_;
    std::uint64_t next_node_id_ = 1;
};

// LKH-based enforcement: the root key is the group key; join and leave touch
// only one root-to-leaf path. Rekey material reaches the joiner via her
// mailbox and existing members via the Group Message List.
class LkhGroup {
public:
    LkhGroup(World& w, GroupId g, UserId owner, GroupType gtype, int degree);

    ContentId publish(UserId author, SharedBytes content);
    void join(UserId u);
    void leave(UserId u);
    void sync(UserId u); // drain mailbox + process GML rekey chain

    std::optional<SharedBytes> access(UserId u, ContentId c);
    AccessDecision decide(UserId u, ContentId c);

    GroupType gtype() const { return gtype_; }
    UserId owner() const { return owner_; }
    int degree() const { return tree_.degree(); }
    const KeyTree& tree() const { return tree_; }
    std::set<UserId> members() const;
    bool is_member(UserId u) const { return u == owner_ || tree_.has_member(u); }
    const std::vector<SymKey>& root_history() const { return root_history_; }
    const LkhMemberState& member_state(UserId u) const;
    const ContentStore& store() const { return store_; }

private:
    SymKey fresh_node_key(KeyTree::Node& n);
    void rotate_node(KeyTree::Node& n);
    const SymKey& root_key() const { return tree_.root().key; }
    void push_root_version();
    ContentStore::KeyLookup owner_lookup() const;
    ContentStore::KeyLookup member_lookup(UserId u) const;
    std::vector<KeyTree::Node*> path_to_root(KeyTree::Node* from) const;
    void send_new_internal_key(KeyTree::Node& internal, const SymKey& moved_leaf_key, UserId moved);

    World& w_;
    GroupId gid_;
    UserId owner_;
    GroupType gtype_;
    KeyTree tree_;
    std::vector<SymKey> root_history_;
    ContentStore store_;
    std::map<UserId, LkhMemberState> states_;
};

} // namespace dosn
