#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dosn/core.hpp"
#include "dosn/world.hpp"

namespace dosn {

// Identity-list privacy rule for one content: the users allowed to read it.
// Serialized size is 64 bytes of overhead plus 16 bytes per listed identity;
// that size drives all policy-update byte accounting.
struct PolicyRule {
    ContentId content;
    std::set<UserId> authorized;

    std::size_t serialized_size() const { return 64 + 16 * authorized.size(); }
};

// Allocation-based enforcement: contents stay unencrypted; privacy holds
// because replicas are placed only on authorized users' peers and every read
// is gated by the content's identity rule. No crypto ledger is ever touched.
class AllocationGroup {
public:
    AllocationGroup(World& w, GroupId g, UserId owner, GroupType gtype,
                    int replica_count = 2, std::uint64_t seed = 1);

    ContentId publish(UserId author, SharedBytes content);
    void join(UserId u);
    void leave(UserId u);

    AccessDecision evaluate(UserId u, ContentId c) const;
    std::optional<SharedBytes> fetch(UserId u, ContentId c); // evaluate, then read the blob

    GroupType gtype() const { return gtype_; }
    UserId owner() const { return owner_; }
    const std::set<UserId>& members() const { return members_; }
    const PolicyRule& rule(ContentId c) const;
    std::size_t rule_count() const { return rules_.size(); }
    std::set<UserId> replicas(ContentId c) const;
    std::vector<ContentId> contents() const;

    // One line per rule: "content_id: id1,id2,...". Debug/inspection format.
    std::string export_rules() const;

private:
    std::string blob_key(ContentId c) const;
    std::string rule_key(ContentId c, std::uint32_t rev) const;
    void push_rule_update(ContentId c);
    std::vector<UserId> pick_replicas(ContentId c) const;

    World& w_;
    GroupId gid_;
    UserId owner_;
    GroupType gtype_;
    int replica_count_;
    std::uint64_t seed_;
    std::set<UserId> members_;
    std::map<ContentId, PolicyRule> rules_;
    std::map<ContentId, std::uint32_t> rule_rev_;
};

} // namespace dosn
