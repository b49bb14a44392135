#include "dosn/model_allocation.hpp"

#include <algorithm>
#include <sstream>

#include "dosn/rng.hpp"

namespace dosn {

namespace {
// Rule updates are charged by serialized size but carried as stubs; the
// authoritative policy is the group's (one policy per group, not one per
// replica peer).
struct RuleStub {
    ContentId content;
};
} // namespace

AllocationGroup::AllocationGroup(World& w, GroupId g, UserId owner, GroupType gtype,
                                 int replica_count, std::uint64_t seed)
    : w_(w), gid_(g), owner_(owner), gtype_(gtype), replica_count_(replica_count), seed_(seed) {
    if (replica_count < 1) throw SimError("replica count must be at least 1");
    w_.register_group(g);
    members_.insert(owner_);
}

std::string AllocationGroup::blob_key(ContentId c) const {
    return "g" + std::to_string(gid_.v) + "/c" + std::to_string(c.v);
}

std::string AllocationGroup::rule_key(ContentId c, std::uint32_t rev) const {
    return "g" + std::to_string(gid_.v) + "/r" + std::to_string(c.v) + "/" + std::to_string(rev);
}

std::vector<UserId> AllocationGroup::pick_replicas(ContentId c) const {
    const auto& auth = rules_.at(c).authorized;
    std::vector<UserId> pool(auth.begin(), auth.end());
    std::size_t k = std::min<std::size_t>(replica_count_, pool.size());
    SplitMix64 rng(seed_ ^ (c.v * 0x9e3779b97f4a7c15ULL));
    // partial Fisher-Yates
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.bounded(pool.size() - i)]);
    pool.resize(k);
    return pool;
}

void AllocationGroup::push_rule_update(ContentId c) {
    std::uint32_t rev = ++rule_rev_[c];
    std::size_t sz = rules_.at(c).serialized_size();
    w_.net.dht_put(rule_key(c, rev), Parcel(RuleStub{c}, sz), {}, owner_);
}

ContentId AllocationGroup::publish(UserId author, SharedBytes content) {
    if (!members_.count(author)) throw SimError("not a member");
    ContentId c = w_.next_content_id();

    PolicyRule rule{c, members_};
    rules_.emplace(c, std::move(rule));
    rule_rev_[c] = 0;

    std::size_t content_size = content->size();
    auto picked = pick_replicas(c);
    w_.net.dht_put(blob_key(c), Parcel(std::move(content), content_size),
                   std::set<UserId>(picked.begin(), picked.end()), author);
    // the new rule travels with the content
    w_.net.dht_put(rule_key(c, 0), Parcel(RuleStub{c}, rules_.at(c).serialized_size()), {}, author);
    return c;
}

void AllocationGroup::join(UserId u) {
    if (members_.count(u)) throw SimError("already member");
    members_.insert(u);
    if (!secrecy_flags(gtype_).join_bs) {
        // G3/G4: old contents open up to the joiner, one rule rewrite each.
        for (auto& [c, rule] : rules_) {
            rule.authorized.insert(u);
            push_rule_update(c);
        }
    }
}

void AllocationGroup::leave(UserId u) {
    if (u == owner_) throw SimError("owner cannot leave");
    if (!members_.count(u)) throw SimError("not a member");
    members_.erase(u);
    if (secrecy_flags(gtype_).leave_bs) {
        // G3: revoke on every rule, then repair any replica the leaver held.
        for (auto& [c, rule] : rules_) {
            rule.authorized.erase(u);
            push_rule_update(c);
            const std::string key = blob_key(c);
            const auto& ref = w_.net.dht_ref(key);
            if (ref.replicas.count(u)) {
                w_.net.dht_drop_replica(key, u);
                for (UserId candidate : rule.authorized) {
                    if (!w_.net.dht_ref(key).replicas.count(candidate)) {
                        w_.net.dht_replicate(key, candidate, owner_);
                        break;
                    }
                }
            }
        }
    }
}

AccessDecision AllocationGroup::evaluate(UserId u, ContentId c) const {
    auto it = rules_.find(c);
    if (it == rules_.end()) throw SimError("unknown content");
    return it->second.authorized.count(u) ? AccessDecision::Permit : AccessDecision::Deny;
}

std::optional<SharedBytes> AllocationGroup::fetch(UserId u, ContentId c) {
    if (evaluate(u, c) == AccessDecision::Deny) return std::nullopt;
    return w_.net.dht_get(blob_key(c), u).as<SharedBytes>();
}

const PolicyRule& AllocationGroup::rule(ContentId c) const {
    auto it = rules_.find(c);
    if (it == rules_.end()) throw SimError("unknown content");
    return it->second;
}

std::set<UserId> AllocationGroup::replicas(ContentId c) const {
    if (!rules_.count(c)) throw SimError("unknown content");
    return w_.net.dht_ref(blob_key(c)).replicas;
}

std::vector<ContentId> AllocationGroup::contents() const {
    std::vector<ContentId> out;
    out.reserve(rules_.size());
    for (const auto& [c, rule] : rules_) out.push_back(c);
    return out;
}

std::string AllocationGroup::export_rules() const {
    std::ostringstream out;
    for (const auto& [c, rule] : rules_) {
        out << c.v << ":";
        bool first = true;
        for (UserId u : rule.authorized) {
            out << (first ? " " : ",") << u.v;
            first = false;
        }
        out << "\n";
    }
    return out.str();
}

} // namespace dosn
