#pragma once

#include <optional>
#include <vector>

#include "dosn/ids.hpp"

namespace dosn {

// Group taxonomy cells. G1 (backward secrecy on both join and leave) is not
// modelled; no deployed network uses it.
enum class GroupType { G2, G3, G4 };

struct SecrecyFlags {
    bool join_bs;  // a new member cannot read contents published before her join
    bool leave_bs; // a removed member loses access to contents published before her removal
};

SecrecyFlags secrecy_flags(GroupType gtype);

const char* to_string(GroupType gtype);
std::optional<GroupType> parse_group_type(const std::string& s);

enum class AccessDecision { Permit, Deny };

struct GroupEvent {
    enum class Kind { Create, Join, Leave, Publish };
    Kind kind;
    std::uint64_t seq = 0;
    UserId user;        // owner / joiner / leaver / author
    ContentId content;  // Publish only
};

// Ordered event log for one group. Appends validate the event preconditions,
// so every prefix of a constructed history is itself valid. This is the
// ground truth the per-model access checks are tested against.
class GroupHistory {
public:
    GroupHistory(GroupId group, GroupType gtype, UserId owner, std::uint64_t seq = 0);

    void join(std::uint64_t seq, UserId u);
    void leave(std::uint64_t seq, UserId u);
    void publish(std::uint64_t seq, UserId author, ContentId c);

    GroupId group() const { return group_; }
    GroupType gtype() const { return gtype_; }
    UserId owner() const { return owner_; }
    const std::vector<GroupEvent>& events() const { return events_; }
    std::uint64_t last_seq() const { return events_.back().seq; }

    // True iff the event prefix with seq <= t leaves u a member.
    bool is_member(UserId u, std::uint64_t t) const;

    // System-mediated access under the group-type semantics:
    //   G2: permit iff a membership interval of u contains the publish time.
    //   G3: permit iff u is a member at t_query.
    //   G4: permit iff u was a member at any point in [t_pub, t_query].
    // The author gets no special treatment.
    AccessDecision oracle_access(UserId u, ContentId c, std::uint64_t t_query) const;

private:
    void append(GroupEvent ev);

    GroupId group_;
    GroupType gtype_;
    UserId owner_;
    std::vector<GroupEvent> events_;
};

} // namespace dosn
