#include "dosn/core.hpp"

namespace dosn {

SecrecyFlags secrecy_flags(GroupType gtype) {
    switch (gtype) {
    case GroupType::G2: return {true, false};
    case GroupType::G3: return {false, true};
    case GroupType::G4: return {false, false};
    }
    throw SimError("unknown group type");
}

const char* to_string(GroupType gtype) {
    switch (gtype) {
    case GroupType::G2: return "G2";
    case GroupType::G3: return "G3";
    case GroupType::G4: return "G4";
    }
    return "?";
}

std::optional<GroupType> parse_group_type(const std::string& s) {
    if (s == "G2" || s == "g2") return GroupType::G2;
    if (s == "G3" || s == "g3") return GroupType::G3;
    if (s == "G4" || s == "g4") return GroupType::G4;
    return std::nullopt;
}

GroupHistory::GroupHistory(GroupId group, GroupType gtype, UserId owner, std::uint64_t seq)
    : group_(group), gtype_(gtype), owner_(owner) {
    if (owner == kNobody) throw SimError("owner cannot be nobody");
    events_.push_back({GroupEvent::Kind::Create, seq, owner, {}});
}

void GroupHistory::append(GroupEvent ev) {
    if (ev.seq <= events_.back().seq)
        throw SimError("event seq must be strictly increasing");
    events_.push_back(ev);
}

void GroupHistory::join(std::uint64_t seq, UserId u) {
    if (is_member(u, last_seq())) throw SimError("already member");
    append({GroupEvent::Kind::Join, seq, u, {}});
}

void GroupHistory::leave(std::uint64_t seq, UserId u) {
    if (u == owner_) throw SimError("owner cannot leave");
    if (!is_member(u, last_seq())) throw SimError("not a member");
    append({GroupEvent::Kind::Leave, seq, u, {}});
}

void GroupHistory::publish(std::uint64_t seq, UserId author, ContentId c) {
    if (!is_member(author, last_seq())) throw SimError("not a member");
    for (const auto& ev : events_)
        if (ev.kind == GroupEvent::Kind::Publish && ev.content == c)
            throw SimError("content already published");
    append({GroupEvent::Kind::Publish, seq, author, c});
}

bool GroupHistory::is_member(UserId u, std::uint64_t t) const {
    if (t > last_seq()) throw SimError("time out of range");
    bool member = false;
    for (const auto& ev : events_) {
        if (ev.seq > t) break;
        switch (ev.kind) {
        case GroupEvent::Kind::Create:
        case GroupEvent::Kind::Join:
            if (ev.user == u) member = true;
            break;
        case GroupEvent::Kind::Leave:
            if (ev.user == u) member = false;
            break;
        case GroupEvent::Kind::Publish:
            break;
        }
    }
    return member;
}

AccessDecision GroupHistory::oracle_access(UserId u, ContentId c, std::uint64_t t_query) const {
    if (t_query > last_seq()) throw SimError("time out of range");
    std::optional<std::uint64_t> t_pub;
    for (const auto& ev : events_) {
        if (ev.seq > t_query) break;
        if (ev.kind == GroupEvent::Kind::Publish && ev.content == c) {
            t_pub = ev.seq;
            break;
        }
    }
    if (!t_pub) throw SimError("unknown content");

    switch (gtype_) {
    case GroupType::G2:
        // Member at publish time keeps the content; later joins never see it.
        return is_member(u, *t_pub) ? AccessDecision::Permit : AccessDecision::Deny;
    case GroupType::G3:
        return is_member(u, t_query) ? AccessDecision::Permit : AccessDecision::Deny;
    case GroupType::G4: {
        // Any overlap of u's membership with [t_pub, t_query] grants access.
        if (is_member(u, *t_pub)) return AccessDecision::Permit;
        for (const auto& ev : events_) {
            if (ev.seq > t_query) break;
            if (ev.seq > *t_pub && ev.user == u &&
                (ev.kind == GroupEvent::Kind::Join || ev.kind == GroupEvent::Kind::Create))
                return AccessDecision::Permit;
        }
        return AccessDecision::Deny;
    }
    }
    throw SimError("unknown group type");
}

} // namespace dosn
