#pragma once

#include <cstdint>
#include <compare>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace dosn {

// Opaque 64-bit identifiers. Id 0 is reserved for "nobody".
struct UserId {
    std::uint64_t v = 0;
    auto operator<=>(const UserId&) const = default;
};

struct GroupId {
    std::uint64_t v = 0;
    auto operator<=>(const GroupId&) const = default;
};

struct ContentId {
    std::uint64_t v = 0;
    auto operator<=>(const ContentId&) const = default;
};

inline constexpr UserId kNobody{0};

using Bytes = std::vector<std::uint8_t>;

// Immutable payload buffer. Sealing/unsealing in the cost-model provider is
// reference counted, so 100KB contents are never copied per operation.
using SharedBytes = std::shared_ptr<const Bytes>;

inline SharedBytes make_shared_bytes(Bytes b) {
    return std::make_shared<const Bytes>(std::move(b));
}

class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dosn

template <> struct std::hash<dosn::UserId> {
    std::size_t operator()(const dosn::UserId& u) const noexcept {
        return std::hash<std::uint64_t>{}(u.v);
    }
};
template <> struct std::hash<dosn::GroupId> {
    std::size_t operator()(const dosn::GroupId& g) const noexcept {
        return std::hash<std::uint64_t>{}(g.v);
    }
};
template <> struct std::hash<dosn::ContentId> {
    std::size_t operator()(const dosn::ContentId& c) const noexcept {
        return std::hash<std::uint64_t>{}(c.v);
    }
};
