#pragma once

#include <map>
#include <set>

#include "dosn/crypto.hpp"
#include "dosn/netsim.hpp"

namespace dosn {

// One simulation run: the substrate, the crypto service, and the per-principal
// operation ledgers. Models borrow a World and never outlive it.
class World {
public:
    explicit World(CryptoBackendKind kind = CryptoBackendKind::Model,
                   CryptoCostParams params = CryptoCostParams::aes_cbc_rsa2048())
        : crypto(kind, params) {}

    CryptoService crypto;
    Substrate net;

    OpLedger& ops(UserId u) { return ops_[u]; }
    TrafficLedger& traffic(UserId u) { return net.traffic(u); }

    double modeled_time(UserId u) { return ops_[u].modeled_time(crypto.cost()); }

    void reset_ledgers() {
        for (auto& [u, led] : ops_) led = OpLedger{};
        net.reset_traffic();
    }

    ContentId next_content_id() { return ContentId{next_content_++}; }

    void register_group(GroupId g) {
        if (!groups_.insert(g).second) throw SimError("group exists");
    }

private:
    std::map<UserId, OpLedger> ops_;
    std::set<GroupId> groups_;
    std::uint64_t next_content_ = 1;
};

} // namespace dosn
