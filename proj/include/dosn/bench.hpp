#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dosn/core.hpp"
#include "dosn/crypto.hpp"

namespace dosn {

enum class ModelKind { Encryption, Lkh, Allocation };
enum class OpKind { Publish, Join, Leave };
enum class Role { Owner, Joiner, Leaver, Member };

const char* to_string(ModelKind m);
const char* to_string(OpKind o);
const char* to_string(Role r);
std::optional<ModelKind> parse_model(const std::string& s);

struct SweepConfig {
    std::vector<ModelKind> models{ModelKind::Encryption, ModelKind::Lkh, ModelKind::Allocation};
    std::vector<GroupType> gtypes{GroupType::G2, GroupType::G3, GroupType::G4};
    std::vector<int> n_list{10, 50, 100, 1000, 10000};
    std::vector<int> p_list{10, 50, 100};
    int degree = 4;
    std::size_t content_size = 102400;
    std::uint64_t seed = 1;
    int replica_count = 2;
    CryptoCostParams cost = CryptoCostParams::aes_cbc_rsa2048();

    void validate() const;
};

// One benchmark measurement. time_s is the modeled crypto time of the role's
// ledger, reproducible bit-exactly from the counters and the cost profile.
struct ResultRow {
    ModelKind model{};
    GroupType gtype{};
    OpKind op{};
    Role role{};
    int n = 0;
    int p = 0;
    double time_s = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_recv = 0;
    std::uint64_t sym_enc = 0;
    std::uint64_t sym_dec = 0;
    std::uint64_t asym_enc = 0;
    std::uint64_t asym_dec = 0;
    std::uint64_t keygen = 0;
    std::uint64_t sym_bytes = 0; // cipher bytes behind time_s; not a CSV column
    double wall_s = 0;           // informational; never part of the sweep CSV
};

// Builds a group of n members plus the owner, publishes p contents, then
// measures one join (a fresh user), one leave (the oldest member, so exactly
// n members remain), and one publish, attributing ledgers per role.
std::vector<ResultRow> measure_point(ModelKind model, GroupType gtype, int n, int p,
                                     const SweepConfig& cfg);

std::vector<ResultRow> run_sweep(const SweepConfig& cfg);

// model,gtype,op,role,n,p,time_s,bytes_sent,bytes_recv,sym_enc,sym_dec,asym_enc,asym_dec,keygen
void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

enum class Category { Passive, Normal, Active };
const char* to_string(Category c);
std::optional<Category> parse_category(const std::string& s);

struct SummaryRow {
    ModelKind model{};
    GroupType gtype{};
    OpKind op{};
    double raw_time_s = 0;
    double norm_time = 0; // min-max within the (op, gtype) axis across models
    double wall_ms = 0;
};

struct ScenarioSummary {
    Category category{};
    int n = 0;
    int p = 0;
    std::vector<SummaryRow> rows;
};

// n=4000 with p=2000/4000/8000 for passive/normal/active groups; owner cost
// per (op, gtype) axis, min-max normalized across the three models.
ScenarioSummary run_category_comparison(Category cat, const SweepConfig& base = SweepConfig{});

void emit_summary(const ScenarioSummary& s, std::ostream& out, bool with_wall = false);
void emit_summary(const ScenarioSummary& s, const std::filesystem::path& path, bool with_wall = false);

class DivergenceError : public SimError {
public:
    using SimError::SimError;
};

struct ScenarioOptions {
    ModelKind model = ModelKind::Encryption;
    GroupType gtype = GroupType::G4;
    int degree = 4;
    std::size_t content_size = 102400;
    std::uint64_t seed = 1;
    int replica_count = 2;
    bool inject_divergence = false; // fault-injection hook for tests
    CryptoCostParams cost = CryptoCostParams::aes_cbc_rsa2048();
};

// Replays an event file (`seq KIND args`, one per line) through the chosen
// model, cross-checking every (user, content) access against the history
// oracle after each event. Throws DivergenceError on the first disagreement.
std::vector<ResultRow> run_scenario(const std::filesystem::path& file, const ScenarioOptions& opts);

} // namespace dosn
