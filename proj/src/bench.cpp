#include "dosn/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include "dosn/model_allocation.hpp"
#include "dosn/model_encryption.hpp"
#include "dosn/model_lkh.hpp"
#include "dosn/rng.hpp"
#include "dosn/world.hpp"

namespace dosn {

const char* to_string(ModelKind m) {
    switch (m) {
    case ModelKind::Encryption: return "encryption";
    case ModelKind::Lkh: return "lkh";
    case ModelKind::Allocation: return "allocation";
    }
    return "?";
}

const char* to_string(OpKind o) {
    switch (o) {
    case OpKind::Publish: return "publish";
    case OpKind::Join: return "join";
    case OpKind::Leave: return "leave";
    }
    return "?";
}

const char* to_string(Role r) {
    switch (r) {
    case Role::Owner: return "owner";
    case Role::Joiner: return "joiner";
    case Role::Leaver: return "leaver";
    case Role::Member: return "member";
    }
    return "?";
}

std::optional<ModelKind> parse_model(const std::string& s) {
    if (s == "encryption") return ModelKind::Encryption;
    if (s == "lkh") return ModelKind::Lkh;
    if (s == "allocation") return ModelKind::Allocation;
    return std::nullopt;
}

const char* to_string(Category c) {
    switch (c) {
    case Category::Passive: return "passive";
    case Category::Normal: return "normal";
    case Category::Active: return "active";
    }
    return "?";
}

std::optional<Category> parse_category(const std::string& s) {
    if (s == "passive") return Category::Passive;
    if (s == "normal") return Category::Normal;
    if (s == "active") return Category::Active;
    return std::nullopt;
}

void SweepConfig::validate() const {
    if (models.empty()) throw SimError("no models selected");
    if (gtypes.empty()) throw SimError("no group types selected");
    if (n_list.empty() || p_list.empty()) throw SimError("empty parameter grid");
    for (int n : n_list)
        if (n < 2) throw SimError("group size must be at least 2");
    for (int p : p_list)
        if (p < 0) throw SimError("content count must be non-negative");
    if (degree < 2) throw SimError("degree must be at least 2");
    if (content_size == 0) throw SimError("content size must be positive");
    if (replica_count < 1) throw SimError("replica count must be at least 1");
    cost.validate();
}

namespace {

// Uniform facade over the three enforcement models.
class ModelDriver {
public:
    virtual ~ModelDriver() = default;
    virtual ContentId publish(UserId author, SharedBytes content) = 0;
    virtual void join(UserId u) = 0;
    virtual void leave(UserId u) = 0;
    virtual void sync(UserId u) = 0;
    virtual AccessDecision decide(UserId u, ContentId c) = 0;
    virtual std::size_t member_count() = 0; // including the owner
};

class EncryptionDriver final : public ModelDriver {
public:
    EncryptionDriver(World& w, GroupId g, UserId owner, GroupType gt) : g_(w, g, owner, gt) {}
    ContentId publish(UserId a, SharedBytes c) override { return g_.publish(a, std::move(c)); }
    void join(UserId u) override { g_.join(u); }
    void leave(UserId u) override { g_.leave(u); }
    void sync(UserId u) override { g_.sync(u); }
    AccessDecision decide(UserId u, ContentId c) override { return g_.decide(u, c); }
    std::size_t member_count() override { return g_.members().size(); }

private:
    EncryptionGroup g_;
};

class LkhDriver final : public ModelDriver {
public:
    LkhDriver(World& w, GroupId g, UserId owner, GroupType gt, int d) : g_(w, g, owner, gt, d) {}
    ContentId publish(UserId a, SharedBytes c) override { return g_.publish(a, std::move(c)); }
    void join(UserId u) override { g_.join(u); }
    void leave(UserId u) override { g_.leave(u); }
    void sync(UserId u) override { g_.sync(u); }
    AccessDecision decide(UserId u, ContentId c) override { return g_.decide(u, c); }
    std::size_t member_count() override { return g_.members().size(); }

private:
    LkhGroup g_;
};

class AllocationDriver final : public ModelDriver {
public:
    AllocationDriver(World& w, GroupId g, UserId owner, GroupType gt, int k, std::uint64_t seed)
        : g_(w, g, owner, gt, k, seed) {}
    ContentId publish(UserId a, SharedBytes c) override { return g_.publish(a, std::move(c)); }
    void join(UserId u) override { g_.join(u); }
    void leave(UserId u) override { g_.leave(u); }
    void sync(UserId) override {}
    AccessDecision decide(UserId u, ContentId c) override { return g_.evaluate(u, c); }
    std::size_t member_count() override { return g_.members().size(); }

private:
    AllocationGroup g_;
};

std::unique_ptr<ModelDriver> make_driver(ModelKind m, World& w, GroupId g, UserId owner,
                                         GroupType gt, int degree, int replica_count,
                                         std::uint64_t seed) {
    switch (m) {
    case ModelKind::Encryption: return std::make_unique<EncryptionDriver>(w, g, owner, gt);
    case ModelKind::Lkh: return std::make_unique<LkhDriver>(w, g, owner, gt, degree);
    case ModelKind::Allocation:
        return std::make_unique<AllocationDriver>(w, g, owner, gt, replica_count, seed);
    }
    throw SimError("unknown model");
}

SharedBytes pattern_content(std::size_t size, std::uint64_t seed) {
    Bytes b(size);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < size; i += 64) b[i] = static_cast<std::uint8_t>(rng.next());
    return make_shared_bytes(std::move(b));
}

ResultRow snapshot(World& w, ModelKind m, GroupType gt, OpKind op, Role role, UserId u,
                   int n, int p) {
    const OpLedger& ops = w.ops(u);
    const TrafficLedger& tr = w.traffic(u);
    ResultRow r;
    r.model = m;
    r.gtype = gt;
    r.op = op;
    r.role = role;
    r.n = n;
    r.p = p;
    r.time_s = ops.modeled_time(w.crypto.cost());
    r.bytes_sent = tr.bytes_sent;
    r.bytes_recv = tr.bytes_received;
    r.sym_enc = ops.sym_enc_count;
    r.sym_dec = ops.sym_dec_count;
    r.asym_enc = ops.asym_enc_count;
    r.asym_dec = ops.asym_dec_count;
    r.keygen = ops.keygen_count;
    r.sym_bytes = ops.sym_bytes_processed;
    return r;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

} // namespace

std::vector<ResultRow> measure_point(ModelKind model, GroupType gtype, int n, int p,
                                     const SweepConfig& cfg) {
    World world(CryptoBackendKind::Model, cfg.cost);
    const UserId owner{1};
    const GroupId gid{1};
    std::uint64_t point_seed = cfg.seed ^ (static_cast<std::uint64_t>(n) << 32) ^
                               (static_cast<std::uint64_t>(p) << 8) ^
                               static_cast<std::uint64_t>(gtype) ^
                               (static_cast<std::uint64_t>(model) << 4);
    auto driver = make_driver(model, world, gid, owner, gtype, cfg.degree, cfg.replica_count,
                              point_seed);

    // Build phase: n joined members, p contents. Ledgers are reset before
    // each measured operation, so construction costs never leak into rows.
    for (int i = 0; i < n; ++i) driver->join(UserId{2 + static_cast<std::uint64_t>(i)});
    SharedBytes content = pattern_content(cfg.content_size, point_seed);
    for (int i = 0; i < p; ++i) driver->publish(owner, content);

    const UserId joiner{2 + static_cast<std::uint64_t>(n)};
    const UserId leaver{2};   // oldest member: after the measured join, exactly n remain
    const UserId observer{3}; // representative existing member
    driver->sync(observer);

    std::vector<ResultRow> rows;
    auto clock = [] { return std::chrono::steady_clock::now(); };
    auto secs = [](auto d) { return std::chrono::duration<double>(d).count(); };

    world.reset_ledgers();
    auto t0 = clock();
    driver->join(joiner);
    double wall_join = secs(clock() - t0);
    driver->sync(joiner);
    driver->sync(observer);
    rows.push_back(snapshot(world, model, gtype, OpKind::Join, Role::Owner, owner, n, p));
    rows.back().wall_s = wall_join;
    rows.push_back(snapshot(world, model, gtype, OpKind::Join, Role::Joiner, joiner, n, p));
    rows.push_back(snapshot(world, model, gtype, OpKind::Join, Role::Member, observer, n, p));

    world.reset_ledgers();
    t0 = clock();
    driver->leave(leaver);
    double wall_leave = secs(clock() - t0);
    driver->sync(observer);
    rows.push_back(snapshot(world, model, gtype, OpKind::Leave, Role::Owner, owner, n, p));
    rows.back().wall_s = wall_leave;
    rows.push_back(snapshot(world, model, gtype, OpKind::Leave, Role::Leaver, leaver, n, p));
    rows.push_back(snapshot(world, model, gtype, OpKind::Leave, Role::Member, observer, n, p));

    world.reset_ledgers();
    t0 = clock();
    driver->publish(owner, content);
    double wall_publish = secs(clock() - t0);
    rows.push_back(snapshot(world, model, gtype, OpKind::Publish, Role::Owner, owner, n, p));
    rows.back().wall_s = wall_publish;

    return rows;
}

std::vector<ResultRow> run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<ResultRow> rows;
    for (ModelKind m : cfg.models)
        for (GroupType gt : cfg.gtypes)
            for (int n : cfg.n_list)
                for (int p : cfg.p_list) {
                    auto point = measure_point(m, gt, n, p, cfg);
                    rows.insert(rows.end(), point.begin(), point.end());
                }
    auto key = [](const ResultRow& r) {
        return std::make_tuple(static_cast<int>(r.model), static_cast<int>(r.gtype),
                               static_cast<int>(r.op), static_cast<int>(r.role), r.n, r.p);
    };
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << "model,gtype,op,role,n,p,time_s,bytes_sent,bytes_recv,"
           "sym_enc,sym_dec,asym_enc,asym_dec,keygen\n";
    for (const auto& r : rows) {
        out << to_string(r.model) << ',' << to_string(r.gtype) << ',' << to_string(r.op) << ','
            << to_string(r.role) << ',' << r.n << ',' << r.p << ',' << format_double(r.time_s)
            << ',' << r.bytes_sent << ',' << r.bytes_recv << ',' << r.sym_enc << ',' << r.sym_dec
            << ',' << r.asym_enc << ',' << r.asym_dec << ',' << r.keygen << '\n';
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open output file: " + path.string());
    emit_csv(rows, out);
}

ScenarioSummary run_category_comparison(Category cat, const SweepConfig& base) {
    ScenarioSummary summary;
    summary.category = cat;
    summary.n = 4000;
    switch (cat) {
    case Category::Passive: summary.p = 2000; break;
    case Category::Normal: summary.p = 4000; break;
    case Category::Active: summary.p = 8000; break;
    }

    const ModelKind models[] = {ModelKind::Encryption, ModelKind::Lkh, ModelKind::Allocation};
    const GroupType gtypes[] = {GroupType::G2, GroupType::G3, GroupType::G4};
    const OpKind ops[] = {OpKind::Join, OpKind::Leave, OpKind::Publish};

    std::map<std::tuple<int, int, int>, SummaryRow> cells;
    for (ModelKind m : models)
        for (GroupType gt : gtypes) {
            auto rows = measure_point(m, gt, summary.n, summary.p, base);
            for (const auto& r : rows) {
                if (r.role != Role::Owner) continue;
                SummaryRow s;
                s.model = m;
                s.gtype = gt;
                s.op = r.op;
                s.raw_time_s = r.time_s;
                s.wall_ms = r.wall_s * 1e3;
                cells[{static_cast<int>(m), static_cast<int>(gt), static_cast<int>(r.op)}] = s;
            }
        }

    // One axis per (op, gtype): min-max over the three models.
    for (GroupType gt : gtypes)
        for (OpKind op : ops) {
            double lo = 0, hi = 0;
            bool first = true;
            for (ModelKind m : models) {
                double v = cells.at({static_cast<int>(m), static_cast<int>(gt), static_cast<int>(op)}).raw_time_s;
                if (first) { lo = hi = v; first = false; }
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            for (ModelKind m : models) {
                auto& cell = cells.at({static_cast<int>(m), static_cast<int>(gt), static_cast<int>(op)});
                cell.norm_time = hi > lo ? (cell.raw_time_s - lo) / (hi - lo) : 0.0;
            }
        }

    for (ModelKind m : models)
        for (GroupType gt : gtypes)
            for (OpKind op : ops)
                summary.rows.push_back(
                    cells.at({static_cast<int>(m), static_cast<int>(gt), static_cast<int>(op)}));
    return summary;
}

void emit_summary(const ScenarioSummary& s, std::ostream& out, bool with_wall) {
    out << "category,n,p,model,gtype,op,raw_time_s,norm_time";
    if (with_wall) out << ",wall_ms";
    out << '\n';
    for (const auto& r : s.rows) {
        out << to_string(s.category) << ',' << s.n << ',' << s.p << ',' << to_string(r.model)
            << ',' << to_string(r.gtype) << ',' << to_string(r.op) << ','
            << format_double(r.raw_time_s) << ',' << format_double(r.norm_time);
        if (with_wall) out << ',' << format_double(r.wall_ms);
        out << '\n';
    }
}

void emit_summary(const ScenarioSummary& s, const std::filesystem::path& path, bool with_wall) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open output file: " + path.string());
    emit_summary(s, out, with_wall);
}

// ---------------------------------------------------------------------------
// Scenario replay

namespace {

struct ScenarioEvent {
    std::uint64_t seq = 0;
    GroupEvent::Kind kind{};
    UserId user;
    std::uint64_t file_content = 0; // PUBLISH only
    int line = 0;
};

std::vector<ScenarioEvent> parse_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw SimError("cannot open scenario file: " + file.string());
    std::vector<ScenarioEvent> events;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        std::uint64_t seq = 0;
        if (!(ls >> seq >> kind)) {
            if (ls.eof() && kind.empty() && line.find_first_not_of(" \t\r") == std::string::npos)
                continue; // blank
            throw SimError("scenario line " + std::to_string(lineno) + ": expected `seq KIND args`");
        }
        auto bad = [&](const std::string& why) {
            return SimError("scenario line " + std::to_string(lineno) + ": " + why);
        };
        ScenarioEvent ev;
        ev.seq = seq;
        ev.line = lineno;
        std::uint64_t a = 0, b = 0;
        if (kind == "CREATE") {
            if (!(ls >> a)) throw bad("CREATE needs an owner id");
            ev.kind = GroupEvent::Kind::Create;
            ev.user = UserId{a};
        } else if (kind == "JOIN") {
            if (!(ls >> a)) throw bad("JOIN needs a user id");
            ev.kind = GroupEvent::Kind::Join;
            ev.user = UserId{a};
        } else if (kind == "LEAVE") {
            if (!(ls >> a)) throw bad("LEAVE needs a user id");
            ev.kind = GroupEvent::Kind::Leave;
            ev.user = UserId{a};
        } else if (kind == "PUBLISH") {
            if (!(ls >> a >> b)) throw bad("PUBLISH needs author and content ids");
            ev.kind = GroupEvent::Kind::Publish;
            ev.user = UserId{a};
            ev.file_content = b;
        } else {
            throw bad("unknown event kind " + kind);
        }
        std::string rest;
        if (ls >> rest) throw bad("trailing tokens");
        events.push_back(ev);
    }
    if (events.empty()) throw SimError("scenario file is empty");
    if (events.front().kind != GroupEvent::Kind::Create)
        throw SimError("scenario line 1: first event must be CREATE");
    return events;
}

} // namespace

std::vector<ResultRow> run_scenario(const std::filesystem::path& file, const ScenarioOptions& opts) {
    auto events = parse_scenario(file);

    World world(CryptoBackendKind::Model, opts.cost);
    const GroupId gid{1};
    UserId owner = events.front().user;
    std::unique_ptr<ModelDriver> driver;
    std::unique_ptr<GroupHistory> history;
    std::map<std::uint64_t, ContentId> content_of;
    std::set<UserId> users;
    SharedBytes content = pattern_content(opts.content_size, opts.seed);
    std::vector<ResultRow> rows;
    bool injected = false;

    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& ev = events[i];
        world.reset_ledgers();
        try {
        int p_before = static_cast<int>(content_of.size());
        auto non_owner_members = [&] {
            return driver ? static_cast<int>(driver->member_count()) - 1 : 0;
        };
        switch (ev.kind) {
        case GroupEvent::Kind::Create:
            if (driver) throw SimError("duplicate CREATE");
            history = std::make_unique<GroupHistory>(gid, opts.gtype, ev.user, ev.seq);
            driver = make_driver(opts.model, world, gid, ev.user, opts.gtype, opts.degree,
                                 opts.replica_count, opts.seed);
            users.insert(ev.user);
            break;
        case GroupEvent::Kind::Join:
            if (!driver) throw SimError("event before CREATE");
            history->join(ev.seq, ev.user);
            driver->join(ev.user);
            users.insert(ev.user);
            rows.push_back(snapshot(world, opts.model, opts.gtype, OpKind::Join, Role::Owner,
                                    owner, non_owner_members(), p_before));
            break;
        case GroupEvent::Kind::Leave:
            if (!driver) throw SimError("event before CREATE");
            history->leave(ev.seq, ev.user);
            driver->leave(ev.user);
            rows.push_back(snapshot(world, opts.model, opts.gtype, OpKind::Leave, Role::Owner,
                                    owner, non_owner_members(), p_before));
            break;
        case GroupEvent::Kind::Publish: {
            if (!driver) throw SimError("event before CREATE");
            if (content_of.count(ev.file_content))
                throw SimError("content " + std::to_string(ev.file_content) + " already published");
            ContentId c{0};
            c = driver->publish(ev.user, content);
            history->publish(ev.seq, ev.user, c);
            content_of[ev.file_content] = c;
            rows.push_back(snapshot(world, opts.model, opts.gtype, OpKind::Publish, Role::Owner,
                                    ev.user, non_owner_members(), p_before + 1));
            break;
        }
        }
        } catch (const SimError& e) {
            throw SimError("scenario line " + std::to_string(ev.line) + ": " + e.what());
        }

        // Cross-check the model against the history oracle for every pair.
        for (UserId u : users) driver->sync(u);
        for (UserId u : users)
            for (const auto& [fid, c] : content_of) {
                AccessDecision got = driver->decide(u, c);
                if (opts.inject_divergence && !injected && i + 1 == events.size()) {
                    got = got == AccessDecision::Permit ? AccessDecision::Deny : AccessDecision::Permit;
                    injected = true;
                }
                AccessDecision want = history->oracle_access(u, c, ev.seq);
                if (got != want) {
                    std::ostringstream msg;
                    msg << "divergence at seq " << ev.seq << ": user " << u.v << " content " << fid
                        << " model=" << (got == AccessDecision::Permit ? "Permit" : "Deny")
                        << " oracle=" << (want == AccessDecision::Permit ? "Permit" : "Deny");
                    throw DivergenceError(msg.str());
                }
            }
    }
    return rows;
}

} // namespace dosn
