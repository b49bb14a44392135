#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dosn/bench.hpp"

namespace {

using namespace dosn;

std::vector<ModelKind> to_models(const std::vector<std::string>& names) {
    std::vector<ModelKind> out;
    for (const auto& s : names) {
        auto m = parse_model(s);
        if (!m) throw CLI::ValidationError("--models", "unknown model: " + s);
        out.push_back(*m);
    }
    return out;
}

std::vector<GroupType> to_gtypes(const std::vector<std::string>& names) {
    std::vector<GroupType> out;
    for (const auto& s : names) {
        auto g = parse_group_type(s);
        if (!g) throw CLI::ValidationError("--gtypes", "unknown group type: " + s);
        out.push_back(*g);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for DOSN group content-privacy enforcement models"};
    app.require_subcommand(1);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the parameter sweep and write a CSV");
    std::vector<std::string> model_names{"encryption", "lkh", "allocation"};
    std::vector<std::string> gtype_names{"G2", "G3", "G4"};
    SweepConfig cfg;
    std::string profile_file;
    std::string sweep_out;
    sweep->add_option("--models", model_names, "Models to run (encryption lkh allocation)");
    sweep->add_option("--gtypes", gtype_names, "Group types (G2 G3 G4)");
    sweep->add_option("--n", cfg.n_list, "Group sizes");
    sweep->add_option("--p", cfg.p_list, "Content counts");
    sweep->add_option("--degree", cfg.degree, "Key-tree degree");
    sweep->add_option("--content-size", cfg.content_size, "Content size in bytes");
    sweep->add_option("--seed", cfg.seed, "Deterministic seed");
    sweep->add_option("--replicas", cfg.replica_count, "Replica count (allocation model)");
    sweep->add_option("--profile", profile_file, "Cost profile file (key=value overrides)");
    sweep->add_option("--out", sweep_out, "Output CSV path")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "Per-category cost comparison (n=4000)");
    std::string category_name;
    std::string compare_out;
    bool with_wall = false;
    compare->add_option("--category", category_name, "passive | normal | active")->required();
    compare->add_option("--out", compare_out, "Output CSV path")->required();
    compare->add_option("--seed", cfg.seed, "Deterministic seed");
    compare->add_option("--degree", cfg.degree, "Key-tree degree");
    compare->add_option("--content-size", cfg.content_size, "Content size in bytes");
    compare->add_option("--profile", profile_file, "Cost profile file");
    compare->add_flag("--wall", with_wall,
                      "Append measured wall-clock (ms) per cell; output no longer deterministic");

    // scenario
    auto* scenario = app.add_subcommand("scenario", "Replay an event file against the oracle");
    ScenarioOptions sopts;
    std::string scenario_file;
    std::string model_name = "encryption";
    std::string gtype_name = "G4";
    std::string scenario_out;
    scenario->add_option("--file", scenario_file, "Scenario file")->required();
    scenario->add_option("--model", model_name, "encryption | lkh | allocation")->required();
    scenario->add_option("--gtype", gtype_name, "G2 | G3 | G4")->required();
    scenario->add_option("--degree", sopts.degree, "Key-tree degree");
    scenario->add_option("--content-size", sopts.content_size, "Content size in bytes");
    scenario->add_option("--seed", sopts.seed, "Deterministic seed");
    scenario->add_option("--out", scenario_out, "Write per-event owner rows to a CSV");
    scenario->add_flag("--inject-divergence", sopts.inject_divergence)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!profile_file.empty()) {
            cfg.cost = CryptoCostParams::from_file(profile_file);
            sopts.cost = cfg.cost;
        }
        if (sweep->parsed()) {
            cfg.models = to_models(model_names);
            cfg.gtypes = to_gtypes(gtype_names);
            auto rows = run_sweep(cfg);
            emit_csv(rows, std::filesystem::path(sweep_out));
            std::cerr << rows.size() << " rows -> " << sweep_out << "\n";
        } else if (compare->parsed()) {
            auto cat = parse_category(category_name);
            if (!cat) throw SimError("unknown category: " + category_name);
            auto summary = run_category_comparison(*cat, cfg);
            emit_summary(summary, std::filesystem::path(compare_out), with_wall);
            std::cerr << summary.rows.size() << " cells -> " << compare_out << "\n";
        } else if (scenario->parsed()) {
            auto m = parse_model(model_name);
            if (!m) throw SimError("unknown model: " + model_name);
            auto g = parse_group_type(gtype_name);
            if (!g) throw SimError("unknown group type: " + gtype_name);
            sopts.model = *m;
            sopts.gtype = *g;
            auto rows = run_scenario(scenario_file, sopts);
            if (!scenario_out.empty())
                emit_csv(rows, std::filesystem::path(scenario_out));
            else
                emit_csv(rows, std::cout);
            std::cerr << "scenario ok: " << rows.size() << " events checked against the oracle\n";
        }
    } catch (const dosn::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
