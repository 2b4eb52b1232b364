// mebench - runs configs and figure presets, convergence studies, chain maps

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mebench/presets.hpp"
#include "mebench/runner.hpp"

using namespace mebench;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitStrict = 4;

struct Common {
    std::string out{"out"};
    std::string profile{"desk"};
    std::uint64_t seed{1};
    std::string modes;
    bool strict{false};
    int jobs{1};
    bool append{false};
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "Output directory")->capture_default_str();
    app->add_option("--profile", c.profile, "desk, paper or smoke")->capture_default_str();
    app->add_option("--seed", c.seed, "Base seed for sampled controls")->capture_default_str();
    app->add_option("--modes", c.modes, "Comma list of H,MME,AME,EXACT");
    app->add_flag("--strict", c.strict, "Exit 4 on reflection, truncation or light-cone warnings");
    app->add_option("--jobs", c.jobs, "Worker threads")->capture_default_str();
    app->add_flag("--append", c.append, "Append to an existing ledger");
}

bool escalated(const std::string& flag) {
    static const std::set<std::string> kinds{"reflection", "fock truncation", "truncation", "light cone"};
    return kinds.count(flag) > 0;
}

int emit(const SweepResult& sweep, const Common& c) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(c.out) / "series");
    write_ledger((fs::path(c.out) / "ledger.csv").string(), sweep.rows, c.append);
    write_text_atomic((fs::path(c.out) / "stats.csv").string(), stats_csv(sweep.stats));
    write_text_atomic((fs::path(c.out) / "results.json").string(), results_json(sweep).dump(2) + "\n");
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "%04zu.csv", i);
        write_text_atomic((fs::path(c.out) / "series" / name).string(), series_csv(sweep.runs[i]));
    }
    bool warn = false;
    for (const auto& r : sweep.runs) {
        for (const auto& w : r.warnings) std::cerr << r.experiment_id << " axis=" << r.config.axis << ": " << w << "\n";
        for (const auto& f : r.flags) warn = warn || escalated(f);
    }
    std::cout << ledger_csv(sweep.rows);
    return c.strict && warn ? kExitStrict : 0;
}

SweepResult sweep(std::vector<ExperimentConfig> configs, const Common& c) {
    if (!c.modes.empty())
        for (auto& cfg : configs) cfg.modes = parse_modes(c.modes);
    return run_sweep(configs, c.jobs, [](std::size_t done, std::size_t total, const RunResult& r) {
        std::cerr << "[" << done << "/" << total << "] " << r.experiment_id << " axis=" << r.config.axis << "\n";
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Master-equation accuracy bench for driven few-level systems"};
    app.require_subcommand(1);

    Common common;
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
    run_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    add_common(run_cmd, common);

    std::string preset_name;
    int samples = 0;
    auto* preset_cmd = app.add_subcommand("preset", "Run a figure preset sweep");
    preset_cmd->add_option("name", preset_name, "fig3|fig3a|fig3b|fig4|fig4a|fig4b|fig6|fig6-vee|fig6-inset|fig7|fig7a|fig7b|fig7c")
        ->required();
    preset_cmd->add_option("--samples", samples, "Ensemble size override");
    add_common(preset_cmd, common);
    bool list_only = false;
    preset_cmd->add_flag("--list", list_only, "Print the configs as JSON without running");

    int halvings = 4;
    double pre_evolve = 0.0;
    double window = 0.0;
    auto* conv_cmd = app.add_subcommand("converge", "Time-step halving study of the EXACT mode");
    conv_cmd->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
    conv_cmd->add_option("--halvings", halvings)->capture_default_str();
    conv_cmd->add_option("--pre-evolve", pre_evolve, "Evolve this long before the study window")->capture_default_str();
    conv_cmd->add_option("--window", window, "Study window (default: 20 steps)");
    add_common(conv_cmd, common);

    double cutoff = 80.0 * kPi;
    int length = 50;
    int modes_count = 2000;
    auto* map_cmd = app.add_subcommand("map-chain", "Chain coefficients of the flat bath (unit coupling)");
    map_cmd->add_option("--cutoff", cutoff)->capture_default_str();
    map_cmd->add_option("--length", length)->capture_default_str();
    map_cmd->add_option("--lanczos-modes", modes_count)->capture_default_str();
    add_common(map_cmd, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            ExperimentConfig c = load_config(config_path);
            if (run_cmd->count("--profile")) {
                const double w = *std::max_element(c.energies.begin(), c.energies.end()) -
                                 *std::min_element(c.energies.begin(), c.energies.end());
                c.solver.dt = profile_settings(profile_from_string(common.profile), w).dt;
            }
            return emit(sweep({c}, common), common);
        }
        if (*preset_cmd) {
            PresetOptions opts;
            opts.profile = profile_from_string(common.profile);
            opts.seed = common.seed;
            if (samples > 0) opts.samples = samples;
            if (!common.modes.empty()) opts.modes = parse_modes(common.modes);
            auto configs = preset(preset_name, opts);
            if (list_only) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& c : configs) j.push_back(c);
                std::cout << j.dump(2) << "\n";
                return 0;
            }
            return emit(sweep(std::move(configs), common), common);
        }
        if (*conv_cmd) {
            const ExperimentConfig c = load_config(config_path);
            if (window <= 0.0) window = 20.0 * c.solver.dt;
            const ConvergenceReport rep = convergence_study(c, halvings, pre_evolve, window);
            std::ostringstream csv;
            csv << "dt,difference\n";
            for (std::size_t i = 0; i < rep.steps.size(); ++i) csv << rep.steps[i] << ',' << rep.differences[i] << '\n';
            std::filesystem::create_directories(common.out);
            write_text_atomic((std::filesystem::path(common.out) / "convergence.csv").string(), csv.str());
            std::cout << csv.str() << "slope " << rep.fit.slope << " residual " << rep.fit.residual << "\n";
            for (const auto& w : rep.warnings) std::cerr << w << "\n";
            return common.strict && !rep.warnings.empty() ? kExitStrict : 0;
        }
        if (*map_cmd) {
            BathSpec bath;
            bath.cutoff = cutoff;
            ChainCoefficients lanczos = star_to_chain(discretize(bath, 1.0, modes_count));
            const ChainCoefficients analytic = analytic_flat_chain_coefficients(length, cutoff, 1.0);
            std::ostringstream csv;
            csv << "n,alpha,alpha_analytic,beta,beta_analytic\n";
            csv.precision(17);
            const int n_max = std::min<int>(length, static_cast<int>(lanczos.size()));
            for (int n = 0; n < n_max; ++n) {
                csv << n << ',' << lanczos.onsite[n] << ',' << analytic.onsite[n];
                if (n + 1 < n_max) csv << ',' << lanczos.hopping[n] << ',' << analytic.hopping[n];
                else csv << ",,";
                csv << '\n';
            }
            std::filesystem::create_directories(common.out);
            write_text_atomic((std::filesystem::path(common.out) / "chain.csv").string(), csv.str());
            std::cout << csv.str();
            return 0;
        }
    } catch (const DegenerateFrameError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolver;
    } catch (const SolverError& e) {
        std::cerr << "solver abort: " << e.what() << "\n";
        return kExitSolver;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
