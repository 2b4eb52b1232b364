// runner.hpp - Runs configs, sweeps them in a work pool, and writes the ledger

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mebench/config.hpp"
#include "mebench/metrics.hpp"

namespace mebench {

struct RunResult {
    ExperimentConfig config;
    std::string experiment_id;  // experiment name + settings fingerprint
    std::string config_hash;
    std::string settings_hash;
    double duration{0.0};
    int observed_level{1};
    std::vector<double> times;
    std::map<Mode, std::vector<double>> populations;  // observed level, per mode
    std::map<Mode, ErrorReport> reports;               // MME and AME against EXACT
    std::vector<std::string> flags;
    std::vector<std::string> warnings;
    nlohmann::json metadata = nlohmann::json::object();
};

// Executes every requested mode on a common time grid. Without EXACT the
// exact curve is known only for a decoupled system (all rates zero), where it
// equals the H curve; otherwise epsilon is undefined.
RunResult run(const ExperimentConfig& config);

// Final duration after the policy, the cap and snapping to the step grid.
double resolve_duration(const ExperimentConfig& config);
// Config with drive 0 rescaled for the inverse_rms policy.
ExperimentConfig prepare(const ExperimentConfig& config, double duration);

struct LedgerRow {
    std::string experiment_id;
    double axis{0.0};
    std::optional<std::uint64_t> sample_seed;
    std::string mode;
    std::optional<double> epsilon;
    std::optional<double> delta0;  // empty without an exact reference
    double delta1{0.0};
    std::string settings_hash;
    std::string flags;
};

std::vector<LedgerRow> ledger_rows(const RunResult& result);

struct EnsembleStat {
    std::string experiment_id;
    std::string mode;
    double axis{0.0};
    int samples{0};  // rows with a defined epsilon
    double mean{0.0};
    double stddev{0.0};  // population standard deviation
    double mean_plus_2sigma{0.0};
};

// Groups rows by (experiment_id, mode, axis) in first-appearance order.
std::vector<EnsembleStat> ensemble_statistics(const std::vector<LedgerRow>& rows);

struct SweepResult {
    std::vector<RunResult> runs;
    std::vector<LedgerRow> rows;
    std::vector<EnsembleStat> stats;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const RunResult&)>;

// Runs configs on `jobs` worker threads; results keep the input order. The
// first exception from any run is rethrown after all workers stop.
SweepResult run_sweep(const std::vector<ExperimentConfig>& configs, int jobs = 1,
                      const ProgressFn& progress = {});

inline const char* kLedgerHeader =
    "experiment_id,axis,sample_seed,mode,epsilon,delta0,delta1,settings_hash,flags";
std::string ledger_csv(const std::vector<LedgerRow>& rows, bool header = true);
std::string stats_csv(const std::vector<EnsembleStat>& stats);

// Writes via a temporary file and rename. With append, existing rows are kept
// (the header is written once).
void write_ledger(const std::string& path, const std::vector<LedgerRow>& rows, bool append = false);
void write_text_atomic(const std::string& path, const std::string& text);

// Full JSON record: configs, reports, series, flags and run metadata. The
// timestamp lives only here.
nlohmann::json results_json(const SweepResult& sweep);

// Per-run population series as CSV: t, then one column per mode.
std::string series_csv(const RunResult& result);

struct ConvergenceReport {
    std::vector<double> steps;        // dt_k
    std::vector<double> differences;  // between runs at dt_k and dt_{k+1}
    SlopeFit fit{};
    double pre_evolve{0.0};
    double window{0.0};
    std::vector<std::string> warnings;
};

// EXACT mode only. Evolves to pre_evolve at the config's dt, then runs the
// window at dt, dt/2, ..., dt/2^halvings from that state and fits
// max_t ||rho_k(t) - rho_{k+1}(t)|| against dt_k.
ConvergenceReport convergence_study(const ExperimentConfig& config, int halvings, double pre_evolve,
                                    double window);

struct TruncationStudy {
    double max_population_shift{0.0};
    double top_fock_low{0.0};
    double top_fock_high{0.0};
    int low{3};
    int high{4};
};

// EXACT runs at two oscillator truncations; compares the observed population.
TruncationStudy fock_truncation_study(const ExperimentConfig& config, int low, int high);

// EXACT-mode chain evolution of a config; exposed for studies and tests.
ChainEvolutionResult run_exact(const ExperimentConfig& config, double duration,
                               const ChainCoefficients* chain_override = nullptr);
ChainCoefficients chain_for(const ExperimentConfig& config, double duration);

} // namespace mebench
