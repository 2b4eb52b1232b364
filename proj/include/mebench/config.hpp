// config.hpp - Experiment configuration (JSON schema version 1)

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mebench/chain_evolution.hpp"
#include "mebench/master_equations.hpp"
#include "mebench/system_model.hpp"

namespace mebench {

inline constexpr int kSchemaVersion = 1;

enum class Mode { H, MME, AME, EXACT };
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::vector<Mode> parse_modes(const std::string& comma_list);

// Coupling given either directly (g) or through the rate it produces.
struct TransitionConfig {
    int lower{0};
    int upper{1};
    std::optional<double> g;
    std::optional<double> gamma;
};

enum class DurationPolicy { Fixed, InverseRabi, InverseRms };

// fixed: T = value. inverse_rabi: T = factor 2 pi / Omega for the constant
// drive 0. inverse_rms: drive 0 is rescaled to RMS value over T = factor 2 pi / value.
// T is then capped at max_duration (if set) and snapped to the step grid.
struct DurationSpec {
    DurationPolicy policy{DurationPolicy::Fixed};
    double value{0.0};
    double factor{1.0};
    std::optional<double> max_duration;
};

enum class ChainMapping { Analytic, Lanczos };

struct SolverSettings {
    double dt{0.25 / 2000.0};
    int record_every{10};
    int chi_max{64};
    double svd_cutoff{1e-10};
    double abort_discarded_weight{1e-3};
    int chain_length{0};  // 0: light-cone rule
    double light_cone_safety{1.5};
    int fock_dim{3};
    Stepper stepper{Stepper::Heun};
    ChainMapping mapping{ChainMapping::Analytic};
    int lanczos_modes{2000};
    bool lamb_shift{true};
    double degeneracy_tol{1e-6};
    double reflection_threshold{1e-6};
    double fock_threshold{1e-6};
};

struct ExperimentConfig {
    int schema_version{kSchemaVersion};
    std::string experiment{"run"};
    std::string axis_name{"index"};
    double axis{0.0};
    std::optional<std::uint64_t> sample_seed;

    std::vector<double> energies;
    std::vector<TransitionConfig> transitions;
    BathSpec bath;
    std::vector<DriveSpec> drives;
    std::optional<FrequencyModulation> modulation;

    int initial_level{0};
    int observed_level{-1};  // -1: upper level of drive 0's transition (or transition 0)
    DurationSpec duration;
    SolverSettings solver;
    std::vector<Mode> modes{Mode::H, Mode::MME, Mode::AME, Mode::EXACT};
};

void to_json(nlohmann::json& j, const SolverSettings& s);
void from_json(const nlohmann::json& j, SolverSettings& s);
void to_json(nlohmann::json& j, const ExperimentConfig& c);
// Accepts "cutoff" or "cutoff_ratio" (times the largest transition frequency)
// and levels as {"energies": [...]}, {"kind": "qubit", "omega": w} or
// {"kind": "vee", "omega": w, "omega2": w2}. Validates the result.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

// Reads a config file; {"file": path} objects anywhere inside are replaced by
// the JSON in that file (relative to the config's directory).
ExperimentConfig load_config(const std::string& path);
nlohmann::json resolve_file_references(const nlohmann::json& j, const std::string& base_dir);

// Throws ValidationError on any inconsistency (indices, cutoff, modes, ...).
void validate(const ExperimentConfig& c);

// Fingerprints of the whole config and of the solver settings alone.
std::string config_hash(const ExperimentConfig& c);
std::string settings_hash(const SolverSettings& s);

// Instantiates the physical system (resolving gamma -> g).
OpenSystem build_system(const ExperimentConfig& c);
int observed_level(const ExperimentConfig& c);

} // namespace mebench
