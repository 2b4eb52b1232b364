#include "mebench/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mebench {

namespace {

const char* policy_name(DurationPolicy p) {
    switch (p) {
    case DurationPolicy::Fixed: return "fixed";
    case DurationPolicy::InverseRabi: return "inverse_rabi";
    case DurationPolicy::InverseRms: return "inverse_rms";
    }
    return "fixed";
}

DurationPolicy policy_from(const std::string& s) {
    if (s == "fixed") return DurationPolicy::Fixed;
    if (s == "inverse_rabi") return DurationPolicy::InverseRabi;
    if (s == "inverse_rms") return DurationPolicy::InverseRms;
    throw ValidationError("unknown duration policy '" + s + "'");
}

std::vector<double> levels_from_json(const nlohmann::json& j) {
    if (j.contains("energies")) return j.at("energies").get<std::vector<double>>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "qubit") return LevelSystem::qubit(j.at("omega").get<double>()).energies();
    if (kind == "vee")
        return LevelSystem::vee(j.at("omega").get<double>(), j.at("omega2").get<double>()).energies();
    throw ValidationError("unknown level system kind '" + kind + "'");
}

} // namespace

std::string to_string(Mode m) {
    switch (m) {
    case Mode::H: return "H";
    case Mode::MME: return "MME";
    case Mode::AME: return "AME";
    case Mode::EXACT: return "EXACT";
    }
    return "H";
}

Mode mode_from_string(const std::string& s) {
    std::string u = s;
    std::transform(u.begin(), u.end(), u.begin(), [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (u == "H") return Mode::H;
    if (u == "MME") return Mode::MME;
    if (u == "AME") return Mode::AME;
    if (u == "EXACT") return Mode::EXACT;
    throw ValidationError("unknown mode '" + s + "' (expected H, MME, AME or EXACT)");
}

std::vector<Mode> parse_modes(const std::string& comma_list) {
    std::vector<Mode> out;
    std::stringstream ss(comma_list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(mode_from_string(item));
    require(!out.empty(), "mode list is empty");
    return out;
}

void to_json(nlohmann::json& j, const SolverSettings& s) {
    j = {{"dt", s.dt},
         {"record_every", s.record_every},
         {"chi_max", s.chi_max},
         {"svd_cutoff", s.svd_cutoff},
         {"abort_discarded_weight", s.abort_discarded_weight},
         {"chain_length", s.chain_length},
         {"light_cone_safety", s.light_cone_safety},
         {"fock_dim", s.fock_dim},
         {"stepper", s.stepper == Stepper::Heun ? "heun" : "midpoint"},
         {"chain_mapping", s.mapping == ChainMapping::Analytic ? "analytic" : "lanczos"},
         {"lanczos_modes", s.lanczos_modes},
         {"lamb_shift", s.lamb_shift},
         {"degeneracy_tol", s.degeneracy_tol},
         {"reflection_threshold", s.reflection_threshold},
         {"fock_threshold", s.fock_threshold}};
}

void from_json(const nlohmann::json& j, SolverSettings& s) {
    const SolverSettings d;
    s.dt = j.value("dt", d.dt);
    s.record_every = j.value("record_every", d.record_every);
    s.chi_max = j.value("chi_max", d.chi_max);
    s.svd_cutoff = j.value("svd_cutoff", d.svd_cutoff);
    s.abort_discarded_weight = j.value("abort_discarded_weight", d.abort_discarded_weight);
    s.chain_length = j.value("chain_length", d.chain_length);
    s.light_cone_safety = j.value("light_cone_safety", d.light_cone_safety);
    s.fock_dim = j.value("fock_dim", d.fock_dim);
    const auto stepper = j.value("stepper", std::string("heun"));
    require(stepper == "heun" || stepper == "midpoint", "solver.stepper must be heun or midpoint");
    s.stepper = stepper == "heun" ? Stepper::Heun : Stepper::Midpoint;
    const auto mapping = j.value("chain_mapping", std::string("analytic"));
    require(mapping == "analytic" || mapping == "lanczos", "solver.chain_mapping must be analytic or lanczos");
    s.mapping = mapping == "analytic" ? ChainMapping::Analytic : ChainMapping::Lanczos;
    s.lanczos_modes = j.value("lanczos_modes", d.lanczos_modes);
    s.lamb_shift = j.value("lamb_shift", d.lamb_shift);
    s.degeneracy_tol = j.value("degeneracy_tol", d.degeneracy_tol);
    s.reflection_threshold = j.value("reflection_threshold", d.reflection_threshold);
    s.fock_threshold = j.value("fock_threshold", d.fock_threshold);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    auto transitions = nlohmann::json::array();
    for (const auto& t : c.transitions) {
        nlohmann::json tj = {{"lower", t.lower}, {"upper", t.upper}};
        if (t.g) tj["g"] = *t.g;
        if (t.gamma) tj["gamma"] = *t.gamma;
        transitions.push_back(tj);
    }
    nlohmann::json duration = {{"policy", policy_name(c.duration.policy)},
                               {"value", c.duration.value},
                               {"factor", c.duration.factor}};
    if (c.duration.max_duration) duration["max_duration"] = *c.duration.max_duration;
    auto modes = nlohmann::json::array();
    for (Mode m : c.modes) modes.push_back(to_string(m));
    j = {{"schema_version", c.schema_version},
         {"experiment", c.experiment},
         {"axis_name", c.axis_name},
         {"axis", c.axis},
         {"sample_seed", c.sample_seed ? nlohmann::json(*c.sample_seed) : nlohmann::json(nullptr)},
         {"levels", {{"energies", c.energies}}},
         {"transitions", transitions},
         {"bath", c.bath},
         {"drives", c.drives},
         {"initial_level", c.initial_level},
         {"observed_level", c.observed_level},
         {"duration", duration},
         {"solver", c.solver},
         {"modes", modes}};
    if (c.modulation)
        j["modulation"] = {{"transition", c.modulation->transition}, {"signal", c.modulation->signal}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    c = ExperimentConfig{};
    c.schema_version = j.value("schema_version", kSchemaVersion);
    require(c.schema_version == kSchemaVersion,
            "unsupported config schema_version " + std::to_string(c.schema_version));
    c.experiment = j.value("experiment", std::string("run"));
    c.axis_name = j.value("axis_name", std::string("index"));
    c.axis = j.value("axis", 0.0);
    if (j.contains("sample_seed") && !j.at("sample_seed").is_null())
        c.sample_seed = j.at("sample_seed").get<std::uint64_t>();
    c.energies = levels_from_json(j.at("levels"));
    for (const auto& tj : j.at("transitions")) {
        TransitionConfig t;
        t.lower = tj.at("lower").get<int>();
        t.upper = tj.at("upper").get<int>();
        if (tj.contains("g")) t.g = tj.at("g").get<double>();
        if (tj.contains("gamma")) t.gamma = tj.at("gamma").get<double>();
        c.transitions.push_back(t);
    }
    const auto& bj = j.at("bath");
    if (bj.contains("cutoff_ratio")) {
        double wmax = 0.0;
        for (const auto& t : c.transitions) {
            require(t.lower >= 0 && t.upper < static_cast<int>(c.energies.size()) && t.lower < t.upper,
                    "transition levels out of range");
            wmax = std::max(wmax, c.energies[static_cast<std::size_t>(t.upper)] -
                                      c.energies[static_cast<std::size_t>(t.lower)]);
        }
        c.bath.cutoff = bj.at("cutoff_ratio").get<double>() * wmax;
    } else {
        c.bath = bj.get<BathSpec>();
    }
    if (j.contains("drives")) c.drives = j.at("drives").get<std::vector<DriveSpec>>();
    if (j.contains("modulation") && !j.at("modulation").is_null()) {
        FrequencyModulation m;
        m.transition = j.at("modulation").at("transition").get<int>();
        m.signal = j.at("modulation").at("signal").get<ControlSignal>();
        c.modulation = m;
    }
    c.initial_level = j.value("initial_level", 0);
    c.observed_level = j.value("observed_level", -1);
    const auto& dj = j.at("duration");
    c.duration.policy = policy_from(dj.at("policy").get<std::string>());
    c.duration.value = dj.value("value", 0.0);
    c.duration.factor = dj.value("factor", 1.0);
    if (dj.contains("max_duration")) c.duration.max_duration = dj.at("max_duration").get<double>();
    if (j.contains("solver")) c.solver = j.at("solver").get<SolverSettings>();
    if (j.contains("modes")) {
        c.modes.clear();
        for (const auto& m : j.at("modes")) c.modes.push_back(mode_from_string(m.get<std::string>()));
    }
    validate(c);
}

nlohmann::json resolve_file_references(const nlohmann::json& j, const std::string& base_dir) {
    if (j.is_object()) {
        if (j.size() == 1 && j.contains("file") && j.at("file").is_string()) {
            std::filesystem::path p = j.at("file").get<std::string>();
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            std::ifstream in(p);
            if (!in) throw ValidationError("referenced file does not exist: " + p.string());
            nlohmann::json inner;
            try {
                inner = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("cannot parse " + p.string() + ": " + e.what());
            }
            return resolve_file_references(inner, p.parent_path().string());
        }
        nlohmann::json out = nlohmann::json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = resolve_file_references(it.value(), base_dir);
        return out;
    }
    if (j.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : j) out.push_back(resolve_file_references(v, base_dir));
        return out;
    }
    return j;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path);
    try {
        const auto raw = nlohmann::json::parse(in);
        const auto dir = std::filesystem::path(path).parent_path().string();
        return resolve_file_references(raw, dir.empty() ? "." : dir).get<ExperimentConfig>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    require(c.schema_version == kSchemaVersion, "unsupported schema_version");
    require(!c.experiment.empty(), "experiment name must not be empty");
    const LevelSystem levels(c.energies);
    require(!c.transitions.empty(), "at least one transition is required");
    for (const auto& t : c.transitions) {
        require(t.g.has_value() != t.gamma.has_value(), "each transition needs exactly one of g or gamma");
        if (t.gamma) require(*t.gamma >= 0.0, "gamma must be non-negative");
        make_transition(levels, t.lower, t.upper, 0.0);
    }
    require(c.initial_level >= 0 && c.initial_level < levels.dim(), "initial_level out of range");
    require(c.observed_level >= -1 && c.observed_level < levels.dim(), "observed_level out of range");
    const auto& d = c.duration;
    require(d.factor > 0.0, "duration factor must be positive");
    if (d.policy == DurationPolicy::Fixed) require(d.value > 0.0, "fixed duration must be positive");
    if (d.policy == DurationPolicy::InverseRms) require(d.value > 0.0, "inverse_rms needs a positive target RMS");
    if (d.policy != DurationPolicy::Fixed) require(!c.drives.empty(), "duration policy needs drive 0");
    if (d.policy == DurationPolicy::InverseRabi)
        require(std::holds_alternative<ConstantSignal>(c.drives.front().rabi) &&
                    std::get<ConstantSignal>(c.drives.front().rabi).value != 0.0,
                "inverse_rabi needs a non-zero constant Rabi frequency on drive 0");
    if (d.max_duration) require(*d.max_duration > 0.0, "max_duration must be positive");
    const auto& s = c.solver;
    require(s.dt > 0.0, "solver.dt must be positive");
    require(s.record_every >= 1, "solver.record_every must be >= 1");
    require(s.chi_max >= 1, "solver.chi_max must be >= 1");
    require(s.svd_cutoff >= 0.0 && s.svd_cutoff < 1.0, "solver.svd_cutoff must lie in [0, 1)");
    require(s.chain_length >= 0, "solver.chain_length must be >= 0");
    require(s.fock_dim >= 2, "solver.fock_dim must be >= 2");
    require(s.lanczos_modes >= 1, "solver.lanczos_modes must be >= 1");
    require(s.light_cone_safety > 0.0, "solver.light_cone_safety must be positive");
    require(!c.modes.empty(), "at least one mode is required");
    // Builds the system, which checks the bath cutoff and the drives.
    build_system(c);
}

std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(nlohmann::json(c).dump())); }

std::string settings_hash(const SolverSettings& s) { return hex64(fnv1a(nlohmann::json(s).dump())); }

OpenSystem build_system(const ExperimentConfig& c) {
    LevelSystem levels(c.energies);
    std::vector<Transition> transitions;
    for (const auto& t : c.transitions) {
        const Transition bare = make_transition(levels, t.lower, t.upper, 0.0);
        require(c.bath.cutoff > bare.frequency, "bath cutoff must exceed every transition frequency");
        const double g = t.g ? *t.g : coupling_for_rate(*t.gamma, c.bath, bare.frequency);
        transitions.push_back(make_transition(levels, t.lower, t.upper, g));
    }
    return OpenSystem(levels, transitions, c.bath, c.drives, c.modulation);
}

int observed_level(const ExperimentConfig& c) {
    if (c.observed_level >= 0) return c.observed_level;
    const int tr = c.drives.empty() ? 0 : c.drives.front().transition;
    require(tr >= 0 && tr < static_cast<int>(c.transitions.size()), "drive transition out of range");
    return c.transitions[static_cast<std::size_t>(tr)].upper;
}

} // namespace mebench
