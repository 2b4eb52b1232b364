#include "mebench/presets.hpp"

#include <cmath>
#include <cstdio>

namespace mebench {

namespace {

std::string tag(const char* fmt, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

ExperimentConfig base(const PresetOptions& opts, const std::string& name, double omega) {
    ExperimentConfig c;
    c.experiment = name;
    c.energies = LevelSystem::qubit(omega).energies();
    c.bath.cutoff = 10.0 * omega;
    c.solver = profile_settings(opts.profile, omega);
    c.modes = opts.modes;
    if (opts.profile == Profile::Smoke) c.duration.max_duration = 0.5 * 2.0 * kPi / omega;
    return c;
}

TransitionConfig rate_transition(int lower, int upper, double gamma) {
    TransitionConfig t;
    t.lower = lower;
    t.upper = upper;
    t.gamma = gamma;
    return t;
}

DriveSpec resonant(double omega_d, ControlSignal rabi, ControlSignal phase = ConstantSignal{0.0}) {
    DriveSpec d;
    d.transition = 0;
    d.omega_d = omega_d;
    d.rabi = std::move(rabi);
    d.phase = std::move(phase);
    return d;
}

int sample_count(const PresetOptions& opts, int fallback) {
    if (opts.samples) return *opts.samples;
    return opts.profile == Profile::Smoke ? 2 : fallback;
}

std::vector<double> geometric(double lo, double hi, int points) {
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return out;
}

constexpr double kDeskOmega = 8.0 * kPi;

} // namespace

Profile profile_from_string(const std::string& s) {
    if (s == "desk") return Profile::Desk;
    if (s == "paper") return Profile::Paper;
    if (s == "smoke") return Profile::Smoke;
    throw ValidationError("unknown profile '" + s + "' (desk, paper, smoke)");
}

std::string to_string(Profile p) {
    switch (p) {
    case Profile::Desk: return "desk";
    case Profile::Paper: return "paper";
    case Profile::Smoke: return "smoke";
    }
    return "desk";
}

int steps_per_unit(Profile p) {
    switch (p) {
    case Profile::Desk: return 2000;
    case Profile::Paper: return 32000;
    case Profile::Smoke: return 400;
    }
    return 2000;
}

SolverSettings profile_settings(Profile p, double omega) {
    SolverSettings s;
    s.dt = 2.0 * kPi / omega / steps_per_unit(p);
    s.record_every = p == Profile::Paper ? 160 : (p == Profile::Smoke ? 2 : 10);
    return s;
}

std::vector<ExperimentConfig> preset_fig3(const PresetOptions& opts, bool fixed_duration,
                                          std::vector<double> rabi_ratios) {
    const double w = kDeskOmega;
    if (rabi_ratios.empty()) rabi_ratios = {1.0 / 32, 1.0 / 16, 1.0 / 10, 1.0 / 8, 1.0 / 4, 1.0 / 2};
    double min_ratio = rabi_ratios.front();
    for (double r : rabi_ratios) min_ratio = std::min(min_ratio, r);
    std::vector<ExperimentConfig> out;
    for (double r : rabi_ratios) {
        ExperimentConfig c = base(opts, fixed_duration ? "fig3a" : "fig3b", w);
        c.axis_name = "rabi_over_omega";
        c.axis = r;
        c.transitions = {rate_transition(0, 1, 1e-3)};
        c.drives = {resonant(w, ConstantSignal{r * w})};
        if (fixed_duration) {
            c.duration.policy = DurationPolicy::Fixed;
            c.duration.value = 2.0 * kPi / (min_ratio * w);
        } else {
            c.duration.policy = DurationPolicy::InverseRabi;
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ExperimentConfig> preset_fig4(const PresetOptions& opts, double bandwidth_ratio,
                                          std::vector<double> rms_ratios) {
    const double w = kDeskOmega;
    const bool narrow = bandwidth_ratio < 0.5;
    if (rms_ratios.empty())
        rms_ratios = opts.profile == Profile::Smoke ? std::vector<double>{1.0 / 8, 1.0 / 4}
                                                    : std::vector<double>{1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
    const int samples = sample_count(opts, narrow ? 28 : 20);
    constexpr int kTerms = 20;
    const double nu = bandwidth_ratio * w / kTerms;
    std::vector<ExperimentConfig> out;
    for (int k = 0; k < samples; ++k) {
        const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(k);
        const FourierSignal shape = sample_gaussian_fourier(RngSeed{seed}, kTerms, nu);
        for (double r : rms_ratios) {
            ExperimentConfig c = base(opts, narrow ? "fig4a" : "fig4b", w);
            c.axis_name = "rms_over_omega";
            c.axis = r;
            c.sample_seed = seed;
            c.transitions = {rate_transition(0, 1, 1e-3)};
            c.drives = {resonant(w, shape)};
            c.duration.policy = DurationPolicy::InverseRms;
            c.duration.value = r * w;
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<ExperimentConfig> preset_fig6(const PresetOptions& opts, const Fig6Options& f6) {
    const double w0 = 2.0 * kPi;
    double coarsest = 0.0;
    for (double m : f6.multipliers) coarsest = std::max(coarsest, 2.0 * kPi / (m * w0) / steps_per_unit(opts.profile));
    const PiecewiseProtocol protocol =
        sample_piecewise_protocol(RngSeed{opts.seed}, f6.duration, w0 / 2.3, 0.75 * w0 / (2.0 * kPi), 0.0, coarsest);
    std::vector<ExperimentConfig> out;
    for (double gamma : f6.gammas) {
        for (double m : f6.multipliers) {
            const double w = m * w0;
            ExperimentConfig c = base(opts, (f6.vee ? "fig6-vee-g" : "fig6-g") + tag("%g", gamma), w);
            c.axis_name = "omega_over_omega0";
            c.axis = m;
            c.sample_seed = opts.seed;
            if (f6.vee) {
                c.energies = LevelSystem::vee(w, w0 / 2.0).energies();
                c.transitions = {rate_transition(0, 2, gamma), rate_transition(0, 1, gamma)};
            } else {
                c.transitions = {rate_transition(0, 1, gamma)};
            }
            c.drives = {resonant(w, protocol.rabi, protocol.phase)};
            c.duration.policy = DurationPolicy::Fixed;
            c.duration.value = f6.duration;
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<ExperimentConfig> preset_fig6_inset(const PresetOptions& opts, double duration) {
    const double w0 = 2.0 * kPi;
    const double w = 4.0 * w0;
    const double grid = 2.0 * kPi / w / steps_per_unit(opts.profile);
    std::vector<ExperimentConfig> out;
    for (int s = 0; s < 3; ++s) {
        const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(s);
        for (int n = 1; n <= 8; ++n) {
            const double tau = 2.0 * kPi / (std::pow(2.0, n) * w0);
            const PiecewiseProtocol protocol =
                sample_piecewise_protocol(RngSeed{seed}, duration, w0 / 4.0, 0.75 * w0 / (2.0 * kPi), tau, grid);
            for (bool vee : {false, true}) {
                ExperimentConfig c = base(opts, "fig6-inset-s" + std::to_string(s) + (vee ? "-vee" : ""), w);
                c.axis_name = "n";
                c.axis = n;
                c.sample_seed = seed;
                if (vee) {
                    c.energies = LevelSystem::vee(w, w0 / 2.0).energies();
                    c.transitions = {rate_transition(0, 2, 2.5e-3), rate_transition(0, 1, 2.5e-3)};
                } else {
                    c.transitions = {rate_transition(0, 1, 2.5e-3)};
                }
                c.drives = {resonant(w, protocol.rabi, protocol.phase)};
                c.duration.policy = DurationPolicy::Fixed;
                c.duration.value = duration;
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

std::vector<ExperimentConfig> preset_fig7(const PresetOptions& opts, Fig7Panel panel, std::vector<double> axis) {
    const double w0 = kDeskOmega;
    std::vector<ExperimentConfig> out;
    switch (panel) {
    case Fig7Panel::CenterSweep: {
        if (axis.empty()) axis = {0.75, 0.875, 1.0, 1.125, 1.25};
        constexpr int kHalfTerms = 10;
        // Literal span 2 N nu equal to the bandwidth w0/2.
        const double nu = (w0 / 2.0) / (2.0 * kHalfTerms);
        for (double x : axis) {
            ExperimentConfig c = base(opts, "fig7a", w0);
            c.axis_name = "center_over_omega0";
            c.axis = x;
            c.sample_seed = opts.seed;
            c.energies = LevelSystem::qubit(x * w0).energies();
            c.bath.cutoff = 10.0 * w0;
            c.transitions = {rate_transition(0, 1, 1e-3)};
            c.drives = {resonant(w0, ConstantSignal{w0 / 32.0})};
            c.modulation = FrequencyModulation{
                0, sample_modulation(RngSeed{opts.seed}, x * w0, w0 / 2.0, nu, kHalfTerms, w0 / 60.0)};
            c.duration.policy = DurationPolicy::InverseRabi;
            out.push_back(std::move(c));
        }
        break;
    }
    case Fig7Panel::SingleFrequency: {
        if (axis.empty())
            for (int k = 8; k >= -1; --k) axis.push_back(std::pow(2.0, -k));
        for (double x : axis) {
            ExperimentConfig c = base(opts, "fig7b", w0);
            c.axis_name = "wm_over_omega0";
            c.axis = x;
            c.transitions = {rate_transition(0, 1, 1e-3)};
            c.drives = {resonant(w0, ConstantSignal{w0 / 32.0})};
            ModulationSignal m;
            m.center = w0;
            m.mod_center = x * w0;
            m.c = {w0 / 32.0};
            m.s = {0.0};
            c.modulation = FrequencyModulation{0, m};
            c.duration.policy = DurationPolicy::InverseRabi;
            out.push_back(std::move(c));
        }
        break;
    }
    case Fig7Panel::DriveDetuning: {
        if (axis.empty()) axis = geometric(0.25, 4.0, 9);
        for (double x : axis) {
            ExperimentConfig c = base(opts, "fig7c", w0);
            c.axis_name = "wd_over_omega0";
            c.axis = x;
            c.transitions = {rate_transition(0, 1, 1e-3)};
            c.drives = {resonant(x * w0, ConstantSignal{w0 / 4.0})};
            c.duration.policy = DurationPolicy::InverseRabi;
            out.push_back(std::move(c));
        }
        break;
    }
    }
    return out;
}

std::vector<ExperimentConfig> preset(const std::string& name, const PresetOptions& opts) {
    auto join = [](std::vector<ExperimentConfig> a, std::vector<ExperimentConfig> b) {
        for (auto& c : b) a.push_back(std::move(c));
        return a;
    };
    if (name == "fig3") return join(preset_fig3(opts, true), preset_fig3(opts, false));
    if (name == "fig3a") return preset_fig3(opts, true);
    if (name == "fig3b") return preset_fig3(opts, false);
    if (name == "fig4") return join(preset_fig4(opts, 1.0 / 8), preset_fig4(opts, 1.0));
    if (name == "fig4a") return preset_fig4(opts, 1.0 / 8);
    if (name == "fig4b") return preset_fig4(opts, 1.0);
    if (name == "fig6") return preset_fig6(opts);
    if (name == "fig6-vee") {
        Fig6Options f6;
        f6.vee = true;
        return preset_fig6(opts, f6);
    }
    if (name == "fig6-inset") return preset_fig6_inset(opts);
    if (name == "fig7")
        return join(join(preset_fig7(opts, Fig7Panel::CenterSweep), preset_fig7(opts, Fig7Panel::SingleFrequency)),
                    preset_fig7(opts, Fig7Panel::DriveDetuning));
    if (name == "fig7a") return preset_fig7(opts, Fig7Panel::CenterSweep);
    if (name == "fig7b") return preset_fig7(opts, Fig7Panel::SingleFrequency);
    if (name == "fig7c") return preset_fig7(opts, Fig7Panel::DriveDetuning);
    throw ValidationError("unknown preset '" + name + "'");
}

} // namespace mebench
