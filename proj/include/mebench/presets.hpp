// presets.hpp - Config sets for the figure sweeps

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mebench/config.hpp"

namespace mebench {

// desk: dt = (2pi/w)/2000. paper: dt = (2pi/w)/32000 (long-running).
// smoke: dt = (2pi/w)/400, durations capped at half a unit, two samples.
enum class Profile { Desk, Paper, Smoke };
Profile profile_from_string(const std::string& s);
std::string to_string(Profile p);

struct PresetOptions {
    Profile profile{Profile::Desk};
    std::uint64_t seed{1};
    std::optional<int> samples;  // overrides the ensemble size
    std::vector<Mode> modes{Mode::H, Mode::MME, Mode::AME, Mode::EXACT};
};

// Steps per unit time 2pi/w for the profile.
int steps_per_unit(Profile p);
SolverSettings profile_settings(Profile p, double omega);

// Resonant constant drive on a qubit at w = 8pi, gamma = 1e-3, cutoff 10w.
// fixed_duration: T = 2pi/Omega_min for every point; otherwise T = 2pi/Omega.
std::vector<ExperimentConfig> preset_fig3(const PresetOptions& opts, bool fixed_duration,
                                          std::vector<double> rabi_ratios = {});

// Fourier-series Rabi envelope, K = 20 terms, nu = bandwidth/20, rescaled to
// each RMS value with T = 2pi/Omega_rms. Default sample counts: 28 for w/8, 20 for w.
std::vector<ExperimentConfig> preset_fig4(const PresetOptions& opts, double bandwidth_ratio,
                                          std::vector<double> rms_ratios = {});

// Seeded instant-switching protocol (mean |Omega| = w0/2.3, switching rate
// 0.75 w0/2pi) held fixed while w runs over multipliers of w0 = 2pi.
struct Fig6Options {
    std::vector<double> multipliers{1.0, 2.0, 4.0};
    std::vector<double> gammas{1.25e-3, 2.5e-3, 5e-3};
    double duration{2.0};
    bool vee{false};  // adds a level at w0/2 decaying to ground with the same rate
};
std::vector<ExperimentConfig> preset_fig6(const PresetOptions& opts, const Fig6Options& f6 = {});

// Inset: w = 4 w0, mean |Omega| = w0/4, ramp tau = 2pi/(2^n w0) for n = 1..8,
// three protocols, with and without the third level.
std::vector<ExperimentConfig> preset_fig6_inset(const PresetOptions& opts, double duration = 2.0);

// w0 = 8pi, drive at w0, gamma = 1e-3.
// a: band modulation of the transition frequency (N = 10, span w0/2 about
//    w0/2, RMS w0/60), scanning the center frequency.
// b: single-frequency modulation of amplitude w0/32, w_m from w0/256 to 2 w0.
// c: Omega = w0/4, drive frequency scanned over [w0/4, 4 w0].
enum class Fig7Panel { CenterSweep, SingleFrequency, DriveDetuning };
std::vector<ExperimentConfig> preset_fig7(const PresetOptions& opts, Fig7Panel panel,
                                          std::vector<double> axis = {});

// Dispatch by name: fig3 (both duration policies), fig3a, fig3b, fig4 (both
// bandwidths), fig4a, fig4b, fig6, fig6-vee, fig6-inset, fig7 (all panels),
// fig7a, fig7b, fig7c.
std::vector<ExperimentConfig> preset(const std::string& name, const PresetOptions& opts);

} // namespace mebench
