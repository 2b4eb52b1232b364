// control_signals.hpp - Band-limited Fourier, piecewise-linear and modulation controls

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mebench/types.hpp"

namespace mebench {

struct RngSeed {
    std::uint64_t value{0};
};

struct ConstantSignal {
    double value{0.0};
};

// f(t) = c0 + sum_k c_k cos(k nu t) + s_k sin(k nu t), k = 1..K.
struct FourierSignal {
    double c0{0.0};
    std::vector<double> c;
    std::vector<double> s;
    double nu{1.0};
    std::optional<std::uint64_t> seed;  // provenance only

    int terms() const { return static_cast<int>(c.size()); }
    double bandwidth() const { return terms() * nu; }
    double period() const { return 2.0 * kPi / nu; }
};

// Plateaus joined by linear ramps of equal duration tau. With tau = 0 the
// signal is piecewise constant and right-continuous at the switch instants.
struct PiecewiseLinearSignal {
    std::vector<double> values;
    std::vector<double> durations;
    double ramp{0.0};

    double total_duration() const;
    // Number of plateaus per unit plateau time (inverse mean plateau length).
    double switching_rate() const;
};

// omega(t) = center + sum_{k=-N}^{N} c_k cos((mod_center + k nu) t) + s_k sin(...)
// c and s are indexed by k + N.
struct ModulationSignal {
    double center{0.0};
    double mod_center{0.0};
    double nu{0.0};
    int half_terms{0};
    std::vector<double> c;
    std::vector<double> s;
    std::optional<std::uint64_t> seed;

    double rms_amplitude() const;
    // Literal spectral span [mod_center - N nu, mod_center + N nu].
    double span_low() const { return mod_center - half_terms * nu; }
    double span_high() const { return mod_center + half_terms * nu; }
    // The label N nu / 2 quoted alongside this series in the literature.
    double nominal_bandwidth() const { return half_terms * nu / 2.0; }
};

using ControlSignal =
    std::variant<ConstantSignal, FourierSignal, PiecewiseLinearSignal, ModulationSignal>;

double eval_fourier(const FourierSignal& sig, double t);
double eval_piecewise(const PiecewiseLinearSignal& sig, double t, Side side = Side::Right);
double eval_modulation(const ModulationSignal& sig, double t);
double eval(const ControlSignal& sig, double t, Side side = Side::Right);

// Multiplies the signal's oscillating content by factor. For a modulation
// signal the center is left untouched.
ControlSignal scaled(const ControlSignal& sig, double factor);

FourierSignal sample_gaussian_fourier(RngSeed seed, int terms, double nu, double c0 = 0.0);

// Gaussian coefficients for k = -N..N, then rescaled so rms_amplitude() == rms.
ModulationSignal sample_modulation(RngSeed seed, double center, double mod_center, double nu,
                                   int half_terms, double rms);

// sqrt((1/T) int_0^T f^2 dt), composite trapezoid with step <= quadrature_step.
double rms_over(const ControlSignal& sig, double duration, double quadrature_step);
// (1/T) int_0^T |f| dt with the same rule.
double mean_abs_over(const ControlSignal& sig, double duration, double quadrature_step);

// Default RMS quadrature step: one thousandth of the period of the highest
// frequency present, or of the duration for signals without one.
double default_quadrature_step(const ControlSignal& sig, double duration);

ControlSignal scale_to_rms(const ControlSignal& sig, double target, double duration,
                           double quadrature_step);
ControlSignal scale_to_rms(const ControlSignal& sig, double target, double duration);

// Seeded piecewise protocol: random plateau durations and values, rescaled so
// the inverse mean plateau length is exactly switching_rate and the
// time-averaged |value| over [0, duration] equals mean_value. Plateau
// lengths are rounded to multiples of grid (if > 0) so switches land on
// integration nodes.
struct PiecewiseProtocol {
    PiecewiseLinearSignal rabi;
    PiecewiseLinearSignal phase;
    std::uint64_t seed{0};
};
PiecewiseProtocol sample_piecewise_protocol(RngSeed seed, double duration, double mean_value,
                                            double switching_rate, double ramp, double grid);

void to_json(nlohmann::json& j, const ControlSignal& sig);
void from_json(const nlohmann::json& j, ControlSignal& sig);

} // namespace mebench
