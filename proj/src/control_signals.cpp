#include "mebench/control_signals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mebench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <class F>
double trapezoid(const ControlSignal& sig, double duration, double step, F&& integrand) {
    require(duration > 0.0, "quadrature duration must be positive");
    require(step > 0.0, "quadrature step must be positive");
    const auto n = static_cast<long>(std::ceil(duration / step - 1e-9));
    const double h = duration / static_cast<double>(n);
    // Ends use one-sided limits so a jump at t = 0 or t = T contributes the
    // interior value.
    double acc = 0.5 * (integrand(eval(sig, 0.0, Side::Right)) +
                        integrand(eval(sig, duration, Side::Left)));
    for (long i = 1; i < n; ++i) acc += integrand(eval(sig, h * static_cast<double>(i)));
    return acc * h;
}

} // namespace

double PiecewiseLinearSignal::total_duration() const {
    const double plateaus = std::accumulate(durations.begin(), durations.end(), 0.0);
    const auto ramps = durations.empty() ? 0.0 : static_cast<double>(durations.size() - 1);
    return plateaus + ramps * ramp;
}

double PiecewiseLinearSignal::switching_rate() const {
    const double plateaus = std::accumulate(durations.begin(), durations.end(), 0.0);
    return static_cast<double>(durations.size()) / plateaus;
}

double ModulationSignal::rms_amplitude() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) acc += c[k] * c[k] + s[k] * s[k];
    return std::sqrt(0.5 * acc);
}

double eval_fourier(const FourierSignal& sig, double t) {
    double acc = sig.c0;
    for (int k = 0; k < sig.terms(); ++k) {
        const double phase = (k + 1) * sig.nu * t;
        acc += sig.c[k] * std::cos(phase) + sig.s[k] * std::sin(phase);
    }
    return acc;
}

double eval_piecewise(const PiecewiseLinearSignal& sig, double t, Side side) {
    const double total = sig.total_duration();
    const double slack = 1e-12 * std::max(1.0, total);
    if (t < -slack || t > total + slack)
        throw ValidationError("piecewise signal evaluated outside [0, " + std::to_string(total) +
                              "] at t=" + std::to_string(t));
    const std::size_t n = sig.values.size();
    // Switch instants accumulated from durations and grid times n*dt differ by
    // rounding; anything this close to a jump counts as sitting on it.
    const double node_tol = 1e-11 * std::max(1.0, total);
    double start = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double plateau_end = start + sig.durations[i];
        const bool last = (i + 1 == n);
        if (last) return sig.values[i];
        if (sig.ramp == 0.0 && std::abs(t - plateau_end) <= node_tol)
            return side == Side::Left ? sig.values[i] : sig.values[i + 1];
        if (t < plateau_end) return sig.values[i];
        const double ramp_end = plateau_end + sig.ramp;
        if (t < ramp_end) {
            const double frac = (t - plateau_end) / sig.ramp;
            return sig.values[i] + frac * (sig.values[i + 1] - sig.values[i]);
        }
        start = ramp_end;
    }
    return sig.values.back();
}

double eval_modulation(const ModulationSignal& sig, double t) {
    double acc = sig.center;
    for (int k = -sig.half_terms; k <= sig.half_terms; ++k) {
        const auto idx = static_cast<std::size_t>(k + sig.half_terms);
        const double phase = (sig.mod_center + k * sig.nu) * t;
        acc += sig.c[idx] * std::cos(phase) + sig.s[idx] * std::sin(phase);
    }
    return acc;
}

double eval(const ControlSignal& sig, double t, Side side) {
    return std::visit(Overloaded{
                          [](const ConstantSignal& c) { return c.value; },
                          [t](const FourierSignal& f) { return eval_fourier(f, t); },
                          [t, side](const PiecewiseLinearSignal& p) {
                              return eval_piecewise(p, t, side);
                          },
                          [t](const ModulationSignal& m) { return eval_modulation(m, t); },
                      },
                      sig);
}

ControlSignal scaled(const ControlSignal& sig, double factor) {
    return std::visit(Overloaded{
                          [factor](ConstantSignal c) -> ControlSignal {
                              c.value *= factor;
                              return c;
                          },
                          [factor](FourierSignal f) -> ControlSignal {
                              f.c0 *= factor;
                              for (auto& v : f.c) v *= factor;
                              for (auto& v : f.s) v *= factor;
                              return f;
                          },
                          [factor](PiecewiseLinearSignal p) -> ControlSignal {
                              for (auto& v : p.values) v *= factor;
                              return p;
                          },
                          [factor](ModulationSignal m) -> ControlSignal {
                              for (auto& v : m.c) v *= factor;
                              for (auto& v : m.s) v *= factor;
                              return m;
                          },
                      },
                      sig);
}

FourierSignal sample_gaussian_fourier(RngSeed seed, int terms, double nu, double c0) {
    require(terms >= 1, "Fourier signal needs K >= 1");
    require(nu > 0.0, "Fourier base frequency must be positive");
    std::mt19937_64 rng(seed.value);
    std::normal_distribution<double> normal(0.0, 1.0);
    FourierSignal sig;
    sig.c0 = c0;
    sig.nu = nu;
    sig.seed = seed.value;
    sig.c.resize(terms);
    sig.s.resize(terms);
    for (int k = 0; k < terms; ++k) {
        sig.c[k] = normal(rng);
        sig.s[k] = normal(rng);
    }
    return sig;
}

ModulationSignal sample_modulation(RngSeed seed, double center, double mod_center, double nu,
                                   int half_terms, double rms) {
    require(half_terms >= 0, "modulation needs N >= 0");
    std::mt19937_64 rng(seed.value);
    std::normal_distribution<double> normal(0.0, 1.0);
    ModulationSignal sig;
    sig.center = center;
    sig.mod_center = mod_center;
    sig.nu = nu;
    sig.half_terms = half_terms;
    sig.seed = seed.value;
    const auto count = static_cast<std::size_t>(2 * half_terms + 1);
    sig.c.resize(count);
    sig.s.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        sig.c[k] = normal(rng);
        sig.s[k] = normal(rng);
    }
    const double current = sig.rms_amplitude();
    require(current > 0.0, "sampled modulation has zero amplitude");
    for (auto& v : sig.c) v *= rms / current;
    for (auto& v : sig.s) v *= rms / current;
    return sig;
}

double rms_over(const ControlSignal& sig, double duration, double quadrature_step) {
    const double integral =
        trapezoid(sig, duration, quadrature_step, [](double f) { return f * f; });
    return std::sqrt(integral / duration);
}

double mean_abs_over(const ControlSignal& sig, double duration, double quadrature_step) {
    return trapezoid(sig, duration, quadrature_step, [](double f) { return std::abs(f); }) /
           duration;
}

double default_quadrature_step(const ControlSignal& sig, double duration) {
    if (const auto* f = std::get_if<FourierSignal>(&sig); f && f->bandwidth() > 0.0)
        return 2.0 * kPi / f->bandwidth() / 1000.0;
    if (const auto* m = std::get_if<ModulationSignal>(&sig)) {
        const double top = std::max(std::abs(m->span_low()), std::abs(m->span_high()));
        if (top > 0.0) return 2.0 * kPi / top / 1000.0;
    }
    return duration / 1000.0;
}

ControlSignal scale_to_rms(const ControlSignal& sig, double target, double duration,
                           double quadrature_step) {
    const double current = rms_over(sig, duration, quadrature_step);
    if (!(current > 0.0)) throw ValidationError("cannot rescale a signal with zero RMS");
    return scaled(sig, target / current);
}

ControlSignal scale_to_rms(const ControlSignal& sig, double target, double duration) {
    return scale_to_rms(sig, target, duration, default_quadrature_step(sig, duration));
}

PiecewiseProtocol sample_piecewise_protocol(RngSeed seed, double duration, double mean_value,
                                            double switching_rate, double ramp, double grid) {
    require(duration > 0.0 && switching_rate > 0.0, "protocol duration and rate must be positive");
    std::mt19937_64 rng(seed.value);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double mean_len = 1.0 / switching_rate;
    const auto count = static_cast<std::size_t>(std::ceil(duration / mean_len)) + 1;
    std::vector<double> lengths(count), values(count), angles(count);
    for (std::size_t i = 0; i < count; ++i) {
        lengths[i] = 0.5 + unit(rng);
        values[i] = 2.0 * unit(rng);
        angles[i] = 2.0 * kPi * unit(rng);
    }
    const double sum = std::accumulate(lengths.begin(), lengths.end(), 0.0);
    for (auto& l : lengths) {
        l *= mean_len * static_cast<double>(count) / sum;
        if (grid > 0.0) l = std::max(grid, std::round(l / grid) * grid);
    }

    PiecewiseProtocol out;
    out.seed = seed.value;
    out.rabi = PiecewiseLinearSignal{values, lengths, ramp};
    out.phase = PiecewiseLinearSignal{angles, lengths, ramp};
    // Plateaus are always long enough to cover the window.
    while (out.rabi.total_duration() < duration) {
        out.rabi.durations.back() += mean_len;
        out.phase.durations.back() += mean_len;
    }
    const ControlSignal as_signal = out.rabi;
    const double current = mean_abs_over(as_signal, duration, duration / 20000.0);
    for (auto& v : out.rabi.values) v *= mean_value / current;
    return out;
}

void to_json(nlohmann::json& j, const ControlSignal& sig) {
    std::visit(Overloaded{
                   [&j](const ConstantSignal& c) {
                       j = {{"type", "constant"}, {"value", c.value}};
                   },
                   [&j](const FourierSignal& f) {
                       j = {{"type", "fourier"}, {"c0", f.c0}, {"c", f.c}, {"s", f.s}, {"nu", f.nu}};
                       if (f.seed) j["seed"] = *f.seed;
                   },
                   [&j](const PiecewiseLinearSignal& p) {
                       j = {{"type", "piecewise"},
                            {"values", p.values},
                            {"durations", p.durations},
                            {"ramp", p.ramp}};
                   },
                   [&j](const ModulationSignal& m) {
                       j = {{"type", "modulation"}, {"center", m.center},
                            {"mod_center", m.mod_center}, {"nu", m.nu},
                            {"half_terms", m.half_terms}, {"c", m.c}, {"s", m.s}};
                       if (m.seed) j["seed"] = *m.seed;
                   },
               },
               sig);
}

void from_json(const nlohmann::json& j, ControlSignal& sig) {
    const auto type = j.at("type").get<std::string>();
    if (type == "constant") {
        sig = ConstantSignal{j.at("value").get<double>()};
    } else if (type == "fourier") {
        FourierSignal f;
        f.c0 = j.value("c0", 0.0);
        f.c = j.at("c").get<std::vector<double>>();
        f.s = j.at("s").get<std::vector<double>>();
        f.nu = j.at("nu").get<double>();
        if (j.contains("seed")) f.seed = j.at("seed").get<std::uint64_t>();
        require(f.c.size() == f.s.size() && !f.c.empty(), "fourier: c and s must match, K >= 1");
        require(f.nu > 0.0, "fourier: nu must be positive");
        sig = f;
    } else if (type == "piecewise") {
        PiecewiseLinearSignal p;
        p.values = j.at("values").get<std::vector<double>>();
        p.durations = j.at("durations").get<std::vector<double>>();
        p.ramp = j.value("ramp", 0.0);
        require(!p.values.empty() && p.values.size() == p.durations.size(),
                "piecewise: values and durations must be non-empty and of equal length");
        require(p.ramp >= 0.0, "piecewise: ramp must be non-negative");
        for (double d : p.durations) require(d > 0.0, "piecewise: durations must be positive");
        sig = p;
    } else if (type == "modulation") {
        ModulationSignal m;
        m.center = j.at("center").get<double>();
        m.mod_center = j.at("mod_center").get<double>();
        m.nu = j.value("nu", 0.0);
        m.half_terms = j.at("half_terms").get<int>();
        m.c = j.at("c").get<std::vector<double>>();
        m.s = j.at("s").get<std::vector<double>>();
        if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
        require(m.half_terms >= 0 &&
                    m.c.size() == static_cast<std::size_t>(2 * m.half_terms + 1) &&
                    m.s.size() == m.c.size(),
                "modulation: need 2N+1 coefficient pairs");
        sig = m;
    } else {
        throw ValidationError("unknown signal type '" + type + "'");
    }
}

} // namespace mebench
