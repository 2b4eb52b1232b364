#include "mebench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mebench/types.hpp"

namespace mebench {

double effect_integral(const std::vector<double>& ref, const std::vector<double>& test,
                       const std::vector<double>& grid) {
    require(ref.size() == grid.size() && test.size() == grid.size(),
            "effect integral: series are not aligned with the grid");
    require(grid.size() >= 2, "effect integral needs at least two samples");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double h = grid[i + 1] - grid[i];
        require(h > 0.0, "effect integral: grid must be strictly increasing");
        total += 0.5 * h * (std::abs(ref[i] - test[i]) + std::abs(ref[i + 1] - test[i + 1]));
    }
    return total;
}

std::optional<double> relative_error(double delta1, double delta0) {
    require(std::isfinite(delta0) && std::isfinite(delta1) && delta0 >= 0.0 && delta1 >= 0.0,
            "effect integrals must be finite and non-negative");
    if (delta0 == 0.0) return std::nullopt;
    return std::abs(delta1 - delta0) / delta0;
}

SlopeFit loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size(), "slope fit: x and y differ in length");
    require(xs.size() >= 3, "slope fit needs at least three points");
    const auto n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(xs[i] > 0.0 && ys[i] > 0.0, "slope fit needs positive data");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
        sx += lx.back();
        sy += ly.back();
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    require(sxx > 0.0, "slope fit needs distinct x values");
    SlopeFit fit{};
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

std::vector<double> resample(const std::vector<double>& times, const std::vector<double>& values,
                             const std::vector<double>& target) {
    require(times.size() == values.size() && times.size() >= 1, "resample: malformed source series");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        require(times[i + 1] > times[i], "resample: source grid must be strictly increasing");
    const double tol = 1e-12 * std::max(1.0, std::abs(times.back()));
    std::vector<double> out;
    out.reserve(target.size());
    for (double t : target) {
        if (t < times.front() - tol || t > times.back() + tol)
            throw ValidationError("resample: target time outside the source span (no extrapolation)");
        auto it = std::lower_bound(times.begin(), times.end(), t);
        if (it != times.end() && std::abs(*it - t) <= tol) {
            out.push_back(values[static_cast<std::size_t>(it - times.begin())]);
            continue;
        }
        if (it == times.begin()) {
            out.push_back(values.front());
            continue;
        }
        if (it == times.end()) {
            out.push_back(values.back());
            continue;
        }
        const auto hi = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
        out.push_back((1.0 - w) * values[hi - 1] + w * values[hi]);
    }
    return out;
}

void AlignedSeries::validate() const {
    require(times.size() >= 2, "aligned series needs at least two samples");
    require(p_h.size() == times.size() && p_exact.size() == times.size() && p_me.size() == times.size(),
            "aligned series have different lengths");
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    require(finite(times) && finite(p_h) && finite(p_exact) && finite(p_me), "aligned series contain non-finite values");
}

ErrorReport error_report(const AlignedSeries& series) {
    series.validate();
    ErrorReport r;
    r.delta0 = effect_integral(series.p_h, series.p_exact, series.times);
    r.delta1 = effect_integral(series.p_h, series.p_me, series.times);
    r.epsilon = relative_error(r.delta1, r.delta0);
    r.duration = series.times.back() - series.times.front();
    return r;
}

void to_json(nlohmann::json& j, const ErrorReport& report) {
    j = {{"delta0", report.delta0},
         {"delta1", report.delta1},
         {"epsilon", report.epsilon ? nlohmann::json(*report.epsilon) : nlohmann::json(nullptr)},
         {"epsilon_status", report.epsilon ? "ok" : "undefined"},
         {"duration", report.duration},
         {"metadata", report.metadata}};
}

} // namespace mebench
