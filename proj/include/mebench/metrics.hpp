// metrics.hpp - Effect integrals, relative error and power-law fits

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mebench {

// Trapezoid integral of |ref - test| over the shared grid.
double effect_integral(const std::vector<double>& ref, const std::vector<double>& test,
                       const std::vector<double>& grid);

// |d1 - d0| / d0; empty when d0 is zero (the error is undefined, not infinite).
std::optional<double> relative_error(double delta1, double delta0);

struct SlopeFit {
    double slope;
    double intercept;
    double residual;  // RMS deviation of log y from the fitted line
};

// Least squares of log y against log x.
SlopeFit loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Linear interpolation of (times, values) onto target; no extrapolation.
std::vector<double> resample(const std::vector<double>& times, const std::vector<double>& values,
                             const std::vector<double>& target);

struct AlignedSeries {
    std::vector<double> times;
    std::vector<double> p_h;
    std::vector<double> p_exact;
    std::vector<double> p_me;

    void validate() const;
};

struct ErrorReport {
    double delta0{0.0};
    double delta1{0.0};
    std::optional<double> epsilon;
    double duration{0.0};
    nlohmann::json metadata = nlohmann::json::object();
};

ErrorReport error_report(const AlignedSeries& series);

void to_json(nlohmann::json& j, const ErrorReport& report);

} // namespace mebench
