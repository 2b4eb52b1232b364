#include <doctest.h>

#include <cmath>

#include "mebench/control_signals.hpp"

using namespace mebench;

TEST_SUITE("control_signals") {

TEST_CASE("Fourier evaluation") {
    FourierSignal dc{1.0, {0.0}, {0.0}, 1.0, std::nullopt};
    for (double t : {0.0, 0.3, 17.0}) CHECK(eval_fourier(dc, t) == 1.0);

    FourierSignal c1{0.0, {1.0}, {0.0}, 2.0, std::nullopt};
    CHECK(eval_fourier(c1, 0.0) == 1.0);
    CHECK(std::abs(eval_fourier(c1, kPi / 4.0)) < 1e-15);
}

TEST_CASE("Fourier sample against long double summation") {
    const FourierSignal sig = sample_gaussian_fourier(RngSeed{42}, 20, 0.3);
    for (double t : {0.0, 0.77, 5.1, 31.4}) {
        long double acc = 0.0L;
        for (int k = 1; k <= 20; ++k) {
            const long double ph = static_cast<long double>(k) * 0.3L * static_cast<long double>(t);
            acc += sig.c[k - 1] * std::cos(ph) + sig.s[k - 1] * std::sin(ph);
        }
        CHECK(std::abs(eval_fourier(sig, t) - static_cast<double>(acc)) < 1e-13);
    }
}

TEST_CASE("Fourier periodicity and bandwidth") {
    const FourierSignal sig = sample_gaussian_fourier(RngSeed{3}, 20, 8.0 * kPi / 160.0);
    CHECK(sig.bandwidth() == doctest::Approx(8.0 * kPi / 8.0).epsilon(1e-15));
    for (double t : {0.1, 1.3, 2.9}) CHECK(eval_fourier(sig, t + sig.period()) == doctest::Approx(eval_fourier(sig, t)).epsilon(1e-11));
}

TEST_CASE("Gaussian sampling is seeded and unit variance") {
    const auto a = sample_gaussian_fourier(RngSeed{9}, 20, 1.0);
    const auto b = sample_gaussian_fourier(RngSeed{9}, 20, 1.0);
    CHECK(a.c == b.c);
    CHECK(a.s == b.s);
    CHECK(a.c0 == 0.0);
    CHECK(nlohmann::json(ControlSignal{a}).dump() == nlohmann::json(ControlSignal{b}).dump());

    double sum = 0.0, sq = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double c1 = sample_gaussian_fourier(RngSeed{static_cast<std::uint64_t>(1000 + i)}, 1, 1.0).c[0];
        sum += c1;
        sq += c1 * c1;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.05);
    CHECK(var > 0.94);
    CHECK(var < 1.06);
}

TEST_CASE("piecewise evaluation") {
    PiecewiseLinearSignal p{{1.0, 3.0, -2.0}, {1.0, 2.0, 1.0}, 0.5};
    CHECK(p.total_duration() == 5.0);
    CHECK(eval_piecewise(p, 0.5) == 1.0);
    CHECK(eval_piecewise(p, 1.25) == doctest::Approx(2.0));
    CHECK(eval_piecewise(p, 2.0) == 3.0);
    CHECK(eval_piecewise(p, 3.75) == doctest::Approx(0.5));
    CHECK(eval_piecewise(p, 4.5) == -2.0);
    CHECK_THROWS_AS(eval_piecewise(p, 5.1), ValidationError);
    CHECK_THROWS_AS(eval_piecewise(p, -0.1), ValidationError);

    PiecewiseLinearSignal sharp{{1.0, 3.0}, {1.0, 1.0}, 0.0};
    CHECK(eval_piecewise(sharp, 1.0) == 3.0);
    CHECK(eval_piecewise(sharp, 1.0, Side::Left) == 1.0);
    CHECK(eval_piecewise(sharp, 0.999) == 1.0);
}

TEST_CASE("piecewise ramps are continuous with bounded slope") {
    PiecewiseLinearSignal p{{0.0, 4.0, 1.0}, {0.3, 0.2, 0.4}, 0.1};
    const double h = 1e-6;
    double max_slope = 0.0;
    for (double t = h; t < p.total_duration() - h; t += 1e-3) {
        const double a = eval_piecewise(p, t), b = eval_piecewise(p, t + h);
        CHECK(std::abs(b - a) < 40.0 * h + 1e-12);
        max_slope = std::max(max_slope, std::abs(b - a) / h);
    }
    CHECK(max_slope == doctest::Approx(40.0).epsilon(1e-6));
}

TEST_CASE("RMS of simple signals") {
    CHECK(rms_over(ConstantSignal{-2.5}, 3.0, 0.01) == doctest::Approx(2.5).epsilon(1e-14));
    FourierSignal cosine{0.0, {1.0}, {0.0}, 2.0, std::nullopt};
    CHECK(std::abs(rms_over(cosine, 5.0 * kPi, kPi / 2000.0) - 1.0 / std::sqrt(2.0)) < 1e-10);
    CHECK_THROWS_AS(rms_over(cosine, 0.0, 0.1), ValidationError);
}

TEST_CASE("RMS quadrature against a refined oracle") {
    const ControlSignal sig = sample_gaussian_fourier(RngSeed{5}, 20, 0.4);
    const double T = 7.3;
    const double h = default_quadrature_step(sig, T);
    CHECK(rms_over(sig, T, h) == doctest::Approx(rms_over(sig, T, h / 100.0)).epsilon(1e-6));
}

TEST_CASE("scale_to_rms") {
    const ControlSignal two = ConstantSignal{2.0};
    CHECK(std::get<ConstantSignal>(scale_to_rms(two, 1.0, 4.0)).value == doctest::Approx(1.0).epsilon(1e-14));

    const ControlSignal sig = sample_gaussian_fourier(RngSeed{11}, 20, 0.5);
    const double T = 6.0;
    const ControlSignal s = scale_to_rms(sig, 0.7, T);
    CHECK(rms_over(s, T, default_quadrature_step(s, T)) == doctest::Approx(0.7).epsilon(1e-12));
    const double ratio = eval(s, 0.4) / eval(sig, 0.4);
    for (double t : {0.9, 2.2, 5.5}) CHECK(eval(s, t) / eval(sig, t) == doctest::Approx(ratio).epsilon(1e-12));
    // idempotent
    const ControlSignal again = scale_to_rms(s, 0.7, T);
    CHECK(std::abs(eval(again, 1.7) - eval(s, 1.7)) < 1e-12);
    CHECK_THROWS_AS(scale_to_rms(ConstantSignal{0.0}, 1.0, 1.0), ValidationError);
}

TEST_CASE("modulation signal") {
    ModulationSignal m;
    m.center = 5.0;
    m.mod_center = 2.0;
    m.nu = 0.1;
    m.half_terms = 1;
    m.c = {0.0, 0.0, 0.0};
    m.s = {0.0, 0.0, 0.0};
    CHECK(eval_modulation(m, 1.3) == 5.0);

    ModulationSignal single;
    single.center = 5.0;
    single.mod_center = 2.0;
    single.c = {0.3};
    single.s = {0.0};
    for (double t : {0.0, 0.4, 1.9}) CHECK(eval_modulation(single, t) == doctest::Approx(5.0 + 0.3 * std::cos(2.0 * t)));

    ModulationSignal pair = single;
    pair.c = {0.3};
    pair.s = {0.4};
    CHECK(pair.rms_amplitude() == doctest::Approx(std::sqrt(0.25 / 2.0)));

    const ModulationSignal sampled = sample_modulation(RngSeed{2}, 1.0, 0.5, 0.025, 10, 1.0 / 60.0);
    CHECK(sampled.rms_amplitude() == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
    CHECK(sampled.span_high() - sampled.span_low() == doctest::Approx(0.5));
}

TEST_CASE("seeded piecewise protocol matches its statistics") {
    const double w0 = 2.0 * kPi;
    const double T = 8.0;
    const double grid = 1.0 / 8000.0;
    const PiecewiseProtocol p = sample_piecewise_protocol(RngSeed{1}, T, w0 / 2.3, 0.75 * w0 / (2.0 * kPi), 0.0, grid);
    const ControlSignal rabi = p.rabi;
    CHECK(mean_abs_over(rabi, T, T / 20000.0) == doctest::Approx(w0 / 2.3).epsilon(1e-9));
    CHECK(p.rabi.switching_rate() == doctest::Approx(0.75).epsilon(0.05));
    double edge = 0.0;
    for (std::size_t i = 0; i + 1 < p.rabi.durations.size(); ++i) {
        edge += p.rabi.durations[i];
        CHECK(std::abs(edge / grid - std::round(edge / grid)) < 1e-6);
    }
    const PiecewiseProtocol q = sample_piecewise_protocol(RngSeed{1}, T, w0 / 2.3, 0.75, 0.0, grid);
    CHECK(nlohmann::json(ControlSignal{q.rabi}).dump() == nlohmann::json(ControlSignal{p.rabi}).dump());
}

TEST_CASE("signal JSON round trip") {
    const std::vector<ControlSignal> sigs{
        ConstantSignal{1.5},
        sample_gaussian_fourier(RngSeed{4}, 3, 0.2),
        PiecewiseLinearSignal{{1.0, 2.0}, {0.5, 0.25}, 0.125},
        sample_modulation(RngSeed{8}, 3.0, 1.0, 0.1, 2, 0.05)};
    for (const auto& s : sigs) {
        const nlohmann::json j = s;
        CHECK(nlohmann::json(j.get<ControlSignal>()).dump() == j.dump());
    }
    CHECK_THROWS_AS(nlohmann::json({{"type", "square"}}).get<ControlSignal>(), ValidationError);
}

}
