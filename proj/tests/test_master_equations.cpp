#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mebench/master_equations.hpp"

using namespace mebench;

namespace {

Matrix proj(int dim, int a, int b) {
    Matrix m = Matrix::Zero(dim, dim);
    m(a, b) = 1.0;
    return m;
}

Matrix random_density(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
    Matrix rho = a * a.adjoint();
    return rho / rho.trace();
}

OpenSystem qubit(double w, double g, std::vector<DriveSpec> drives = {}) {
    const auto q = LevelSystem::qubit(w);
    return OpenSystem(q, {make_transition(q, 0, 1, g)}, BathSpec{10.0 * w}, std::move(drives));
}

DriveSpec constant_drive(double wd, double rabi) {
    DriveSpec d;
    d.omega_d = wd;
    d.rabi = ConstantSignal{rabi};
    return d;
}

} // namespace

TEST_SUITE("master_equations") {

TEST_CASE("dissipator on basis states") {
    const Matrix s = proj(2, 0, 1);
    CHECK((dissipator(s, proj(2, 1, 1)) - (proj(2, 0, 0) - proj(2, 1, 1))).norm() == 0.0);
    CHECK(dissipator(s, proj(2, 0, 0)).norm() == 0.0);
    CHECK((dissipator(s, proj(2, 1, 0)) + 0.5 * proj(2, 1, 0)).norm() == 0.0);
    CHECK_THROWS_AS(dissipator(s, Matrix::Identity(3, 3)), ValidationError);

    std::mt19937_64 rng(1);
    const Matrix rho = random_density(3, rng);
    const Matrix d = dissipator(proj(3, 0, 2), rho);
    CHECK(std::abs(d.trace()) < 1e-15);
    CHECK(hermiticity_defect(d) < 1e-15);
}

TEST_CASE("density matrix validation") {
    CHECK(DensityMatrix::basis_state(2, 1).population(1) == 1.0);
    CHECK(DensityMatrix(Matrix::Identity(2, 2) / 2.0).population(1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(DensityMatrix(Matrix::Identity(2, 2)), ValidationError);
    CHECK_THROWS_AS(DensityMatrix(proj(2, 0, 0) + proj(2, 0, 1)), ValidationError);
}

TEST_CASE("MME free decay matches the exponential") {
    const double w = 8.0 * kPi;
    const BathSpec bath{10.0 * w};
    const auto q = LevelSystem::qubit(w);
    const OpenSystem sys(q, {make_transition(q, 0, 1, coupling_for_rate(1e-2, bath, w))}, bath);
    IntegrationOptions io;
    io.dt = 1e-3;
    io.record_every = 10;
    const auto res = integrate(MarkovianGenerator(sys), DensityMatrix::basis_state(2, 1), 0.0, 10.0, io);
    double worst = 0.0;
    for (std::size_t i = 0; i < res.times.size(); ++i)
        worst = std::max(worst, std::abs(res.populations[1][i] - std::exp(-1e-2 * res.times[i])));
    CHECK(worst < 1e-10);
    for (double tr : res.trace) CHECK(std::abs(tr - 1.0) < 1e-12);
    CHECK(excited_population(res, 1) == res.populations[1]);
}

TEST_CASE("MME without damping is von Neumann evolution") {
    const double w = 2.0;
    const OpenSystem sys = qubit(w, 0.0, {constant_drive(w, 0.1)});
    std::mt19937_64 rng(2);
    const Matrix rho = random_density(2, rng);
    for (double t : {0.0, 0.3, 1.1}) CHECK((MarkovianGenerator(sys)(t, rho) - HamiltonianGenerator(sys)(t, rho)).norm() < 1e-14);
}

TEST_CASE("Lamb shift rotates coherences only") {
    const double w = 3.0;
    const OpenSystem sys = qubit(w, 0.3);
    const double delta = sys.shift(0);
    CHECK(delta == doctest::Approx(sys.rate(0) * std::log(9.0) / (2.0 * kPi)));
    Vector psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    IntegrationOptions io;
    io.dt = 1e-3;
    io.record_every = 1000;
    GeneratorOptions off;
    off.lamb_shift = false;
    const auto with = integrate(MarkovianGenerator(sys), DensityMatrix::pure(psi), 0.0, 5.0, io);
    const auto without = integrate(MarkovianGenerator(sys, off), DensityMatrix::pure(psi), 0.0, 5.0, io);
    for (std::size_t i = 0; i < with.times.size(); ++i) CHECK(std::abs(with.populations[1][i] - without.populations[1][i]) < 1e-13);
    const cplx ratio = with.final_state(0, 1) / without.final_state(0, 1);
    CHECK(std::abs(ratio) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(std::arg(ratio)) == doctest::Approx(delta * 5.0).epsilon(1e-8));
}

TEST_CASE("AME frame of the bare Hamiltonian is the bare frame") {
    const OpenSystem sys = qubit(2.0, 0.3);
    const AMEFrame f = ame_frame(0.4, sys);
    REQUIRE(f.transitions.size() == 1);
    const auto& tr = f.transitions[0];
    CHECK(tr.frequency == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(tr.rate == doctest::Approx(sys.rate(0)).epsilon(1e-13));
    CHECK(tr.shift == doctest::Approx(sys.shift(0)).epsilon(1e-12));
    CHECK((tr.sigma - proj(2, 0, 1)).norm() < 1e-15);
}

TEST_CASE("AME frame of a statically dressed qubit") {
    // At t = 0 the carrier is 1, so H = (w/2) sz + Omega sx.
    const double w = 2.0, om = 0.7, g = 0.3;
    const OpenSystem sys = qubit(w, g, {constant_drive(5.0, om)});
    const AMEFrame f = ame_frame(0.0, sys);
    REQUIRE(f.transitions.size() == 1);
    const double wt = std::sqrt(w * w + 4.0 * om * om);
    const auto& tr = f.transitions[0];
    CHECK(tr.frequency == doctest::Approx(wt).epsilon(1e-13));
    CHECK(tr.coupling == doctest::Approx(g * w / wt).epsilon(1e-12));
    CHECK(tr.rate == doctest::Approx(2.0 * kPi * std::pow(g * w / wt, 2) / (10.0 * w)).epsilon(1e-12));
    CHECK(tr.shift == doctest::Approx(tr.rate / (2.0 * kPi) * std::log(10.0 * w / wt - 1.0)).epsilon(1e-12));
    const Matrix v = f.eigenvectors;
    CHECK((v.adjoint() * v - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("dressed dissipator moves population down the dressed ladder") {
    const double w = 2.0, om = 0.9;
    const OpenSystem sys = qubit(w, 0.3, {constant_drive(5.0, om)});
    const AMEFrame f = ame_frame(0.0, sys);
    const Vector lo = f.eigenvectors.col(0), hi = f.eigenvectors.col(1);
    GeneratorOptions opts;
    opts.lamb_shift = false;
    const AdiabaticGenerator ame(sys, opts);
    const Matrix up = hi * hi.adjoint();
    const Matrix flow = ame(0.0, up);
    const double rate = f.transitions[0].rate;
    CHECK(std::real(hi.dot(flow * hi)) == doctest::Approx(-rate).epsilon(1e-10));
    CHECK(std::real(lo.dot(flow * lo)) == doctest::Approx(rate).epsilon(1e-10));
    const Matrix down = lo * lo.adjoint();
    CHECK(std::abs(std::real(lo.dot(ame(0.0, down) * lo))) < 1e-14);
}

TEST_CASE("degenerate instantaneous spectrum aborts the AME") {
    const auto q = LevelSystem::qubit(1.0);
    ModulationSignal m;
    m.center = 1.0;
    m.mod_center = 1.0;
    m.c = {1.0};
    m.s = {0.0};
    const OpenSystem sys(q, {make_transition(q, 0, 1, 0.1)}, BathSpec{10.0}, {}, FrequencyModulation{0, m});
    CHECK_NOTHROW(ame_frame(0.0, sys));
    CHECK_THROWS_AS(ame_frame(kPi, sys), DegenerateFrameError);
}

TEST_CASE("AME equals MME for a constant Hamiltonian") {
    const auto v = LevelSystem::vee(5.0, 2.0);
    const OpenSystem sys(v, {make_transition(v, 0, 2, 0.2), make_transition(v, 0, 1, 0.3)}, BathSpec{50.0});
    const MarkovianGenerator mme(sys);
    const AdiabaticGenerator ame(sys);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
        const Matrix rho = random_density(3, rng);
        CHECK((mme(0.2 * k, rho) - ame(0.2 * k, rho)).norm() < 1e-12);
    }
}

TEST_CASE("generators are linear and trace preserving") {
    const OpenSystem sys = qubit(2.0, 0.3, {constant_drive(2.0, 0.5)});
    std::mt19937_64 rng(4);
    const Matrix r1 = random_density(2, rng), r2 = random_density(2, rng);
    const cplx a(0.3, -0.2), b(1.7, 0.4);
    const MarkovianGenerator mme(sys);
    const AdiabaticGenerator ame(sys);
    for (double t : {0.1, 0.8}) {
        CHECK((mme(t, a * r1 + b * r2) - (a * mme(t, r1) + b * mme(t, r2))).norm() < 1e-12);
        CHECK((ame(t, a * r1 + b * r2) - (a * ame(t, r1) + b * ame(t, r2))).norm() < 1e-12);
        CHECK(std::abs(mme(t, r1).trace()) < 1e-13);
        CHECK(std::abs(ame(t, r1).trace()) < 1e-13);
        CHECK(hermiticity_defect(ame(t, r1)) < 1e-13);
    }
}

TEST_CASE("AME populations do not depend on the eigenvector gauge") {
    const double w = 8.0 * kPi;
    DriveSpec d = constant_drive(w, 0.0);
    d.rabi = sample_gaussian_fourier(RngSeed{6}, 5, w / 40.0);
    d.rabi = scale_to_rms(d.rabi, w / 8.0, 0.5);
    const OpenSystem sys = qubit(w, 0.5, {d});
    IntegrationOptions io;
    io.dt = 0.25 / 1000.0;
    io.record_every = 20;
    const auto ref = integrate(AdiabaticGenerator(sys), DensityMatrix::basis_state(2, 0), 0.0, 0.5, io);
    const auto rnd = integrate(AdiabaticGenerator(sys, {}, 1234), DensityMatrix::basis_state(2, 0), 0.0, 0.5, io);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.times.size(); ++i) worst = std::max(worst, std::abs(ref.populations[1][i] - rnd.populations[1][i]));
    CHECK(worst < 1e-10);
    for (double e : ref.min_eigenvalue) CHECK(e >= -1e-9);
}

TEST_CASE("RK4 is fourth order") {
    const double w = 4.0;
    const OpenSystem sys = qubit(w, 0.4, {constant_drive(w, 0.8)});
    auto final_p = [&](double dt) {
        IntegrationOptions io;
        io.dt = dt;
        io.record_every = 1;
        return integrate(MarkovianGenerator(sys), DensityMatrix::basis_state(2, 0), 0.0, 2.0, io).populations[1].back();
    };
    const double ref = final_p(0.05 / 32.0);
    const double e1 = std::abs(final_p(0.05) - ref);
    const double e2 = std::abs(final_p(0.025) - ref);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(2.0 / 16.0));
}

TEST_CASE("weak resonant drive follows the rotating-wave Rabi formula") {
    const double w = 8.0 * kPi, om = w / 100.0;
    const OpenSystem sys = qubit(w, 0.0, {constant_drive(w, om)});
    IntegrationOptions io;
    io.dt = 0.25 / 400.0;
    io.record_every = 40;
    const double T = 2.0 * 2.0 * kPi / om;
    const auto res = integrate(HamiltonianGenerator(sys), DensityMatrix::basis_state(2, 0), 0.0, T, io);
    double worst = 0.0;
    for (std::size_t i = 0; i < res.times.size(); ++i)
        worst = std::max(worst, std::abs(res.populations[1][i] - std::pow(std::sin(om * res.times[i] / 2.0), 2)));
    CHECK(worst < 0.02);
}

TEST_CASE("integrator contracts") {
    const OpenSystem sys = qubit(2.0, 0.1);
    IntegrationOptions io;
    io.dt = 0.3;
    CHECK_THROWS_AS(integrate(MarkovianGenerator(sys), DensityMatrix::basis_state(2, 1), 0.0, 1.0, io), ValidationError);
    CHECK(step_count(1.0, 0.25) == 4);
    io.dt = 0.25;
    io.tracked_levels = {1};
    const auto res = integrate(MarkovianGenerator(sys), DensityMatrix::basis_state(2, 1), 0.0, 1.0, io);
    CHECK(res.times.size() == 5);
    CHECK_THROWS_AS(excited_population(res, 0), ValidationError);
    std::ostringstream csv;
    write_csv(csv, res);
    CHECK(csv.str().rfind("t,p_1,trace,min_eigenvalue\n", 0) == 0);

    const Generator blowup = [](double, const Matrix& rho, Side) -> Matrix { return rho * cplx(std::nan(""), 0.0); };
    CHECK_THROWS_AS(integrate(blowup, DensityMatrix::basis_state(2, 1), 0.0, 1.0, io), SolverError);
}

}
