#include <doctest.h>

#include <cmath>
#include <random>

#include "mebench/mps.hpp"

using namespace mebench;

namespace {

Matrix random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    return (a + a.adjoint()) / 2.0;
}

Vector basis(int n, int k) {
    Vector v = Vector::Zero(n);
    v(k) = 1.0;
    return v;
}

// Dense embedding of a two-site gate acting on sites (b, b+1).
Matrix embed(const Matrix& gate, const std::vector<int>& dims, int b) {
    int left = 1, right = 1;
    for (int i = 0; i < b; ++i) left *= dims[static_cast<std::size_t>(i)];
    for (std::size_t i = static_cast<std::size_t>(b) + 2; i < dims.size(); ++i) right *= dims[i];
    return kron(kron(Matrix::Identity(left, left), gate), Matrix::Identity(right, right));
}

} // namespace

TEST_SUITE("mps") {

TEST_CASE("initial product state") {
    const MPSState s = init_state(basis(2, 1), 4, 3);
    CHECK(s.length() == 5);
    CHECK(s.phys_dim(0) == 2);
    CHECK(s.phys_dim(4) == 3);
    CHECK(s.max_bond_dim() == 1);
    CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-15));
    const Matrix rho = reduced_system_density(s);
    CHECK((rho - basis(2, 1) * basis(2, 1).adjoint()).norm() < 1e-15);
    const auto pops = site_populations(s);
    CHECK(pops[0](1) == doctest::Approx(1.0));
    for (int i = 1; i < 5; ++i) CHECK(pops[static_cast<std::size_t>(i)](0) == doctest::Approx(1.0));
    CHECK(fock_occupancy_check(s) == 0.0);
    CHECK_THROWS_AS(init_state(basis(2, 1), 4, 1), ValidationError);
    CHECK_THROWS_AS(init_state(2.0 * basis(2, 1), 4, 3), ValidationError);
}

TEST_CASE("identity gate leaves the state alone") {
    std::mt19937_64 rng(1);
    MPSState s = init_state(basis(2, 0), 3, 3);
    TruncationPolicy p;
    TruncationLog log;
    apply_two_site_gate(s, 0, unitary_exponential(random_hermitian(6, rng), 0.7), p, log);
    apply_two_site_gate(s, 1, unitary_exponential(random_hermitian(9, rng), 0.7), p, log);
    const Vector before = to_dense(s);
    const auto dims = s.bond_dims();
    for (int b : {0, 1, 2}) apply_two_site_gate(s, b, Matrix::Identity(s.phys_dim(b) * s.phys_dim(b + 1), s.phys_dim(b) * s.phys_dim(b + 1)), p, log);
    CHECK((to_dense(s) - before).norm() < 1e-13);
    CHECK(s.bond_dims() == dims);
}

TEST_CASE("swap gate on a product state stays exact at bond dimension one") {
    MPSState s = MPSState::product({basis(3, 2), basis(3, 0)});
    Matrix swap = Matrix::Zero(9, 9);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) swap(b * 3 + a, a * 3 + b) = 1.0;
    TruncationPolicy p;
    p.chi_max = 1;
    TruncationLog log;
    apply_two_site_gate(s, 0, swap, p, log);
    CHECK(s.max_bond_dim() == 1);
    CHECK(log.discarded_weight == 0.0);
    CHECK((to_dense(s) - kron(basis(3, 0), basis(3, 2))).norm() < 1e-15);
}

TEST_CASE("random gates against dense simulation") {
    std::mt19937_64 rng(7);
    const std::vector<int> dims{2, 3, 3, 3, 3};
    MPSState s = init_state(basis(2, 1), 4, 3);
    Vector dense = to_dense(s);
    TruncationPolicy p;
    p.chi_max = 9;
    p.svd_cutoff = 0.0;
    TruncationLog log;
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int b = 0; b < 4; ++b) {
            const Matrix u = unitary_exponential(random_hermitian(dims[b] * dims[b + 1], rng), 0.4);
            apply_two_site_gate(s, b, u, p, log, Sweep::Right);
            dense = embed(u, dims, b) * dense;
        }
        for (int b = 3; b >= 0; --b) {
            const Matrix u = unitary_exponential(random_hermitian(dims[b] * dims[b + 1], rng), 0.4);
            apply_two_site_gate(s, b, u, p, log, Sweep::Left);
            dense = embed(u, dims, b) * dense;
        }
    }
    CHECK(s.max_bond_dim() <= 9);
    CHECK(1.0 - std::abs(to_dense(s).dot(dense)) < 1e-12);
}

TEST_CASE("two-site d=3 pair against the dense product") {
    std::mt19937_64 rng(8);
    Vector a = Vector::Random(3), b = Vector::Random(3);
    a.normalize();
    b.normalize();
    MPSState s = MPSState::product({a, b});
    const Matrix u = unitary_exponential(random_hermitian(9, rng), 1.0);
    TruncationPolicy p;
    p.chi_max = 9;
    TruncationLog log;
    apply_two_site_gate(s, 0, u, p, log);
    const Vector expect = u * kron(a, b);
    CHECK(1.0 - std::abs(to_dense(s).dot(expect)) < 1e-12);
}

TEST_CASE("truncation bookkeeping") {
    std::mt19937_64 rng(9);
    MPSState s = MPSState::product({basis(3, 0), basis(3, 1)});
    TruncationPolicy p;
    p.chi_max = 1;
    p.abort_discarded_weight = 1.0;
    TruncationLog log;
    apply_two_site_gate(s, 0, unitary_exponential(random_hermitian(9, rng), 1.0), p, log);
    CHECK(s.max_bond_dim() == 1);
    CHECK(log.discarded_weight > 0.0);
    CHECK(log.truncations >= 1);
    CHECK(1.0 - norm(s) <= log.discarded_weight + 1e-15);

    MPSState t = MPSState::product({basis(3, 0), basis(3, 1)});
    TruncationLog strict;
    p.abort_discarded_weight = 1e-6;
    CHECK_THROWS_AS(apply_two_site_gate(t, 0, unitary_exponential(random_hermitian(9, rng), 1.0), p, strict), SolverError);
    CHECK_THROWS_AS(apply_two_site_gate(t, 1, Matrix::Identity(9, 9), p, strict), ValidationError);
    CHECK_THROWS_AS(apply_two_site_gate(t, 0, Matrix::Identity(4, 4), p, strict), ValidationError);
}

TEST_CASE("gate observer sees the two-site wavefunction") {
    MPSState s = init_state(basis(2, 1), 2, 3);
    TruncationPolicy p;
    TruncationLog log;
    int calls = 0;
    const Matrix id = Matrix::Identity(6, 6);
    apply_two_site_gate(s, 0, {&id, &id}, p, log, Sweep::Right, [&](int stage, const Matrix& theta) {
        CHECK(stage == calls);
        ++calls;
        CHECK(theta.rows() == 6);
        const Matrix rho = theta * theta.adjoint();
        CHECK(std::real(rho(3, 3)) == doctest::Approx(1.0));
    });
    CHECK(calls == 2);
}

TEST_CASE("reduced density after entangling stays a valid state") {
    std::mt19937_64 rng(10);
    MPSState s = init_state(basis(3, 2), 3, 3);
    TruncationPolicy p;
    TruncationLog log;
    for (int b : {0, 1, 2, 1, 0}) apply_two_site_gate(s, b, unitary_exponential(random_hermitian(9, rng), 0.5), p, log, Sweep::Left);
    const Matrix rho = reduced_system_density(s);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    CHECK(hermiticity_defect(rho) < 1e-14);
    // against a partial trace of the dense vector
    const Vector psi = to_dense(s);
    const int rest = static_cast<int>(psi.size()) / 3;
    Matrix dense_rho = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dense_rho(i, j) = psi.segment(i * rest, rest).dot(psi.segment(j * rest, rest));
    dense_rho = dense_rho.transpose().eval();
    CHECK((rho - dense_rho / dense_rho.trace()).norm() < 1e-12);
}

TEST_CASE("canonical forms and overlaps") {
    std::mt19937_64 rng(11);
    MPSState s = init_state(basis(2, 0), 4, 3);
    TruncationPolicy p;
    TruncationLog log;
    for (int b = 0; b < 4; ++b) apply_two_site_gate(s, b, unitary_exponential(random_hermitian(s.phys_dim(b) * s.phys_dim(b + 1), rng), 0.8), p, log);
    const Vector before = to_dense(s);
    for (int c : {0, 4, 2}) {
        s.move_center(c);
        CHECK(s.center() == c);
        CHECK(s.center_norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((to_dense(s) - before).norm() < 1e-12);
    }
    s.canonicalize(1);
    CHECK((to_dense(s) - before).norm() < 1e-12);
    CHECK(std::abs(overlap(s, s) - 1.0) < 1e-12);
    s.site(s.center()).data[0] *= 2.0;
    const double n0 = s.normalize();
    CHECK(n0 > 0.0);
    CHECK(norm(s) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("checkpoint JSON round trip") {
    std::mt19937_64 rng(12);
    MPSState s = init_state(basis(2, 1), 3, 3);
    TruncationPolicy p;
    TruncationLog log;
    apply_two_site_gate(s, 1, unitary_exponential(random_hermitian(9, rng), 0.8), p, log);
    const nlohmann::json j = s;
    const MPSState back = j.get<MPSState>();
    CHECK((to_dense(back) - to_dense(s)).norm() == 0.0);
    CHECK(back.center() == s.center());
    nlohmann::json bad = j;
    bad["sites"][0]["right"] = 7;
    CHECK_THROWS_AS(bad.get<MPSState>(), ValidationError);
}

}
