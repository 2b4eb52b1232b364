#include "mebench/chain_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mebench/master_equations.hpp"

namespace mebench {

GateSchedule GateSchedule::for_chain(int sites) {
    require(sites >= 2, "a chain needs at least two sites");
    GateSchedule s;
    for (int b = 0; b + 1 < sites; ++b) (b % 2 == 0 ? s.odd_bonds : s.even_bonds).push_back(b);
    s.time_dependent_bonds = {0};
    return s;
}

void GateSchedule::validate(int sites) const {
    std::vector<int> seen(static_cast<std::size_t>(std::max(0, sites - 1)), 0);
    auto mark = [&](const std::vector<int>& part) {
        std::vector<int> touched(static_cast<std::size_t>(sites), 0);
        for (int b : part) {
            require(b >= 0 && b + 1 < sites, "schedule bond out of range");
            ++seen[static_cast<std::size_t>(b)];
            require(++touched[static_cast<std::size_t>(b)] == 1 && ++touched[static_cast<std::size_t>(b + 1)] == 1,
                    "schedule part has overlapping bonds");
        }
    };
    mark(odd_bonds);
    mark(even_bonds);
    for (int c : seen) require(c == 1, "schedule parts must cover every bond exactly once");
    for (int b : time_dependent_bonds)
        require(std::find(odd_bonds.begin(), odd_bonds.end(), b) != odd_bonds.end(),
                "time-dependent bonds must belong to part A");
}

Matrix annihilation(int d) {
    require(d >= 2, "oscillator truncation must keep at least two levels");
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix ChainHamiltonian::bond_hamiltonian(int bond, double t, Side side) const {
    require(bond >= 0 && bond + 1 < sites(), "bond index out of range");
    if (bond > 0) return bonds[static_cast<std::size_t>(bond)];
    const int d = phys_dims[1];
    return kron(system_hamiltonian(t, side), Matrix::Identity(d, d)) + system_bond_static;
}

ChainHamiltonian build_chain_hamiltonian(const OpenSystem& system, const ChainCoefficients& chain, int d) {
    const int m = static_cast<int>(chain.size());
    require(m >= 1 && chain.hopping.size() + 1 == chain.size(), "chain: need M onsite energies and M-1 hoppings");
    const Matrix a = annihilation(d);
    const Matrix ad = a.adjoint();
    const Matrix n = ad * a;
    const Matrix id = Matrix::Identity(d, d);

    ChainHamiltonian ham;
    ham.phys_dims.push_back(system.dim());
    for (int k = 0; k < m; ++k) ham.phys_dims.push_back(d);
    const OpenSystem* sys = &system;
    ham.system_hamiltonian = [sys](double t, Side side) { return sys->hamiltonian(t, side); };
    ham.system_bond_static = chain.sys_coupling * kron(system.coupling_operator(), a + ad);
    if (m == 1) ham.system_bond_static += chain.onsite[0] * kron(Matrix::Identity(system.dim(), system.dim()), n);

    ham.bonds.assign(static_cast<std::size_t>(m), Matrix());
    for (int b = 1; b < m; ++b) {
        const auto k = static_cast<std::size_t>(b - 1);
        Matrix h = chain.hopping[k] * (kron(ad, a) + kron(a, ad)) + chain.onsite[k] * kron(n, id);
        if (b == m - 1) h += chain.onsite[k + 1] * kron(id, n);
        ham.bonds[static_cast<std::size_t>(b)] = std::move(h);
    }
    if (!chain.hopping.empty()) ham.bulk_hopping = std::abs(chain.hopping.back());
    return ham;
}

Matrix dense_hamiltonian(const ChainHamiltonian& ham, double t, Side side) {
    long total = 1;
    for (int d : ham.phys_dims) total *= d;
    require(total <= 4096, "dense Hamiltonian requested for a large chain");
    Matrix h = Matrix::Zero(total, total);
    for (int b = 0; b + 1 < ham.sites(); ++b) {
        long left = 1, right = 1;
        for (int i = 0; i < b; ++i) left *= ham.phys_dims[static_cast<std::size_t>(i)];
        for (int i = b + 2; i < ham.sites(); ++i) right *= ham.phys_dims[static_cast<std::size_t>(i)];
        h += kron(kron(Matrix::Identity(left, left), ham.bond_hamiltonian(b, t, side)),
                  Matrix::Identity(right, right));
    }
    return h;
}

GateCache::GateCache(const ChainHamiltonian& ham, double dt) : dt_(dt) {
    require(dt > 0.0, "time step must be positive");
    full_.resize(ham.bonds.size());
    half_.resize(ham.bonds.size());
    for (std::size_t b = 1; b < ham.bonds.size(); ++b) {
        full_[b] = unitary_exponential(ham.bonds[b], dt);
        half_[b] = unitary_exponential(ham.bonds[b], 0.5 * dt);
    }
}

StepOperators step_operators(const ChainHamiltonian& ham, const GateCache& gates, double t) {
    StepOperators ops;
    ops.A1 = -kI * ham.bond_hamiltonian(0, t, Side::Right);
    ops.A2 = -kI * ham.bond_hamiltonian(0, t + gates.dt(), Side::Left);
    ops.gates = &gates;
    return ops;
}

std::pair<Matrix, Matrix> heun_factors(const Matrix& A1, const Matrix& A2, double dt) {
    const Matrix id = Matrix::Identity(A1.rows(), A1.cols());
    const Matrix second_order = (dt * dt / 8.0) * (A2 * A1);
    return {id + (0.5 * dt) * A1 + second_order, id + (0.5 * dt) * A2 + second_order};
}

namespace {

void apply_layer(MPSState& state, const std::vector<int>& bonds, Sweep dir,
                 const std::function<std::vector<const Matrix*>(int)>& gates_for,
                 const TruncationPolicy& policy, TruncationLog& log,
                 const std::function<ThetaObserver(int)>& observer_for = {}) {
    auto one = [&](int b) {
        const auto gates = gates_for(b);
        if (observer_for)
            apply_two_site_gate(state, b, gates, policy, log, dir, observer_for(b));
        else
            apply_two_site_gate(state, b, gates, policy, log, dir);
    };
    if (dir == Sweep::Right)
        for (int b : bonds) one(b);
    else
        for (auto it = bonds.rbegin(); it != bonds.rend(); ++it) one(*it);
}

double renormalize(MPSState& state) { return std::abs(state.normalize() - 1.0); }

Matrix system_density_from_theta(const Matrix& theta, int ds, int d) {
    Matrix rho = Matrix::Zero(ds, ds);
    for (int s2 = 0; s2 < d; ++s2) {
        Matrix rows(ds, theta.cols());
        for (int s1 = 0; s1 < ds; ++s1) rows.row(s1) = theta.row(s1 * d + s2);
        rho.noalias() += rows * rows.adjoint();
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho / rho.trace().real();
}

// Tracks per-site level populations of the chain seen in two-site wavefunctions.
struct ChainMonitor {
    int sites;
    int d;
    int tail;
    double reflection{0.0};
    double top_fock{0.0};

    void site(int index, const RealVector& p) {
        if (index == 0) return;
        top_fock = std::max(top_fock, p(d - 1));
        if (index >= sites - tail) {
            double occ = 0.0;
            for (int s = 1; s < d; ++s) occ += s * p(s);
            reflection = std::max(reflection, occ);
        }
    }

    void theta(int bond, const Matrix& t, int d1, int d2) {
        RealVector p1 = RealVector::Zero(d1), p2 = RealVector::Zero(d2);
        const RealVector rows = t.rowwise().squaredNorm();
        for (int s1 = 0; s1 < d1; ++s1)
            for (int s2 = 0; s2 < d2; ++s2) {
                p1(s1) += rows(s1 * d2 + s2);
                p2(s2) += rows(s1 * d2 + s2);
            }
        const double total = p1.sum();
        if (total <= 0.0) return;
        site(bond, p1 / total);
        site(bond + 1, p2 / total);
    }
};

} // namespace

double heun_step(MPSState& state, const ChainHamiltonian& ham, const StepOperators& ops,
                 const TruncationPolicy& policy, TruncationLog& log) {
    require(ops.gates != nullptr, "step operators lack a gate cache");
    const auto sched = GateSchedule::for_chain(ham.sites());
    const auto [first, second] = heun_factors(ops.A1, ops.A2, ops.gates->dt());
    const GateCache& gc = *ops.gates;
    double corr = 0.0;
    auto part_a = [&](const Matrix& bracket) {
        return [&](int b) -> std::vector<const Matrix*> { return {b == 0 ? &bracket : &gc.half(b)}; };
    };
    apply_layer(state, sched.odd_bonds, Sweep::Right, part_a(first), policy, log);
    corr = std::max(corr, renormalize(state));
    apply_layer(state, sched.even_bonds, Sweep::Left,
                [&](int b) -> std::vector<const Matrix*> { return {&gc.full(b)}; }, policy, log);
    corr = std::max(corr, renormalize(state));
    apply_layer(state, sched.odd_bonds, Sweep::Right, part_a(second), policy, log);
    corr = std::max(corr, renormalize(state));
    return corr;
}

ChainEvolutionResult evolve(const ChainHamiltonian& ham, MPSState state, double t0, double t1,
                            const ChainRunOptions& options) {
    require(state.length() == ham.sites(), "state and Hamiltonian have different lengths");
    for (int i = 0; i < ham.sites(); ++i)
        require(state.phys_dim(i) == ham.phys_dims[static_cast<std::size_t>(i)], "state and Hamiltonian site dimensions differ");
    require(options.record_every >= 1, "record_every must be >= 1");
    const long steps = step_count(t1 - t0, options.dt);
    const double dt = options.dt;
    const int sites = ham.sites();
    const int ds = ham.phys_dims[0];
    const int d = ham.phys_dims[1];
    const auto sched = GateSchedule::for_chain(sites);
    sched.validate(sites);
    const GateCache gc(ham, dt);

    ChainEvolutionResult result;
    result.steps = steps;
    result.populations.resize(static_cast<std::size_t>(ds));
    ChainMonitor monitor{sites, d, options.reflection_sites};

    const double chain_speed = 2.0 * ham.bulk_hopping;
    if (chain_speed > 0.0) {
        const double needed = options.light_cone_safety * chain_speed * (t1 - t0);
        if (sites - 1 < needed * (1.0 - 1e-3)) {
            std::ostringstream msg;
            msg << "light cone: chain of " << sites - 1 << " oscillators is shorter than the " << std::ceil(needed)
                << " needed for duration " << (t1 - t0);
            result.warnings.push_back(msg.str());
        }
    }

    auto time_at = [&](long n) { return t0 + static_cast<double>(n) * dt; };
    auto record = [&](double t, const Matrix& rho) {
        result.times.push_back(t);
        result.system_states.push_back(rho);
        for (int j = 0; j < ds; ++j) result.populations[static_cast<std::size_t>(j)].push_back(rho(j, j).real());
    };
    state.normalize();
    record(t0, reduced_system_density(state));

    // Bond-0 factors for step n: the one applied before e^{dB} and the one after.
    auto factors = [&](long n) -> std::pair<Matrix, Matrix> {
        const double t = time_at(n);
        if (options.stepper == Stepper::Midpoint) {
            const Matrix g = unitary_exponential(ham.bond_hamiltonian(0, t + 0.5 * dt, Side::Right), 0.5 * dt);
            return {g, g};
        }
        return heun_factors(-kI * ham.bond_hamiltonian(0, t, Side::Right),
                            -kI * ham.bond_hamiltonian(0, t + dt, Side::Left), dt);
    };

    auto observe_chain = [&](int b) -> ThetaObserver {
        const int d1 = ham.phys_dims[static_cast<std::size_t>(b)];
        const int d2 = ham.phys_dims[static_cast<std::size_t>(b + 1)];
        return [&monitor, b, d1, d2](int, const Matrix& theta) { monitor.theta(b, theta, d1, d2); };
    };

    auto current = factors(0);
    {
        apply_layer(state, sched.odd_bonds, Sweep::Right,
                    [&](int b) -> std::vector<const Matrix*> { return {b == 0 ? &current.first : &gc.half(b)}; },
                    options.policy, result.truncation);
        result.max_norm_correction = std::max(result.max_norm_correction, renormalize(state));
    }

    for (long n = 0; n < steps; ++n) {
        const bool last = n + 1 == steps;
        const bool rec = last || (n + 1) % options.record_every == 0;
        apply_layer(state, sched.even_bonds, Sweep::Left,
                    [&](int b) -> std::vector<const Matrix*> { return {&gc.full(b)}; }, options.policy,
                    result.truncation, rec ? std::function<ThetaObserver(int)>(observe_chain) : nullptr);
        result.max_norm_correction = std::max(result.max_norm_correction, renormalize(state));

        std::pair<Matrix, Matrix> next;
        if (!last) next = factors(n + 1);
        const double t_next = time_at(n + 1);
        auto gates_for = [&](int b) -> std::vector<const Matrix*> {
            if (b == 0) {
                if (last) return {&current.second};
                return {&current.second, &next.first};
            }
            return {last ? &gc.half(b) : &gc.full(b)};
        };
        auto observer_for = [&](int b) -> ThetaObserver {
            if (b != 0) return rec ? observe_chain(b) : ThetaObserver{};
            return [&, rec](int stage, const Matrix& theta) {
                if (stage == 0 && rec) record(t_next, system_density_from_theta(theta, ds, d));
                if (rec) monitor.theta(0, theta, ds, d);
            };
        };
        apply_layer(state, sched.odd_bonds, Sweep::Right, gates_for, options.policy, result.truncation,
                    observer_for);
        result.max_norm_correction = std::max(result.max_norm_correction, renormalize(state));
        if (!last) current = std::move(next);
    }

    result.reflection_peak = monitor.reflection;
    result.top_fock_peak = monitor.top_fock;
    if (monitor.reflection > options.reflection_threshold) {
        std::ostringstream msg;
        msg << "reflection: occupation " << monitor.reflection << " reached the last "
            << options.reflection_sites << " chain sites";
        result.warnings.push_back(msg.str());
    }
    if (monitor.top_fock > options.fock_threshold) {
        std::ostringstream msg;
        msg << "fock truncation: top level population " << monitor.top_fock;
        result.warnings.push_back(msg.str());
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace mebench
