#include "mebench/master_equations.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mebench {

namespace {

Matrix commutator_term(const Matrix& h, const Matrix& rho) {
    return -kI * (h * rho - rho * h);
}

void fix_gauge(Matrix& vecs, const FrameOptions& options) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        cplx ref;
        if (options.previous != nullptr && options.previous->eigenvectors.rows() == vecs.rows()) {
            ref = options.previous->eigenvectors.col(j).dot(vecs.col(j));
        } else {
            Eigen::Index arg = 0;
            vecs.col(j).cwiseAbs().maxCoeff(&arg);
            ref = vecs(arg, j);
        }
        if (std::abs(ref) > 0.0) vecs.col(j) *= std::conj(ref) / std::abs(ref);
    }
    if (options.random_phase_seed) {
        std::mt19937_64 rng(*options.random_phase_seed);
        std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
        for (Eigen::Index j = 0; j < vecs.cols(); ++j) vecs.col(j) *= std::polar(1.0, angle(rng));
    }
}

} // namespace

DensityMatrix::DensityMatrix(Matrix rho, double tol) : rho_(std::move(rho)) {
    require(rho_.rows() == rho_.cols() && rho_.rows() >= 1, "density matrix must be square");
    require(hermiticity_defect(rho_) <= tol, "density matrix must be Hermitian");
    require(std::abs(rho_.trace() - 1.0) <= std::max(tol, 1e-10),
            "density matrix must have unit trace");
    require(mebench::min_eigenvalue(rho_) >= -tol, "density matrix must be positive");
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    require(std::abs(psi.norm() - 1.0) < 1e-10, "state vector must be normalized");
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::basis_state(int dim, int level) {
    require(level >= 0 && level < dim, "basis level out of range");
    Vector psi = Vector::Zero(dim);
    psi(level) = 1.0;
    return pure(psi);
}

double DensityMatrix::population(int level) const {
    require(level >= 0 && level < dim(), "level out of range");
    return rho_(level, level).real();
}

double DensityMatrix::min_eigenvalue() const { return mebench::min_eigenvalue(rho_); }

double min_eigenvalue(const Matrix& rho) {
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(herm, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

Matrix dissipator(const Matrix& c, const Matrix& rho) {
    require(c.rows() == rho.rows() && c.cols() == rho.cols() && c.rows() == c.cols(),
            "dissipator: operator and density matrix shapes differ");
    const Matrix cdc = c.adjoint() * c;
    return c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
}

MarkovianGenerator::MarkovianGenerator(const OpenSystem& system, GeneratorOptions options)
    : system_(&system), lamb_(Matrix::Zero(system.dim(), system.dim())) {
    for (std::size_t n = 0; n < system.transitions().size(); ++n)
        terms_.push_back({system.rate(n), lowering_operator(system.levels(), system.transitions()[n])});
    if (options.lamb_shift) lamb_ = system.lamb_shift_hamiltonian();
}

Matrix MarkovianGenerator::operator()(double t, const Matrix& rho, Side side) const {
    Matrix out = commutator_term(system_->hamiltonian(t, side) + lamb_, rho);
    for (const auto& term : terms_)
        if (term.rate != 0.0) out += term.rate * dissipator(term.op, rho);
    return out;
}

Matrix mme_rhs(double t, const Matrix& rho, const OpenSystem& system, GeneratorOptions options) {
    return MarkovianGenerator(system, options)(t, rho);
}

AMEFrame ame_frame(double t, const OpenSystem& system, const FrameOptions& options, Side side) {
    const Matrix h = system.hamiltonian(t, side);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    AMEFrame frame;
    frame.energies = eig.eigenvalues();
    frame.eigenvectors = eig.eigenvectors();

    const double tol = options.degeneracy_tol * system.reference_frequency();
    for (Eigen::Index j = 0; j + 1 < frame.energies.size(); ++j) {
        const double gap = frame.energies(j + 1) - frame.energies(j);
        if (!(gap > tol)) {
            std::ostringstream msg;
            msg << "instantaneous spectrum is degenerate at t=" << t << " (gap " << gap
                << " between levels " << j << " and " << j + 1 << ")";
            throw DegenerateFrameError(msg.str());
        }
    }
    fix_gauge(frame.eigenvectors, options);

    const Matrix x = system.coupling_operator();
    const BathSpec& bath = system.bath();
    const auto dim = frame.energies.size();
    for (Eigen::Index l = 0; l < dim; ++l) {
        for (Eigen::Index k = l + 1; k < dim; ++k) {
            const cplx g = frame.eigenvectors.col(l).dot(x * frame.eigenvectors.col(k));
            if (std::abs(g) <= 1e-12) continue;
            DressedTransition tr;
            tr.lower = static_cast<int>(l);
            tr.upper = static_cast<int>(k);
            tr.frequency = frame.energies(k) - frame.energies(l);
            tr.coupling = std::abs(g);
            if (tr.frequency < bath.cutoff) {
                tr.rate = 2.0 * kPi * tr.coupling * tr.coupling * bath.spectral_density(tr.frequency);
                tr.shift = lamb_shift(tr.rate, tr.frequency, bath);
            }
            tr.sigma = frame.eigenvectors.col(l) * frame.eigenvectors.col(k).adjoint();
            frame.transitions.push_back(std::move(tr));
        }
    }
    return frame;
}

AdiabaticGenerator::AdiabaticGenerator(const OpenSystem& system, GeneratorOptions options,
                                       std::optional<std::uint64_t> random_phase_seed)
    : system_(&system), options_(options), phase_seed_(random_phase_seed) {}

Matrix AdiabaticGenerator::apply(const AMEFrame& frame, const Matrix& h, const Matrix& rho) const {
    Matrix heff = h;
    if (options_.lamb_shift) {
        for (const auto& tr : frame.transitions) {
            if (tr.shift == 0.0) continue;
            const auto k = frame.eigenvectors.col(tr.upper);
            heff += tr.shift * (k * k.adjoint());
        }
    }
    Matrix out = commutator_term(heff, rho);
    for (const auto& tr : frame.transitions)
        if (tr.rate != 0.0) out += tr.rate * dissipator(tr.sigma, rho);
    return out;
}

Matrix AdiabaticGenerator::operator()(double t, const Matrix& rho, Side side) const {
    FrameOptions fo;
    fo.degeneracy_tol = options_.degeneracy_tol;
    fo.random_phase_seed = phase_seed_;
    const AMEFrame frame = ame_frame(t, *system_, fo, side);
    return apply(frame, system_->hamiltonian(t, side), rho);
}

Matrix ame_rhs(double t, const Matrix& rho, const OpenSystem& system, GeneratorOptions options) {
    return AdiabaticGenerator(system, options)(t, rho);
}

Matrix HamiltonianGenerator::operator()(double t, const Matrix& rho, Side side) const {
    return commutator_term(system_->hamiltonian(t, side), rho);
}

long step_count(double span, double dt) {
    require(dt > 0.0 && span > 0.0, "time span and step must be positive");
    const double ratio = span / dt;
    const auto n = std::llround(ratio);
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6)
        throw ValidationError("time step does not divide the span");
    return static_cast<long>(n);
}

EvolutionResult integrate(const Generator& rhs, const DensityMatrix& rho0, double t0, double t1,
                          const IntegrationOptions& options) {
    require(options.record_every >= 1, "record_every must be >= 1");
    const long steps = step_count(t1 - t0, options.dt);
    const double dt = options.dt;

    EvolutionResult result;
    result.tracked_levels = options.tracked_levels;
    if (result.tracked_levels.empty())
        for (int j = 0; j < rho0.dim(); ++j) result.tracked_levels.push_back(j);
    for (int level : result.tracked_levels)
        require(level >= 0 && level < rho0.dim(), "tracked level out of range");
    result.populations.resize(result.tracked_levels.size());

    Matrix rho = rho0.matrix();
    auto record = [&](double t) {
        result.times.push_back(t);
        for (std::size_t i = 0; i < result.tracked_levels.size(); ++i)
            result.populations[i].push_back(rho(result.tracked_levels[i], result.tracked_levels[i]).real());
        result.trace.push_back(rho.trace().real());
        result.min_eigenvalue.push_back(min_eigenvalue(rho));
    };
    record(t0);

    for (long i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        const double t_end = t0 + static_cast<double>(i + 1) * dt;
        const Matrix k1 = rhs(t, rho, Side::Right);
        const Matrix k2 = rhs(t + 0.5 * dt, rho + (0.5 * dt) * k1, Side::Right);
        const Matrix k3 = rhs(t + 0.5 * dt, rho + (0.5 * dt) * k2, Side::Right);
        const Matrix k4 = rhs(t_end, rho + dt * k3, Side::Left);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!rho.allFinite()) {
            std::ostringstream msg;
            msg << "integration diverged (non-finite state) at t=" << t_end;
            throw SolverError(msg.str());
        }
        if (options.hermitize) {
            result.max_hermiticity_drift =
                std::max(result.max_hermiticity_drift, hermiticity_defect(rho));
            rho = 0.5 * (rho + rho.adjoint()).eval();
        }
        if (options.renormalize) {
            const double tr = rho.trace().real();
            if (std::abs(tr - 1.0) > 1e-14) {
                rho /= tr;
                ++result.renormalizations;
            }
        }
        if ((i + 1) % options.record_every == 0 || i + 1 == steps) record(t_end);
    }
    result.final_state = rho;
    return result;
}

std::vector<double> excited_population(const EvolutionResult& result, int level) {
    for (std::size_t i = 0; i < result.tracked_levels.size(); ++i)
        if (result.tracked_levels[i] == level) return result.populations[i];
    throw ValidationError("level " + std::to_string(level) + " was not tracked");
}

void write_csv(std::ostream& out, const EvolutionResult& result) {
    out << "t";
    for (int level : result.tracked_levels) out << ",p_" << level;
    out << ",trace,min_eigenvalue\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < result.times.size(); ++k) {
        put(result.times[k]);
        for (const auto& series : result.populations) {
            out << ',';
            put(series[k]);
        }
        out << ',';
        put(result.trace[k]);
        out << ',';
        put(result.min_eigenvalue[k]);
        out << '\n';
    }
}

} // namespace mebench
