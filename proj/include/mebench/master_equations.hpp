// master_equations.hpp - Markovian (MME) and adiabatic (AME) master equations, RK4 integrator

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mebench/system_model.hpp"
#include "mebench/types.hpp"

namespace mebench {

class DensityMatrix {
public:
    // Validates Hermiticity, unit trace and positivity within tol.
    explicit DensityMatrix(Matrix rho, double tol = 1e-9);

    static DensityMatrix pure(const Vector& psi);
    static DensityMatrix basis_state(int dim, int level);

    const Matrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }
    double population(int level) const;
    double min_eigenvalue() const;

private:
    Matrix rho_;
};

double min_eigenvalue(const Matrix& rho);

// D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c) / 2
Matrix dissipator(const Matrix& c, const Matrix& rho);

struct LindbladTerm {
    double rate{0.0};
    Matrix op;
};

struct GeneratorOptions {
    bool lamb_shift{true};
    // Smallest admissible instantaneous gap, relative to the smallest bare
    // transition frequency.
    double degeneracy_tol{1e-6};
};

// rho' = -i[H(t) + H_L, rho] + sum_n gamma_n D[sigma_n] rho, with sigma_n,
// gamma_n and Delta_n fixed by the bare Hamiltonian.
class MarkovianGenerator {
public:
    MarkovianGenerator(const OpenSystem& system, GeneratorOptions options = {});

    Matrix operator()(double t, const Matrix& rho, Side side = Side::Right) const;
    const std::vector<LindbladTerm>& terms() const { return terms_; }

private:
    const OpenSystem* system_;
    std::vector<LindbladTerm> terms_;
    Matrix lamb_;
};

Matrix mme_rhs(double t, const Matrix& rho, const OpenSystem& system,
               GeneratorOptions options = {});

// Transition between instantaneous eigenstates l < k of H(t).
struct DressedTransition {
    int lower{0};
    int upper{1};
    double frequency{0.0};
    double coupling{0.0};  // |<l|X|k>|, X = sum_m g_m (sigma_m + sigma_m^dag)
    double rate{0.0};
    double shift{0.0};
    Matrix sigma;  // |l><k| in the lab basis
};

struct AMEFrame {
    RealVector energies;  // ascending
    Matrix eigenvectors;  // columns
    std::vector<DressedTransition> transitions;
};

struct FrameOptions {
    double degeneracy_tol{1e-6};
    // Gauge follows this frame (maximal overlap, real positive) when given;
    // otherwise the largest-magnitude component of each vector is made real positive.
    const AMEFrame* previous{nullptr};
    // Debug: multiply each eigenvector by a random phase. Predictions must not change.
    std::optional<std::uint64_t> random_phase_seed;
};

AMEFrame ame_frame(double t, const OpenSystem& system, const FrameOptions& options = {},
                   Side side = Side::Right);

class AdiabaticGenerator {
public:
    AdiabaticGenerator(const OpenSystem& system, GeneratorOptions options = {},
                       std::optional<std::uint64_t> random_phase_seed = std::nullopt);

    Matrix operator()(double t, const Matrix& rho, Side side = Side::Right) const;
    Matrix apply(const AMEFrame& frame, const Matrix& h, const Matrix& rho) const;

private:
    const OpenSystem* system_;
    GeneratorOptions options_;
    std::optional<std::uint64_t> phase_seed_;
};

Matrix ame_rhs(double t, const Matrix& rho, const OpenSystem& system,
               GeneratorOptions options = {});

// Undamped reference: rho' = -i[H(t), rho].
class HamiltonianGenerator {
public:
    explicit HamiltonianGenerator(const OpenSystem& system) : system_(&system) {}
    Matrix operator()(double t, const Matrix& rho, Side side = Side::Right) const;

private:
    const OpenSystem* system_;
};

using Generator = std::function<Matrix(double t, const Matrix& rho, Side side)>;

struct IntegrationOptions {
    double dt{0.0};
    int record_every{1};
    bool hermitize{true};
    bool renormalize{false};
    std::vector<int> tracked_levels;  // empty: every level
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<int> tracked_levels;
    std::vector<std::vector<double>> populations;  // [tracked level][time]
    std::vector<double> trace;
    std::vector<double> min_eigenvalue;
    Matrix final_state;
    double max_hermiticity_drift{0.0};
    long renormalizations{0};
};

// Fixed-step classical RK4 from t0 to t1. dt must divide the span.
EvolutionResult integrate(const Generator& rhs, const DensityMatrix& rho0, double t0, double t1,
                          const IntegrationOptions& options);

std::vector<double> excited_population(const EvolutionResult& result, int level);

// Columns: t, p_<level> for each tracked level, trace, min_eigenvalue.
void write_csv(std::ostream& out, const EvolutionResult& result);

// Number of steps for a span, or throws if dt does not divide it.
long step_count(double span, double dt);

} // namespace mebench
