// chain_evolution.hpp - Even/odd split-operator evolution of system + oscillator chain
//
// Bond b couples sites b and b+1. Part A holds bonds 0, 2, 4, ..., part B
// bonds 1, 3, .... Only bond 0 (system and first oscillator) depends on time.
// Each step is
//   [1 + dA2/2 + d^2 A2 A1/8] e^{dB} [1 + dA1/2 + d^2 A2 A1/8]
// with the brackets acting on bond 0 alone; the constant part-A bonds get
// exact half-step exponentials on either side of e^{dB}.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mebench/bath_chain.hpp"
#include "mebench/mps.hpp"
#include "mebench/system_model.hpp"

namespace mebench {

enum class Stepper { Heun, Midpoint };

struct GateSchedule {
    std::vector<int> odd_bonds;   // part A
    std::vector<int> even_bonds;  // part B
    std::vector<int> time_dependent_bonds;

    static GateSchedule for_chain(int sites);
    // Partition and disjointness checks; throws ValidationError.
    void validate(int sites) const;
};

// a for a d-level truncated oscillator.
Matrix annihilation(int d);

struct ChainHamiltonian {
    std::vector<int> phys_dims;
    // H_sys(t) (x) I plus system_bond_static gives bond 0.
    std::function<Matrix(double, Side)> system_hamiltonian;
    Matrix system_bond_static;
    // Constant two-site Hamiltonians; bonds[0] is unused.
    std::vector<Matrix> bonds;
    // Hopping far along the chain; 2x this is the speed of the excitation front.
    double bulk_hopping{0.0};

    int sites() const { return static_cast<int>(phys_dims.size()); }
    Matrix bond_hamiltonian(int bond, double t, Side side = Side::Right) const;
};

// System coupled through sum_n g_n (sigma_n + sigma_n^dag) (x) kappa0 (a + a^dag)
// to the first of chain.size() oscillators with d levels each. Keeps a pointer
// to system.
ChainHamiltonian build_chain_hamiltonian(const OpenSystem& system, const ChainCoefficients& chain, int d);

// Full Hilbert-space Hamiltonian; test-sized chains only.
Matrix dense_hamiltonian(const ChainHamiltonian& ham, double t, Side side = Side::Right);

// Exponentials of the constant bonds for one step size.
class GateCache {
public:
    GateCache(const ChainHamiltonian& ham, double dt);
    const Matrix& full(int bond) const { return full_[static_cast<std::size_t>(bond)]; }
    const Matrix& half(int bond) const { return half_[static_cast<std::size_t>(bond)]; }
    double dt() const { return dt_; }

private:
    std::vector<Matrix> full_;
    std::vector<Matrix> half_;
    double dt_;
};

struct StepOperators {
    Matrix A1;  // -i H_01(t)
    Matrix A2;  // -i H_01(t + dt)
    const GateCache* gates{nullptr};
};

StepOperators step_operators(const ChainHamiltonian& ham, const GateCache& gates, double t);

// The two bracketed factors (first applied, second applied).
std::pair<Matrix, Matrix> heun_factors(const Matrix& A1, const Matrix& A2, double dt);

// One unfused step; renormalizes and returns the norm correction |n - 1|.
double heun_step(MPSState& state, const ChainHamiltonian& ham, const StepOperators& ops,
                 const TruncationPolicy& policy, TruncationLog& log);

struct ChainRunOptions {
    double dt{0.25 / 2000.0};
    int record_every{1};
    Stepper stepper{Stepper::Heun};
    TruncationPolicy policy;
    double reflection_threshold{1e-6};
    int reflection_sites{5};
    double fock_threshold{1e-6};
    double light_cone_safety{1.5};
};

struct ChainEvolutionResult {
    std::vector<double> times;
    std::vector<Matrix> system_states;         // reduced system density at times
    std::vector<std::vector<double>> populations;  // [level][time]
    MPSState final_state;
    TruncationLog truncation;
    double max_norm_correction{0.0};
    double reflection_peak{0.0};  // max <n> over the last chain sites
    double top_fock_peak{0.0};    // max population of level d-1 over the chain
    long steps{0};
    std::vector<std::string> warnings;
};

// Evolves from t0 to t1 with fused layers: the closing part-A layer of one
// step and the opening layer of the next share one SVD per bond.
ChainEvolutionResult evolve(const ChainHamiltonian& ham, MPSState state, double t0, double t1,
                            const ChainRunOptions& options);

} // namespace mebench
