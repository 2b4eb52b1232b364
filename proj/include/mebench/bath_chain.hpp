// bath_chain.hpp - Bath discretization and star-to-chain (Lanczos) mapping

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mebench/system_model.hpp"

namespace mebench {

enum class Discretization { GaussLegendre, UniformMidpoint };

// Independent modes w_i with couplings kappa_i = g sqrt(J(w_i) w_i) for
// quadrature weights w_i.
struct StarBath {
    std::vector<double> frequencies;
    std::vector<double> couplings;

    std::size_t size() const { return frequencies.size(); }
};

// Nearest-neighbour chain: onsite[n] for oscillator n, hopping[n] between
// oscillators n and n+1, and the system couples to oscillator 0 with sys_coupling.
struct ChainCoefficients {
    std::vector<double> onsite;
    std::vector<double> hopping;
    double sys_coupling{0.0};

    std::size_t size() const { return onsite.size(); }
};

// Gauss-Legendre nodes and weights on [a, b] (Newton iteration on P_n).
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights);

StarBath discretize(const BathSpec& bath, double g, int modes,
                    Discretization scheme = Discretization::GaussLegendre);

// Lanczos tridiagonalization of diag(w_i) from the start vector kappa/|kappa|
// with full reorthogonalization. Throws SolverError if orthogonality is lost
// beyond orthogonality_tol.
ChainCoefficients star_to_chain(const StarBath& star, double orthogonality_tol = 1e-8);

struct FlatChainSite {
    double onsite;
    double hopping;  // between oscillators n-1 and n; 0 for n = 0
};

// Closed-form recurrence for the flat density: onsite = cutoff / 2,
// hopping_n = cutoff n / (2 sqrt(4 n^2 - 1)).
FlatChainSite analytic_flat_chain(int n, double cutoff);
ChainCoefficients analytic_flat_chain_coefficients(int length, double cutoff, double g);

// Chain long enough that nothing launched from the system reaches the far end
// within duration: ceil(safety * v * duration) with v = cutoff / 2.
int light_cone_length(double cutoff, double duration, double safety = 1.5);

void to_json(nlohmann::json& j, const ChainCoefficients& chain);
void from_json(const nlohmann::json& j, ChainCoefficients& chain);
std::string chain_fingerprint(const ChainCoefficients& chain);

} // namespace mebench
