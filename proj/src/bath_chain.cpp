#include "mebench/bath_chain.hpp"

#include <cmath>
#include <sstream>

namespace mebench {

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    require(n >= 1, "Gauss-Legendre rule needs at least one node");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is descending in i; store ascending.
        nodes[static_cast<std::size_t>(i)] = mid - half * x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = mid + half * x;
        weights[static_cast<std::size_t>(i)] = half * w;
        weights[static_cast<std::size_t>(n - 1 - i)] = half * w;
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = mid;
}

StarBath discretize(const BathSpec& bath, double g, int modes, Discretization scheme) {
    require(modes >= 1, "bath discretization needs at least one mode");
    require(bath.cutoff > 0.0, "bath cutoff must be positive");
    std::vector<double> nodes, weights;
    if (scheme == Discretization::GaussLegendre) {
        gauss_legendre(modes, 0.0, bath.cutoff, nodes, weights);
    } else {
        const double h = bath.cutoff / modes;
        for (int i = 0; i < modes; ++i) {
            nodes.push_back((i + 0.5) * h);
            weights.push_back(h);
        }
    }
    // The weights must integrate the flat density to one.
    long double total = 0.0L;
    for (double w : weights) total += w;
    for (double& w : weights) w = static_cast<double>(w * (bath.cutoff / total));

    StarBath star;
    star.frequencies = nodes;
    star.couplings.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        star.couplings.push_back(g * std::sqrt(bath.spectral_density(nodes[i]) * weights[i]));
    return star;
}

ChainCoefficients star_to_chain(const StarBath& star, double orthogonality_tol) {
    const auto m = static_cast<Eigen::Index>(star.size());
    require(m >= 1 && star.couplings.size() == star.frequencies.size(),
            "star bath must have matching frequencies and couplings");
    const Eigen::Map<const RealVector> freqs(star.frequencies.data(), m);
    const Eigen::Map<const RealVector> kappa(star.couplings.data(), m);
    const double norm = kappa.norm();
    require(norm > 0.0, "star bath couplings are all zero");

    ChainCoefficients chain;
    chain.sys_coupling = norm;

    Eigen::MatrixXd basis(m, m);
    basis.col(0) = kappa / norm;
    for (Eigen::Index n = 0; n < m; ++n) {
        RealVector r = freqs.cwiseProduct(basis.col(n));
        const double alpha = basis.col(n).dot(r);
        chain.onsite.push_back(alpha);
        if (n + 1 == m) break;
        // Two rounds of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass) {
            const RealVector coeff = basis.leftCols(n + 1).transpose() * r;
            r -= basis.leftCols(n + 1) * coeff;
        }
        const double beta = r.norm();
        if (beta <= 1e-13 * freqs.cwiseAbs().maxCoeff()) break;  // Krylov space exhausted
        basis.col(n + 1) = r / beta;
        const double overlap = (basis.leftCols(n + 1).transpose() * basis.col(n + 1)).cwiseAbs().maxCoeff();
        if (overlap > orthogonality_tol) {
            std::ostringstream msg;
            msg << "Lanczos lost orthogonality at step " << n + 1 << " (overlap " << overlap << ")";
            throw SolverError(msg.str());
        }
        chain.hopping.push_back(beta);
    }
    return chain;
}

FlatChainSite analytic_flat_chain(int n, double cutoff) {
    require(n >= 0, "chain index must be non-negative");
    FlatChainSite site{cutoff / 2.0, 0.0};
    if (n >= 1) {
        const double nn = static_cast<double>(n);
        site.hopping = cutoff * nn / (2.0 * std::sqrt(4.0 * nn * nn - 1.0));
    }
    return site;
}

ChainCoefficients analytic_flat_chain_coefficients(int length, double cutoff, double g) {
    require(length >= 1, "chain length must be positive");
    ChainCoefficients chain;
    chain.sys_coupling = std::abs(g);
    for (int n = 0; n < length; ++n) {
        const auto site = analytic_flat_chain(n, cutoff);
        chain.onsite.push_back(site.onsite);
        if (n >= 1) chain.hopping.push_back(site.hopping);
    }
    return chain;
}

int light_cone_length(double cutoff, double duration, double safety) {
    require(cutoff > 0.0 && duration > 0.0, "light cone needs positive cutoff and duration");
    const double speed = cutoff / 2.0;
    return std::max(2, static_cast<int>(std::ceil(safety * speed * duration)));
}

void to_json(nlohmann::json& j, const ChainCoefficients& chain) {
    j = {{"onsite", chain.onsite}, {"hopping", chain.hopping}, {"sys_coupling", chain.sys_coupling}};
}

void from_json(const nlohmann::json& j, ChainCoefficients& chain) {
    chain.onsite = j.at("onsite").get<std::vector<double>>();
    chain.hopping = j.at("hopping").get<std::vector<double>>();
    chain.sys_coupling = j.at("sys_coupling").get<double>();
    require(!chain.onsite.empty() && chain.hopping.size() + 1 == chain.onsite.size(),
            "chain: need M onsite energies and M-1 hoppings");
    for (double b : chain.hopping) require(b > 0.0, "chain: hoppings must be positive");
}

std::string chain_fingerprint(const ChainCoefficients& chain) {
    return hex64(fnv1a(nlohmann::json(chain).dump()));
}

} // namespace mebench
