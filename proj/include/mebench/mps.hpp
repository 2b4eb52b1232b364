// mps.hpp - Matrix-product state of the system plus oscillator chain
//
// Site 0 is the open system, sites 1..M the chain oscillators. Each site
// tensor is stored row-major as (left bond, physical, right bond) with the
// right index fastest. The state is kept in mixed canonical form around
// center(): sites to the left are left-orthonormal, sites to the right are
// right-orthonormal.

#pragma once

#include <functional>
#include <vector>

#include <json.hpp>

#include "mebench/types.hpp"

namespace mebench {

struct SiteTensor {
    int left{1};
    int phys{1};
    int right{1};
    std::vector<cplx> data;

    SiteTensor() = default;
    SiteTensor(int l, int p, int r) : left(l), phys(p), right(r), data(static_cast<std::size_t>(l) * p * r) {}

    cplx& operator()(int l, int s, int r) { return data[(static_cast<std::size_t>(l) * phys + s) * right + r]; }
    cplx operator()(int l, int s, int r) const { return data[(static_cast<std::size_t>(l) * phys + s) * right + r]; }

    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    // (left * phys) x right
    Eigen::Map<RowMat> left_grouped() { return {data.data(), left * phys, right}; }
    Eigen::Map<const RowMat> left_grouped() const { return {data.data(), left * phys, right}; }
    // left x (phys * right)
    Eigen::Map<RowMat> right_grouped() { return {data.data(), left, phys * right}; }
    Eigen::Map<const RowMat> right_grouped() const { return {data.data(), left, phys * right}; }
};

struct TruncationPolicy {
    int chi_max{64};
    double svd_cutoff{1e-10};  // relative to the largest singular value
    // Abort when the accumulated discarded weight exceeds this.
    double abort_discarded_weight{1e-3};
};

struct TruncationLog {
    double discarded_weight{0.0};
    double max_step_discard{0.0};
    long truncations{0};
    int max_bond_dim{1};
};

enum class Sweep { Right, Left };

// Two-site wavefunction handed to observers: rows (s1, s2), columns (l, r).
// Its Gram matrix T T^dag is the reduced density matrix of the two sites
// (up to the state norm) when the rest of the chain is orthonormal.
using ThetaObserver = std::function<void(int stage, const Matrix& theta)>;

class MPSState {
public:
    MPSState() = default;
    // Product state from normalized per-site vectors.
    static MPSState product(const std::vector<Vector>& site_states);

    int length() const { return static_cast<int>(sites_.size()); }
    int center() const { return center_; }
    int phys_dim(int site) const { return sites_[static_cast<std::size_t>(site)].phys; }
    int bond_dim(int bond) const { return sites_[static_cast<std::size_t>(bond)].right; }
    std::vector<int> bond_dims() const;
    int max_bond_dim() const;

    const SiteTensor& site(int i) const { return sites_[static_cast<std::size_t>(i)]; }
    SiteTensor& site(int i) { return sites_[static_cast<std::size_t>(i)]; }

    void move_center(int target);
    // Norm of the center tensor; equals the state norm in canonical form.
    double center_norm() const;
    // Rescales the center tensor to unit norm; returns the previous norm.
    double normalize();

    // Canonicalize from scratch (used after loading or manual edits).
    void canonicalize(int target);

    friend void to_json(nlohmann::json& j, const MPSState& state);
    friend void from_json(const nlohmann::json& j, MPSState& state);

private:
    std::vector<SiteTensor> sites_;
    int center_{0};
};

// |psi_sys> (x) |0>^M with d levels per oscillator.
MPSState init_state(const Vector& system_state, int chain_length, int fock_dim);

// Applies gates[0], then gates[1], ... to sites (bond, bond+1), calling the
// observer after each, then splits by truncated SVD. Sweep::Right leaves the
// center on bond+1, Sweep::Left on bond.
void apply_two_site_gate(MPSState& state, int bond, const std::vector<const Matrix*>& gates,
                         const TruncationPolicy& policy, TruncationLog& log,
                         Sweep direction = Sweep::Right, const ThetaObserver& observer = {});
void apply_two_site_gate(MPSState& state, int bond, const Matrix& gate,
                         const TruncationPolicy& policy, TruncationLog& log,
                         Sweep direction = Sweep::Right);

double norm(const MPSState& state);
cplx overlap(const MPSState& bra, const MPSState& ket);

// Trace over all chain sites, normalized to unit trace.
Matrix reduced_system_density(const MPSState& state);
// Level populations of every site (normalized).
std::vector<RealVector> site_populations(const MPSState& state);
// Largest population of the top Fock level over the chain sites.
double fock_occupancy_check(const MPSState& state);

// Dense state vector (site 0 most significant); only for small test systems.
Vector to_dense(const MPSState& state);

} // namespace mebench
