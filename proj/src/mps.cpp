#include "mebench/mps.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <lapacke.h>

namespace mebench {

namespace {

using RowMat = SiteTensor::RowMat;

struct ThinSVD {
    Matrix u;
    RealVector s;
    Matrix vh;
};

// Divide-and-conquer SVD from LAPACK; Eigen's BDCSVD covers the rare
// non-convergence.
ThinSVD thin_svd(const Matrix& m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    ThinSVD out{Matrix(rows, k), RealVector(k), Matrix(k, cols)};
    Matrix work = m;
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols,
                                           reinterpret_cast<lapack_complex_double*>(work.data()), rows,
                                           out.s.data(), reinterpret_cast<lapack_complex_double*>(out.u.data()),
                                           rows, reinterpret_cast<lapack_complex_double*>(out.vh.data()), k);
    if (info == 0) return out;
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.vh = svd.matrixV().adjoint();
    return out;
}

// Environment contraction helpers. Environments are chi x chi matrices with
// index order (bra bond, ket bond) conjugated on the bra.

Matrix extend_left(const Matrix& env, const SiteTensor& bra, const SiteTensor& ket) {
    // out(rb, rk) = sum_{lb, lk, s} conj(bra(lb, s, rb)) env(lb, lk) ket(lk, s, rk)
    Matrix out = Matrix::Zero(bra.right, ket.right);
    for (int s = 0; s < ket.phys; ++s) {
        Matrix b(bra.left, bra.right), k(ket.left, ket.right);
        for (int l = 0; l < bra.left; ++l)
            for (int r = 0; r < bra.right; ++r) b(l, r) = bra(l, s, r);
        for (int l = 0; l < ket.left; ++l)
            for (int r = 0; r < ket.right; ++r) k(l, r) = ket(l, s, r);
        out.noalias() += b.adjoint() * env * k;
    }
    return out;
}

Matrix extend_right(const Matrix& env, const SiteTensor& bra, const SiteTensor& ket) {
    // out(lb, lk) = sum_{rb, rk, s} conj(bra(lb, s, rb)) env(rb, rk) ket(lk, s, rk)
    Matrix out = Matrix::Zero(bra.left, ket.left);
    for (int s = 0; s < ket.phys; ++s) {
        Matrix b(bra.left, bra.right), k(ket.left, ket.right);
        for (int l = 0; l < bra.left; ++l)
            for (int r = 0; r < bra.right; ++r) b(l, r) = bra(l, s, r);
        for (int l = 0; l < ket.left; ++l)
            for (int r = 0; r < ket.right; ++r) k(l, r) = ket(l, s, r);
        out.noalias() += b.conjugate() * env * k.transpose();
    }
    return out;
}

std::vector<Matrix> right_environments(const MPSState& state) {
    const int n = state.length();
    std::vector<Matrix> envs(static_cast<std::size_t>(n + 1));
    envs[static_cast<std::size_t>(n)] = Matrix::Ones(1, 1);
    for (int i = n - 1; i >= 0; --i)
        envs[static_cast<std::size_t>(i)] =
            extend_right(envs[static_cast<std::size_t>(i + 1)], state.site(i), state.site(i));
    return envs;
}

} // namespace

MPSState MPSState::product(const std::vector<Vector>& site_states) {
    require(!site_states.empty(), "MPS needs at least one site");
    MPSState st;
    for (const auto& v : site_states) {
        require(v.size() >= 1, "site dimension must be positive");
        SiteTensor t(1, static_cast<int>(v.size()), 1);
        for (int s = 0; s < t.phys; ++s) t(0, s, 0) = v(s);
        st.sites_.push_back(std::move(t));
    }
    st.center_ = 0;
    return st;
}

std::vector<int> MPSState::bond_dims() const {
    std::vector<int> out;
    for (int i = 0; i + 1 < length(); ++i) out.push_back(bond_dim(i));
    return out;
}

int MPSState::max_bond_dim() const {
    int m = 1;
    for (int i = 0; i + 1 < length(); ++i) m = std::max(m, bond_dim(i));
    return m;
}

void MPSState::move_center(int target) {
    require(target >= 0 && target < length(), "orthogonality center out of range");
    while (center_ < target) {
        SiteTensor& a = sites_[static_cast<std::size_t>(center_)];
        SiteTensor& b = sites_[static_cast<std::size_t>(center_ + 1)];
        const Matrix m = a.left_grouped();
        Eigen::HouseholderQR<Matrix> qr(m);
        const int k = static_cast<int>(std::min(m.rows(), m.cols()));
        const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
        const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        SiteTensor na(a.left, a.phys, k);
        na.left_grouped() = q;
        SiteTensor nb(k, b.phys, b.right);
        nb.right_grouped() = r * Matrix(b.right_grouped());
        a = std::move(na);
        b = std::move(nb);
        ++center_;
    }
    while (center_ > target) {
        SiteTensor& a = sites_[static_cast<std::size_t>(center_ - 1)];
        SiteTensor& b = sites_[static_cast<std::size_t>(center_)];
        const Matrix m = Matrix(b.right_grouped()).adjoint();
        Eigen::HouseholderQR<Matrix> qr(m);
        const int k = static_cast<int>(std::min(m.rows(), m.cols()));
        const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
        const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
        SiteTensor nb(k, b.phys, b.right);
        nb.right_grouped() = q.adjoint();
        SiteTensor na(a.left, a.phys, k);
        na.left_grouped() = Matrix(a.left_grouped()) * r.adjoint();
        a = std::move(na);
        b = std::move(nb);
        --center_;
    }
}

double MPSState::center_norm() const {
    const auto& d = sites_[static_cast<std::size_t>(center_)].data;
    double acc = 0.0;
    for (const auto& v : d) acc += std::norm(v);
    return std::sqrt(acc);
}

double MPSState::normalize() {
    const double n = center_norm();
    require(n > 0.0, "cannot normalize a zero state");
    for (auto& v : sites_[static_cast<std::size_t>(center_)].data) v /= n;
    return n;
}

void MPSState::canonicalize(int target) {
    // Left-orthonormalize everything, then walk back to target.
    center_ = 0;
    move_center(length() - 1);
    move_center(target);
}

MPSState init_state(const Vector& system_state, int chain_length, int fock_dim) {
    require(fock_dim >= 2, "oscillator truncation must keep at least two levels");
    require(chain_length >= 1, "chain needs at least one oscillator");
    require(std::abs(system_state.norm() - 1.0) < 1e-10, "system state must be normalized");
    std::vector<Vector> states{system_state};
    Vector vac = Vector::Zero(fock_dim);
    vac(0) = 1.0;
    for (int i = 0; i < chain_length; ++i) states.push_back(vac);
    return MPSState::product(states);
}

void apply_two_site_gate(MPSState& state, int bond, const std::vector<const Matrix*>& gates,
                         const TruncationPolicy& policy, TruncationLog& log, Sweep direction,
                         const ThetaObserver& observer) {
    require(bond >= 0 && bond + 1 < state.length(), "bond index out of range");
    if (state.center() < bond) state.move_center(bond);
    if (state.center() > bond + 1) state.move_center(bond + 1);

    const SiteTensor& a = state.site(bond);
    const SiteTensor& b = state.site(bond + 1);
    const int cl = a.left, d1 = a.phys, d2 = b.phys, cr = b.right;
    for (const Matrix* g : gates)
        require(g->rows() == d1 * d2 && g->cols() == d1 * d2, "gate dimension mismatch");

    // theta[(l, s1), (s2, r)]
    const RowMat theta = a.left_grouped() * b.right_grouped();
    // Reorder to t[(s1, s2), (l, r)] so gates act from the left.
    Matrix t(d1 * d2, cl * cr);
    for (int l = 0; l < cl; ++l)
        for (int s1 = 0; s1 < d1; ++s1)
            for (int s2 = 0; s2 < d2; ++s2)
                for (int r = 0; r < cr; ++r) t(s1 * d2 + s2, l * cr + r) = theta(l * d1 + s1, s2 * cr + r);
    for (std::size_t k = 0; k < gates.size(); ++k) {
        t = (*gates[k]) * t;
        if (observer) observer(static_cast<int>(k), t);
    }
    Matrix split(cl * d1, d2 * cr);
    for (int l = 0; l < cl; ++l)
        for (int s1 = 0; s1 < d1; ++s1)
            for (int s2 = 0; s2 < d2; ++s2)
                for (int r = 0; r < cr; ++r) split(l * d1 + s1, s2 * cr + r) = t(s1 * d2 + s2, l * cr + r);

    const ThinSVD svd = thin_svd(split);
    const RealVector& sv = svd.s;
    const double total = sv.squaredNorm();
    int keep = 1;
    const double floor = sv.size() > 0 ? sv(0) * policy.svd_cutoff : 0.0;
    while (keep < sv.size() && keep < policy.chi_max && sv(keep) > floor && sv(keep) > 0.0) ++keep;
    if (total > 0.0) {
        const double discarded = sv.tail(sv.size() - keep).squaredNorm() / total;
        if (discarded > 0.0) {
            log.discarded_weight += discarded;
            log.max_step_discard = std::max(log.max_step_discard, discarded);
            ++log.truncations;
        }
    }
    log.max_bond_dim = std::max(log.max_bond_dim, keep);
    if (log.discarded_weight > policy.abort_discarded_weight)
        throw SolverError("accumulated truncation weight " + std::to_string(log.discarded_weight) +
                          " exceeds the abort threshold");

    SiteTensor na(cl, d1, keep), nb(keep, d2, cr);
    const auto u = svd.u.leftCols(keep);
    const auto vh = svd.vh.topRows(keep);
    const auto s = sv.head(keep).cast<cplx>();
    if (direction == Sweep::Right) {
        na.left_grouped() = u;
        nb.right_grouped() = s.asDiagonal() * vh;
    } else {
        na.left_grouped() = u * s.asDiagonal();
        nb.right_grouped() = vh;
    }
    state.site(bond) = std::move(na);
    state.site(bond + 1) = std::move(nb);
    // Internal bookkeeping: the center is wherever the singular values went.
    if (direction == Sweep::Right) {
        if (state.center() != bond + 1) state.move_center(bond + 1);
    } else {
        if (state.center() != bond) state.move_center(bond);
    }
}

void apply_two_site_gate(MPSState& state, int bond, const Matrix& gate,
                         const TruncationPolicy& policy, TruncationLog& log, Sweep direction) {
    apply_two_site_gate(state, bond, std::vector<const Matrix*>{&gate}, policy, log, direction);
}

double norm(const MPSState& state) { return std::sqrt(std::abs(overlap(state, state))); }

cplx overlap(const MPSState& bra, const MPSState& ket) {
    require(bra.length() == ket.length(), "overlap of states with different lengths");
    Matrix env = Matrix::Ones(1, 1);
    for (int i = 0; i < ket.length(); ++i) {
        require(bra.phys_dim(i) == ket.phys_dim(i), "overlap of states with different sites");
        env = extend_left(env, bra.site(i), ket.site(i));
    }
    return env(0, 0);
}

Matrix reduced_system_density(const MPSState& state) {
    Matrix env = Matrix::Ones(1, 1);
    for (int i = state.length() - 1; i >= 1; --i) env = extend_right(env, state.site(i), state.site(i));
    const SiteTensor& a = state.site(0);
    Matrix m(a.phys, a.right);
    for (int s = 0; s < a.phys; ++s)
        for (int r = 0; r < a.right; ++r) m(s, r) = a(0, s, r);
    // rho(s, s') = sum m(s, r) env(r', r)^* ... env is (bra, ket): env(rb, rk).
    Matrix rho = m * env.transpose() * m.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho / rho.trace().real();
}

std::vector<RealVector> site_populations(const MPSState& state) {
    const auto renv = right_environments(state);
    std::vector<RealVector> out;
    Matrix lenv = Matrix::Ones(1, 1);
    for (int i = 0; i < state.length(); ++i) {
        const SiteTensor& a = state.site(i);
        const Matrix& r = renv[static_cast<std::size_t>(i + 1)];
        RealVector p(a.phys);
        for (int s = 0; s < a.phys; ++s) {
            Matrix k(a.left, a.right);
            for (int l = 0; l < a.left; ++l)
                for (int rr = 0; rr < a.right; ++rr) k(l, rr) = a(l, s, rr);
            // sum conj(k(lb, rb)) lenv(lb, lk) k(lk, rk) r(rb, rk)
            const Matrix tmp = k.adjoint() * lenv * k;  // (rb, rk)
            p(s) = (tmp.cwiseProduct(r)).sum().real();
        }
        out.push_back(p / p.sum());
        lenv = extend_left(lenv, a, a);
    }
    return out;
}

double fock_occupancy_check(const MPSState& state) {
    const auto pops = site_populations(state);
    double worst = 0.0;
    for (std::size_t i = 1; i < pops.size(); ++i) worst = std::max(worst, pops[i](pops[i].size() - 1));
    return worst;
}

Vector to_dense(const MPSState& state) {
    // Accumulate (prefix index) x (right bond).
    Matrix acc = Matrix::Ones(1, 1);
    for (int i = 0; i < state.length(); ++i) {
        const SiteTensor& a = state.site(i);
        Matrix next(acc.rows() * a.phys, a.right);
        for (Eigen::Index p = 0; p < acc.rows(); ++p)
            for (int s = 0; s < a.phys; ++s)
                for (int r = 0; r < a.right; ++r) {
                    cplx v = 0.0;
                    for (int l = 0; l < a.left; ++l) v += acc(p, l) * a(l, s, r);
                    next(p * a.phys + s, r) = v;
                }
        acc = std::move(next);
    }
    return acc.col(0);
}

void to_json(nlohmann::json& j, const MPSState& state) {
    j = nlohmann::json::object();
    j["center"] = state.center_;
    auto sites = nlohmann::json::array();
    for (const auto& t : state.sites_) {
        std::vector<double> re, im;
        for (const auto& v : t.data) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        sites.push_back({{"left", t.left}, {"phys", t.phys}, {"right", t.right}, {"re", re}, {"im", im}});
    }
    j["sites"] = std::move(sites);
}

void from_json(const nlohmann::json& j, MPSState& state) {
    state.sites_.clear();
    for (const auto& s : j.at("sites")) {
        SiteTensor t(s.at("left").get<int>(), s.at("phys").get<int>(), s.at("right").get<int>());
        const auto re = s.at("re").get<std::vector<double>>();
        const auto im = s.at("im").get<std::vector<double>>();
        require(re.size() == t.data.size() && im.size() == t.data.size(), "MPS checkpoint: tensor size mismatch");
        for (std::size_t k = 0; k < re.size(); ++k) t.data[k] = {re[k], im[k]};
        state.sites_.push_back(std::move(t));
    }
    require(!state.sites_.empty(), "MPS checkpoint has no sites");
    for (std::size_t i = 0; i + 1 < state.sites_.size(); ++i)
        require(state.sites_[i].right == state.sites_[i + 1].left, "MPS checkpoint: bond mismatch");
    require(state.sites_.front().left == 1 && state.sites_.back().right == 1,
            "MPS checkpoint: boundary bonds must be 1");
    state.center_ = j.at("center").get<int>();
    require(state.center_ >= 0 && state.center_ < static_cast<int>(state.sites_.size()),
            "MPS checkpoint: center out of range");
}

} // namespace mebench
