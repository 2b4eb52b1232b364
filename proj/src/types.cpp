#include "mebench/types.hpp"

#include <cstdio>

#include <Eigen/Eigenvalues>

namespace mebench {

Matrix unitary_exponential(const Matrix& h, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Vector phases = (-kI * t * eig.eigenvalues().cast<cplx>()).array().exp();
    return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace mebench
