#ifndef SBT_KERNELS_HPP
#define SBT_KERNELS_HPP

#include <array>
#include <utility>

#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"

// Free-space singular solutions of the Stokes equations and their analytic
// first derivatives. All kernels are unscaled: the 1/8pi (velocity) and
// 1/4pi (pressure) prefactors live with the line integrals that use them.
namespace sbt {

inline constexpr double kSingularGuard = 1e-14;

inline void check_not_singular(const Vec3& x) {
    if (norm2(x) < kSingularGuard * kSingularGuard)
        throw DomainError("kernel evaluated at |x| < 1e-14 (singular)");
}

// S(x) = I/|x| + x x^T / |x|^3
inline Mat3 stokeslet(const Vec3& x) {
    check_not_singular(x);
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double ir = 1.0 / r;
    const double ir3 = ir / r2;
    Mat3 s = outer(x, x) * ir3;
    s(0, 0) += ir;
    s(1, 1) += ir;
    s(2, 2) += ir;
    return s;
}

// D(x) = (1/2) Laplacian S(x) = I/|x|^3 - 3 x x^T / |x|^5
inline Mat3 doublet(const Vec3& x) {
    check_not_singular(x);
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double ir3 = 1.0 / (r2 * r);
    const double ir5 = ir3 / r2;
    Mat3 d = outer(x, x) * (-3.0 * ir5);
    d(0, 0) += ir3;
    d(1, 1) += ir3;
    d(2, 2) += ir3;
    return d;
}

// p(x) = (1/4pi) x.f / |x|^3, the pressure of a unit point force f.
inline double pressure_kernel(const Vec3& x, const Vec3& f) {
    check_not_singular(x);
    const double r2 = norm2(x);
    return dot(x, f) / (4.0 * kPi * r2 * std::sqrt(r2));
}

// Directional derivative of S along v: sum_k v_k dS_ij/dx_k.
inline Mat3 stokeslet_dir(const Vec3& x, const Vec3& v) {
    check_not_singular(x);
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double ir3 = 1.0 / (r2 * r);
    const double ir5 = ir3 / r2;
    const double xv = dot(x, v);
    Mat3 g = outer(v, x) + outer(x, v);
    g = g * ir3 + outer(x, x) * (-3.0 * xv * ir5);
    const double diag = -xv * ir3;
    g(0, 0) += diag;
    g(1, 1) += diag;
    g(2, 2) += diag;
    return g;
}

// Directional derivative of D along v.
inline Mat3 doublet_dir(const Vec3& x, const Vec3& v) {
    check_not_singular(x);
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double ir5 = 1.0 / (r2 * r2 * r);
    const double ir7 = ir5 / r2;
    const double xv = dot(x, v);
    Mat3 g = (outer(v, x) + outer(x, v)) * (-3.0 * ir5) + outer(x, x) * (15.0 * xv * ir7);
    const double diag = -3.0 * xv * ir5;
    g(0, 0) += diag;
    g(1, 1) += diag;
    g(2, 2) += diag;
    return g;
}

// Kernel value plus its full gradient; grad[(3*i+j)*3 + k] = dK_ij/dx_k.
struct KernelJet {
    Mat3 value;
    std::array<double, 27> grad{};

    Mat3 directional(const Vec3& v) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int b = (3 * i + j) * 3;
                r(i, j) = grad[b] * v.x + grad[b + 1] * v.y + grad[b + 2] * v.z;
            }
        return r;
    }
};

inline std::pair<KernelJet, KernelJet> kernel_jets(const Vec3& x) {
    check_not_singular(x);
    KernelJet s, d;
    s.value = stokeslet(x);
    d.value = doublet(x);
    const double r2 = norm2(x);
    const double r = std::sqrt(r2);
    const double ir3 = 1.0 / (r2 * r);
    const double ir5 = ir3 / r2;
    const double ir7 = ir5 / r2;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const double dij = (i == j) ? 1.0 : 0.0;
                const double dik = (i == k) ? 1.0 : 0.0;
                const double djk = (j == k) ? 1.0 : 0.0;
                const double xi = x[i], xj = x[j], xk = x[k];
                s.grad[(3 * i + j) * 3 + k] =
                    -dij * xk * ir3 + (dik * xj + djk * xi) * ir3 - 3.0 * xi * xj * xk * ir5;
                d.grad[(3 * i + j) * 3 + k] =
                    -3.0 * (dij * xk + dik * xj + djk * xi) * ir5 + 15.0 * xi * xj * xk * ir7;
            }
    return {s, d};
}

} // namespace sbt

#endif
