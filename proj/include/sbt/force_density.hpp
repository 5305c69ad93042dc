#ifndef SBT_FORCE_DENSITY_HPP
#define SBT_FORCE_DENSITY_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"
#include "sbt/quadrature.hpp"

namespace sbt {

// Line force density f(s) on the effective centerline s in [-1,1].
struct ForceDensity {
    std::string kind = "custom";
    std::function<Vec3(double)> f;
    std::function<Vec3(double)> f_prime;
    bool has_derivative = false;
};

inline ForceDensity force_constant(const Vec3& dir) {
    ForceDensity fd;
    fd.kind = "constant";
    fd.f = [dir](double) { return dir; };
    fd.f_prime = [](double) { return Vec3{0, 0, 0}; };
    fd.has_derivative = true;
    return fd;
}

// f(s) = (1-s^2) dir: C^1 on [-1,1] and in C_a, the preset satisfying the
// decay hypotheses of the error theory.
inline ForceDensity force_parabolic(const Vec3& dir) {
    ForceDensity fd;
    fd.kind = "parabolic-decay";
    fd.f = [dir](double s) { return dir * (1.0 - s * s); };
    fd.f_prime = [dir](double s) { return dir * (-2.0 * s); };
    fd.has_derivative = true;
    return fd;
}

struct ForceSpec {
    std::string kind = "parabolic";
    Vec3 direction{1, 0, 0};
};

inline ForceDensity make_force(const ForceSpec& spec) {
    if (spec.kind == "constant") return force_constant(spec.direction);
    if (spec.kind == "parabolic" || spec.kind == "parabolic-decay") return force_parabolic(spec.direction);
    throw InputError("unknown force kind '" + spec.kind + "'");
}

struct DecayNorms {
    double c1_norm = 0.0;  // sup|f| + sup|f'|
    double ca_norm = 0.0;  // sup |f|/sqrt(1-s^2), +inf if divergent
    double l2a_norm = 0.0; // (int |f|^2 |log(1-s^2)|)^(1/2)
};

// Norms on a Chebyshev-clustered grid; the L2_a integral handles the log
// endpoint singularity with geometric panels toward +-1.
inline DecayNorms decay_norms(const ForceDensity& fd, int grid_size = 4096) {
    if (grid_size < 1000) throw InputError("decay_norms needs grid_size >= 1e3");
    DecayNorms out;

    double sup_f = 0.0, sup_fp = 0.0, sup_ratio = 0.0;
    std::vector<double> end_ratio; // ratio at the points nearest the endpoints
    const int n = grid_size;
    std::vector<double> ratios(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::cos(kPi * (2.0 * k + 1.0) / (2.0 * n)); // interior Chebyshev
        const Vec3 v = fd.f(s);
        sup_f = std::max(sup_f, norm(v));
        if (fd.has_derivative) sup_fp = std::max(sup_fp, norm(fd.f_prime(s)));
        ratios[k] = norm(v) / std::sqrt(1.0 - s * s);
        sup_ratio = std::max(sup_ratio, ratios[k]);
    }
    if (!fd.has_derivative) {
        const double h = 1e-6;
        for (int k = 0; k < n; ++k) {
            const double s = std::clamp(std::cos(kPi * (2.0 * k + 1.0) / (2.0 * n)), -1.0 + h, 1.0 - h);
            sup_fp = std::max(sup_fp, norm(fd.f(s + h) - fd.f(s - h)) / (2.0 * h));
        }
    }
    out.c1_norm = sup_f + sup_fp;

    // divergence probe: ratio trend over the grid points closest to the tips
    // (grid is ordered from s ~ +1 down to s ~ -1)
    bool divergent = false;
    const int probe = 12;
    if (n > 4 * probe && sup_f > 0.0) {
        const double near_hi = ratios[0], far_hi = ratios[probe];
        const double near_lo = ratios[n - 1], far_lo = ratios[n - 1 - probe];
        if ((near_hi > 2.0 * far_hi && near_hi >= sup_ratio * (1.0 - 1e-12)) ||
            (near_lo > 2.0 * far_lo && near_lo >= sup_ratio * (1.0 - 1e-12)))
            divergent = true;
    }
    out.ca_norm = divergent ? std::numeric_limits<double>::infinity() : sup_ratio;

    // |log(1-s^2)| = -log(1-s) - log(1+s) on (-1,1)
    auto g = [&](double s) { return norm2(fd.f(s)); };
    const double part1 =
        integrate_endpoint_singular([&](double s) { return -g(s) * std::log1p(-s); }, -1.0, 1.0, true);
    const double part2 =
        integrate_endpoint_singular([&](double s) { return -g(s) * std::log1p(s); }, -1.0, 1.0, false);
    out.l2a_norm = std::sqrt(std::max(0.0, part1 + part2));
    return out;
}

} // namespace sbt

#endif
