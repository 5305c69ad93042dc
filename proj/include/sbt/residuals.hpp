#ifndef SBT_RESIDUALS_HPP
#define SBT_RESIDUALS_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "sbt/sbt_eval.hpp"

// The paper's three residual diagnostics: theta-dependence of the surface
// velocity, total-force mismatch against the prescribed line force, and the
// surface-vs-centerline velocity gap.
namespace sbt {

struct ThetaResidual {
    std::vector<double> theta;
    std::vector<Vec3> values; // u^r at each angle (mean removed)
    double sup = 0.0;         // max_k |u^r(theta_k)|
};

// u^r(theta, phi(s)) = u^SB|_Gamma - (1/2pi) int_0^2pi u^SB|_Gamma dw,
// theta mean by the trapezoid rule on >= 32 equispaced angles.
inline ThetaResidual theta_residual(const SurfaceContext& ctx, int theta_nodes) {
    const int n = std::max(32, theta_nodes);
    ThetaResidual out;
    out.theta = theta_grid(n);
    out.values.resize(n);
    Vec3 mean{0, 0, 0};
    for (int k = 0; k < n; ++k) {
        out.values[k] = ctx.velocity(out.theta[k]);
        mean += out.values[k];
    }
    mean = mean / (double)n;
    for (int k = 0; k < n; ++k) {
        out.values[k] -= mean;
        out.sup = std::max(out.sup, norm(out.values[k]));
    }
    return out;
}

inline ThetaResidual theta_residual(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                                    const QuadratureSpec& quad = {}) {
    SurfaceContext ctx(geo, f, s, quad);
    return theta_residual(ctx, quad.theta_nodes);
}

struct StressSample {
    double s = 0.0, theta = 0.0;
    Vec3 strain_rate_normal; // 2 E(u^SB) n
    double pressure = 0.0;
    Vec3 traction;           // (2E - pI) n = strain_rate_normal - pressure * normal
    Vec3 normal;             // unit normal into the body
    Vec3 E_rho, E_t;         // the two strain pieces, for the F-tilde split
};

// Assembles the normal strain rate from the scaled kernel derivatives:
//   E_rho = -du/drho - (du/drho.e_rho)e_rho - (1/ea)(du/dth.e_rho)e_theta
//           - (du/dphi.e_rho)/(1-ea kh) e_t
//   E_t   = du/dphi/(1-ea kh) + (du/dphi.e_t)/(1-ea kh) e_t
//           + (du/drho.e_t)e_rho + (1/ea)(du/dth.e_t)e_theta
//   2 E n = (E_rho + eps a' E_t)/sqrt(1+eps^2 a'^2)
inline StressSample surface_stress(const SurfaceContext& ctx, double theta) {
    const auto d = ctx.derivatives(theta);
    const Vec3 erho = ctx.e_rho(theta), eth = ctx.e_theta(theta), et = ctx.frame().e_t;
    StressSample out;
    out.s = ctx.s();
    out.theta = theta;
    out.E_rho = d.d_rho * (-1.0) - erho * dot(d.d_rho, erho) - eth * dot(d.d_theta, erho) -
                et * dot(d.d_phi, erho);
    out.E_t = d.d_phi + et * dot(d.d_phi, et) + erho * dot(d.d_rho, et) + eth * dot(d.d_theta, et);
    const double eap = ctx.geometry().epsilon * ctx.a_prime();
    const double den = std::sqrt(1.0 + eap * eap);
    out.normal = (erho * (-1.0) + et * eap) / den;
    out.strain_rate_normal = (out.E_rho + out.E_t * eap) / den;
    out.pressure = ctx.pressure(theta);
    out.traction = out.strain_rate_normal - out.normal * out.pressure;
    return out;
}

inline StressSample surface_stress(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                                   double theta, const QuadratureSpec& quad = {}) {
    SurfaceContext ctx(geo, f, s, quad);
    return surface_stress(ctx, theta);
}

// sigma = grad u + (grad u)^T - p I by second-order central differences of
// arbitrary velocity/pressure fields. Independent of the analytic assembly.
inline Mat3 fd_stress(const std::function<Vec3(const Vec3&)>& u_fn,
                      const std::function<double(const Vec3&)>& p_fn, const Vec3& x, double h) {
    Mat3 grad;
    for (int j = 0; j < 3; ++j) {
        Vec3 e{0, 0, 0};
        e[j] = h;
        const Vec3 du = (u_fn(x + e) - u_fn(x - e)) / (2.0 * h);
        for (int i = 0; i < 3; ++i) grad(i, j) = du[i];
    }
    Mat3 sigma = grad + grad.transpose();
    const double p = p_fn(x);
    sigma(0, 0) -= p;
    sigma(1, 1) -= p;
    sigma(2, 2) -= p;
    return sigma;
}

// Finite-difference stress oracle for the slender body field: evaluates the
// FD stress at outward offsets (offset, 2*offset, 3*offset) from the surface
// point and extrapolates quadratically back to the surface. Panels are frozen
// once per (s,theta) so the quadrature error differences out smoothly.
inline Mat3 fd_stress_oracle(const SlenderBodyGeometry& geo, const ForceDensity& f, double s, double theta,
                             double offset, double h, QuadratureSpec quad = {}) {
    SurfaceContext ctx(geo, f, s, quad);
    if (!(offset >= 2.0 * h)) throw DomainError("fd_stress_oracle: offset must be >= 2h");
    if (!(h <= ctx.eps_a() / 10.0)) throw DomainError("fd_stress_oracle: h must be <= eps a / 10");
    const Vec3 xs = ctx.point(theta);
    const double eap = geo.epsilon * ctx.a_prime();
    const double den = std::sqrt(1.0 + eap * eap);
    const Vec3 outward = (ctx.e_rho(theta) - ctx.frame().e_t * eap) / den; // -n
    quad.error_check = false;
    const NodeCache cache = build_line_cache(geo, f, std::clamp(s, -1.0, 1.0),
                                             std::max(ctx.eps_a(), 1e-13), quad);
    auto u_fn = [&](const Vec3& y) { return cache_velocity(cache, y); };
    auto p_fn = [&](const Vec3& y) { return cache_pressure(cache, y); };
    Mat3 sig[3];
    for (int k = 0; k < 3; ++k) sig[k] = fd_stress(u_fn, p_fn, xs + outward * ((k + 1) * offset), h);
    return sig[0] * 3.0 - sig[1] * 3.0 + sig[2];
}

enum class ForceConvention { Stretch, Direct };

struct ForceSample {
    Vec3 f_sb;    // integral of traction J phi' over the cross section
    Vec3 F_tilde; // F_rho + F_t
    Vec3 F_rho;   // eps a  int (E_rho + p e_rho) dtheta
    Vec3 F_t;     // eps^2 a a' int (E_t - p e_t) dtheta
};

// f^SB(s) = int_0^2pi (2E - pI) n J_eps phi'(s) dtheta, trapezoid in theta.
// The Direct convention drops the phi'(s) factor (no claimed rate).
inline ForceSample sbt_force_full(const SurfaceContext& ctx, int theta_nodes,
                                  ForceConvention conv = ForceConvention::Stretch) {
    const int n = std::max(32, theta_nodes);
    const auto th = theta_grid(n);
    const double dw = 2.0 * kPi / n;
    const SlenderBodyGeometry& geo = ctx.geometry();
    const double phip = (conv == ForceConvention::Stretch) ? ctx.phi_prime() : 1.0;
    const double ea = ctx.eps_a();
    const double eaap = geo.epsilon * geo.epsilon * ctx.a() * ctx.a_prime();
    ForceSample out{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int k = 0; k < n; ++k) {
        const StressSample ss = surface_stress(ctx, th[k]);
        const double kh = ctx.kappa_hat(th[k]);
        const double eap = geo.epsilon * ctx.a_prime();
        const double J = ea * std::sqrt((1.0 - ea * kh) * (1.0 - ea * kh) + eap * eap);
        out.f_sb += ss.traction * (J * phip * dw);
        out.F_rho += (ss.E_rho + ctx.e_rho(th[k]) * ss.pressure) * (ea * dw);
        out.F_t += (ss.E_t - ctx.frame().e_t * ss.pressure) * (eaap * dw);
    }
    out.F_tilde = out.F_rho + out.F_t;
    return out;
}

inline Vec3 sbt_force(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                      const QuadratureSpec& quad = {}, ForceConvention conv = ForceConvention::Stretch) {
    SurfaceContext ctx(geo, f, s, quad);
    return sbt_force_full(ctx, quad.theta_nodes, conv).f_sb;
}

// sup over the theta grid of |u^SB(s,theta) - u^SB_C(s)|.
inline double centerline_gap(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                             const QuadratureSpec& quad = {}, LForm form = LForm::Asymptotic) {
    SurfaceContext ctx(geo, f, s, quad);
    const Vec3 uc = centerline_velocity(geo, f, s, quad, form);
    const int n = std::max(32, quad.theta_nodes);
    double sup = 0.0;
    for (double th : theta_grid(n)) sup = std::max(sup, norm(ctx.velocity(th) - uc));
    return sup;
}

// All residual quantities at one cross section, sharing a single context.
struct ResidualSample {
    double s = 0.0;
    double theta_residual_sup = 0.0;
    Vec3 force_residual;     // f^SB(s) - f(s)
    double centerline_gap = 0.0;
    Vec3 f_minus_Ftilde;     // f^SB - F_tilde
    Vec3 F_t;
    double quad_rel_err = 0.0;
};

inline ResidualSample residual_sample(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                                      const QuadratureSpec& quad = {}, LForm form = LForm::Asymptotic,
                                      ForceConvention conv = ForceConvention::Stretch) {
    SurfaceContext ctx(geo, f, s, quad);
    ResidualSample out;
    out.s = s;
    const int n = std::max(32, quad.theta_nodes);
    const auto th = theta_grid(n);
    std::vector<Vec3> vel(n);
    Vec3 mean{0, 0, 0};
    for (int k = 0; k < n; ++k) {
        vel[k] = ctx.velocity(th[k]);
        mean += vel[k];
    }
    mean = mean / (double)n;
    for (int k = 0; k < n; ++k) out.theta_residual_sup = std::max(out.theta_residual_sup, norm(vel[k] - mean));
    const Vec3 uc = centerline_velocity(geo, f, s, quad, form);
    for (int k = 0; k < n; ++k) out.centerline_gap = std::max(out.centerline_gap, norm(vel[k] - uc));
    const ForceSample fs = sbt_force_full(ctx, n, conv);
    out.force_residual = fs.f_sb - f.f(s);
    out.f_minus_Ftilde = fs.f_sb - fs.F_tilde;
    out.F_t = fs.F_t;
    out.quad_rel_err = ctx.max_rel_err();
    return out;
}

} // namespace sbt

#endif
