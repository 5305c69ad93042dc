#ifndef SBT_SBT_EVAL_HPP
#define SBT_SBT_EVAL_HPP

#include <cmath>
#include <vector>

#include "sbt/errors.hpp"
#include "sbt/force_density.hpp"
#include "sbt/geometry.hpp"
#include "sbt/kernels.hpp"
#include "sbt/linalg.hpp"
#include "sbt/quadrature.hpp"

// Evaluation of the classical slender body approximation: Stokeslets plus
// doublet corrections distributed over the effective centerline t in [-1,1],
//   u(x)  = 1/8pi int (S(R) + eps^2 a^2(t)/2 D(R)) f(t) dt,   R = x - X(t),
//   p(x)  = 1/4pi int R.f(t)/|R|^3 dt,
// and the centerline asymptotic formula with its logarithmic coefficient.
namespace sbt {

// Which printed form of the log coefficient L(s) to use: the centerline
// formula's 4 eps^2 a^2 form (default) or the 1 eps^2 a^2 form appearing in
// the supporting lemma.
enum class LForm { Asymptotic, Lemma };

inline double L_coefficient(const SlenderBodyGeometry& geo, double s, LForm form = LForm::Asymptotic) {
    const double as = geo.a(s); // radius at arclength s on the effective centerline
    const double e2a2 = geo.epsilon * geo.epsilon * as * as;
    const double q = (form == LForm::Asymptotic) ? 4.0 : 1.0;
    const double one_s2 = 1.0 - s * s;
    return std::log((2.0 * one_s2 + 2.0 * std::sqrt(one_s2 * one_s2 + q * e2a2)) / e2a2);
}

// Quadrature nodes over the effective centerline with the per-node geometry
// and force data evaluated once. A cache is tied to one refinement center;
// reusing it across nearby targets keeps the quadrature error smooth, which
// the finite-difference oracles rely on.
struct NodeCache {
    std::vector<double> t, w;
    std::vector<Vec3> X, fv;
    std::vector<double> coef; // eps^2 a^2(t) / 2
    // embedded coarser rule on the same panels (convergence self-check)
    std::vector<double> t2, w2;
    std::vector<Vec3> X2, fv2;
    std::vector<double> coef2;
};

inline NodeCache build_line_cache(const SlenderBodyGeometry& geo, const ForceDensity& f, double center,
                                  double near_scale, const QuadratureSpec& quad) {
    quad.validate();
    NodeCache c;
    const auto bp = refined_breakpoints(-1.0, 1.0, center, near_scale, quad.base_panels,
                                        quad.refinement_levels);
    auto fill = [&](const PanelRule& rule, std::vector<double>& t, std::vector<double>& w,
                    std::vector<Vec3>& X, std::vector<Vec3>& fv, std::vector<double>& coef) {
        t = rule.t;
        w = rule.w;
        const std::size_t n = t.size();
        X.resize(n);
        fv.resize(n);
        coef.resize(n);
        const double half_e2 = 0.5 * geo.epsilon * geo.epsilon;
        for (std::size_t i = 0; i < n; ++i) {
            X[i] = geo.X(t[i]);
            fv[i] = f.f(t[i]);
            const double at = geo.a(t[i]);
            coef[i] = half_e2 * at * at;
        }
    };
    fill(panel_rule_from_breakpoints(bp, quad.nodes_per_panel), c.t, c.w, c.X, c.fv, c.coef);
    if (quad.error_check) {
        const int n2 = std::max(4, quad.nodes_per_panel / 2);
        fill(panel_rule_from_breakpoints(bp, n2), c.t2, c.w2, c.X2, c.fv2, c.coef2);
    }
    return c;
}

namespace detail {

inline Vec3 sb_velocity_sum(const std::vector<double>& w, const std::vector<Vec3>& X,
                            const std::vector<Vec3>& fv, const std::vector<double>& coef, const Vec3& x) {
    Vec3 acc{0, 0, 0};
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Vec3 R = x - X[i];
        const double r2 = norm2(R);
        const double r = std::sqrt(r2);
        const double ir = 1.0 / r;
        const double ir3 = ir / r2;
        const double Rf = dot(R, fv[i]);
        Vec3 val = fv[i] * ir + R * (Rf * ir3);                        // S(R) f
        val += (fv[i] * ir3 - R * (3.0 * Rf * ir3 / r2)) * coef[i];    // coef D(R) f
        acc += val * w[i];
    }
    return acc * (1.0 / (8.0 * kPi));
}

inline double sb_pressure_sum(const std::vector<double>& w, const std::vector<Vec3>& X,
                              const std::vector<Vec3>& fv, const Vec3& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Vec3 R = x - X[i];
        const double r2 = norm2(R);
        acc += w[i] * dot(R, fv[i]) / (r2 * std::sqrt(r2));
    }
    return acc / (4.0 * kPi);
}

} // namespace detail

inline Vec3 cache_velocity(const NodeCache& c, const Vec3& x) {
    return detail::sb_velocity_sum(c.w, c.X, c.fv, c.coef, x);
}

inline double cache_pressure(const NodeCache& c, const Vec3& x) {
    return detail::sb_pressure_sum(c.w, c.X, c.fv, x);
}

// Relative self-check against the embedded coarser rule; 0 when disabled.
// The small absolute floor keeps symmetry-cancelled values from producing
// spurious warnings.
inline double cache_velocity_relerr(const NodeCache& c, const Vec3& x, const Vec3& u_fine) {
    if (c.t2.empty()) return 0.0;
    const Vec3 u2 = detail::sb_velocity_sum(c.w2, c.X2, c.fv2, c.coef2, x);
    return norm(u_fine - u2) / std::max(1e-12, norm(u_fine));
}

struct VelocityParts {
    Vec3 stokeslet, doublet; // u = stokeslet + doublet
};

inline VelocityParts cache_velocity_parts(const NodeCache& c, const Vec3& x) {
    VelocityParts out;
    Vec3 s{0, 0, 0}, d{0, 0, 0};
    for (std::size_t i = 0; i < c.w.size(); ++i) {
        const Vec3 R = x - c.X[i];
        const double r2 = norm2(R);
        const double r = std::sqrt(r2);
        const double ir = 1.0 / r;
        const double ir3 = ir / r2;
        const double Rf = dot(R, c.fv[i]);
        s += (c.fv[i] * ir + R * (Rf * ir3)) * c.w[i];
        d += (c.fv[i] * ir3 - R * (3.0 * Rf * ir3 / r2)) * (c.coef[i] * c.w[i]);
    }
    out.stokeslet = s * (1.0 / (8.0 * kPi));
    out.doublet = d * (1.0 / (8.0 * kPi));
    return out;
}

// A frozen evaluation field around one target neighborhood: velocity and
// pressure as smooth functions of x, suitable for finite differencing.
struct LineField {
    NodeCache cache;
    Vec3 velocity(const Vec3& x) const { return cache_velocity(cache, x); }
    double pressure(const Vec3& x) const { return cache_pressure(cache, x); }
};

inline LineField make_line_field(const SlenderBodyGeometry& geo, const ForceDensity& f, const Vec3& near_x,
                                 const QuadratureSpec& quad) {
    const auto [tstar, dist] = geo.nearest_effective(near_x);
    LineField lf;
    lf.cache = build_line_cache(geo, f, tstar, std::max(dist, 1e-13), quad);
    return lf;
}

struct EvalResult {
    Vec3 u;
    double rel_err_est = 0.0;
    bool warn = false;
};

struct PressureResult {
    double p = 0.0;
    double rel_err_est = 0.0;
    bool warn = false;
};

inline EvalResult sbt_velocity(const SlenderBodyGeometry& geo, const ForceDensity& f, const Vec3& x,
                               const QuadratureSpec& quad = {}) {
    if (geo.is_inside(x)) throw DomainError("evaluation point lies inside the slender body");
    const auto [tstar, dist] = geo.nearest_effective(x);
    const NodeCache c = build_line_cache(geo, f, tstar, std::max(dist, 1e-13), quad);
    EvalResult r;
    r.u = cache_velocity(c, x);
    r.rel_err_est = cache_velocity_relerr(c, x, r.u);
    r.warn = r.rel_err_est > quad.warn_rel_tol;
    return r;
}

inline PressureResult sbt_pressure(const SlenderBodyGeometry& geo, const ForceDensity& f, const Vec3& x,
                                   const QuadratureSpec& quad = {}) {
    if (geo.is_inside(x)) throw DomainError("evaluation point lies inside the slender body");
    const auto [tstar, dist] = geo.nearest_effective(x);
    const NodeCache c = build_line_cache(geo, f, tstar, std::max(dist, 1e-13), quad);
    PressureResult r;
    r.p = cache_pressure(c, x);
    if (!c.t2.empty()) {
        const double p2 = detail::sb_pressure_sum(c.w2, c.X2, c.fv2, x);
        r.rel_err_est = std::abs(r.p - p2) / std::max(1e-12, std::abs(r.p));
        r.warn = r.rel_err_est > quad.warn_rel_tol;
    }
    return r;
}

// Per-cross-section evaluation state: one node cache shared by every theta on
// the cross section and by all the surface integrals that use it.
class SurfaceContext {
  public:
    SurfaceContext(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                   const QuadratureSpec& quad)
        : geo_(&geo), s_(s) {
        if (!(s >= -1.0 && s <= 1.0)) throw InputError("surface evaluation needs s in [-1,1]");
        phi_ = geo.phi_of_s(s);
        phip_ = geo.phi_prime(s);
        a_ = geo.a(phi_);
        ap_ = geo.a_prime(phi_);
        ea_ = geo.epsilon * a_;
        frame_ = geo.frame_at(phi_);
        const double center = std::clamp(s, -1.0, 1.0);
        const double tip_gap = std::abs(phi_) > 1.0 ? std::abs(phi_) - 1.0 : 0.0;
        const double scale = std::max(std::sqrt(ea_ * ea_ + tip_gap * tip_gap), 1e-13);
        cache_ = build_line_cache(geo, f, center, scale, quad);
    }

    double s() const { return s_; }
    double phi() const { return phi_; }
    double phi_prime() const { return phip_; }
    double a() const { return a_; }
    double a_prime() const { return ap_; }
    double eps_a() const { return ea_; }
    const FrameTriple& frame() const { return frame_; }
    const NodeCache& cache() const { return cache_; }
    const SlenderBodyGeometry& geometry() const { return *geo_; }

    Vec3 e_rho(double theta) const {
        return frame_.e_n1 * std::cos(theta) + frame_.e_n2 * std::sin(theta);
    }
    Vec3 e_theta(double theta) const {
        return frame_.e_n1 * (-std::sin(theta)) + frame_.e_n2 * std::cos(theta);
    }
    double kappa_hat(double theta) const {
        return frame_.kappa1 * std::cos(theta) + frame_.kappa2 * std::sin(theta);
    }

    Vec3 point(double theta) const { return geo_->X(phi_) + e_rho(theta) * ea_; }

    Vec3 velocity(double theta) const {
        const Vec3 u = cache_velocity(cache_, point(theta));
        track_err(cache_velocity_relerr(cache_, point(theta), u));
        return u;
    }

    double pressure(double theta) const { return cache_pressure(cache_, point(theta)); }

    // The scaled surface derivatives of u^SB:
    //   d_rho   = du/drho, d_theta = (1/eps a) du/dtheta,
    //   d_phi   = 1/(1 - eps a kappa_hat) du/dphi,
    // all obtained by differentiating the kernels along e_rho, e_theta, e_t.
    struct Derivs {
        Vec3 d_rho, d_theta, d_phi;
    };

    Derivs derivatives(double theta) const {
        const Vec3 x = point(theta);
        const Vec3 erho = e_rho(theta), etheta = e_theta(theta), et = frame_.e_t;
        Vec3 acc_r{0, 0, 0}, acc_t{0, 0, 0}, acc_p{0, 0, 0};
        const auto& c = cache_;
        for (std::size_t i = 0; i < c.w.size(); ++i) {
            const Vec3 R = x - c.X[i];
            const double r2 = norm2(R);
            const double r = std::sqrt(r2);
            const double ir3 = 1.0 / (r2 * r);
            const double ir5 = ir3 / r2;
            const double ir7 = ir5 / r2;
            const Vec3 fv = c.fv[i];
            const double Rf = dot(R, fv);
            const double cf = c.coef[i];
            auto add = [&](const Vec3& v, Vec3& acc) {
                const double Rv = dot(R, v);
                const double vf = dot(v, fv);
                Vec3 g = (fv * (-Rv) + v * Rf + R * vf) * ir3 - R * (3.0 * Rf * Rv * ir5);
                g += ((fv * Rv + v * Rf + R * vf) * (-3.0 * ir5) + R * (15.0 * Rf * Rv * ir7)) * cf;
                acc += g * c.w[i];
            };
            add(erho, acc_r);
            add(etheta, acc_t);
            add(et, acc_p);
        }
        const double scale = 1.0 / (8.0 * kPi);
        return {acc_r * scale, acc_t * scale, acc_p * scale};
    }

    double max_rel_err() const { return max_rel_err_; }
    bool warned(double tol) const { return max_rel_err_ > tol; }

  private:
    void track_err(double e) const { max_rel_err_ = std::max(max_rel_err_, e); }

    const SlenderBodyGeometry* geo_;
    double s_, phi_, phip_, a_, ap_, ea_;
    FrameTriple frame_;
    NodeCache cache_;
    mutable double max_rel_err_ = 0.0;
};

inline Vec3 sbt_surface_velocity(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                                 double theta, const QuadratureSpec& quad = {}) {
    SurfaceContext ctx(geo, f, s, quad);
    return ctx.velocity(theta);
}

inline constexpr double kDeltaSing = 1e-5; // switch-to-limit threshold at t = s

// Centerline asymptotic velocity u^SB_C(s): local log term plus the
// regularized nonlocal integral. On the panel containing t = s the integrand
// is replaced for |s-t| < delta_sing by its one-sided Taylor limit.
inline Vec3 centerline_velocity(const SlenderBodyGeometry& geo, const ForceDensity& f, double s,
                                const QuadratureSpec& quad = {}, LForm form = LForm::Asymptotic) {
    if (!(s >= -1.0 && s <= 1.0)) throw InputError("centerline velocity needs s in [-1,1]");
    Vec3 fp;
    if (f.has_derivative) {
        fp = f.f_prime(s);
    } else {
        if (std::abs(s) == 1.0)
            throw InputError("centerline velocity at |s| = 1 requires force derivative data");
        const double h = std::min(1e-6, 0.5 * (1.0 - std::abs(s)));
        fp = (f.f(s + h) - f.f(s - h)) / (2.0 * h);
    }
    const Vec3 et = geo.curve().tangent(s);
    const Vec3 dd = geo.curve().second_derivative(s);
    const Vec3 fs = f.f(s);
    const double L = L_coefficient(geo, s, form);

    Vec3 local = fs - et * (3.0 * dot(et, fs)) + (fs + et * dot(et, fs)) * L;

    // one-sided limit of the regularized integrand as t -> s (u = s - t):
    // sign(u) * [ -(I + e e^T) f'(s) - (e X''^T + X'' e^T) f(s) / 2 ]
    const Vec3 limit = (fp + et * dot(et, fp)) * (-1.0) -
                       (et * dot(dd, fs) + dd * dot(et, fs)) * 0.5;

    const auto bp = refined_breakpoints(-1.0, 1.0, s, 1e-6, quad.base_panels, quad.refinement_levels);
    const PanelRule rule = panel_rule_from_breakpoints(bp, quad.nodes_per_panel);
    Vec3 integral{0, 0, 0};
    const Vec3 Xs = geo.X(s);
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
        const double t = rule.t[i];
        const double u = s - t;
        Vec3 g;
        if (std::abs(u) < kDeltaSing) {
            g = limit * (u >= 0.0 ? 1.0 : -1.0);
        } else {
            const Vec3 Rc = Xs - geo.X(t);
            const double rc2 = norm2(Rc);
            const double rc = std::sqrt(rc2);
            const Vec3 fv = f.f(t);
            g = fv / rc + Rc * (dot(Rc, fv) / (rc2 * rc)) - (fs + et * dot(et, fs)) / std::abs(u);
        }
        integral += g * rule.w[i];
    }
    return (local + integral) * (1.0 / (8.0 * kPi));
}

} // namespace sbt

#endif
