#ifndef SBT_QUADRATURE_HPP
#define SBT_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <vector>

#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"

namespace sbt {

// Panelization and node counts for the near-singular line integrals and the
// theta integrals. refinement_levels < 0 means "choose from the near scale".
struct QuadratureSpec {
    int base_panels = 8;        // panels per unit length, far from the near point
    int refinement_levels = -1; // dyadic levels toward the near point (-1 = auto)
    int nodes_per_panel = 16;   // Gauss-Legendre nodes per panel
    int theta_nodes = 64;       // trapezoid nodes for theta integrals
    bool error_check = true;    // embedded lower-order re-evaluation
    double warn_rel_tol = 1e-3; // self-reported non-convergence threshold

    void validate() const {
        if (base_panels < 1 || nodes_per_panel < 1 || theta_nodes < 1)
            throw InputError("quadrature counts must be >= 1");
        if (nodes_per_panel > 64) throw InputError("nodes_per_panel must be <= 64");
    }
};

namespace detail {

struct GLRule {
    std::vector<double> x, w; // nodes/weights on [-1,1]
};

// Nodes by Newton iteration on P_n; cached per n.
inline const GLRule& gauss_legendre(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    GLRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    auto [pos, ok] = cache.emplace(n, std::move(rule));
    (void)ok;
    return pos->second;
}

} // namespace detail

// A fixed set of quadrature nodes/weights on an interval. Building the rule
// once and reusing it across nearby evaluation points keeps the quadrature
// error a smooth function of the target point, which the finite-difference
// oracles require.
struct PanelRule {
    std::vector<double> t, w;

    template <class F>
    auto integrate(F&& f) const {
        auto acc = f(t[0]) * w[0];
        for (std::size_t i = 1; i < t.size(); ++i) acc += f(t[i]) * w[i];
        return acc;
    }
};

// Panel breakpoints on [lo,hi]: a uniform base grid plus dyadic breakpoints
// clustering toward `center` down to width ~ near_scale. `center` may lie
// outside [lo,hi]; clustering is then one-sided toward the nearer endpoint.
inline std::vector<double> refined_breakpoints(double lo, double hi, double center, double near_scale,
                                               int base_panels_per_unit, int levels = -1) {
    const double width = hi - lo;
    if (levels < 0) {
        near_scale = std::max(near_scale, width * 1e-15);
        levels = std::min(50, std::max(0, (int)std::ceil(std::log2(width / near_scale)) + 2));
    }
    std::vector<double> pts;
    const int nbase = std::max(1, (int)std::ceil(width * base_panels_per_unit));
    for (int i = 0; i <= nbase; ++i) pts.push_back(lo + width * i / nbase);
    const double c = std::clamp(center, lo, hi);
    for (int k = 1; k <= levels; ++k) {
        const double d = width * std::pow(0.5, k);
        if (c - d > lo) pts.push_back(c - d);
        if (c + d < hi) pts.push_back(c + d);
    }
    if (c > lo && c < hi) pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    out.push_back(pts.front());
    const double tol = width * 1e-13;
    for (double p : pts)
        if (p - out.back() > tol) out.push_back(p);
    out.back() = hi;
    return out;
}

inline PanelRule panel_rule_from_breakpoints(const std::vector<double>& bp, int nodes_per_panel) {
    const auto& gl = detail::gauss_legendre(nodes_per_panel);
    PanelRule rule;
    rule.t.reserve((bp.size() - 1) * nodes_per_panel);
    rule.w.reserve((bp.size() - 1) * nodes_per_panel);
    for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        const double a = bp[p], b = bp[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int i = 0; i < nodes_per_panel; ++i) {
            rule.t.push_back(mid + half * gl.x[i]);
            rule.w.push_back(half * gl.w[i]);
        }
    }
    return rule;
}

inline PanelRule make_refined_rule(double lo, double hi, double center, double near_scale,
                                   const QuadratureSpec& spec) {
    spec.validate();
    return panel_rule_from_breakpoints(
        refined_breakpoints(lo, hi, center, near_scale, spec.base_panels, spec.refinement_levels),
        spec.nodes_per_panel);
}

// Adaptive Simpson, used by the test oracles and the norm integrals.
namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

template <class F>
double adaptive_simpson(F f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integral over [a,b] of a function with an integrable (log-type) endpoint
// singularity: geometric panels toward the singular end, Gauss nodes per
// panel. The final 2^-levels sliver at the endpoint is dropped; for a log
// singularity that truncation is ~1e-14 of the width.
template <class F>
double integrate_endpoint_singular(F f, double a, double b, bool singular_at_b, int nodes = 16,
                                   int levels = 50) {
    const auto& gl = detail::gauss_legendre(nodes);
    const double width = b - a;
    double total = 0.0;
    for (int k = 1; k <= levels; ++k) {
        const double outer_frac = std::pow(0.5, k - 1);
        const double inner_frac = std::pow(0.5, k);
        double pa, pb;
        if (singular_at_b) {
            pa = b - width * outer_frac;
            pb = b - width * inner_frac;
        } else {
            pa = a + width * inner_frac;
            pb = a + width * outer_frac;
        }
        const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
        if (half <= 0.0) break;
        for (int i = 0; i < nodes; ++i) total += half * gl.w[i] * f(mid + half * gl.x[i]);
    }
    return total;
}

inline std::vector<double> theta_grid(int n) {
    std::vector<double> th(n);
    for (int i = 0; i < n; ++i) th[i] = 2.0 * kPi * i / n;
    return th;
}

// Chebyshev-Lobatto points on [-1,1], endpoint-clustered, ascending.
inline std::vector<double> chebyshev_grid(int n) {
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = -std::cos(kPi * i / (n - 1));
    s.front() = -1.0;
    s.back() = 1.0;
    return s;
}

// Interior Chebyshev points (tips excluded: the surface chart is degenerate
// at |phi| = eta), endpoint-clustered, ascending.
inline std::vector<double> residual_s_grid(int n) {
    std::vector<double> s(n);
    for (int k = 0; k < n; ++k) s[k] = -std::cos(kPi * (2.0 * k + 1.0) / (2.0 * n));
    return s;
}

} // namespace sbt

#endif
