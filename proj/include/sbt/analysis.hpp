#ifndef SBT_ANALYSIS_HPP
#define SBT_ANALYSIS_HPP

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "sbt/parallel.hpp"
#include "sbt/residuals.hpp"
#include "sbt/sbt_eval.hpp"

// Epsilon-sweep convergence harness, scaling-law fitting, and brute-force
// numerical verification of the integral lemmas and geometric bounds.
namespace sbt {

inline const std::vector<double>& default_epsilon_ladder() {
    static const std::vector<double> ladder{0.1, 0.05, 0.025, 0.0125};
    return ladder;
}

// ---------------------------------------------------------------------------
// Closed-form antiderivatives of |t|^m / (t^2 + b^2)^(n/2), m <= 3.
// ---------------------------------------------------------------------------
namespace detail {

inline double mono_F0(int n, double x, double b) { // int_0^x dt/(t^2+b^2)^(n/2)
    if (n == 0) return x;
    if (n == 1) return std::asinh(x / b);
    if (n == 2) return std::atan(x / b) / b;
    const double b2 = b * b;
    const double r2 = x * x + b2;
    return x / ((n - 2) * b2 * std::pow(r2, 0.5 * (n - 2))) + (n - 3.0) / ((n - 2.0) * b2) * mono_F0(n - 2, x, b);
}

inline double mono_F1(int n, double x, double b) { // int_0^x t dt/(t^2+b^2)^(n/2)
    if (n == 0) return 0.5 * x * x;
    const double b2 = b * b;
    const double r2 = x * x + b2;
    if (n == 2) return 0.5 * std::log(r2 / b2);
    return (std::pow(b2, 0.5 * (2 - n)) - std::pow(r2, 0.5 * (2 - n))) / (n - 2.0);
}

inline double mono_Fm(int m, int n, double x, double b) {
    switch (m) {
        case 0: return mono_F0(n, x, b);
        case 1: return mono_F1(n, x, b);
        case 2: return mono_F0(n - 2, x, b) - b * b * mono_F0(n, x, b);
        case 3: return mono_F1(n - 2, x, b) - b * b * mono_F1(n, x, b);
        default: throw InputError("closed-form antiderivative implemented for m <= 3 only");
    }
}

} // namespace detail

// int_lo^hi |t|^m / (t^2+b^2)^(n/2) dt by the exact antiderivative.
inline double power_core_integral_closed(int m, int n, double lo, double hi, double b) {
    auto E = [&](double x) {
        const double v = detail::mono_Fm(m, n, std::abs(x), b);
        return x >= 0.0 ? v : -v;
    };
    return E(hi) - E(lo);
}

// Same integral by graded-panel quadrature (the primary route; the closed
// form is the cross-check).
inline double power_core_integral_quad(int m, int n, double lo, double hi, double b) {
    const auto bp = refined_breakpoints(lo, hi, 0.0, std::max(b, 1e-14), 8);
    const PanelRule rule = panel_rule_from_breakpoints(bp, 24);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
        const double t = rule.t[i];
        acc += rule.w[i] * std::pow(std::abs(t), m) / std::pow(t * t + b * b, 0.5 * n);
    }
    return acc;
}

// d_mn = int_R tau^m (tau^2+1)^(-n/2) dtau via tau = tan(psi):
// d_mn = int_{-pi/2}^{pi/2} sin^m cos^(n-m-2) dpsi (m even, n >= m+2).
inline double d_mn(int m, int n) {
    if (m % 2 != 0) return 0.0;
    if (n < m + 2) throw InputError("d_mn diverges for n < m+2");
    return adaptive_simpson(
        [&](double psi) {
            return std::pow(std::sin(psi), m) * std::pow(std::cos(psi), n - m - 2);
        },
        -0.5 * kPi, 0.5 * kPi, 1e-13);
}

// ---------------------------------------------------------------------------
// Lemma checks
// ---------------------------------------------------------------------------

struct LemmaCheckRow {
    double epsilon = 0.0;
    double s = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;   // bound (constant-free) or scaling form (constant-bearing)
    double ratio = 0.0; // lhs / rhs
    bool pass = true;
};

struct LemmaCheckReport {
    std::string lemma;
    int m = 0, n = 0;
    std::vector<LemmaCheckRow> rows;
    bool all_pass = true;
    double worst_window = 1.0;    // max over s of (max ratio / min ratio) across epsilons
    double d_mn_value = 0.0;      // est_free3 only
    double cross_check_err = 0.0; // closed form vs quadrature, integral_est only
    std::vector<LemmaCheckRow> limit_rows; // est_free3 convergence data
};

// Constant-free bound: int |sbar|^m (sbar^2 + eps^2 a^2)^(-n/2) dsbar over
// (phi(s)-1, phi(s)+1) against 4|log(eps a)| (n = m+1) or pi (eps a)^(m+1-n).
inline LemmaCheckReport check_integral_lemma(int m, int n, double epsilon, const RadiusProfile& prof,
                                             const StretchMap& stretch, const std::vector<double>& s_grid) {
    if (m < 0 || n < m + 1) throw InputError("integral lemma requires m >= 0 and n >= m+1");
    if (!(epsilon > 0.0 && epsilon <= 0.25)) throw InputError("epsilon must lie in (0, 1/4]");
    LemmaCheckReport rep;
    rep.lemma = "integral_est";
    rep.m = m;
    rep.n = n;
    for (double s : s_grid) {
        const double phi = stretch.phi_of_s(s);
        const double b = epsilon * prof.a(phi);
        LemmaCheckRow row;
        row.epsilon = epsilon;
        row.s = s;
        if (b <= 0.0) {
            // tip cross section: bound degenerates to +inf
            row.lhs = power_core_integral_quad(m, n, phi - 1.0, phi + 1.0, 0.0);
            row.rhs = std::numeric_limits<double>::infinity();
            row.ratio = 0.0;
            row.pass = true;
        } else {
            row.lhs = power_core_integral_quad(m, n, phi - 1.0, phi + 1.0, b);
            const double closed = power_core_integral_closed(m, n, phi - 1.0, phi + 1.0, b);
            rep.cross_check_err =
                std::max(rep.cross_check_err, std::abs(row.lhs - closed) / std::max(1e-300, std::abs(closed)));
            row.rhs = (n == m + 1) ? 4.0 * std::abs(std::log(b)) : kPi * std::pow(b, m + 1 - n);
            row.ratio = row.lhs / row.rhs;
            row.pass = row.lhs <= row.rhs * (1.0 + 1e-12);
        }
        rep.all_pass = rep.all_pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

// The centerline difference vectors at one sample (s, sbar, theta):
//   R  = X(phi(s)) - X(phi(s)-sbar) + eps a(phi(s)) e_rho   (surface, true arc)
//   R0 = X(phi(s)) - X(phi(s)-sbar)                          (no radial part)
//   RC = X(s) - X(s-sbar)                                    (effective centerline)
//   Rt = X(s) - X(s-sbar) + eps a(s) e_rho(s,theta)          (surface, effective arc)
struct CenterlineDifferences {
    Vec3 R, R0, RC, Rtilde;
    double remainder_bound = 0.0; // kappa_max / 2
};

inline CenterlineDifferences centerline_differences(const SlenderBodyGeometry& geo, double s, double sbar,
                                                    double theta) {
    CenterlineDifferences d;
    const double phi = geo.phi_of_s(s);
    const FrameTriple fphi = geo.frame_at(phi);
    const FrameTriple fs = geo.frame_at(s);
    d.R0 = geo.X(phi) - geo.X(phi - sbar);
    d.R = d.R0 + geo.frame.e_rho(fphi, theta) * (geo.epsilon * geo.a(phi));
    d.RC = geo.X(s) - geo.X(s - sbar);
    d.Rtilde = d.RC + geo.frame.e_rho(fs, theta) * (geo.epsilon * geo.a(s));
    d.remainder_bound = 0.5 * geo.kappa_max;
    return d;
}

struct RBoundsReport {
    int total = 0;
    int upper_violations = 0;
    double max_upper_excess = 0.0; // max of (| |R| - sqrt | - (kmax/2) sbar^2), <= 0 when passing
    double min_lower_ratio = 0.0;  // min of |R| / sqrt(sbar^2 + eps^2 a^2)
    bool pass = false;
};

// Lemma R bounds at random (s, sbar, theta):
//   | |R| - sqrt(sbar^2 + eps^2 a^2) | <= (kappa_max/2) sbar^2,
//   |R| >= C sqrt(sbar^2 + eps^2 a^2), C measured.
inline RBoundsReport check_R_bounds(const SlenderBodyGeometry& geo, int samples, unsigned seed = 20240601) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    RBoundsReport rep;
    rep.total = samples;
    rep.min_lower_ratio = std::numeric_limits<double>::infinity();
    rep.max_upper_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double s = -1.0 + 2.0 * u01(rng);
        const double phi = geo.phi_of_s(s);
        const double sbar = phi - 1.0 + 2.0 * u01(rng); // sbar in (phi-1, phi+1)
        const double theta = 2.0 * kPi * u01(rng);
        const CenterlineDifferences d = centerline_differences(geo, s, sbar, theta);
        const double ea = geo.epsilon * geo.a(phi);
        const double base = std::sqrt(sbar * sbar + ea * ea);
        const double excess = std::abs(norm(d.R) - base) - d.remainder_bound * sbar * sbar;
        rep.max_upper_excess = std::max(rep.max_upper_excess, excess);
        if (excess > 1e-10) ++rep.upper_violations;
        rep.min_lower_ratio = std::min(rep.min_lower_ratio, norm(d.R) / base);
    }
    rep.pass = rep.upper_violations == 0 && rep.min_lower_ratio > 0.0;
    return rep;
}

enum class ScalingLemma { EstFree1, EstFree1New, AuxEst, EstFree2, EstFree3, CenterLemFree };

inline std::string to_string(ScalingLemma id) {
    switch (id) {
        case ScalingLemma::EstFree1: return "est_free1";
        case ScalingLemma::EstFree1New: return "est_free1_new";
        case ScalingLemma::AuxEst: return "aux_est";
        case ScalingLemma::EstFree2: return "est_free2";
        case ScalingLemma::EstFree3: return "est_free3";
        default: return "center_lem_free";
    }
}

inline ScalingLemma scaling_lemma_from_string(const std::string& s) {
    if (s == "est_free1") return ScalingLemma::EstFree1;
    if (s == "est_free1_new") return ScalingLemma::EstFree1New;
    if (s == "aux_est") return ScalingLemma::AuxEst;
    if (s == "est_free2") return ScalingLemma::EstFree2;
    if (s == "est_free3") return ScalingLemma::EstFree3;
    if (s == "center_lem_free") return ScalingLemma::CenterLemFree;
    throw InputError("unknown lemma id '" + s + "'");
}

// Scalar decay preset used by the lemma checks.
struct ScalarG {
    std::string kind;
    std::function<double(double)> g, gp;
    double c1_norm = 0.0, ca_norm = 0.0;
};

inline ScalarG scalar_g(const std::string& kind) {
    ScalarG out;
    out.kind = kind;
    if (kind == "constant") {
        out.g = [](double) { return 1.0; };
        out.gp = [](double) { return 0.0; };
        out.c1_norm = 1.0;
        out.ca_norm = std::numeric_limits<double>::infinity();
    } else if (kind == "parabolic" || kind == "parabolic-decay") {
        out.g = [](double s) { return 1.0 - s * s; };
        out.gp = [](double s) { return -2.0 * s; };
        out.c1_norm = 3.0;
        out.ca_norm = 1.0;
    } else {
        throw InputError("unknown g preset '" + kind + "'");
    }
    return out;
}

namespace detail {

// int over sbar in (phi-1, phi+1) of sbar^m / |R|^n * weight(phi - sbar),
// R = X(phi) - X(phi - sbar) + eps a(phi) e_rho(phi, theta=0).
// signed_power: use sbar^m (signed); otherwise |sbar|^m.
template <class W>
double lemma_line_integral(const SlenderBodyGeometry& geo, double s, int m, int n, bool signed_power,
                           W&& weight) {
    const double phi = geo.phi_of_s(s);
    const double ea = geo.epsilon * geo.a(phi);
    const FrameTriple fr = geo.frame_at(phi);
    const Vec3 erho = geo.frame.e_rho(fr, 0.0);
    const Vec3 Xphi = geo.X(phi);
    const auto bp = refined_breakpoints(phi - 1.0, phi + 1.0, 0.0, std::max(ea, 1e-13), 8);
    const PanelRule rule = panel_rule_from_breakpoints(bp, 24);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.t.size(); ++i) {
        const double sbar = rule.t[i];
        const Vec3 R = Xphi - geo.X(phi - sbar) + erho * ea;
        const double pw = signed_power ? std::pow(sbar, m) : std::pow(std::abs(sbar), m);
        acc += rule.w[i] * pw / std::pow(norm2(R), 0.5 * n) * weight(phi - sbar);
    }
    return acc;
}

} // namespace detail

// Constant-bearing scaling lemmas, checked as bounded ratios across the
// epsilon ladder (max/min <= 4 per cross section). For est_free3 the report
// additionally records the convergence of LHS (eps a)^(n-m-1) to d_mn g(s).
inline LemmaCheckReport check_scaling_lemmas(const GeometryDoc& base_doc, ScalingLemma id, int m, int n,
                                             const std::string& g_kind,
                                             const std::vector<double>& epsilons,
                                             const std::vector<double>& s_values = {0.1, 0.45, -0.3, 0.85}) {
    LemmaCheckReport rep;
    rep.lemma = to_string(id);
    rep.m = m;
    rep.n = n;
    const ScalarG G = scalar_g(g_kind);

    if (id == ScalingLemma::EstFree2 && (m % 2 == 0 || n < m + 2))
        throw InputError("est_free2 requires odd m > 0 and n >= m+2");
    if (id == ScalingLemma::EstFree3 && (m % 2 != 0 || n % 2 == 0 || n < m + 3))
        throw InputError("est_free3 requires even m >= 0 and odd n >= m+3");
    if (id == ScalingLemma::CenterLemFree && (n != 1 && n != 3))
        throw InputError("center_lem_free requires n in {1,3}");
    if ((id == ScalingLemma::EstFree1 || id == ScalingLemma::EstFree1New) && (m < 0 || n < m + 1))
        throw InputError("est_free1 requires m >= 0, n >= m+1");

    if (id == ScalingLemma::EstFree3) rep.d_mn_value = d_mn(m, n);

    for (double eps : epsilons) {
        const SlenderBodyGeometry geo = build_geometry(base_doc, eps);
        for (double s : s_values) {
            const double phi = geo.phi_of_s(s);
            const double a = geo.a(phi);
            const double ea = eps * a;
            LemmaCheckRow row;
            row.epsilon = eps;
            row.s = s;
            switch (id) {
                case ScalingLemma::EstFree1: {
                    row.lhs = detail::lemma_line_integral(geo, s, m, n, false, [](double) { return 1.0; });
                    row.rhs = (n == m + 1) ? std::abs(std::log(ea)) : std::pow(ea, m + 1 - n);
                    break;
                }
                case ScalingLemma::EstFree1New: {
                    row.lhs = detail::lemma_line_integral(geo, s, m, n, false, [](double) { return 1.0; });
                    row.rhs = (n == m + 1) ? std::abs(std::log(eps))
                                           : std::pow(eps, m - n) * std::pow(a, m + 2 - n);
                    break;
                }
                case ScalingLemma::AuxEst: {
                    const int j = n;
                    if (j < 1) throw InputError("aux_est requires j >= 1 (passed as n)");
                    if (!std::isfinite(G.ca_norm)) throw InputError("aux_est requires g in C_a");
                    row.lhs = std::abs(G.g(s)) /
                              std::pow((phi - 1.0) * (phi - 1.0) + ea * ea, 0.5 * j);
                    row.rhs = std::pow(eps, -j + 1) * std::pow(a, -j) * G.ca_norm;
                    break;
                }
                case ScalingLemma::EstFree2: {
                    const double v =
                        detail::lemma_line_integral(geo, s, m, n, true, [&](double t) { return G.g(t); });
                    row.lhs = std::abs(v);
                    const double c1 = (n == m + 2) ? G.c1_norm * std::abs(std::log(ea))
                                                   : G.c1_norm * std::pow(ea, m + 2 - n);
                    const double ca = std::isfinite(G.ca_norm)
                                          ? ((n == m + 2) ? G.ca_norm / a
                                                          : G.ca_norm * std::pow(eps, m + 2 - n) *
                                                                std::pow(a, m + 1 - n))
                                          : 0.0;
                    row.rhs = c1 + ca;
                    break;
                }
                case ScalingLemma::EstFree3: {
                    const double v =
                        detail::lemma_line_integral(geo, s, m, n, true, [&](double t) { return G.g(t); });
                    const double limit = v * std::pow(ea, n - m - 1);
                    LemmaCheckRow lim;
                    lim.epsilon = eps;
                    lim.s = s;
                    lim.lhs = limit;
                    lim.rhs = rep.d_mn_value * G.g(s);
                    lim.ratio = lim.rhs != 0.0 ? lim.lhs / lim.rhs : 0.0;
                    rep.limit_rows.push_back(lim);
                    row.lhs = std::abs(v - std::pow(ea, m + 1 - n) * rep.d_mn_value * G.g(s));
                    const double c1 = G.c1_norm * std::pow(ea, m + 2 - n);
                    const double ca = std::isfinite(G.ca_norm)
                                          ? G.ca_norm * std::pow(eps, m + 2 - n) * std::pow(a, m + 1 - n)
                                          : 0.0;
                    row.rhs = c1 + ca;
                    break;
                }
                case ScalingLemma::CenterLemFree: {
                    // A_n - B_n - L(s) g(s) + (n-1) g(s), a = a(s) here
                    const double as = geo.a(s);
                    const double eas = eps * as;
                    const FrameTriple fr = geo.frame_at(s);
                    const Vec3 erho = geo.frame.e_rho(fr, 0.0);
                    const Vec3 Xs = geo.X(s);
                    const auto bpA = refined_breakpoints(s - 1.0, s + 1.0, 0.0, std::max(eas, 1e-13), 8);
                    const PanelRule rA = panel_rule_from_breakpoints(bpA, 24);
                    double A = 0.0;
                    for (std::size_t i = 0; i < rA.t.size(); ++i) {
                        const double st = rA.t[i];
                        const Vec3 Rt = Xs - geo.X(s - st) + erho * eas;
                        A += rA.w[i] * std::pow(std::abs(st), n - 1) / std::pow(norm2(Rt), 0.5 * n) *
                             G.g(s - st);
                    }
                    const auto bpB = refined_breakpoints(s - 1.0, s + 1.0, 0.0, 1e-6, 8);
                    const PanelRule rB = panel_rule_from_breakpoints(bpB, 24);
                    double B = 0.0;
                    for (std::size_t i = 0; i < rB.t.size(); ++i) {
                        const double st = rB.t[i];
                        double gint;
                        if (std::abs(st) < kDeltaSing) {
                            gint = -(st >= 0.0 ? 1.0 : -1.0) * G.gp(s);
                        } else {
                            const Vec3 Rc = Xs - geo.X(s - st);
                            gint = std::pow(std::abs(st), n - 1) / std::pow(norm(Rc), (double)n) *
                                       G.g(s - st) -
                                   G.g(s) / std::abs(st);
                        }
                        B += rB.w[i] * gint;
                    }
                    const double one_s2 = 1.0 - s * s;
                    const double Lpos = std::log(
                        (2.0 * one_s2 + 2.0 * std::sqrt(one_s2 * one_s2 + eas * eas)) / (eas * eas));
                    row.lhs = std::abs(A - B - Lpos * G.g(s) + (n - 1) * G.g(s));
                    row.rhs = eps * std::abs(std::log(eps)) * G.c1_norm;
                    break;
                }
            }
            row.ratio = row.rhs != 0.0 ? row.lhs / row.rhs : 0.0;
            rep.rows.push_back(row);
        }
    }

    // Pass semantics per lemma class. Tight forms (est_free1, est_free2) must
    // track the stated scaling within a factor-4 window per cross section.
    // The remaining bounds are one-sided: the eps-for-a trades (est_free1_new,
    // aux_est) are loose at interior cross sections, and the remainder bounds
    // (est_free3 error term, center_lem_free) may decay faster than stated.
    // For those the falsifiable content is that the ratio never grows along
    // the ladder; est_free3 additionally must converge to its d_mn limit.
    // Cross sections where the LHS collapses by symmetry (ratio at roundoff
    // level) are skipped.
    const bool one_sided = (id == ScalingLemma::EstFree1New || id == ScalingLemma::AuxEst ||
                            id == ScalingLemma::EstFree3 || id == ScalingLemma::CenterLemFree);
    rep.worst_window = 1.0;
    for (double s : s_values) {
        double peak = 0.0;
        for (const auto& r : rep.rows)
            if (r.s == s) peak = std::max(peak, r.ratio);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, at_largest_eps = 0.0;
        for (const auto& r : rep.rows)
            if (r.s == s && r.ratio > std::max(1e-13, 1e-6 * peak)) {
                lo = std::min(lo, r.ratio);
                hi = std::max(hi, r.ratio);
                if (r.epsilon == epsilons.front()) at_largest_eps = r.ratio;
            }
        if (!(hi > 0.0) || !std::isfinite(lo)) continue;
        if (one_sided) {
            if (at_largest_eps > 0.0) rep.worst_window = std::max(rep.worst_window, hi / at_largest_eps);
        } else {
            rep.worst_window = std::max(rep.worst_window, hi / lo);
        }
    }
    rep.all_pass = rep.worst_window <= 4.0;
    if (id == ScalingLemma::EstFree3 && !rep.limit_rows.empty()) {
        // convergence of the rescaled integral to d_mn g(s) at the smallest eps
        const double eps_min = epsilons.back();
        for (const auto& r : rep.limit_rows)
            if (r.epsilon == eps_min && r.rhs != 0.0)
                rep.all_pass = rep.all_pass && std::abs(r.ratio - 1.0) <= 0.05;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Epsilon sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::vector<double> epsilons = default_epsilon_ladder();
    GeometryDoc geometry;
    ForceSpec force;
    QuadratureSpec quad;
    int s_points = 101;
    double window = 0.9;
    LForm l_form = LForm::Asymptotic;
    ForceConvention convention = ForceConvention::Stretch;
    int threads = 0;

    void validate() const {
        if (epsilons.size() < 1) throw InputError("sweep needs at least one epsilon");
        for (std::size_t i = 0; i + 1 < epsilons.size(); ++i)
            if (!(epsilons[i] > epsilons[i + 1])) throw InputError("epsilons must be strictly decreasing");
        for (double e : epsilons)
            if (!(e > 0.0 && e <= 0.25)) throw InputError("epsilon must lie in (0, 0.25]");
        if (s_points < 3) throw InputError("sweep needs s_points >= 3");
        quad.validate();
    }
};

struct SweepRow {
    double epsilon = 0.0;
    double theta_sup = 0.0, theta_sup_win = 0.0;
    double force_sup = 0.0, force_sup_win = 0.0;
    double gap_sup = 0.0, gap_sup_win = 0.0;
    double fF_sup_win = 0.0; // sup |f^SB - F_tilde| on the window
    double Ft_sup_win = 0.0; // sup |F_t| on the window
    double runtime_s = 0.0;
    double max_quad_rel_err = 0.0;
    bool quad_warn = false;
};

struct SweepPerS {
    double s = 0.0;
    double theta_residual_sup = 0.0;
    Vec3 force_residual;
    double centerline_gap = 0.0;
};

struct SweepReport {
    SweepConfig config;
    std::vector<SweepRow> rows;
    std::vector<std::vector<SweepPerS>> per_s; // one table per epsilon
};

inline SweepReport epsilon_sweep(const SweepConfig& config) {
    config.validate();
    SweepReport report;
    report.config = config;
    const std::vector<double> grid = residual_s_grid(config.s_points);
    const int threads = resolve_threads(config.threads);
    for (double eps : config.epsilons) {
        const auto t0 = std::chrono::steady_clock::now();
        const SlenderBodyGeometry geo = build_geometry(config.geometry, eps);
        const ForceDensity f = make_force(config.force);
        std::vector<ResidualSample> samples(grid.size());
        parallel_for(grid.size(), threads, [&](std::size_t k) {
            samples[k] = residual_sample(geo, f, grid[k], config.quad, config.l_form, config.convention);
        });
        SweepRow row;
        row.epsilon = eps;
        std::vector<SweepPerS> table(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const auto& r = samples[k];
            table[k] = {r.s, r.theta_residual_sup, r.force_residual, r.centerline_gap};
            const bool in_win = std::abs(r.s) <= config.window;
            row.theta_sup = std::max(row.theta_sup, r.theta_residual_sup);
            row.force_sup = std::max(row.force_sup, norm(r.force_residual));
            row.gap_sup = std::max(row.gap_sup, r.centerline_gap);
            if (in_win) {
                row.theta_sup_win = std::max(row.theta_sup_win, r.theta_residual_sup);
                row.force_sup_win = std::max(row.force_sup_win, norm(r.force_residual));
                row.gap_sup_win = std::max(row.gap_sup_win, r.centerline_gap);
                row.fF_sup_win = std::max(row.fF_sup_win, norm(r.f_minus_Ftilde));
                row.Ft_sup_win = std::max(row.Ft_sup_win, norm(r.F_t));
            }
            row.max_quad_rel_err = std::max(row.max_quad_rel_err, r.quad_rel_err);
        }
        row.quad_warn = row.max_quad_rel_err > config.quad.warn_rel_tol;
        row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rows.push_back(row);
        report.per_s.push_back(std::move(table));
    }
    return report;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

enum class FitModel { Pow, PowLog, PowLog32 }; // err = C eps^p |log eps|^q, q in {0, 1, 3/2}

struct ScalingFit {
    FitModel model = FitModel::Pow;
    double p = 0.0;
    double C = 0.0;
    double r_squared = 0.0;
};

inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& pairs, FitModel model) {
    if (pairs.size() < 3) throw InputError("fit_scaling needs at least 3 (eps, err) pairs");
    const double q = model == FitModel::Pow ? 0.0 : (model == FitModel::PowLog ? 1.0 : 1.5);
    std::vector<double> xs, ys;
    for (const auto& [eps, err] : pairs) {
        if (!(err > 0.0)) throw InputError("fit_scaling requires err > 0");
        if (!(eps > 0.0 && eps < 1.0)) throw InputError("fit_scaling requires eps in (0,1)");
        xs.push_back(std::log(eps));
        ys.push_back(std::log(err) - q * std::log(std::abs(std::log(eps))));
    }
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    ScalingFit fit;
    fit.model = model;
    fit.p = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.p * sx) / n;
    fit.C = std::exp(intercept);
    double ss_res = 0.0, ss_tot = 0.0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = intercept + fit.p * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return fit;
}

} // namespace sbt

#endif
