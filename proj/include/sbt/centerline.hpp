#ifndef SBT_CENTERLINE_HPP
#define SBT_CENTERLINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"
#include "sbt/quadrature.hpp"

namespace sbt {

enum class CenterlineKind { Straight, CircularArc, Spline, Analytic };

// Arclength-parameterized C^2 curve on [phi_min, phi_max] = the extended
// centerline X_ext. tangent is the exact unit tangent X', second_derivative
// is X''.
struct Centerline {
    CenterlineKind kind = CenterlineKind::Straight;
    double phi_min = -1.5;
    double phi_max = 1.5;
    std::function<Vec3(double)> position;
    std::function<Vec3(double)> tangent;
    std::function<Vec3(double)> second_derivative;
};

inline Centerline make_straight(const Vec3& direction) {
    if (norm(direction) < 1e-14) throw InputError("straight centerline needs a nonzero direction");
    const Vec3 d = normalized(direction);
    Centerline c;
    c.kind = CenterlineKind::Straight;
    c.position = [d](double phi) { return d * phi; };
    c.tangent = [d](double) { return d; };
    c.second_derivative = [](double) { return Vec3{0, 0, 0}; };
    return c;
}

// Circle of radius R in the xy plane, X(0) = origin, tangent(0) = e1.
inline Centerline make_circular_arc(double R) {
    if (!(R > 0.0)) throw InputError("circular-arc radius must be > 0");
    Centerline c;
    c.kind = CenterlineKind::CircularArc;
    c.position = [R](double phi) { return Vec3{R * std::sin(phi / R), R * (1.0 - std::cos(phi / R)), 0.0}; };
    c.tangent = [R](double phi) { return Vec3{std::cos(phi / R), std::sin(phi / R), 0.0}; };
    c.second_derivative = [R](double phi) {
        return Vec3{-std::sin(phi / R) / R, std::cos(phi / R) / R, 0.0};
    };
    return c;
}

inline Centerline make_analytic(std::function<Vec3(double)> pos, std::function<Vec3(double)> tan,
                                std::function<Vec3(double)> dd, double phi_min = -1.5,
                                double phi_max = 1.5) {
    Centerline c;
    c.kind = CenterlineKind::Analytic;
    c.phi_min = phi_min;
    c.phi_max = phi_max;
    c.position = std::move(pos);
    c.tangent = std::move(tan);
    c.second_derivative = std::move(dd);
    return c;
}

// Rigidly rotated copy, for the equivariance checks.
inline Centerline rotated(const Centerline& c, const Mat3& R) {
    Centerline r;
    r.kind = CenterlineKind::Analytic;
    r.phi_min = c.phi_min;
    r.phi_max = c.phi_max;
    r.position = [c, R](double phi) { return R.apply(c.position(phi)); };
    r.tangent = [c, R](double phi) { return R.apply(c.tangent(phi)); };
    r.second_derivative = [c, R](double phi) { return R.apply(c.second_derivative(phi)); };
    return r;
}

namespace detail {

// Natural cubic spline through nodes with prescribed parameter values.
struct CubicSpline3 {
    std::vector<double> u;
    std::vector<Vec3> p;  // node positions
    std::vector<Vec3> m;  // second derivatives at nodes

    static CubicSpline3 build(const std::vector<double>& u, const std::vector<Vec3>& p) {
        const int n = (int)u.size();
        CubicSpline3 s;
        s.u = u;
        s.p = p;
        s.m.assign(n, Vec3{});
        std::vector<double> diag(n, 2.0), sub(n, 0.0), sup(n, 0.0);
        std::vector<Vec3> rhs(n, Vec3{});
        diag[0] = diag[n - 1] = 1.0;
        for (int i = 1; i < n - 1; ++i) {
            const double hi = u[i] - u[i - 1], hj = u[i + 1] - u[i];
            sub[i] = hi / (hi + hj);
            sup[i] = hj / (hi + hj);
            rhs[i] = ((p[i + 1] - p[i]) / hj - (p[i] - p[i - 1]) / hi) * (6.0 / (hi + hj));
        }
        // Thomas algorithm
        for (int i = 1; i < n; ++i) {
            const double f = sub[i] / diag[i - 1];
            diag[i] -= f * sup[i - 1];
            rhs[i] -= rhs[i - 1] * f;
        }
        s.m[n - 1] = rhs[n - 1] / diag[n - 1];
        for (int i = n - 2; i >= 0; --i) s.m[i] = (rhs[i] - s.m[i + 1] * sup[i]) / diag[i];
        return s;
    }

    int segment(double t) const {
        int lo = 0, hi = (int)u.size() - 2;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (u[mid] <= t)
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    Vec3 eval(double t) const {
        const int i = segment(t);
        const double h = u[i + 1] - u[i];
        const double a = (u[i + 1] - t) / h, b = (t - u[i]) / h;
        return p[i] * a + p[i + 1] * b +
               ((m[i] * (a * a * a - a) + m[i + 1] * (b * b * b - b)) * (h * h / 6.0));
    }

    Vec3 deriv(double t) const {
        const int i = segment(t);
        const double h = u[i + 1] - u[i];
        const double a = (u[i + 1] - t) / h, b = (t - u[i]) / h;
        return (p[i + 1] - p[i]) / h +
               (m[i + 1] * (3.0 * b * b - 1.0) - m[i] * (3.0 * a * a - 1.0)) * (h / 6.0);
    }

    Vec3 deriv2(double t) const {
        const int i = segment(t);
        const double h = u[i + 1] - u[i];
        const double a = (u[i + 1] - t) / h, b = (t - u[i]) / h;
        return m[i] * a + m[i + 1] * b;
    }
};

} // namespace detail

// Sampled non-self-intersection constant: inf |X(a)-X(b)|/|a-b| over pairs.
inline double measure_c_gamma(const Centerline& c, int samples = 400) {
    double cmin = std::numeric_limits<double>::infinity();
    std::vector<double> phi(samples);
    std::vector<Vec3> x(samples);
    for (int i = 0; i < samples; ++i) {
        phi[i] = c.phi_min + (c.phi_max - c.phi_min) * i / (samples - 1);
        x[i] = c.position(phi[i]);
    }
    for (int i = 0; i < samples; ++i)
        for (int j = i + 1; j < samples; ++j)
            cmin = std::min(cmin, norm(x[i] - x[j]) / (phi[j] - phi[i]));
    return cmin;
}

inline double measure_kappa_max(const Centerline& c, int samples = 2000) {
    double kmax = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double phi = c.phi_min + (c.phi_max - c.phi_min) * i / samples;
        kmax = std::max(kmax, norm(c.second_derivative(phi)));
    }
    return kmax;
}

// C^2 cubic spline through the nodes, reparameterized to arclength. The
// resulting domain is [-L/2, L/2] for total length L.
inline Centerline make_spline(const std::vector<Vec3>& nodes) {
    if (nodes.size() < 4) throw InputError("spline centerline needs at least 4 nodes");
    // chord-length parameterization
    std::vector<double> u(nodes.size(), 0.0);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double d = norm(nodes[i] - nodes[i - 1]);
        if (d < 1e-12) throw InputError("spline nodes must be distinct");
        u[i] = u[i - 1] + d;
    }
    auto sp = std::make_shared<detail::CubicSpline3>(detail::CubicSpline3::build(u, nodes));
    const double u_max = u.back();

    // cumulative arclength table on a fine grid, then Newton inversion with a
    // fixed-cost Gauss correction on the containing cell
    const int table_n = 200 * (int)nodes.size();
    auto table_u = std::make_shared<std::vector<double>>();
    auto table_s = std::make_shared<std::vector<double>>();
    table_u->reserve(table_n + 1);
    table_s->reserve(table_n + 1);
    std::array<double, 8> glx{}, glw{};
    {
        const auto& gl8 = detail::gauss_legendre(8);
        for (int i = 0; i < 8; ++i) {
            glx[i] = gl8.x[i];
            glw[i] = gl8.w[i];
        }
    }
    auto cell_len = [sp, glx, glw](double a, double b) {
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        double acc = 0.0;
        for (int i = 0; i < 8; ++i) acc += half * glw[i] * norm(sp->deriv(mid + half * glx[i]));
        return acc;
    };
    double acc = 0.0;
    table_u->push_back(0.0);
    table_s->push_back(0.0);
    for (int i = 0; i < table_n; ++i) {
        const double a = u_max * i / table_n, b = u_max * (i + 1) / table_n;
        acc += cell_len(a, b);
        table_u->push_back(b);
        table_s->push_back(acc);
    }
    const double total_len = acc;

    auto u_of_arclength = [sp, table_u, table_s, u_max, cell_len](double ell) {
        const auto& tu = *table_u;
        const auto& ts = *table_s;
        auto it = std::lower_bound(ts.begin(), ts.end(), ell);
        std::size_t hi = std::min<std::size_t>(ts.size() - 1, it - ts.begin());
        std::size_t lo = hi > 0 ? hi - 1 : 0;
        double t = tu[lo] + (tu[hi] - tu[lo]) * ((ts[hi] > ts[lo]) ? (ell - ts[lo]) / (ts[hi] - ts[lo]) : 0.0);
        for (int iter = 0; iter < 30; ++iter) {
            auto jt = std::upper_bound(tu.begin(), tu.end(), t);
            std::size_t j = (jt == tu.begin()) ? 0 : (jt - tu.begin() - 1);
            const double s_t = ts[j] + cell_len(tu[j], t);
            const double err = s_t - ell;
            if (std::abs(err) < 1e-11) break;
            t -= err / norm(sp->deriv(t));
            t = std::clamp(t, 0.0, u_max);
        }
        return t;
    };

    Centerline c;
    c.kind = CenterlineKind::Spline;
    c.phi_min = -0.5 * total_len;
    c.phi_max = 0.5 * total_len;
    const double half = 0.5 * total_len;
    c.position = [sp, u_of_arclength, half](double phi) { return sp->eval(u_of_arclength(phi + half)); };
    c.tangent = [sp, u_of_arclength, half](double phi) {
        return normalized(sp->deriv(u_of_arclength(phi + half)));
    };
    c.second_derivative = [sp, u_of_arclength, half](double phi) {
        const double t = u_of_arclength(phi + half);
        const Vec3 d1 = sp->deriv(t);
        const Vec3 d2 = sp->deriv2(t);
        const double n2 = norm2(d1);
        return (d2 - d1 * (dot(d1, d2) / n2)) / n2;
    };

    if (measure_c_gamma(c, 200) < 1e-6)
        throw GeometryError("spline centerline is self-intersecting (c_Gamma ~ 0)");
    return c;
}

inline std::string to_string(CenterlineKind k) {
    switch (k) {
        case CenterlineKind::Straight: return "straight";
        case CenterlineKind::CircularArc: return "circular-arc";
        case CenterlineKind::Spline: return "spline";
        default: return "analytic";
    }
}

} // namespace sbt

#endif
