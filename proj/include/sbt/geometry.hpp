#ifndef SBT_GEOMETRY_HPP
#define SBT_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "sbt/bishop_frame.hpp"
#include "sbt/centerline.hpp"
#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"
#include "sbt/radius_profile.hpp"
#include "sbt/stretch_map.hpp"

namespace sbt {

// The slender body Sigma_eps: centerline + Bishop frame + radius profile +
// stretch map + the measured geometry constants. Immutable after
// construction; all queries are pure and safe to share across threads.
struct SlenderBodyGeometry {
    std::shared_ptr<const Centerline> centerline;
    FrameField frame;
    RadiusProfile radius;
    StretchMap stretch;
    double epsilon = 0.0;
    double eta = 1.0;
    double c_gamma = 0.0;
    double kappa_max = 0.0;
    double r_max = 0.0;

    const Centerline& curve() const { return *centerline; }

    Vec3 X(double phi) const { return centerline->position(phi); }
    double a(double phi) const { return radius.a(phi); }
    double a_prime(double phi) const { return radius.a_prime(phi); }
    double phi_of_s(double s) const { return stretch.phi_of_s(s); }
    double phi_prime(double s) const { return stretch.derivative(s); }

    FrameTriple frame_at(double phi) const { return frame.at(phi); }

    static double kappa_hat(const FrameTriple& f, double theta) {
        return f.kappa1 * std::cos(theta) + f.kappa2 * std::sin(theta);
    }

    void check_phi(double phi) const {
        if (!(std::abs(phi) < eta)) throw DomainError("|phi| >= eta: outside the fiber surface chart");
    }

    // Gamma_eps(phi,theta) = X(phi) + eps a(phi) e_rho(phi,theta)
    Vec3 surface_point(double phi, double theta) const {
        check_phi(phi);
        const FrameTriple f = frame_at(phi);
        return X(phi) + frame.e_rho(f, theta) * (epsilon * a(phi));
    }

    // J_eps = eps a sqrt((1 - eps a kappa_hat)^2 + eps^2 a'^2)
    double surface_jacobian(double phi, double theta) const {
        check_phi(phi);
        const FrameTriple f = frame_at(phi);
        const double ea = epsilon * a(phi);
        const double eap = epsilon * a_prime(phi);
        const double kh = kappa_hat(f, theta);
        return ea * std::sqrt((1.0 - ea * kh) * (1.0 - ea * kh) + eap * eap);
    }

    // Unit normal directed into the slender body.
    Vec3 surface_normal(double phi, double theta) const {
        check_phi(phi);
        const FrameTriple f = frame_at(phi);
        const double eap = epsilon * a_prime(phi);
        const double den = std::sqrt(1.0 + eap * eap);
        return frame.e_rho(f, theta) * (-1.0 / den) + f.e_t * (eap / den);
    }

    // Arclength of the nearest centerline point in [lo,hi] (coarse scan plus
    // golden-section refinement; deterministic).
    double nearest_arclength(const Vec3& x, double lo, double hi) const {
        const int n = 256;
        double best_t = lo, best_d = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= n; ++i) {
            const double t = lo + (hi - lo) * i / n;
            const double d = norm2(x - X(t));
            if (d < best_d) {
                best_d = d;
                best_t = t;
            }
        }
        double a0 = std::max(lo, best_t - (hi - lo) / n);
        double b0 = std::min(hi, best_t + (hi - lo) / n);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b0 - gr * (b0 - a0), d = a0 + gr * (b0 - a0);
        double fc = norm2(x - X(c)), fd = norm2(x - X(d));
        for (int it = 0; it < 90 && (b0 - a0) > 1e-14; ++it) {
            if (fc < fd) {
                b0 = d;
                d = c;
                fd = fc;
                c = b0 - gr * (b0 - a0);
                fc = norm2(x - X(c));
            } else {
                a0 = c;
                c = d;
                fc = fd;
                d = a0 + gr * (b0 - a0);
                fd = norm2(x - X(d));
            }
        }
        return 0.5 * (a0 + b0);
    }

    // Distance from x to the effective centerline {X(t): t in [-1,1]}.
    std::pair<double, double> nearest_effective(const Vec3& x) const {
        const double t = nearest_arclength(x, -1.0, 1.0);
        return {t, norm(x - X(t))};
    }

    // x in the open interior of the body (tube test against eps a(phi)).
    // Points on the surface itself evaluate as outside: the slender body
    // integrals stay finite there because the effective centerline never
    // meets the surface.
    bool is_inside(const Vec3& x) const {
        const double t = nearest_arclength(x, -eta, eta);
        const double rho = norm(x - X(t));
        if (rho > epsilon) return false; // a <= 1
        // slack covers the projection-parameter resolution of the search
        return rho < epsilon * a(t) - 1e-9;
    }
};

// r_max = min(c_Gamma/2, 1/(2 kappa_max)): guarantees the tube chart is
// injective out to radius r_max.
inline double compute_r_max(double c_gamma, double kappa_max) {
    const double curv = kappa_max > 1e-14 ? 1.0 / (2.0 * kappa_max) : std::numeric_limits<double>::infinity();
    return std::min(c_gamma / 2.0, curv);
}

inline SlenderBodyGeometry make_geometry(Centerline cl, RadiusProfile radius, StretchMap stretch,
                                         double frame_step = 1e-3, Vec3 seed_normal = Vec3{1, 0, 0},
                                         bool validate = true) {
    SlenderBodyGeometry g;
    g.centerline = std::make_shared<Centerline>(std::move(cl));
    g.radius = std::move(radius);
    g.stretch = std::move(stretch);
    g.epsilon = g.radius.epsilon;
    g.eta = g.radius.eta;
    if (std::abs(g.stretch.eta - g.eta) > 1e-10)
        throw GeometryError("stretch map extent does not match the radius profile extent");
    if (g.eta >= std::min(-g.centerline->phi_min, g.centerline->phi_max))
        throw GeometryError("centerline does not extend past the fiber tips (need |phi| up to eta)");
    // default seed: any unit vector perpendicular to the tangent at the left end
    const Vec3 t0 = g.centerline->tangent(g.centerline->phi_min);
    if (norm(seed_normal - Vec3{1, 0, 0}) < 1e-15 && std::abs(dot(normalized(seed_normal), t0)) > 1e-10) {
        Vec3 trial = std::abs(t0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        seed_normal = normalized(trial - t0 * dot(trial, t0));
    }
    g.frame = build_bishop_frame(*g.centerline, frame_step, seed_normal);
    g.frame.curve = g.centerline.get();
    g.c_gamma = measure_c_gamma(*g.centerline);
    g.kappa_max = measure_kappa_max(*g.centerline);
    g.r_max = compute_r_max(g.c_gamma, g.kappa_max);
    if (validate && !(g.epsilon > 0.0 && g.epsilon <= g.r_max / 4.0))
        throw GeometryError("epsilon exceeds r_max/4 for this centerline (epsilon=" +
                            std::to_string(g.epsilon) + ", r_max=" + std::to_string(g.r_max) + ")");
    return g;
}

// Plain-value description of a geometry, the in-memory form of the JSON
// geometry document.
struct GeometryDoc {
    std::string centerline_kind = "straight";
    Vec3 direction{0, 0, 1};          // straight
    double arc_radius = 2.0;          // circular-arc
    std::vector<Vec3> spline_nodes;   // spline
    std::string radius_kind = "prolate";
    double epsilon = 0.1;
    std::string stretch_kind = "uniform";
    double frame_step = 1e-3;
    Vec3 seed_normal{1, 0, 0};
    bool seed_normal_set = false;
};

inline Centerline build_centerline(const GeometryDoc& doc) {
    if (doc.centerline_kind == "straight") return make_straight(doc.direction);
    if (doc.centerline_kind == "circular-arc") return make_circular_arc(doc.arc_radius);
    if (doc.centerline_kind == "spline") return make_spline(doc.spline_nodes);
    throw InputError("unknown centerline kind '" + doc.centerline_kind + "'");
}

inline SlenderBodyGeometry build_geometry(const GeometryDoc& doc) {
    if (!(doc.epsilon > 0.0 && doc.epsilon <= 0.25)) throw InputError("epsilon must lie in (0, 0.25]");
    Centerline cl = build_centerline(doc);
    RadiusProfile rad = radius_preset(doc.radius_kind, doc.epsilon);
    if (doc.stretch_kind != "uniform") throw InputError("unknown stretch kind '" + doc.stretch_kind + "'");
    StretchMap st = stretch_uniform(rad.eta);
    Vec3 seed = doc.seed_normal;
    if (!doc.seed_normal_set) {
        const Vec3 t0 = cl.tangent(cl.phi_min);
        Vec3 trial = std::abs(t0.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        seed = normalized(trial - t0 * dot(trial, t0));
    }
    return make_geometry(std::move(cl), std::move(rad), std::move(st), doc.frame_step, seed);
}

inline SlenderBodyGeometry build_geometry(GeometryDoc doc, double epsilon_override) {
    doc.epsilon = epsilon_override;
    return build_geometry(doc);
}

} // namespace sbt

#endif
