#ifndef SBT_RADIUS_PROFILE_HPP
#define SBT_RADIUS_PROFILE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "sbt/errors.hpp"

namespace sbt {

enum class RadiusKind { Prolate, HemisphericalCap, Custom };

// Slender body radius profile a(phi) on [-eta, eta], a in (0,1] inside,
// vanishing at the tips. The hemispherical-cap preset is only C^{1,1}; its
// c2_smooth flag records that.
struct RadiusProfile {
    RadiusKind kind = RadiusKind::Prolate;
    double epsilon = 0.0;
    double eta = 1.0; // fiber half-extent eta_epsilon > 1
    bool c2_smooth = true;
    std::function<double(double)> a;
    std::function<double(double)> a_prime;
};

// Prolate spheroid with foci at +-1: a = sqrt(1+eps^2-phi^2)/sqrt(1+eps^2).
inline RadiusProfile radius_prolate(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.25)) throw InputError("radius preset needs 0 < epsilon <= 1/4");
    RadiusProfile p;
    p.kind = RadiusKind::Prolate;
    p.epsilon = epsilon;
    const double e2 = 1.0 + epsilon * epsilon;
    p.eta = std::sqrt(e2);
    p.c2_smooth = true;
    const double eta = p.eta;
    p.a = [e2, eta](double phi) {
        if (std::abs(phi) >= eta) return 0.0;
        return std::sqrt(std::max(0.0, e2 - phi * phi)) / std::sqrt(e2);
    };
    p.a_prime = [e2](double phi) {
        return -phi / (std::sqrt(e2) * std::sqrt(std::max(1e-300, e2 - phi * phi)));
    };
    return p;
}

// Uniform radius with hemispherical caps: a = 1 on [-1,1], quarter-circle
// drop on 1 < |phi| <= 1+eps. Only C^{1,1} at |phi| = 1.
inline RadiusProfile radius_hemispherical_cap(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 0.25)) throw InputError("radius preset needs 0 < epsilon <= 1/4");
    RadiusProfile p;
    p.kind = RadiusKind::HemisphericalCap;
    p.epsilon = epsilon;
    p.eta = 1.0 + epsilon;
    p.c2_smooth = false;
    p.a = [epsilon](double phi) {
        const double q = std::abs(phi);
        if (q <= 1.0) return 1.0;
        if (q >= 1.0 + epsilon) return 0.0;
        const double d = q - 1.0;
        return std::sqrt(std::max(0.0, epsilon * epsilon - d * d)) / epsilon;
    };
    p.a_prime = [epsilon](double phi) {
        const double q = std::abs(phi);
        if (q <= 1.0) return 0.0;
        const double d = q - 1.0;
        const double root = std::sqrt(std::max(1e-300, epsilon * epsilon - d * d));
        const double sign = phi >= 0.0 ? 1.0 : -1.0;
        return -sign * d / (epsilon * root);
    };
    return p;
}

inline RadiusProfile radius_preset(const std::string& kind, double epsilon) {
    if (kind == "prolate") return radius_prolate(epsilon);
    if (kind == "hemispherical-cap") return radius_hemispherical_cap(epsilon);
    throw InputError("unknown radius preset '" + kind + "'");
}

struct ConditionResult {
    bool pass = false;
    std::string detail;
};

// One entry per condition of the admissibility definition, plus the measured
// geometric constants. Constants are measured from the profile, not demanded
// as inputs.
struct AdmissibilityReport {
    ConditionResult smoothness;           // (1) C^2 on the open interval
    ConditionResult spheroidal_endpoints; // (2) spheroidal, vanishing, monotone tips
    ConditionResult nonvanishing;         // (3) 0 < a <= 1, a >= a0 away from tips
    ConditionResult derivative_bound;     // (4) |a a'| bounded
    double delta_a = 0.25;
    double c_a = 0.0;
    double a0 = 0.0;
    double bar_ca = 0.0;
    double c_eta = 0.0;
    double c_eta0 = 0.0;
    bool cap_mode = false; // hemispherical-cap regime (C^{1,1} surface)

    bool all_pass() const {
        return smoothness.pass && spheroidal_endpoints.pass && nonvanishing.pass && derivative_bound.pass;
    }
};

// Checks conditions (1)-(4) on a sample grid and measures the constants.
// Smoothness is probed through second differences of a^2, which stays bounded
// for spheroidal tips while still exposing the cap's curvature jump.
inline AdmissibilityReport validate_admissible_radius(const RadiusProfile& p, double epsilon,
                                                      int grid_n = 10001) {
    if (grid_n < 1000) throw InputError("admissibility grid must have >= 1000 points");
    AdmissibilityReport rep;
    rep.cap_mode = (p.kind == RadiusKind::HemisphericalCap);
    const double eta = p.eta;
    rep.c_eta = (eta - 1.0) / (epsilon * epsilon);
    rep.c_eta0 = rep.c_eta;
    rep.delta_a = 0.25;

    // (1) smoothness of w = a^2 via second differences on |phi| <= (1+eta)/2
    {
        const double lim = 0.5 * (1.0 + eta);
        const int n = grid_n / 2;
        const double h = 2.0 * lim / n;
        double prev_w2 = 0.0;
        bool have_prev = false;
        double worst_jump = 0.0;
        auto w = [&](double phi) {
            const double v = p.a(phi);
            return v * v;
        };
        for (int i = 1; i < n; ++i) {
            const double phi = -lim + i * h;
            const double w2 = (w(phi + h) - 2.0 * w(phi) + w(phi - h)) / (h * h);
            if (have_prev) {
                const double scale = 1.0 + std::max(std::abs(w2), std::abs(prev_w2));
                worst_jump = std::max(worst_jump, std::abs(w2 - prev_w2) / scale);
            }
            prev_w2 = w2;
            have_prev = true;
        }
        rep.smoothness.pass = worst_jump < 0.5;
        rep.smoothness.detail = "max relative jump of (a^2)'' = " + std::to_string(worst_jump);
    }

    // (2) spheroidal endpoints, vanishing tips, monotone decay
    {
        bool ok = true;
        std::string why;
        const double a_tip = std::max(std::abs(p.a(eta)), std::abs(p.a(-eta)));
        if (a_tip > 1e-9) {
            ok = false;
            why = "a(+-eta) != 0";
        }
        double c_a = 0.0;
        const int n = grid_n / 4;
        for (int side = 0; side < 2 && ok; ++side) {
            const double sgn = side == 0 ? 1.0 : -1.0;
            double prev_a = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                // sample (1-delta_a, eta), denser toward the tip
                const double frac = (double)i / (n - 1);
                const double q = 1.0 - rep.delta_a + (eta - 1e-9 - (1.0 - rep.delta_a)) * frac;
                const double phi = sgn * q;
                const double sph = std::sqrt(std::max(0.0, eta * eta - phi * phi));
                const double dev = std::abs(p.a(phi) - sph);
                if (sph > 0.0) c_a = std::max(c_a, dev / (epsilon * epsilon * sph));
                if (p.a(phi) > prev_a + 1e-12) {
                    ok = false;
                    why = "radius not monotone toward the tip";
                    break;
                }
                prev_a = p.a(phi);
            }
        }
        if (ok && !std::isfinite(c_a)) {
            ok = false;
            why = "spheroidal deviation unbounded";
        }
        rep.c_a = c_a;
        rep.spheroidal_endpoints.pass = ok;
        rep.spheroidal_endpoints.detail = ok ? "c_a = " + std::to_string(c_a) : why;
    }

    // (3) 0 < a <= 1 inside, a >= a0 away from the tips
    {
        bool ok = true;
        std::string why;
        double a0 = std::numeric_limits<double>::infinity();
        for (int i = 1; i < grid_n; ++i) {
            const double phi = -eta + 2.0 * eta * i / grid_n;
            const double v = p.a(phi);
            if (!(v > 0.0) || v > 1.0 + 1e-12) {
                ok = false;
                why = "a out of (0,1] at phi = " + std::to_string(phi);
                break;
            }
            if (std::abs(phi) < 1.0 - rep.delta_a) a0 = std::min(a0, v);
        }
        rep.a0 = std::isfinite(a0) ? a0 : 0.0;
        rep.nonvanishing.pass = ok && rep.a0 > 0.0;
        rep.nonvanishing.detail = ok ? "a0 = " + std::to_string(rep.a0) : why;
    }

    // (4) |a a'| bounded
    {
        double bar_ca = 0.0;
        for (int i = 1; i < grid_n; ++i) {
            const double phi = -eta + (2.0 * eta) * ((double)i / grid_n) * (1.0 - 1e-9);
            bar_ca = std::max(bar_ca, std::abs(p.a(phi) * p.a_prime(phi)));
        }
        rep.bar_ca = bar_ca;
        rep.derivative_bound.pass = std::isfinite(bar_ca);
        rep.derivative_bound.detail = "bar_c_a = " + std::to_string(bar_ca);
    }
    return rep;
}

inline std::string to_string(RadiusKind k) {
    switch (k) {
        case RadiusKind::Prolate: return "prolate";
        case RadiusKind::HemisphericalCap: return "hemispherical-cap";
        default: return "custom";
    }
}

} // namespace sbt

#endif
