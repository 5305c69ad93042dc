#ifndef SBT_BISHOP_FRAME_HPP
#define SBT_BISHOP_FRAME_HPP

#include <cmath>
#include <vector>

#include "sbt/centerline.hpp"
#include "sbt/errors.hpp"
#include "sbt/linalg.hpp"

namespace sbt {

struct FrameSample {
    double phi;
    Vec3 e_t, e_n1, e_n2;
    double kappa1, kappa2;
};

struct FrameTriple {
    Vec3 e_t, e_n1, e_n2;
    double kappa1, kappa2;
};

// Relatively parallel (twist-free) orthonormal frame along the centerline,
// sampled on a uniform grid. Off-grid queries interpolate componentwise with
// cubics and re-orthonormalize against the exact tangent.
struct FrameField {
    std::vector<FrameSample> samples;
    double phi_min = 0.0;
    double step = 0.0;
    const Centerline* curve = nullptr;

    FrameTriple at(double phi) const {
        const int n = (int)samples.size();
        const double pos = (phi - phi_min) / step;
        int i1 = (int)std::floor(pos);
        i1 = std::max(1, std::min(n - 3, i1));
        const double x = pos - i1; // in [0,1] between samples i1 and i1+1
        // 4-point Lagrange weights at i1-1..i1+2
        const double w0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        const double w1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        const double w2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        const double w3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        Vec3 n1 = samples[i1 - 1].e_n1 * w0 + samples[i1].e_n1 * w1 + samples[i1 + 1].e_n1 * w2 +
                  samples[i1 + 2].e_n1 * w3;
        FrameTriple f;
        f.e_t = normalized(curve->tangent(phi));
        n1 -= f.e_t * dot(n1, f.e_t);
        f.e_n1 = normalized(n1);
        f.e_n2 = cross(f.e_t, f.e_n1);
        const Vec3 dd = curve->second_derivative(phi);
        f.kappa1 = dot(dd, f.e_n1);
        f.kappa2 = dot(dd, f.e_n2);
        return f;
    }

    Vec3 e_rho(const FrameTriple& f, double theta) const {
        return f.e_n1 * std::cos(theta) + f.e_n2 * std::sin(theta);
    }
    Vec3 e_theta(const FrameTriple& f, double theta) const {
        return f.e_n1 * (-std::sin(theta)) + f.e_n2 * std::cos(theta);
    }

    double orthonormality_defect() const {
        double worst = 0.0;
        for (const auto& s : samples) {
            worst = std::max({worst, std::abs(dot(s.e_t, s.e_t) - 1.0), std::abs(dot(s.e_n1, s.e_n1) - 1.0),
                              std::abs(dot(s.e_n2, s.e_n2) - 1.0), std::abs(dot(s.e_t, s.e_n1)),
                              std::abs(dot(s.e_t, s.e_n2)), std::abs(dot(s.e_n1, s.e_n2))});
        }
        return worst;
    }
};

// Integrates the parallel-transport ODE d(e_n1)/dphi = -(X''.e_n1) e_t with a
// classical RK4 step. With reorthonormalize on (the default) the tangent is
// reset to the exact X' and the normals are Gram-Schmidt corrected after each
// step; the raw mode exists so tests can observe the ODE convergence order.
inline FrameField build_bishop_frame(const Centerline& curve, double step, const Vec3& seed_normal,
                                     bool reorthonormalize = true) {
    if (!(step > 0.0)) throw InputError("frame step must be > 0");
    const Vec3 t0 = curve.tangent(curve.phi_min);
    if (std::abs(dot(normalized(seed_normal), normalized(t0))) > 1e-10)
        throw InputError("seed normal must be perpendicular to the tangent at the left end");

    const double span = curve.phi_max - curve.phi_min;
    const int nsteps = std::max(1, (int)std::ceil(span / step));
    const double h = span / nsteps;

    FrameField field;
    field.phi_min = curve.phi_min;
    field.step = h;
    field.curve = &curve;
    field.samples.reserve(nsteps + 1);

    Vec3 et = normalized(t0);
    Vec3 en1 = normalized(seed_normal - et * dot(seed_normal, et));
    Vec3 en2 = cross(et, en1);

    auto push_sample = [&](double phi) {
        const Vec3 dd = curve.second_derivative(phi);
        field.samples.push_back({phi, et, en1, en2, dot(dd, en1), dot(dd, en2)});
    };
    push_sample(curve.phi_min);

    struct State {
        Vec3 et, en1, en2;
    };
    auto rhs = [&](double phi, const State& s) {
        const Vec3 dd = curve.second_derivative(phi);
        State d;
        d.et = dd;
        d.en1 = s.et * (-dot(dd, s.en1));
        d.en2 = s.et * (-dot(dd, s.en2));
        return d;
    };

    for (int k = 0; k < nsteps; ++k) {
        const double phi = curve.phi_min + k * h;
        State y{et, en1, en2};
        const State k1 = rhs(phi, y);
        const State y2{y.et + k1.et * (h / 2), y.en1 + k1.en1 * (h / 2), y.en2 + k1.en2 * (h / 2)};
        const State k2 = rhs(phi + h / 2, y2);
        const State y3{y.et + k2.et * (h / 2), y.en1 + k2.en1 * (h / 2), y.en2 + k2.en2 * (h / 2)};
        const State k3 = rhs(phi + h / 2, y3);
        const State y4{y.et + k3.et * h, y.en1 + k3.en1 * h, y.en2 + k3.en2 * h};
        const State k4 = rhs(phi + h, y4);
        et = y.et + (k1.et + k2.et * 2 + k3.et * 2 + k4.et) * (h / 6);
        en1 = y.en1 + (k1.en1 + k2.en1 * 2 + k3.en1 * 2 + k4.en1) * (h / 6);
        en2 = y.en2 + (k1.en2 + k2.en2 * 2 + k3.en2 * 2 + k4.en2) * (h / 6);
        const double phi_next = curve.phi_min + (k + 1) * h;
        if (reorthonormalize) {
            et = normalized(curve.tangent(phi_next));
            en1 = normalized(en1 - et * dot(en1, et));
            en2 = cross(et, en1);
        }
        push_sample(phi_next);
    }
    return field;
}

} // namespace sbt

#endif
