#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sbt/geometry.hpp"

using namespace sbt;

namespace {

SlenderBodyGeometry straight_prolate(double eps, double step = 1e-3) {
    GeometryDoc doc;
    doc.epsilon = eps;
    doc.frame_step = step;
    return build_geometry(doc);
}

std::vector<Vec3> helix_nodes() {
    // gently perturbed helical nodes, well separated
    std::vector<Vec3> nodes;
    for (int i = 0; i < 5; ++i) {
        const double t = -1.6 + 0.8 * i;
        nodes.push_back(Vec3{0.25 * std::cos(t) + 0.01 * i, 0.25 * std::sin(t), t});
    }
    return nodes;
}

} // namespace

TEST_CASE("straight centerline preset", "[geometry]") {
    const Centerline c = make_straight(Vec3{0, 0, 1});
    const Vec3 x = c.position(0.5);
    CHECK(x.x == 0.0);
    CHECK(x.y == 0.0);
    CHECK(x.z == 0.5);
    CHECK(norm(c.tangent(0.7) - Vec3{0, 0, 1}) == 0.0);
    CHECK(norm(c.second_derivative(0.2)) == 0.0);
}

TEST_CASE("circular arc curvature is 1/R", "[geometry]") {
    const Centerline c = make_circular_arc(2.0);
    for (double phi : {-1.4, -0.3, 0.0, 0.9, 1.5}) {
        CHECK(norm(c.second_derivative(phi)) == Catch::Approx(0.5).epsilon(1e-14));
        CHECK(norm(c.tangent(phi)) == Catch::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("spline centerline is arclength-parameterized", "[geometry]") {
    const Centerline c = make_spline(helix_nodes());
    const double h = 1e-6;
    for (double phi = c.phi_min + 0.05; phi < c.phi_max - 0.05; phi += 0.23) {
        CHECK(norm(c.tangent(phi)) == Catch::Approx(1.0).epsilon(1e-6));
        // tangent consistent with position differences
        const Vec3 fd = (c.position(phi + h) - c.position(phi - h)) / (2.0 * h);
        CHECK(norm(fd - c.tangent(phi)) < 1e-5);
        CHECK(norm(fd) == Catch::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("spline input errors", "[geometry]") {
    CHECK_THROWS_AS(make_spline({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{2, 0, 0}}), InputError);
    // closed loop: first node revisited, c_Gamma collapses
    CHECK_THROWS_AS(make_spline({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{1, 1, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 0}}),
                    GeometryError);
}

TEST_CASE("bishop frame on a straight line is constant", "[geometry]") {
    const Centerline c = make_straight(Vec3{0, 0, 1});
    const FrameField f = build_bishop_frame(c, 1e-3, Vec3{1, 0, 0});
    for (const auto& s : f.samples) {
        CHECK(norm(s.e_n1 - Vec3{1, 0, 0}) < 1e-14);
        CHECK(norm(s.e_n2 - Vec3{0, 1, 0}) < 1e-14);
        CHECK(s.kappa1 == 0.0);
        CHECK(s.kappa2 == 0.0);
    }
}

namespace {
// generic unit seed perpendicular to the curve tangent at the left end
Vec3 perp_seed(const Centerline& c, const Vec3& trial) {
    const Vec3 t0 = c.tangent(c.phi_min);
    return normalized(trial - t0 * dot(trial, t0));
}
} // namespace

TEST_CASE("bishop frame on a circular arc recovers the curvature", "[geometry]") {
    const Centerline c = make_circular_arc(2.0);
    const Vec3 seed = perp_seed(c, Vec3{0, 0.3, 1.0});
    const FrameField f = build_bishop_frame(c, 1e-3, seed);
    CHECK(f.orthonormality_defect() < 1e-8);
    for (std::size_t i = 0; i < f.samples.size(); i += 97) {
        const auto& s = f.samples[i];
        CHECK(s.kappa1 * s.kappa1 + s.kappa2 * s.kappa2 == Catch::Approx(0.25).margin(1e-8));
    }
}

TEST_CASE("bishop frame matches exact parallel transport on a planar arc", "[geometry]") {
    // planar curve: the Bishop frame equals the Frenet frame rotated by a
    // constant angle, so the out-of-plane component of e_n1 stays constant.
    const Centerline c = make_circular_arc(2.0);
    const Vec3 seed = perp_seed(c, Vec3{0, 1.0, 0.5});
    const FrameField f = build_bishop_frame(c, 1e-3, seed);
    const double z0 = f.samples.front().e_n1.z;
    for (const auto& s : f.samples) CHECK(std::abs(s.e_n1.z - z0) < 1e-10);
}

TEST_CASE("off-grid frame queries interpolate accurately", "[geometry]") {
    // coarse grid, then compare off-grid queries against a fine-grid frame
    const Centerline c = make_circular_arc(2.0);
    const Vec3 seed = perp_seed(c, Vec3{0, 1.0, 0.5});
    const FrameField coarse = build_bishop_frame(c, 5e-3, seed);
    const FrameField fine = build_bishop_frame(c, 2.5e-4, seed);
    for (double phi : {-1.23456, -0.37191, 0.0021, 0.77777, 1.411}) {
        const FrameTriple a = coarse.at(phi);
        const FrameTriple b = fine.at(phi);
        CHECK(norm(a.e_n1 - b.e_n1) < 1e-9);
        CHECK(norm(a.e_n2 - b.e_n2) < 1e-9);
        // query result is orthonormal regardless of interpolation
        CHECK(std::abs(dot(a.e_t, a.e_n1)) < 1e-15);
        CHECK(std::abs(norm(a.e_n1) - 1.0) < 1e-15);
        CHECK(std::abs(dot(a.e_n1, a.e_n2)) < 1e-15);
    }
}

TEST_CASE("raw frame integration converges at fourth order", "[geometry]") {
    // a tight arc at coarse steps so the drift is measurable above roundoff
    const Centerline c = make_circular_arc(0.5);
    const Vec3 seed = perp_seed(c, Vec3{0.2, 1, 0.4});
    const double d1 = build_bishop_frame(c, 0.04, seed, false).orthonormality_defect();
    const double d2 = build_bishop_frame(c, 0.02, seed, false).orthonormality_defect();
    CHECK(d1 > 1e-12); // measurable
    CHECK(d1 / d2 >= 8.0);
}

TEST_CASE("frame seed must be perpendicular", "[geometry]") {
    const Centerline c = make_straight(Vec3{0, 0, 1});
    CHECK_THROWS_AS(build_bishop_frame(c, 1e-3, Vec3{0, 0.01, 1.0}), InputError);
    CHECK_THROWS_AS(build_bishop_frame(c, 0.0, Vec3{1, 0, 0}), InputError);
}

TEST_CASE("prolate radius preset", "[geometry]") {
    const RadiusProfile p = radius_prolate(0.1);
    CHECK(p.a(0.0) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(p.eta == Catch::Approx(std::sqrt(1.01)).epsilon(1e-15));
    CHECK(p.a(p.eta) == 0.0);
    CHECK(p.a(-p.eta) == 0.0);
    // a' closed form: a a' = -phi/(1+eps^2)
    for (double phi : {0.2, 0.7, -0.9}) {
        CHECK(p.a(phi) * p.a_prime(phi) == Catch::Approx(-phi / 1.01).epsilon(1e-12));
    }
}

TEST_CASE("hemispherical cap radius preset", "[geometry]") {
    const RadiusProfile p = radius_hemispherical_cap(0.05);
    CHECK(p.a(0.3) == 1.0);
    CHECK(p.a(-0.999) == 1.0);
    CHECK(p.a(1.05) == 0.0);
    CHECK(p.eta == Catch::Approx(1.05).epsilon(1e-15));
    CHECK_FALSE(p.c2_smooth);
    CHECK_THROWS_AS(radius_preset("unknown", 0.1), InputError);
}

TEST_CASE("prolate admissibility: all four conditions pass", "[geometry]") {
    const RadiusProfile p = radius_prolate(0.1);
    const AdmissibilityReport rep = validate_admissible_radius(p, 0.1);
    CHECK(rep.smoothness.pass);
    CHECK(rep.spheroidal_endpoints.pass);
    CHECK(rep.nonvanishing.pass);
    CHECK(rep.derivative_bound.pass);
    CHECK(rep.all_pass());
    CHECK(rep.bar_ca <= 1.0);
    CHECK(rep.bar_ca == Catch::Approx(std::sqrt(1.01) / 1.01).epsilon(1e-3));
    CHECK(rep.c_eta == Catch::Approx((std::sqrt(1.01) - 1.0) / 0.01).epsilon(1e-12));
    CHECK_FALSE(rep.cap_mode);
}

TEST_CASE("no-decay profile fails the spheroidal endpoint condition", "[geometry]") {
    RadiusProfile p;
    p.kind = RadiusKind::Custom;
    p.epsilon = 0.1;
    p.eta = std::sqrt(1.01);
    p.a = [](double) { return 1.0; };
    p.a_prime = [](double) { return 0.0; };
    const AdmissibilityReport rep = validate_admissible_radius(p, 0.1);
    CHECK_FALSE(rep.spheroidal_endpoints.pass);
    CHECK(rep.smoothness.pass);
    CHECK_FALSE(rep.all_pass());
}

TEST_CASE("hemispherical cap fails C2 smoothness, others pass", "[geometry]") {
    const RadiusProfile p = radius_hemispherical_cap(0.05);
    const AdmissibilityReport rep = validate_admissible_radius(p, 0.05);
    CHECK_FALSE(rep.smoothness.pass);
    CHECK(rep.spheroidal_endpoints.pass);
    CHECK(rep.nonvanishing.pass);
    CHECK(rep.derivative_bound.pass);
    CHECK(rep.cap_mode);
}

TEST_CASE("uniform stretch map and validation", "[geometry]") {
    const double eta = std::sqrt(1.01);
    const StretchMap m = stretch_uniform(eta);
    CHECK(m.phi_of_s(1.0) == Catch::Approx(eta).epsilon(1e-15));
    CHECK(m.phi_of_s(0.0) == 0.0);
    const StretchReport rep = validate_stretch(m, 0.1);
    CHECK(rep.bijective);
    CHECK(rep.odd);
    CHECK(rep.pass);
    // |phi(s)-s| <= eta-1 ~ 0.004987 <= 0.5 * eps^2
    CHECK(rep.c_phi <= 0.5);
    CHECK(rep.c_phi == Catch::Approx((eta - 1.0) / 0.01).epsilon(1e-9));
    CHECK_THROWS_AS(stretch_uniform(0.9), InputError);
}

TEST_CASE("non-odd stretch map fails validation", "[geometry]") {
    StretchMap m;
    m.eta = std::sqrt(1.01);
    m.phi_of_s = [](double s) { return s + 0.1; };
    m.derivative = [](double) { return 1.0; };
    const StretchReport rep = validate_stretch(m, 0.1);
    CHECK_FALSE(rep.odd);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("surface point, jacobian, normal on the straight prolate body", "[geometry]") {
    const SlenderBodyGeometry geo = straight_prolate(0.1);
    const Vec3 x = geo.surface_point(0.0, 0.0);
    CHECK(norm(x - Vec3{0.1, 0, 0}) < 1e-14);

    // straight fiber: kappa_hat = 0, J = eps a sqrt(1 + eps^2 a'^2)
    for (double phi : {0.0, 0.4, -0.8}) {
        const double a = geo.a(phi), ap = geo.a_prime(phi);
        const double expect = 0.1 * a * std::sqrt(1.0 + 0.01 * ap * ap);
        CHECK(geo.surface_jacobian(phi, 1.3) == Catch::Approx(expect).epsilon(1e-13));
    }
    CHECK_THROWS_AS(geo.surface_point(geo.eta, 0.0), DomainError);
    CHECK_THROWS_AS(geo.surface_jacobian(-geo.eta - 0.01, 0.0), DomainError);
}

TEST_CASE("cap midsection normal is exactly -e_rho", "[geometry]") {
    GeometryDoc doc;
    doc.radius_kind = "hemispherical-cap";
    doc.epsilon = 0.05;
    const SlenderBodyGeometry geo = build_geometry(doc);
    for (double theta : {0.0, 1.1, 4.0}) {
        const FrameTriple f = geo.frame_at(0.3);
        const Vec3 n = geo.surface_normal(0.3, theta);
        CHECK(norm(n + geo.frame.e_rho(f, theta)) < 1e-14);
    }
}

TEST_CASE("normal is unit and tangent to no theta direction", "[geometry]") {
    GeometryDoc doc;
    doc.centerline_kind = "circular-arc";
    doc.arc_radius = 2.0;
    doc.epsilon = 0.08;
    const SlenderBodyGeometry geo = build_geometry(doc);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uphi(-0.95, 0.95), uth(0.0, 2.0 * kPi);
    for (int i = 0; i < 40; ++i) {
        const double phi = uphi(rng), th = uth(rng);
        const Vec3 n = geo.surface_normal(phi, th);
        const FrameTriple f = geo.frame_at(phi);
        CHECK(norm(n) == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(dot(n, geo.frame.e_theta(f, th))) < 1e-14);
    }
}

TEST_CASE("jacobian bound |J - eps a sqrt(1+eps^2 a'^2)| <= 3 kmax (eps a)^2", "[geometry]") {
    GeometryDoc doc;
    doc.centerline_kind = "circular-arc";
    doc.arc_radius = 2.0;
    doc.epsilon = 0.08;
    const SlenderBodyGeometry geo = build_geometry(doc);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uphi(-geo.eta * 0.999, geo.eta * 0.999), uth(0.0, 2.0 * kPi);
    for (int i = 0; i < 200; ++i) {
        const double phi = uphi(rng), th = uth(rng);
        const double a = geo.a(phi), ap = geo.a_prime(phi);
        const double ea = geo.epsilon * a;
        const double base = ea * std::sqrt(1.0 + geo.epsilon * geo.epsilon * ap * ap);
        CHECK(std::abs(geo.surface_jacobian(phi, th) - base) <= 3.0 * geo.kappa_max * ea * ea + 1e-14);
    }
}

TEST_CASE("frame quality invariants", "[geometry]") {
    GeometryDoc doc;
    doc.centerline_kind = "circular-arc";
    doc.arc_radius = 2.0;
    doc.epsilon = 0.05;
    doc.frame_step = 1e-3;
    const SlenderBodyGeometry geo = build_geometry(doc);
    CHECK(geo.frame.orthonormality_defect() <= 1e-8);
    double worst = 0.0;
    for (const auto& s : geo.frame.samples) {
        const double k = std::sqrt(s.kappa1 * s.kappa1 + s.kappa2 * s.kappa2);
        worst = std::max(worst, std::abs(k - norm(geo.curve().second_derivative(s.phi))));
    }
    CHECK(worst <= 10.0 * std::pow(1e-3, 4) * geo.kappa_max + 1e-10);
}

TEST_CASE("rotation equivariance of surface quantities", "[geometry]") {
    const Mat3 R = rotation(Vec3{1, 2, 0.5}, 0.83);
    GeometryDoc doc;
    doc.centerline_kind = "circular-arc";
    doc.arc_radius = 2.0;
    doc.epsilon = 0.08;
    const SlenderBodyGeometry geo = build_geometry(doc);

    Centerline rot_cl = rotated(geo.curve(), R);
    const Vec3 seed = geo.frame.samples.front().e_n1;
    SlenderBodyGeometry rot_geo = make_geometry(std::move(rot_cl), radius_prolate(0.08),
                                                stretch_uniform(geo.eta), 1e-3, R.apply(seed));
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uphi(-0.9, 0.9), uth(0.0, 2.0 * kPi);
    for (int i = 0; i < 25; ++i) {
        const double phi = uphi(rng), th = uth(rng);
        CHECK(norm(rot_geo.surface_point(phi, th) - R.apply(geo.surface_point(phi, th))) < 1e-10);
        CHECK(norm(rot_geo.surface_normal(phi, th) - R.apply(geo.surface_normal(phi, th))) < 1e-10);
        CHECK(rot_geo.surface_jacobian(phi, th) ==
              Catch::Approx(geo.surface_jacobian(phi, th)).margin(1e-10));
    }
}

TEST_CASE("epsilon guard against r_max", "[geometry]") {
    GeometryDoc doc;
    doc.epsilon = 0.2; // straight line: r_max = c_Gamma/2 = 0.5, bound is 0.125
    CHECK_THROWS_AS(build_geometry(doc), GeometryError);
}

TEST_CASE("inside test via the tube parameterization", "[geometry]") {
    const SlenderBodyGeometry geo = straight_prolate(0.1);
    CHECK(geo.is_inside(Vec3{0.0, 0.0, 0.3}));
    CHECK(geo.is_inside(Vec3{0.05, 0.0, 0.0}));
    CHECK_FALSE(geo.is_inside(Vec3{0.2, 0.0, 0.0}));
    CHECK_FALSE(geo.is_inside(Vec3{0.0, 0.0, 1.2}));
    // surface points count as outside (evaluable)
    CHECK_FALSE(geo.is_inside(geo.surface_point(0.2, 1.0)));
}
