#ifndef SBT_STRETCH_MAP_HPP
#define SBT_STRETCH_MAP_HPP

#include <cmath>
#include <functional>
#include <string>

#include "sbt/errors.hpp"

namespace sbt {

// Odd bijection phi: [-1,1] -> [-eta, eta] taking the effective centerline to
// the full fiber extent.
struct StretchMap {
    double eta = 1.0;
    std::function<double(double)> phi_of_s;
    std::function<double(double)> derivative;
};

inline StretchMap stretch_uniform(double eta) {
    if (!(eta > 1.0 && eta < 1.5)) throw InputError("uniform stretch needs eta in (1, 3/2)");
    StretchMap m;
    m.eta = eta;
    m.phi_of_s = [eta](double s) { return eta * s; };
    m.derivative = [eta](double) { return eta; };
    return m;
}

struct StretchReport {
    bool bijective = false;
    bool odd = false;
    double c_phi = 0.0; // measured: max(sup|phi-s|, sup|phi'-1|) / eps^2
    bool pass = false;
};

inline StretchReport validate_stretch(const StretchMap& m, double epsilon, int grid_n = 2001) {
    StretchReport rep;
    rep.bijective = true;
    rep.odd = true;
    double dev = 0.0;
    for (int i = 0; i <= grid_n; ++i) {
        const double s = -1.0 + 2.0 * i / grid_n;
        const double phi = m.phi_of_s(s);
        if (m.derivative(s) <= 0.0) rep.bijective = false;
        if (std::abs(m.phi_of_s(-s) + phi) > 1e-12) rep.odd = false;
        dev = std::max({dev, std::abs(phi - s), std::abs(m.derivative(s) - 1.0)});
    }
    if (std::abs(std::abs(m.phi_of_s(1.0)) - m.eta) > 1e-12) rep.bijective = false;
    rep.c_phi = dev / (epsilon * epsilon);
    rep.pass = rep.bijective && rep.odd && std::isfinite(rep.c_phi);
    return rep;
}

} // namespace sbt

#endif
