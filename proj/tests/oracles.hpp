// Independent reference computations used by the tests.

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/ellint_2.hpp>

namespace oracle {

/// Dressed transition energy through the complete elliptic integral of the
/// second kind: (dE/pi) int_{-pi/2}^{pi/2} sqrt(1 + a sin^2) = (2 dE/pi) sqrt(1+a) E(sqrt(a/(1+a))).
inline double dressed_energy_elliptic(double g, double n, double delta_e) {
    const double a = 8.0 * g * g * (2.0 * n + 1.0) / n;
    const double k = std::sqrt(a / (1.0 + a));
    return 2.0 * delta_e / std::numbers::pi * std::sqrt(1.0 + a) * boost::math::ellint_2(k);
}

/// Normalised Hermite function psi_n(y) by the stable three-term recurrence.
inline double hermite_function(int n, double y) {
    double p0 = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * y * y);
    if (n == 0) return p0;
    double p1 = std::sqrt(2.0) * y * p0;
    for (int k = 2; k <= n; ++k) {
        const double p2 = std::sqrt(2.0 / k) * y * p1 - std::sqrt((k - 1.0) / k) * p0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// Weak-coupling splitting by plain arithmetic: g^{2k+1} dE^{2k+1} / (2^{2k-1} (k!)^2).
inline double shirley_direct(int k, double g, double delta_e) {
    return std::pow(g, 2 * k + 1) * std::pow(delta_e, 2 * k + 1) / (std::pow(2.0, 2 * k - 1) * std::pow(std::tgamma(k + 1.0), 2));
}

/// Second-order ground energy of dE/2 sz + a^dag a + U (a + a^dag) sx, ground state |0,-1/2>.
inline double ground_energy_second_order(double delta_e, double u) { return -0.5 * delta_e - u * u / (delta_e + 1.0); }

} // namespace oracle
