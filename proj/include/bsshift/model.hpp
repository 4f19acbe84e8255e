// model.hpp: physical parameters and the dimensionless coupling g

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bsshift/errors.hpp"

namespace bsshift {

/// Regime thresholds for the multiphoton approximations (rotated-frame and WKB results).
inline constexpr double kRegimeMinGapRatio = 5.0;   // delta_e / hbar_omega0
inline constexpr double kRegimeMinPhotons = 20.0;   // n_ref

/// Physical inputs of the spin-boson problem.
///
/// Energies may be given in any unit; every physics routine works with
/// `normalized()` parameters where hbar_omega0 == 1 and reports energies in
/// units of hbar_omega0.
struct ModelParams {
    double delta_e{11.0};     // two-level transition energy
    double hbar_omega0{1.0};  // oscillator quantum
    double coupling_u{0.0};   // U
    double n_ref{60.0};       // reference photon number, real-valued

    void validate() const {
        if (!(delta_e > 0.0) || !std::isfinite(delta_e))
            throw ParameterError("delta_e must be positive and finite");
        if (!(hbar_omega0 > 0.0) || !std::isfinite(hbar_omega0))
            throw ParameterError("hbar_omega0 must be positive and finite");
        if (!(coupling_u >= 0.0) || !std::isfinite(coupling_u))
            throw ParameterError("coupling_u must be non-negative and finite");
        if (!(n_ref >= 1.0) || !std::isfinite(n_ref))
            throw ParameterError("n_ref must be >= 1");
    }

    /// Same physics expressed in units of hbar_omega0.
    [[nodiscard]] ModelParams normalized() const {
        validate();
        return {delta_e / hbar_omega0, 1.0, coupling_u / hbar_omega0, n_ref};
    }

    [[nodiscard]] ModelParams with_coupling(double u) const {
        ModelParams p = *this;
        p.coupling_u = u;
        return p;
    }

    [[nodiscard]] ModelParams with_n_ref(double n) const {
        ModelParams p = *this;
        p.n_ref = n;
        return p;
    }

    /// True in the multiphoton regime (delta_e >> hbar_omega0, n >> 1).
    [[nodiscard]] bool regime_ok() const {
        return delta_e / hbar_omega0 >= kRegimeMinGapRatio && n_ref >= kRegimeMinPhotons;
    }

    /// Human-readable warnings for regime violations; empty when regime_ok().
    [[nodiscard]] std::vector<std::string> regime_warnings() const {
        std::vector<std::string> out;
        if (delta_e / hbar_omega0 < kRegimeMinGapRatio)
            out.emplace_back("delta_e/hbar_omega0 < 5: multiphoton approximations are unreliable");
        if (n_ref < kRegimeMinPhotons)
            out.emplace_back("n_ref < 20: large-n approximations are unreliable");
        return out;
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// g = U sqrt(n_ref) / delta_e.
struct DimensionlessCoupling {
    double g{0.0};

    friend auto operator<=>(const DimensionlessCoupling&, const DimensionlessCoupling&) = default;
};

[[nodiscard]] inline DimensionlessCoupling derive_g(const ModelParams& params) {
    params.validate();
    return {params.coupling_u * std::sqrt(params.n_ref) / params.delta_e};
}

/// Inverse of derive_g: the coupling U that produces `g` at the given delta_e and n_ref.
[[nodiscard]] inline double coupling_for_g(DimensionlessCoupling g, const ModelParams& params) {
    if (!(params.n_ref > 0.0))
        throw ParameterError("n_ref must be positive to invert g");
    if (!(g.g >= 0.0))
        throw ParameterError("g must be non-negative");
    if (!(params.delta_e > 0.0))
        throw ParameterError("delta_e must be positive");
    return g.g * params.delta_e / std::sqrt(params.n_ref);
}

} // namespace bsshift
