// grid1d.hpp: position-grid solver for the rotated-frame oscillator
//
//   (E + 1/2) u = (1/2) [-d^2/dy^2 + y^2] u + m sqrt(dE^2 + 8 U^2 y^2) u
//
// plus the WKB dressed transition energy and the y-representation of the
// rotated-frame perturbation V. Energies are in units of hbar_omega0.

#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <Eigen/Dense>

#include "bsshift/errors.hpp"
#include "bsshift/fockspin.hpp"
#include "bsshift/model.hpp"

namespace bsshift {

inline constexpr double kBoxTurningPointFactor = 1.5;
inline constexpr double kDefaultPointsPerWavelength = 8.0;
inline constexpr double kEdgeDecayLimit = 1e-6;

/// Uniform grid y_i = -L + i h, i = 0..points-1, with Dirichlet ends outside.
struct GridEigenproblem {
    double half_width{0};  // L
    double step{0};        // h
    int points{0};

    [[nodiscard]] double y(int i) const { return -half_width + i * step; }

    [[nodiscard]] Eigen::VectorXd coordinates() const {
        Eigen::VectorXd out(points);
        for (int i = 0; i < points; ++i) out[i] = y(i);
        return out;
    }

    /// Box holding the turning points of levels up to `n_target`, resolved
    /// with `points_per_wavelength` samples of the shortest local wavelength.
    /// `box_scale` multiplies the default half-width (used by convergence checks).
    [[nodiscard]] static GridEigenproblem for_levels(int n_target,
                                                     double points_per_wavelength = kDefaultPointsPerWavelength,
                                                     double box_scale = 1.0) {
        if (n_target < 0) throw ConfigurationError("n_target must be non-negative");
        if (!(points_per_wavelength > 2.0)) throw ConfigurationError("need more than 2 points per wavelength");
        const double turning = std::sqrt(2.0 * n_target + 1.0);
        GridEigenproblem g;
        // 1.5 x the turning point, but never less than 6 decay lengths past it
        const double half = box_scale * std::max(kBoxTurningPointFactor * turning, turning + 6.0);
        // shortest wavelength 2 pi / k_max with k_max^2 = 2 n + 1 at the well bottom
        const double h_target = 2.0 * std::numbers::pi / turning / points_per_wavelength;
        const int intervals = static_cast<int>(std::ceil(2.0 * half / h_target));
        g.points = intervals + 1;
        g.step = 2.0 * half / intervals;
        g.half_width = half;
        return g;
    }

    friend bool operator==(const GridEigenproblem&, const GridEigenproblem&) = default;
};

/// Real function sampled on a grid; normalized so that  sum_i h u_i^2 = 1.
struct GridFunction {
    GridEigenproblem grid;
    Eigen::VectorXd values;

    /// Trapezoid-rule norm  integral |u|^2 dy.
    [[nodiscard]] double norm() const {
        const Eigen::Index n = values.size();
        double s = values.squaredNorm() - 0.5 * (values[0] * values[0] + values[n - 1] * values[n - 1]);
        return s * grid.step;
    }

    [[nodiscard]] double inner(const GridFunction& other) const {
        if (!(grid == other.grid)) throw ContractError("grid functions live on different grids");
        return values.dot(other.values) * grid.step;
    }

    [[nodiscard]] double edge_amplitude() const {
        return std::max(std::abs(values[0]), std::abs(values[values.size() - 1]));
    }

    /// Sign changes, ignoring the exponentially small tails.
    [[nodiscard]] int node_count() const {
        const double floor = 1e-8 * values.cwiseAbs().maxCoeff();
        int nodes = 0;
        double last = 0.0;
        for (double v : values) {
            if (std::abs(v) < floor) continue;
            if (last != 0.0 && (v > 0) != (last > 0)) ++nodes;
            last = v;
        }
        return nodes;
    }

    /// max_i |u(-y_i) - sign u(y_i)|
    [[nodiscard]] double parity_residual(int sign) const {
        const Eigen::Index n = values.size();
        double r = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) r = std::max(r, std::abs(values[n - 1 - i] - sign * values[i]));
        return r;
    }
};

struct GridLevel {
    double energy{0};
    GridFunction function;
};

namespace detail {

/// Uniform-grid sinc-DVR kinetic matrix for -d^2/dy^2.
inline Eigen::MatrixXd sinc_laplacian(int points, double step) {
    Eigen::MatrixXd t(points, points);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int j = 0; j < points; ++j)
        for (int i = 0; i < points; ++i) {
            const int d = i - j;
            t(i, j) = d == 0 ? pi2 / 3.0 : ((d % 2 == 0) ? 2.0 : -2.0) / (double(d) * d);
        }
    return t / (step * step);
}

/// Sinc-DVR first-derivative matrix; antisymmetric.
inline Eigen::MatrixXd sinc_derivative(int points, double step) {
    Eigen::MatrixXd d(points, points);
    for (int j = 0; j < points; ++j)
        for (int i = 0; i < points; ++i) {
            const int k = i - j;
            d(i, j) = k == 0 ? 0.0 : ((k % 2 == 0) ? 1.0 : -1.0) / double(k);
        }
    return d / step;
}

} // namespace detail

/// Lowest `n_levels` eigenpairs of the rotated-frame oscillator for spin `m`.
[[nodiscard]] inline std::vector<GridLevel> solve_effective_oscillator(const ModelParams& params, Spin m,
                                                                        int n_levels,
                                                                        const GridEigenproblem& grid) {
    const ModelParams p = params.normalized();
    if (n_levels < 1) throw ConfigurationError("need at least one level");
    if (n_levels > grid.points) throw ConfigurationError("more levels requested than grid points");
    const double turning = std::sqrt(2.0 * (n_levels - 1) + 1.0);
    if (grid.half_width < kBoxTurningPointFactor * turning)
        throw ConfigurationError("grid box too small: turning point of level " + std::to_string(n_levels - 1) +
                                 " needs L >= " + std::to_string(kBoxTurningPointFactor * turning));

    const double de2 = p.delta_e * p.delta_e, u2 = p.coupling_u * p.coupling_u, mm = spin_m(m);
    Eigen::MatrixXd h = 0.5 * detail::sinc_laplacian(grid.points, grid.step);
    for (int i = 0; i < grid.points; ++i) {
        const double y = grid.y(i);
        h(i, i) += 0.5 * y * y + mm * std::sqrt(de2 + 8.0 * u2 * y * y) - 0.5;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    if (es.info() != Eigen::Success) throw NumericError("grid eigensolve failed", 0.0);

    std::vector<GridLevel> out;
    out.reserve(n_levels);
    const double scale = 1.0 / std::sqrt(grid.step);
    for (int k = 0; k < n_levels; ++k) {
        Eigen::VectorXd u = es.eigenvectors().col(k) * scale;
        // sign convention: the leftmost significant lobe is positive
        const double floor = 1e-3 * u.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < u.size(); ++i)
            if (std::abs(u[i]) > floor) {
                if (u[i] < 0) u = -u;
                break;
            }
        GridFunction f{grid, std::move(u)};
        if (f.edge_amplitude() > kEdgeDecayLimit)
            throw ConfigurationError("level " + std::to_string(k) + " does not decay at the box edge; enlarge the grid");
        out.push_back({es.eigenvalues()[k], std::move(f)});
    }
    return out;
}

/// Dressed transition energy from the WKB integral
///   dE(g) = (dE/pi) int_{-sqrt(eps)}^{sqrt(eps)} sqrt((1 + 8 g^2 y^2 / n) / (eps - y^2)) dy,  eps = 2n + 1,
/// evaluated after y = sqrt(eps) sin(theta), which leaves the smooth integrand
/// sqrt(1 + (8 g^2 eps / n) sin^2 theta).
[[nodiscard]] inline double wkb_dressed_energy(DimensionlessCoupling g, double n, double delta_e) {
    if (!(g.g >= 0.0)) throw ParameterError("g must be non-negative");
    if (!(n >= 1.0)) throw ParameterError("photon number must be >= 1");
    if (!(delta_e > 0.0)) throw ParameterError("delta_e must be positive");
    const double eps = 2.0 * n + 1.0;
    const double a = 8.0 * g.g * g.g * eps / n;
    const auto integrand = [a](double theta) {
        const double s = std::sin(theta);
        return std::sqrt(1.0 + a * s * s);
    };
    using boost::math::quadrature::gauss;
    // even integrand: fold onto [0, pi/2] so the near-singular point theta = 0
    // (complex branch points at +-i asinh(1/sqrt(a))) sits where the nodes cluster
    const double half_pi = 0.5 * std::numbers::pi;
    const double fine = 2.0 * gauss<double, 200>::integrate(integrand, 0.0, half_pi);
    const double coarse = 2.0 * gauss<double, 100>::integrate(integrand, 0.0, half_pi);
    const double err = std::abs(fine - coarse) / fine;
    if (err > 1e-12) throw NumericError("WKB quadrature did not converge", err);
    return delta_e / std::numbers::pi * fine;
}

/// The same integral on the untransformed variable y, using tanh-sinh
/// quadrature to absorb the inverse-square-root endpoint singularities.
[[nodiscard]] inline double wkb_dressed_energy_untransformed(DimensionlessCoupling g, double n, double delta_e,
                                                             double tolerance = 1e-12) {
    if (!(g.g >= 0.0)) throw ParameterError("g must be non-negative");
    if (!(n >= 1.0)) throw ParameterError("photon number must be >= 1");
    const double eps = 2.0 * n + 1.0, b = 8.0 * g.g * g.g / n, root = std::sqrt(eps);
    // near the singular endpoint tanh-sinh passes yc = root - y > 0, which keeps eps - y^2 accurate
    const auto integrand = [=](double y, double yc) {
        const double eps_minus_y2 = yc > 0 ? yc * (2.0 * root - yc) : eps - y * y;
        return std::sqrt((1.0 + b * y * y) / eps_minus_y2);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0, l1 = 0.0;
    // even integrand
    const double half = ts.integrate(integrand, 0.0, root, tolerance, &err, &l1);
    if (err > 1e3 * tolerance * std::abs(half)) throw NumericError("tanh-sinh quadrature did not converge", err);
    return delta_e / std::numbers::pi * 2.0 * half;
}

/// (n, m) label of a rotated-frame level.
struct DressedLevelIndex {
    int n{0};
    Spin m{Spin::up};

    friend bool operator==(const DressedLevelIndex&, const DressedLevelIndex&) = default;
};

/// E_{n,m}(g) = dE(g) m + n, with dE(g) from the WKB integral at n_ref.
[[nodiscard]] inline double dressed_level_energy(DressedLevelIndex idx, DimensionlessCoupling g,
                                                 const ModelParams& params) {
    if (idx.n < 0) throw ContractError("negative oscillator quantum number");
    const ModelParams p = params.normalized();
    return wkb_dressed_energy(g, p.n_ref, p.delta_e) * spin_m(idx.m) + idx.n;
}

/// E_{n,+1/2} - E_{n,-1/2} from the grid at coupling g (U from g via n_ref).
[[nodiscard]] inline double grid_dressed_gap(const ModelParams& params, DimensionlessCoupling g, int n,
                                             const GridEigenproblem& grid) {
    const ModelParams p = params.normalized().with_coupling(coupling_for_g(g, params.normalized()));
    const auto up = solve_effective_oscillator(p, Spin::up, n + 1, grid);
    const auto down = solve_effective_oscillator(p, Spin::down, n + 1, grid);
    return up[n].energy - down[n].energy;
}

/// u_{n,m} and u_{n',m'} on a shared grid at coupling g (U from g via n_ref).
/// The labels must differ by an odd or even photon count and by one unit of m.
[[nodiscard]] inline std::pair<GridLevel, GridLevel>
rotated_eigenfunction_pair(const ModelParams& params, DimensionlessCoupling g, DressedLevelIndex lower,
                           DressedLevelIndex upper, const GridEigenproblem& grid) {
    if (lower.m == upper.m) throw ContractError("pair must differ by one unit of m");
    if (upper.n <= lower.n) throw ContractError("upper level must carry more photons");
    const ModelParams p = params.normalized().with_coupling(coupling_for_g(g, params.normalized()));
    auto lo = solve_effective_oscillator(p, lower.m, lower.n + 1, grid);
    auto hi = solve_effective_oscillator(p, upper.m, upper.n + 1, grid);
    return {std::move(lo[lower.n]), std::move(hi[upper.n])};
}

/// <u_a| (1/2) sqrt(2) [ f d/dy + d/dy f ] |u_b> with the bracket
/// f(y) = (U/dE) / (1 + 8 U^2 y^2 / dE^2). This is the spatial factor of
/// <psi_{a,+}|V|psi_{b,-}> (the spin factor has unit magnitude).
[[nodiscard]] inline double v_matrix_element_grid(const ModelParams& params, const GridFunction& ua,
                                                  const GridFunction& ub) {
    if (!(ua.grid == ub.grid)) throw ContractError("grid functions live on different grids");
    const ModelParams p = params.normalized();
    const auto& grid = ua.grid;
    const double c = p.coupling_u / p.delta_e, r2 = 8.0 * c * c;
    Eigen::VectorXd f(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const double y = grid.y(i);
        f[i] = c / (1.0 + r2 * y * y);
    }
    const Eigen::MatrixXd d = detail::sinc_derivative(grid.points, grid.step);
    const Eigen::VectorXd op_ub = f.cwiseProduct(d * ub.values) + d * f.cwiseProduct(ub.values);
    return 0.5 * std::numbers::sqrt2 * ua.values.dot(op_ub) * grid.step;
}

/// Two-column CSV (y,u) for inspecting an eigenfunction.
inline void write_grid_function_csv(std::ostream& os, const GridFunction& f) {
    const auto old = os.precision(17);
    os << "y,u\n";
    for (int i = 0; i < f.grid.points; ++i) os << f.grid.y(i) << ',' << f.values[i] << '\n';
    os.precision(old);
}

} // namespace bsshift
