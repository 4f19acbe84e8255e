// resonance.hpp: Bloch-Siegert resonances dE(g) = (2k+1) hbar_omega0 and the
// level splitting at the associated anticrossings, estimated three ways:
//   * exact: minimum adiabatic gap of the spin-boson Hamiltonian,
//   * shirley: the weak-coupling closed form,
//   * degenerate-pt: 2 |<psi_{n,+}|V|psi_{n+2k+1,-}>| in the rotated frame.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <Eigen/Dense>

#include "bsshift/errors.hpp"
#include "bsshift/fockspin.hpp"
#include "bsshift/grid1d.hpp"
#include "bsshift/model.hpp"
#include "bsshift/rotation.hpp"

namespace bsshift {

enum class ResonanceMethod { wkb, grid, exact_spectrum };
enum class SplittingMethod { exact, shirley, degenerate_pt };
enum class CrossingKind { crossing, anticrossing };

[[nodiscard]] inline std::string to_string(ResonanceMethod m) {
    switch (m) {
    case ResonanceMethod::wkb: return "wkb";
    case ResonanceMethod::grid: return "grid";
    case ResonanceMethod::exact_spectrum: return "exact-spectrum";
    }
    return "?";
}

[[nodiscard]] inline std::string to_string(SplittingMethod m) {
    switch (m) {
    case SplittingMethod::exact: return "exact";
    case SplittingMethod::shirley: return "shirley";
    case SplittingMethod::degenerate_pt: return "degenerate-pt";
    }
    return "?";
}

/// The level pair |n_low, +1/2> <-> |n_low + quanta, -1/2> centred on n_ref.
struct ResonancePair {
    int quanta{1};
    int n_low{0};
    int n_high{1};

    [[nodiscard]] double n_mean() const { return n_low + 0.5 * quanta; }
    [[nodiscard]] DressedLevelIndex lower() const { return {n_low, Spin::up}; }
    [[nodiscard]] DressedLevelIndex upper() const { return {n_high, Spin::down}; }
    /// Parity sz (-1)^n of the unrotated states each label continues into.
    [[nodiscard]] int parity_lower() const { return n_low % 2 == 0 ? 1 : -1; }
    [[nodiscard]] int parity_upper() const { return n_high % 2 == 0 ? -1 : 1; }
    [[nodiscard]] bool same_parity() const { return parity_lower() == parity_upper(); }
};

[[nodiscard]] inline ResonancePair resonance_pair(int quanta, double n_ref) {
    if (quanta < 1) throw ContractError("resonance must involve at least one quantum");
    const int n_low = static_cast<int>(std::floor(n_ref - 0.5 * quanta + 0.5));
    if (n_low < 0) throw ConfigurationError("n_ref too small for a " + std::to_string(quanta) + "-quantum pair");
    return {quanta, n_low, n_low + quanta};
}

struct ResonanceResult {
    int k{0};
    double g0{0};
    double coupling_u{0};  // U at the resonance
    double residual{0};    // |dE(g0) - (2k+1)| (wkb, grid); final bracket width in g (exact-spectrum)
    ResonanceMethod method{ResonanceMethod::wkb};
    double n_mean{0};      // photon number defining g0
};

struct TwoLevelModel {
    double e0{0}, e1{0};        // diabatic energies at g0
    double v{0};                // coupling
    double g0{0};
    double slope{0};            // d(e0 - e1)/dg
    [[nodiscard]] double e_plus() const { return 0.5 * (e0 + e1) + std::sqrt(0.25 * (e0 - e1) * (e0 - e1) + v * v); }
    [[nodiscard]] double e_minus() const { return 0.5 * (e0 + e1) - std::sqrt(0.25 * (e0 - e1) * (e0 - e1) + v * v); }
};

struct SplittingDiagnostics {
    int n_max{0};
    int scan_points{0};
    int grid_points{0};
    double grid_step{0};
    double bracket{0};   // final golden-section / root bracket width in g
    int n_low{0};
    int n_high{0};
    double n_mean{0};
};

struct SplittingResult {
    int k{0};
    int quanta{1};
    double g_at_min{0};
    double coupling_u{0};
    double gap{0};
    SplittingMethod method{SplittingMethod::exact};
    CrossingKind kind{CrossingKind::anticrossing};
    bool weak_coupling_estimate{false};
    SplittingDiagnostics diagnostics{};
};

/// Sorted eigenvalues of one parity sector of H(U); hook for caching.
using SectorEigenvalueFn = std::function<Eigen::VectorXd(double coupling_u, int parity)>;

struct ResonanceOptions {
    double g_max{5.0};
    double root_tolerance{1e-12};                 // relative, in g or U
    double points_per_wavelength{kDefaultPointsPerWavelength};
    int grid_level_margin{8};                     // levels solved above n_high
    int n_max{200};                               // exact-spectrum locator
};

struct ExactOptions {
    int n_max{200};
    int scan_points{101};
    double window_low{0.8};                       // coarse scan in units of the WKB g0
    double window_high{1.2};
    double detuning_window{0.5};                  // |dE(g) - quanta| bound on the scan (hbar_omega0)
    double golden_tolerance{1e-9};                // relative bracket width in g
    double overlap_threshold{0.9};
    int max_halvings{16};
    double coupling_sign{1.0};                    // -1 evaluates the U -> -U Hamiltonian
    SectorEigenvalueFn sector_eigenvalues{};      // optional cache hook (coupling_sign = +1 only)
};

// ---------------------------------------------------------------------------

namespace detail {

/// Root of f on [a, b] (f(a), f(b) of opposite sign) to relative tolerance `rel`.
template <typename F>
double bracketed_root(F f, double a, double b, double rel, double* width = nullptr) {
    using boost::math::tools::eps_tolerance;
    using boost::math::tools::toms748_solve;
    const double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0) == (fb > 0)) throw ResonanceError("root is not bracketed");
    const int bits = std::max(8, static_cast<int>(-std::log2(std::max(rel, 1e-15))));
    std::uintmax_t iters = 200;
    auto r = toms748_solve(f, a, b, fa, fb, eps_tolerance<double>(bits), iters);
    if (width) *width = std::abs(r.second - r.first);
    return 0.5 * (r.first + r.second);
}

/// H(U) with a signed coupling, in units of hbar_omega0.
inline RealOperator spin_boson_matrix(const ModelParams& p, const FockSpinBasis& basis, double signed_u) {
    RealOperator h = build_hamiltonian(p.with_coupling(std::abs(signed_u)), basis);
    if (signed_u < 0) h.entries = 2.0 * Eigen::MatrixXd(h.entries.diagonal().asDiagonal()) - h.entries;
    return h;
}

/// (-1)^n on the Fock factor; maps eigenvectors of H(U) onto those of H(-U).
inline Eigen::VectorXd fock_parity_flip(const FockSpinBasis& basis, Eigen::VectorXd v) {
    for (int i = 0; i < basis.dimension(); ++i)
        if (basis.state(i).n_fock % 2 == 1) v[i] = -v[i];
    return v;
}

/// Golden-section minimisation of f on [a, b].
template <typename F>
std::pair<double, double> golden_section(F f, double a, double b, double abs_tol, double* width) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > abs_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if (width) *width = std::abs(b - a);
    return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Resonance location

/// g at which the WKB dressed energy (at photon number params.n_ref) equals `quanta`.
[[nodiscard]] inline ResonanceResult find_resonance_quanta_wkb(int quanta, const ModelParams& params,
                                                               const ResonanceOptions& opt = {}) {
    const ModelParams p = params.normalized();
    ResonanceResult r;
    r.k = (quanta - 1) / 2;
    r.method = ResonanceMethod::wkb;
    r.n_mean = p.n_ref;
    const double target = quanta;
    if (target < p.delta_e * (1.0 - 1e-14))
        throw ResonanceError("no resonance: " + std::to_string(quanta) +
                             " quanta lie below delta_e and the shift only increases the transition energy");
    if (std::abs(target - p.delta_e) <= 1e-14 * p.delta_e) return r;  // g0 = 0
    const auto f = [&](double g) { return wkb_dressed_energy({g}, p.n_ref, p.delta_e) - target; };
    if (f(opt.g_max) < 0)
        throw ResonanceError("resonance lies beyond g_max = " + std::to_string(opt.g_max));
    r.g0 = detail::bracketed_root(f, 0.0, opt.g_max, opt.root_tolerance);
    r.residual = std::abs(f(r.g0));
    r.coupling_u = coupling_for_g({r.g0}, p);
    return r;
}

/// g at which E_{n_low,+1/2} = E_{n_high,-1/2} on the grid (pair centred on params.n_ref).
[[nodiscard]] inline ResonanceResult find_resonance_quanta_grid(int quanta, const ModelParams& params,
                                                                const ResonanceOptions& opt = {}) {
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    const ModelParams pm = p.with_n_ref(pair.n_mean());
    ResonanceResult r = find_resonance_quanta_wkb(quanta, pm, opt);
    r.method = ResonanceMethod::grid;
    r.n_mean = pair.n_mean();
    const auto grid = GridEigenproblem::for_levels(pair.n_high + opt.grid_level_margin, opt.points_per_wavelength);
    const auto detuning = [&](double u) {
        const ModelParams q = pm.with_coupling(u);
        const auto up = solve_effective_oscillator(q, Spin::up, pair.n_low + 1, grid);
        const auto down = solve_effective_oscillator(q, Spin::down, pair.n_high + 1, grid);
        return up[pair.n_low].energy - down[pair.n_high].energy;
    };
    if (r.g0 == 0.0) {
        r.residual = std::abs(detuning(0.0));
        return r;
    }
    double lo = 0.9 * r.coupling_u, hi = 1.1 * r.coupling_u;
    for (int expand = 0; (detuning(lo) > 0) == (detuning(hi) > 0); ++expand) {
        if (expand > 6) throw ResonanceError("grid resonance not bracketed near the WKB estimate");
        lo *= 0.9;
        hi *= 1.1;
    }
    const double u = detail::bracketed_root(detuning, lo, hi, opt.root_tolerance);
    r.coupling_u = u;
    r.g0 = derive_g(pm.with_coupling(u)).g;
    r.residual = std::abs(detuning(u));
    return r;
}

inline SplittingResult exact_pair_splitting(int quanta, const ModelParams& params, const ExactOptions& opt = {});

/// Resonance of order k: dE(g0) = (2k+1) hbar_omega0.
[[nodiscard]] inline ResonanceResult find_resonance(int k, const ModelParams& params,
                                                    ResonanceMethod method = ResonanceMethod::wkb,
                                                    const ResonanceOptions& opt = {}) {
    if (k < 0) throw ContractError("resonance order must be non-negative");
    const int quanta = 2 * k + 1;
    switch (method) {
    case ResonanceMethod::wkb: return find_resonance_quanta_wkb(quanta, params, opt);
    case ResonanceMethod::grid: return find_resonance_quanta_grid(quanta, params, opt);
    case ResonanceMethod::exact_spectrum: {
        ExactOptions eo;
        eo.n_max = opt.n_max;
        const SplittingResult s = exact_pair_splitting(quanta, params, eo);
        ResonanceResult r;
        r.k = k;
        r.g0 = s.g_at_min;
        r.coupling_u = s.coupling_u;
        r.residual = s.diagnostics.bracket;
        r.method = method;
        r.n_mean = s.diagnostics.n_mean;
        return r;
    }
    }
    throw ContractError("unknown resonance method");
}

// ---------------------------------------------------------------------------
// Shirley weak-coupling splitting, evaluated in log space:
//   log gap = (2k+1) log g0 - (2k-1) log 2 - 2 log k! + 2k log(dE) + log dE

[[nodiscard]] inline SplittingResult shirley_splitting(int k, DimensionlessCoupling g0, const ModelParams& params) {
    if (k < 0) throw ContractError("resonance order must be non-negative");
    if (!(g0.g >= 0.0)) throw ParameterError("g0 must be non-negative");
    const ModelParams p = params.normalized();
    SplittingResult s;
    s.k = k;
    s.quanta = 2 * k + 1;
    s.g_at_min = g0.g;
    s.coupling_u = coupling_for_g(g0, p);
    s.method = SplittingMethod::shirley;
    s.weak_coupling_estimate = true;
    s.diagnostics.n_mean = p.n_ref;
    if (g0.g == 0.0) return s;
    const double log_gap = (2 * k + 1) * std::log(g0.g) - (2 * k - 1) * std::numbers::ln2 -
                           2.0 * std::lgamma(k + 1.0) + 2 * k * std::log(p.delta_e) + std::log(p.delta_e);
    s.gap = std::exp(log_gap);
    return s;
}

// ---------------------------------------------------------------------------
// Level tracking by eigenvector-overlap continuation

/// One tracked level: parity sector, ascending index inside the sector, and
/// the sector-coordinate eigenvector at the last accepted coupling.
struct TrackedLevel {
    int parity{1};
    int index{0};
    Eigen::VectorXd vector;
    double energy{0};
};

struct TrackPoint {
    double coupling_u{0};
    std::vector<int> indices;
    std::vector<double> energies;
    double min_overlap{1.0};
};

/// Follows a set of levels of H(U) along a coupling path, halving the step
/// whenever the best overlap falls below the threshold.
class LevelTracker {
public:
    LevelTracker(ModelParams params, FockSpinBasis basis, double overlap_threshold = 0.9, int max_halvings = 16)
        : params_(params.normalized()), basis_(basis), threshold_(overlap_threshold), max_halvings_(max_halvings) {}

    /// Starts tracking at coupling `u` from approximate full-basis vectors.
    /// Each guess must have squared overlap >= 1/2 with one eigenvector.
    std::vector<TrackedLevel> start(double u, const std::vector<Eigen::VectorXd>& guesses,
                                    const std::vector<int>& parities) {
        levels_.clear();
        for (std::size_t i = 0; i < guesses.size(); ++i) {
            const SectorSpectrum& s = sector_at(u, parities[i]);
            const Eigen::VectorXd g = s.restrict(guesses[i]).normalized();
            Eigen::Index best = 0;
            const double ov = (s.eigenvectors.transpose() * g).cwiseAbs().maxCoeff(&best);
            if (ov * ov < 0.5)
                throw LabelingError("initial state identification failed: best squared overlap " +
                                    std::to_string(ov * ov));
            levels_.push_back({parities[i], static_cast<int>(best), s.eigenvectors.col(best), s.eigenvalues[best]});
        }
        check_distinct();
        u_ = u;
        return levels_;
    }

    /// Advances every tracked level to coupling `u`.
    TrackPoint advance(double u) {
        double min_ov = 1.0;
        step(u_, u, 0, min_ov);
        u_ = u;
        TrackPoint tp;
        tp.coupling_u = u;
        tp.min_overlap = min_ov;
        for (const auto& l : levels_) {
            tp.indices.push_back(l.index);
            tp.energies.push_back(l.energy);
        }
        return tp;
    }

    [[nodiscard]] const std::vector<TrackedLevel>& levels() const { return levels_; }

    [[nodiscard]] Eigen::VectorXd full_vector(std::size_t i) const {
        const auto idx = sector_indices(basis_, levels_[i].parity);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(basis_.dimension());
        for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] = levels_[i].vector[static_cast<Eigen::Index>(j)];
        return v;
    }

private:
    const SectorSpectrum& sector_at(double u, int parity) {
        const int slot = parity > 0 ? 0 : 1;
        if (!cache_[slot] || cache_u_[slot] != u) {
            cache_[slot] = diagonalize_sector(detail::spin_boson_matrix(params_, basis_, u), parity);
            cache_u_[slot] = u;
        }
        return *cache_[slot];
    }

    void check_distinct() const {
        for (std::size_t i = 0; i < levels_.size(); ++i)
            for (std::size_t j = i + 1; j < levels_.size(); ++j)
                if (levels_[i].parity == levels_[j].parity && levels_[i].index == levels_[j].index)
                    throw LabelingError("two tracked levels map onto the same eigenstate");
    }

    void step(double u0, double u1, int depth, double& min_ov) {
        std::vector<TrackedLevel> next = levels_;
        bool ok = true;
        double worst = 1.0;
        for (auto& l : next) {
            const SectorSpectrum& s = sector_at(u1, l.parity);
            const Eigen::VectorXd ov = s.eigenvectors.transpose() * l.vector;
            Eigen::Index best = 0;
            const double m = ov.cwiseAbs().maxCoeff(&best);
            worst = std::min(worst, m);
            if (m < threshold_) ok = false;
            l.index = static_cast<int>(best);
            l.vector = s.eigenvectors.col(best) * (ov[best] < 0 ? -1.0 : 1.0);
            l.energy = s.eigenvalues[best];
        }
        for (std::size_t i = 0; ok && i < next.size(); ++i)
            for (std::size_t j = i + 1; j < next.size(); ++j)
                if (next[i].parity == next[j].parity && next[i].index == next[j].index) ok = false;
        if (ok) {
            levels_ = std::move(next);
            min_ov = std::min(min_ov, worst);
            return;
        }
        if (depth >= max_halvings_)
            throw TrackingError("level tracking ambiguous (overlap " + std::to_string(worst) +
                                "); refine the scan with a smaller coupling step");
        const double mid = 0.5 * (u0 + u1);
        step(u0, mid, depth + 1, min_ov);
        step(mid, u1, depth + 1, min_ov);
    }

    ModelParams params_;
    FockSpinBasis basis_;
    double threshold_;
    int max_halvings_;
    double u_{0};
    std::vector<TrackedLevel> levels_;
    std::optional<SectorSpectrum> cache_[2];
    double cache_u_[2]{0, 0};
};

// ---------------------------------------------------------------------------
// Exact minimum gap

namespace detail {

/// Coupling window in which |dE_WKB(g) - quanta| <= detuning, clipped to [low, high] x U0.
inline std::pair<double, double> scan_window(int quanta, const ModelParams& pm, double u0, const ExactOptions& opt) {
    double lo = opt.window_low * u0, hi = opt.window_high * u0;
    const auto detuning = [&](double u) {
        return wkb_dressed_energy(derive_g(pm.with_coupling(u)), pm.n_ref, pm.delta_e) - quanta;
    };
    if (detuning(lo) < -opt.detuning_window)
        lo = bracketed_root([&](double u) { return detuning(u) + opt.detuning_window; }, lo, u0, 1e-10);
    if (detuning(hi) > opt.detuning_window)
        hi = bracketed_root([&](double u) { return detuning(u) - opt.detuning_window; }, u0, hi, 1e-10);
    return {lo, hi};
}

} // namespace detail

/// Minimum gap between |n_low,+> and |n_low+quanta,-> continued into the
/// exact spectrum. Same-parity pairs (odd quanta) anticross; opposite-parity
/// pairs (even quanta) cross and are resolved by a root search.
inline SplittingResult exact_pair_splitting(int quanta, const ModelParams& params, const ExactOptions& opt) {
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    const ModelParams pm = p.with_n_ref(pair.n_mean());
    const FockSpinBasis basis(opt.n_max);
    if (pair.n_high + 1 > static_cast<int>(0.9 * opt.n_max))
        throw ConfigurationError("n_max = " + std::to_string(opt.n_max) + " cannot hold the level pair up to n = " +
                                 std::to_string(pair.n_high) + "; increase n_max beyond " +
                                 std::to_string(static_cast<int>(std::ceil((pair.n_high + 1) / 0.9))));

    SplittingResult out;
    out.k = (quanta - 1) / 2;
    out.quanta = quanta;
    out.method = SplittingMethod::exact;
    out.kind = pair.same_parity() ? CrossingKind::anticrossing : CrossingKind::crossing;
    out.diagnostics.n_max = opt.n_max;
    out.diagnostics.n_low = pair.n_low;
    out.diagnostics.n_high = pair.n_high;
    out.diagnostics.n_mean = pair.n_mean();

    const ResonanceResult wkb = find_resonance_quanta_wkb(quanta, pm);
    if (wkb.g0 == 0.0) return out;  // degenerate and uncoupled at U = 0
    const double sign = opt.coupling_sign < 0 ? -1.0 : 1.0;
    const auto [u_lo, u_hi] = detail::scan_window(quanta, pm, wkb.coupling_u, opt);

    // identify the two levels at the scan start through the rotated frame
    const QuadratureCalculus calc(basis);
    const ModelParams start = pm.with_coupling(u_lo);
    const RotatedFrameStates frame(start, calc);
    const Eigen::MatrixXd rot = real_part(build_unitary(start, calc)).entries;
    Eigen::VectorXd guess_a = rot * frame.state(pair.n_low, Spin::up);
    Eigen::VectorXd guess_b = rot * frame.state(pair.n_high, Spin::down);
    for (const auto* g : {&guess_a, &guess_b})
        if (!truncation_safe(basis, *g))
            throw ConfigurationError("tracked state reaches the Fock cutoff; increase n_max");
    if (sign < 0) {
        guess_a = detail::fock_parity_flip(basis, guess_a);
        guess_b = detail::fock_parity_flip(basis, guess_b);
    }

    LevelTracker tracker(pm, basis, opt.overlap_threshold, opt.max_halvings);
    tracker.start(sign * u_lo, {guess_a, guess_b}, {pair.parity_lower(), pair.parity_upper()});

    const int n = std::max(opt.scan_points, 3);
    std::vector<TrackPoint> scan;
    scan.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double u = u_lo + (u_hi - u_lo) * i / (n - 1);
        scan.push_back(tracker.advance(sign * u));
    }
    out.diagnostics.scan_points = n;

    const auto sector_values = [&](double u, int parity) -> Eigen::VectorXd {
        if (opt.sector_eigenvalues && sign > 0) return opt.sector_eigenvalues(u, parity);
        return diagonalize_sector(detail::spin_boson_matrix(pm, basis, sign * u), parity, false).eigenvalues;
    };
    const auto to_g = [&](double u) { return derive_g(pm.with_coupling(u)).g; };
    const double tol = opt.golden_tolerance * wkb.coupling_u;

    if (out.kind == CrossingKind::anticrossing) {
        // the tracked pair must be adjacent in its sector near the minimum
        std::size_t best = 0;
        for (std::size_t i = 1; i < scan.size(); ++i)
            if (std::abs(scan[i].energies[0] - scan[i].energies[1]) <
                std::abs(scan[best].energies[0] - scan[best].energies[1]))
                best = i;
        if (best == 0 || best + 1 == scan.size())
            throw ResonanceError("minimum gap lies on the edge of the scan window");
        const int lo = std::min(scan[best].indices[0], scan[best].indices[1]);
        const int hi = std::max(scan[best].indices[0], scan[best].indices[1]);
        if (hi != lo + 1) throw TrackingError("tracked pair is not adjacent in its parity sector");
        const int parity = pair.parity_lower();
        const auto gap = [&](double u) {
            const Eigen::VectorXd e = sector_values(u, parity);
            return e[hi] - e[lo];
        };
        double width = 0;
        const auto [u_min, g_min] = detail::golden_section(gap, std::abs(scan[best - 1].coupling_u),
                                                           std::abs(scan[best + 1].coupling_u), tol, &width);
        out.coupling_u = u_min;
        out.g_at_min = to_g(u_min);
        out.gap = g_min;
        out.diagnostics.bracket = to_g(width);
        return out;
    }

    // crossing: signed difference of the tracked levels changes sign
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
        const double d0 = scan[i].energies[0] - scan[i].energies[1];
        const double d1 = scan[i + 1].energies[0] - scan[i + 1].energies[1];
        if ((d0 > 0) == (d1 > 0) && d1 != 0.0) continue;
        if (scan[i].indices != scan[i + 1].indices)
            throw TrackingError("tracked levels change sector index inside the crossing bracket");
        const int ia = scan[i].indices[0], ib = scan[i].indices[1];
        const auto diff = [&](double u) {
            return sector_values(u, pair.parity_lower())[ia] - sector_values(u, pair.parity_upper())[ib];
        };
        double width = 0;
        const double u0 = std::abs(scan[i].coupling_u), u1 = std::abs(scan[i + 1].coupling_u);
        const double u = detail::bracketed_root(diff, u0, u1, 1e-15, &width);
        out.coupling_u = u;
        out.g_at_min = to_g(u);
        out.gap = std::abs(diff(u));
        out.diagnostics.bracket = to_g(width);
        return out;
    }
    throw ResonanceError("tracked levels do not cross inside the scan window");
}

/// Exact splitting at the (2k+1)-quantum anticrossing.
[[nodiscard]] inline SplittingResult exact_splitting(int k, const ModelParams& params, const ExactOptions& opt = {}) {
    if (k < 0) throw ContractError("resonance order must be non-negative");
    return exact_pair_splitting(2 * k + 1, params, opt);
}

// ---------------------------------------------------------------------------
// Degenerate perturbation theory in the rotated frame

struct PtOptions {
    double points_per_wavelength{kDefaultPointsPerWavelength};
    int grid_level_margin{8};
};

/// u_{n_low,+} and u_{n_high,-} at the grid resonance, plus the resonance itself.
struct PtEigenfunctions {
    ResonanceResult resonance;
    GridLevel lower;
    GridLevel upper;
};

[[nodiscard]] inline PtEigenfunctions pt_eigenfunctions(int quanta, const ModelParams& params,
                                                        const PtOptions& opt = {}) {
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    ResonanceOptions ro;
    ro.points_per_wavelength = opt.points_per_wavelength;
    ro.grid_level_margin = opt.grid_level_margin;
    ResonanceResult res = find_resonance_quanta_grid(quanta, p, ro);
    const ModelParams pm = p.with_n_ref(pair.n_mean());
    const auto grid = GridEigenproblem::for_levels(pair.n_high + opt.grid_level_margin, opt.points_per_wavelength);
    auto [lo, hi] = rotated_eigenfunction_pair(pm, {res.g0}, pair.lower(), pair.upper(), grid);
    return {res, std::move(lo), std::move(hi)};
}

/// 2 |<psi_{n,+}|V|psi_{n+quanta,-}>| with grid eigenfunctions of H0 at the grid resonance.
[[nodiscard]] inline SplittingResult degenerate_pt_pair_splitting(int quanta, const ModelParams& params,
                                                                  const PtOptions& opt = {}) {
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    SplittingResult out;
    out.k = (quanta - 1) / 2;
    out.quanta = quanta;
    out.method = SplittingMethod::degenerate_pt;
    out.kind = pair.same_parity() ? CrossingKind::anticrossing : CrossingKind::crossing;
    const PtEigenfunctions ef = pt_eigenfunctions(quanta, p, opt);
    const ModelParams at = p.with_n_ref(pair.n_mean()).with_coupling(ef.resonance.coupling_u);
    out.g_at_min = ef.resonance.g0;
    out.coupling_u = ef.resonance.coupling_u;
    out.gap = 2.0 * std::abs(v_matrix_element_grid(at, ef.lower.function, ef.upper.function));
    out.diagnostics.grid_points = ef.lower.function.grid.points;
    out.diagnostics.grid_step = ef.lower.function.grid.step;
    out.diagnostics.n_low = pair.n_low;
    out.diagnostics.n_high = pair.n_high;
    out.diagnostics.n_mean = pair.n_mean();
    return out;
}

[[nodiscard]] inline SplittingResult degenerate_pt_splitting(int k, const ModelParams& params,
                                                             const PtOptions& opt = {}) {
    if (k < 0) throw ContractError("resonance order must be non-negative");
    return degenerate_pt_pair_splitting(2 * k + 1, params, opt);
}

/// The PT matrix element evaluated with grid functions and with the Fock-space
/// matrices of V and H0.
struct PtCrossCheck {
    double element_grid{0};
    double element_matrix{0};
    double relative_difference{0};
    double energy_mismatch{0};  // max |E_grid - E_matrix| over the two labelled states
    double g0{0};
    double coupling_u{0};
};

inline constexpr double kLabelEnergyTolerance = 1e-3;

[[nodiscard]] inline PtCrossCheck verify_rotated_pt_in_matrix_rep(int k, const ModelParams& params, int n_max = 200,
                                                                  const PtOptions& opt = {}) {
    const int quanta = 2 * k + 1;
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    const PtEigenfunctions ef = pt_eigenfunctions(quanta, p, opt);
    const ModelParams at = p.with_n_ref(pair.n_mean()).with_coupling(ef.resonance.coupling_u);

    PtCrossCheck out;
    out.g0 = ef.resonance.g0;
    out.coupling_u = ef.resonance.coupling_u;
    out.element_grid = std::abs(v_matrix_element_grid(at, ef.lower.function, ef.upper.function));

    const FockSpinBasis basis(n_max);
    const QuadratureCalculus calc(basis);
    const RotatedFrameStates frame(at, calc);
    out.energy_mismatch = std::max(std::abs(frame.energy(pair.n_low, Spin::up) - ef.lower.energy),
                                   std::abs(frame.energy(pair.n_high, Spin::down) - ef.upper.energy));
    if (out.energy_mismatch > kLabelEnergyTolerance)
        throw LabelingError("rotated-frame states disagree between grid and matrix representations: energy "
                            "mismatch " + std::to_string(out.energy_mismatch) + " for n = " +
                            std::to_string(pair.n_low) + ", " + std::to_string(pair.n_high) +
                            "; mean photon numbers " +
                            std::to_string(frame.mean_photon_number(pair.n_low, Spin::up)) + ", " +
                            std::to_string(frame.mean_photon_number(pair.n_high, Spin::down)));
    const ComplexOperator v = build_v(at, calc);
    const Eigen::VectorXcd a = frame.state(pair.n_low, Spin::up).cast<Complex>();
    const Eigen::VectorXcd b = frame.state(pair.n_high, Spin::down).cast<Complex>();
    out.element_matrix = std::abs(a.dot(v.entries * b));
    out.relative_difference =
        out.element_matrix == 0.0 && out.element_grid == 0.0
            ? 0.0
            : std::abs(out.element_grid - out.element_matrix) / std::max(out.element_grid, out.element_matrix);
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

/// <psi|W|psi> for the two rotated-frame states of the (2k+1) resonance.
[[nodiscard]] inline std::pair<double, double> w_expectation(int k, const ModelParams& params, int n_max = 200) {
    const int quanta = 2 * k + 1;
    const ModelParams p = params.normalized();
    const ResonancePair pair = resonance_pair(quanta, p.n_ref);
    const ModelParams pm = p.with_n_ref(pair.n_mean());
    const ResonanceResult res = find_resonance_quanta_wkb(quanta, pm);
    const ModelParams at = pm.with_coupling(res.coupling_u);
    const FockSpinBasis basis(n_max);
    const QuadratureCalculus calc(basis);
    const RotatedFrameStates frame(at, calc);
    const RealOperator w = build_w(at, calc);
    const Eigen::VectorXd a = frame.state(pair.n_low, Spin::up);
    const Eigen::VectorXd b = frame.state(pair.n_high, Spin::down);
    return {a.dot(w.entries * a), b.dot(w.entries * b)};
}

/// Fits gap(g)^2 = slope^2 (g - g0)^2 + 4 v^2, the two-level anticrossing
/// model with constant coupling and locally linear diabatic detuning.
[[nodiscard]] inline TwoLevelModel fit_two_level(const std::vector<double>& g, const std::vector<double>& e_minus,
                                                 const std::vector<double>& e_plus) {
    const std::size_t n = g.size();
    if (n < 3 || e_minus.size() != n || e_plus.size() != n) throw ContractError("need >= 3 samples per branch");
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd y(n);
    double mean = 0.0;
    for (double x : g) mean += x / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g[i] - mean;
        a.row(i) << x * x, x, 1.0;
        const double d = e_plus[i] - e_minus[i];
        y[i] = d * d;
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    if (!(c[0] > 0)) throw NumericError("two-level fit is not convex", c[0]);
    TwoLevelModel m;
    m.slope = std::sqrt(c[0]);
    m.g0 = mean - c[1] / (2.0 * c[0]);
    const double four_v2 = c[2] - c[1] * c[1] / (4.0 * c[0]);
    m.v = 0.5 * std::sqrt(std::max(four_v2, 0.0));
    // branch centre at g0 by linear interpolation of the adiabatic mean
    double centre = 0.0;
    {
        std::size_t j = 0;
        while (j + 2 < n && g[j + 1] < m.g0) ++j;
        const double t = (m.g0 - g[j]) / (g[j + 1] - g[j]);
        const double c0 = 0.5 * (e_minus[j] + e_plus[j]), c1 = 0.5 * (e_minus[j + 1] + e_plus[j + 1]);
        centre = c0 + t * (c1 - c0);
    }
    m.e0 = m.e1 = centre;
    return m;
}

} // namespace bsshift
