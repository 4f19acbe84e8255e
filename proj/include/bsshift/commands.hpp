// commands.hpp: the batch commands behind the bsshift CLI
//
// Each command reads a RunConfig, writes its CSV into the output directory
// and returns a process exit code. CSVs open with '#' comment lines echoing
// the tool version and the full config.

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bsshift/cache.hpp"
#include "bsshift/config.hpp"
#include "bsshift/errors.hpp"
#include "bsshift/fockspin.hpp"
#include "bsshift/grid1d.hpp"
#include "bsshift/model.hpp"
#include "bsshift/resonance.hpp"
#include "bsshift/rotation.hpp"

#ifndef BSSHIFT_VERSION
#define BSSHIFT_VERSION "dev"
#endif

namespace bsshift {

enum ExitCode : int { exit_ok = 0, exit_invariant_failure = 1, exit_partial = 2, exit_config_error = 64 };

struct CommandContext {
    RunConfig config{};
    int threads{1};
    bool dump_wavefunctions{false};
    std::ostream* report{&std::cout};  // human-readable output (verify)
    std::ostream* log{&std::cerr};
};

[[nodiscard]] inline std::string tool_version() { return std::string("bsshift ") + BSSHIFT_VERSION; }

/// Float formatting for CSV: 17 significant digits, '.' decimal point.
[[nodiscard]] inline std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Buffered CSV text: config echo, header row, data rows, LF line endings.
class CsvDocument {
public:
    CsvDocument(const RunConfig& config, const std::string& command, std::string header) {
        text_ << "# " << tool_version() << '\n';
        text_ << "# command=" << command << '\n';
        for (const auto& [k, v] : config_entries(config)) text_ << "# " << k << '=' << v << '\n';
        text_ << header << '\n';
    }

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((text_ << (first ? "" : ",") << field(fields), first = false), ...);
        text_ << '\n';
    }

    [[nodiscard]] std::string str() const { return text_.str(); }

    std::filesystem::path write(const std::filesystem::path& dir, const std::string& name) const {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << text_.str();
        if (!out) throw IoError("failed writing " + path.string());
        return path;
    }

private:
    static std::string field(double v) { return csv_double(v); }
    static std::string field(int v) { return std::to_string(v); }
    static std::string field(const std::string& s) { return s; }
    static std::string field(const char* s) { return s; }

    std::ostringstream text_;
};

namespace detail {

/// Runs jobs[i] for all i with at most `threads` in flight; results keep input order.
template <typename T>
std::vector<T> run_ordered(const std::vector<std::function<T()>>& jobs, int threads) {
    std::vector<T> out;
    out.reserve(jobs.size());
    const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
    for (std::size_t start = 0; start < jobs.size(); start += width) {
        const std::size_t stop = std::min(jobs.size(), start + width);
        if (width == 1) {
            out.push_back(jobs[start]());
            continue;
        }
        std::vector<std::future<T>> batch;
        for (std::size_t i = start; i < stop; ++i) batch.push_back(std::async(std::launch::async, jobs[i]));
        for (auto& f : batch) out.push_back(f.get());
    }
    return out;
}

inline std::optional<SpectrumCache> open_cache(const RunConfig& c) {
    if (!c.cache) return std::nullopt;
    return SpectrumCache(std::filesystem::path(c.output_dir) / "cache");
}

inline SectorEigenvalueFn cached_sector_eigenvalues(const std::optional<SpectrumCache>& cache,
                                                    const ModelParams& params, int n_max) {
    if (!cache) return {};
    const ModelParams p = params.normalized();
    const FockSpinBasis basis(n_max);
    return [cache = *cache, p, basis, n_max](double u, int parity) -> Eigen::VectorXd {
        const std::string key = SpectrumCache::key(p.delta_e, u, n_max, parity);
        if (auto hit = cache.load(key)) return hit->eigenvalues;
        const SectorSpectrum s = diagonalize_sector(build_hamiltonian(p.with_coupling(u), basis), parity, false);
        cache.store(key, s.eigenvalues, std::vector<int>(s.eigenvalues.size(), parity));
        return s.eigenvalues;
    };
}

struct ResonanceRow {
    int k{0};
    SplittingResult exact;
    SplittingResult shirley;
    std::optional<SplittingResult> pt;
    ResonanceResult wkb;
    std::optional<PtEigenfunctions> wavefunctions;
};

inline ResonanceRow compute_resonance_row(const CommandContext& ctx, int k, bool with_pt,
                                          const std::optional<SpectrumCache>& cache) {
    const RunConfig& c = ctx.config;
    const ModelParams p = c.resonance_params();
    ResonanceRow row;
    row.k = k;
    const ResonancePair pair = resonance_pair(2 * k + 1, p.n_ref);
    ResonanceOptions ro;
    ro.root_tolerance = c.tolerances.root_find;
    row.wkb = find_resonance(k, p.with_n_ref(pair.n_mean()), ResonanceMethod::wkb, ro);

    ExactOptions eo;
    eo.n_max = c.n_max;
    eo.scan_points = c.scan_points;
    eo.sector_eigenvalues = detail::cached_sector_eigenvalues(cache, p, c.n_max);
    row.exact = exact_splitting(k, p, eo);
    row.shirley = shirley_splitting(k, {row.exact.g_at_min}, p);
    if (with_pt) {
        PtOptions po;
        po.points_per_wavelength = c.points_per_wavelength;
        row.pt = degenerate_pt_splitting(k, p, po);
        if (ctx.dump_wavefunctions) row.wavefunctions = pt_eigenfunctions(2 * k + 1, p, po);
    }
    return row;
}

inline std::vector<ResonanceRow> compute_resonance_rows(const CommandContext& ctx, bool with_pt) {
    const auto cache = open_cache(ctx.config);
    std::vector<std::function<ResonanceRow()>> jobs;
    for (int k : ctx.config.k_list)
        jobs.emplace_back([&ctx, k, with_pt, &cache] { return compute_resonance_row(ctx, k, with_pt, cache); });
    return run_ordered(jobs, ctx.threads);
}

inline void dump_wavefunctions(const CommandContext& ctx, const ResonanceRow& row) {
    if (!row.wavefunctions) return;
    const std::filesystem::path dir(ctx.config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto write = [&](const GridLevel& level, int n, const char* m) {
        const auto path = dir / ("wavefunction_q" + std::to_string(2 * row.k + 1) + "_n" + std::to_string(n) + "_m" +
                                 m + ".csv");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        write_grid_function_csv(out, level.function);
    };
    write(row.wavefunctions->lower, row.exact.diagnostics.n_low, "up");
    write(row.wavefunctions->upper, row.exact.diagnostics.n_high, "down");
}

/// Maps library exceptions onto exit codes.
template <typename F>
int guarded(const CommandContext& ctx, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        *ctx.log << "config error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const ParameterError& e) {
        *ctx.log << "parameter error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const ConfigurationError& e) {
        *ctx.log << "configuration error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const ResonanceError& e) {
        *ctx.log << "resonance error: " << e.what() << '\n';
        return exit_config_error;
    } catch (const Error& e) {
        *ctx.log << "error: " << e.what() << '\n';
        return exit_invariant_failure;
    }
}

} // namespace detail

/// Spectrum of H on a uniform g grid: rows `g,index,energy,parity`.
inline int cmd_spectrum_sweep(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        const RunConfig& c = ctx.config;
        c.validate();
        const ModelParams p = c.params.normalized();
        const FockSpinBasis basis(c.n_max);
        const auto cache = detail::open_cache(c);

        struct Point {
            double g;
            SpectrumDump spectrum;
            bool flagged;
        };
        std::vector<std::function<Point()>> jobs;
        for (int i = 0; i < c.g_steps; ++i) {
            const double g = c.g_min + (c.g_max - c.g_min) * i / (c.g_steps - 1);
            jobs.emplace_back([&, g] {
                const double u = coupling_for_g({g}, p);
                const std::string key = SpectrumCache::key(p.delta_e, u, c.n_max, 0);
                if (cache)
                    if (auto hit = cache->load(key)) return Point{g, std::move(*hit), false};
                const RealOperator h = build_hamiltonian(p.with_coupling(u), basis);
                const RealSpectrum s = diagonalize(h);
                const double tol = c.tolerances.eigensolve * std::max(1.0, h.max_abs());
                const bool flagged = !(max_eigen_residual(h, s) <= tol);
                if (cache && !flagged) cache->store(key, s.eigenvalues, s.parity_labels);
                return Point{g, {s.eigenvalues, s.parity_labels}, flagged};
            });
        }
        const auto points = detail::run_ordered(jobs, ctx.threads);

        CsvDocument csv(c, "sweep", "g,index,energy,parity");
        bool any_flagged = false;
        for (const auto& pt : points) {
            any_flagged |= pt.flagged;
            for (Eigen::Index i = 0; i < pt.spectrum.eigenvalues.size(); ++i)
                csv.row(pt.g, static_cast<int>(i), pt.flagged ? std::string("nan") : csv_double(pt.spectrum.eigenvalues[i]),
                        pt.spectrum.parity_labels[static_cast<std::size_t>(i)]);
        }
        const auto path = csv.write(c.output_dir, "spectrum_sweep.csv");
        *ctx.log << "wrote " << path.string() << '\n';
        return any_flagged ? exit_partial : exit_ok;
    });
}

/// Exact splitting vs the weak-coupling formula: `two_k_plus_one,g0,gap_exact,gap_shirley`.
inline int cmd_fig1(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        ctx.config.validate();
        const auto rows = detail::compute_resonance_rows(ctx, false);
        CsvDocument csv(ctx.config, "fig1", "two_k_plus_one,g0,gap_exact,gap_shirley");
        for (const auto& r : rows) csv.row(2 * r.k + 1, r.exact.g_at_min, r.exact.gap, r.shirley.gap);
        const auto path = csv.write(ctx.config.output_dir, "fig1.csv");
        *ctx.log << "wrote " << path.string() << '\n';
        return exit_ok;
    });
}

/// Exact splitting vs rotated-frame degenerate PT: `two_k_plus_one,g0,gap_exact,gap_pt`.
inline int cmd_fig2(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        ctx.config.validate();
        const auto rows = detail::compute_resonance_rows(ctx, true);
        CsvDocument csv(ctx.config, "fig2", "two_k_plus_one,g0,gap_exact,gap_pt");
        for (const auto& r : rows) {
            csv.row(2 * r.k + 1, r.exact.g_at_min, r.exact.gap, r.pt->gap);
            detail::dump_wavefunctions(ctx, r);
        }
        const auto path = csv.write(ctx.config.output_dir, "fig2.csv");
        *ctx.log << "wrote " << path.string() << '\n';
        return exit_ok;
    });
}

/// All three estimates per resonance:
/// `k,two_k_plus_one,g0,gap_exact,gap_shirley,gap_pt,n_mean,n_max,residual`.
inline int cmd_resonance(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        ctx.config.validate();
        const auto rows = detail::compute_resonance_rows(ctx, true);
        CsvDocument csv(ctx.config, "resonance", "k,two_k_plus_one,g0,gap_exact,gap_shirley,gap_pt,n_mean,n_max,residual");
        for (const auto& r : rows) {
            csv.row(r.k, 2 * r.k + 1, r.exact.g_at_min, r.exact.gap, r.shirley.gap, r.pt->gap,
                    r.exact.diagnostics.n_mean, r.exact.diagnostics.n_max, r.wkb.residual);
            detail::dump_wavefunctions(ctx, r);
        }
        const auto path = csv.write(ctx.config.output_dir, "resonance.csv");
        *ctx.log << "wrote " << path.string() << '\n';
        return exit_ok;
    });
}

/// Basis and grid refinement of both splitting estimates, plus the n_mean
/// dependence of the exact gap (n_mean and n_max doubled together).
inline int cmd_converge(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        const RunConfig& c = ctx.config;
        c.validate();
        const ModelParams p = c.resonance_params();
        const int n_refined = static_cast<int>(std::lround(1.5 * c.n_max));
        std::vector<std::function<std::vector<double>()>> jobs;
        for (int k : c.k_list)
            jobs.emplace_back([&, k] {
                ExactOptions eo;
                eo.n_max = c.n_max;
                eo.scan_points = c.scan_points;
                const double base = exact_splitting(k, p, eo).gap;
                eo.n_max = n_refined;
                const double refined = exact_splitting(k, p, eo).gap;
                eo.n_max = 2 * c.n_max;
                const double doubled_n = exact_splitting(k, p.with_n_ref(2.0 * p.n_ref), eo).gap;
                PtOptions po;
                po.points_per_wavelength = c.points_per_wavelength;
                const double pt = degenerate_pt_splitting(k, p, po).gap;
                po.points_per_wavelength = 2.0 * c.points_per_wavelength;
                const double pt_fine = degenerate_pt_splitting(k, p, po).gap;
                const auto rel = [](double a, double b) { return a == 0.0 && b == 0.0 ? 0.0 : std::abs(b - a) / std::abs(a); };
                return std::vector<double>{base, refined, rel(base, refined), doubled_n, rel(base, doubled_n),
                                           pt,   pt_fine, rel(pt, pt_fine)};
            });
        const auto rows = detail::run_ordered(jobs, ctx.threads);
        CsvDocument csv(c, "converge",
                        "two_k_plus_one,n_max,n_max_refined,gap_exact,gap_exact_refined,exact_relative_change,"
                        "gap_exact_double_n_mean,n_mean_relative_change,gap_pt,gap_pt_refined,pt_relative_change");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            csv.row(2 * c.k_list[i] + 1, c.n_max, n_refined, r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]);
        }
        const auto path = csv.write(c.output_dir, "converge.csv");
        *ctx.log << "wrote " << path.string() << '\n';
        return exit_ok;
    });
}

// ---------------------------------------------------------------------------
// verify

struct SuiteCheck {
    std::string suite;
    std::string name;
    double value{0};
    double tolerance{0};
    bool passed{false};
    std::string message;  // set when the check could not be evaluated
};

namespace detail {

inline SuiteCheck check_le(std::string suite, std::string name, double value, double tol) {
    return {std::move(suite), std::move(name), value, tol, value <= tol, {}};
}

/// Couplings at which the invariant suites run: the config's U and each resonance.
inline std::vector<double> verification_couplings(const RunConfig& c) {
    std::vector<double> out{c.params.normalized().coupling_u};
    const ModelParams p = c.resonance_params().normalized();
    for (int k : c.k_list) {
        const ResonancePair pair = resonance_pair(2 * k + 1, p.n_ref);
        out.push_back(find_resonance(k, p.with_n_ref(pair.n_mean())).coupling_u);
    }
    return out;
}

inline std::vector<SuiteCheck> truncation_suite(const RunConfig& c) {
    std::vector<SuiteCheck> out;
    const ModelParams p = c.resonance_params().normalized();
    for (int k : c.k_list) {
        const ResonancePair pair = resonance_pair(2 * k + 1, p.n_ref);
        const int needed = static_cast<int>(std::ceil((pair.n_high + 1) / 0.9));
        const std::string name = "pair fits basis (2k+1=" + std::to_string(2 * k + 1) + ")";
        if (c.n_max < needed) {
            SuiteCheck sc{"truncation", name, double(c.n_max), double(needed), false, {}};
            sc.message = "n_max=" + std::to_string(c.n_max) + " cannot hold Fock levels up to n=" +
                         std::to_string(pair.n_high) + "; increase n_max to at least " + std::to_string(needed);
            out.push_back(std::move(sc));
            continue;
        }
        const ModelParams pm = p.with_n_ref(pair.n_mean());
        const ModelParams at = pm.with_coupling(find_resonance(k, pm).coupling_u);
        const FockSpinBasis basis(c.n_max);
        const QuadratureCalculus calc(basis);
        const RotatedFrameStates frame(at, calc);
        const Eigen::MatrixXd rot = real_part(build_unitary(at, calc)).entries;
        const double pop = std::max(fock_population_above(basis, rot * frame.state(pair.n_low, Spin::up)),
                                    fock_population_above(basis, rot * frame.state(pair.n_high, Spin::down)));
        auto sc = check_le("truncation", "population above 0.9 n_max (2k+1=" + std::to_string(2 * k + 1) + ")", pop,
                           kTruncationPopulationLimit);
        if (!sc.passed) sc.message = "pair states reach the Fock cutoff; increase n_max";
        out.push_back(std::move(sc));
    }
    // lowest half of the spectrum at the configured coupling
    const FockSpinBasis basis(c.n_max);
    const RealSpectrum s = diagonalize(build_hamiltonian(c.params, basis));
    double worst = 0.0;
    for (int i = 0; i < s.size() / 2; ++i) worst = std::max(worst, fock_population_above(basis, s.eigenvectors.col(i)));
    auto sc = check_le("truncation", "population above 0.9 n_max (lowest half at coupling_u)", worst,
                       kTruncationPopulationLimit);
    if (!sc.passed) sc.message = "low-lying states reach the Fock cutoff; increase n_max";
    out.push_back(std::move(sc));
    return out;
}

inline std::vector<SuiteCheck> parity_suite(const RunConfig& c, const std::vector<double>& couplings) {
    std::vector<SuiteCheck> out;
    const ModelParams p = c.params.normalized();
    const FockSpinBasis basis(c.n_max);
    const RealOperator par = parity_operator(basis);
    for (double u : couplings) {
        const RealOperator h = build_hamiltonian(p.with_coupling(u), basis);
        const std::string at = " (U=" + csv_double(u) + ")";
        out.push_back(check_le("parity", "||[P,H]||_max" + at, (par * h - h * par).max_abs(), 1e-12));
        const Eigen::VectorXd plus = diagonalize(h).eigenvalues;
        const Eigen::VectorXd minus = diagonalize(detail::spin_boson_matrix(p, basis, -u)).eigenvalues;
        out.push_back(check_le("parity", "spectrum U -> -U" + at, (plus - minus).cwiseAbs().maxCoeff(), 1e-10));
    }
    return out;
}

inline std::vector<SuiteCheck> rotation_suite(const RunConfig& c, const std::vector<double>& couplings) {
    std::vector<SuiteCheck> out;
    const ModelParams p = c.params.normalized();
    const FockSpinBasis basis(c.n_max);
    for (double u : couplings) {
        const RotationReport r = verify_rotation(p.with_coupling(u), basis);
        const std::string at = " (U=" + csv_double(u) + ")";
        out.push_back(check_le("rotation", "unitarity" + at, r.unitarity, kUnitarityTolerance));
        out.push_back(check_le("rotation", "block vs exponential route" + at, r.route_agreement, 1e-9));
        out.push_back(check_le("rotation", "spectral invariance (interior 50%)" + at, r.spectral_invariance, 1e-7));
        out.push_back(check_le("rotation", "H' - (H0+V+W) on interior block" + at, r.decomposition, 1e-6));
        out.push_back(check_le("rotation", "V hermiticity" + at, r.v_hermiticity, 1e-10));
        out.push_back(check_le("rotation", "U^dag P U - P on interior block" + at, r.parity_preservation, 1e-9));
        out.push_back(check_le("rotation", "||W|| - (U/dE)^2" + at, r.w_norm - r.w_bound, 1e-12));
    }
    return out;
}

inline std::vector<SuiteCheck> wkb_grid_suite(const RunConfig& c, const std::vector<double>& couplings) {
    std::vector<SuiteCheck> out;
    const ModelParams p = c.resonance_params().normalized();
    const int n = std::max(1, static_cast<int>(std::lround(p.n_ref)));
    const ModelParams pn = p.with_n_ref(n);
    const auto grid = GridEigenproblem::for_levels(n + 8, c.points_per_wavelength);
    for (double u : couplings) {
        const DimensionlessCoupling g = derive_g(pn.with_coupling(u));
        const std::string at = " (g=" + csv_double(g.g) + ", n=" + std::to_string(n) + ")";
        const double wkb = wkb_dressed_energy(g, n, p.delta_e);
        const double direct = wkb_dressed_energy_untransformed(g, n, p.delta_e);
        out.push_back(check_le("wkb-grid", "transformed vs untransformed quadrature" + at,
                               std::abs(wkb - direct) / direct, c.tolerances.quadrature));
        const double grid_gap = grid_dressed_gap(pn, g, n, grid);
        out.push_back(check_le("wkb-grid", "|dE_wkb - dE_grid| / dE_grid" + at, std::abs(wkb - grid_gap) / grid_gap, 0.01));
    }
    return out;
}

inline std::vector<SuiteCheck> convergence_suite(const RunConfig& c, const std::vector<double>& couplings) {
    std::vector<SuiteCheck> out;
    const ModelParams p = c.resonance_params().normalized();
    const int n = std::max(1, static_cast<int>(std::lround(p.n_ref)));
    const double u = *std::max_element(couplings.begin(), couplings.end());
    const ModelParams at = p.with_coupling(u);
    const std::string label = " (U=" + csv_double(u) + ")";

    const auto levels = [&](const GridEigenproblem& grid, Spin m) {
        const auto lv = solve_effective_oscillator(at, m, n + 1, grid);
        Eigen::VectorXd e(n + 1);
        for (int i = 0; i <= n; ++i) e[i] = lv[i].energy;
        return e;
    };
    const auto base = GridEigenproblem::for_levels(n + 8, c.points_per_wavelength);
    const auto fine = GridEigenproblem::for_levels(n + 8, 2.0 * c.points_per_wavelength);
    const auto wide = GridEigenproblem::for_levels(n + 8, c.points_per_wavelength, 2.0);
    double dh = 0.0, dl = 0.0;
    for (Spin m : {Spin::up, Spin::down}) {
        const Eigen::VectorXd e0 = levels(base, m);
        dh = std::max(dh, (levels(fine, m) - e0).cwiseAbs().maxCoeff());
        dl = std::max(dl, (levels(wide, m) - e0).cwiseAbs().maxCoeff());
    }
    out.push_back(check_le("convergence", "grid step halved" + label, dh, 1e-7));
    out.push_back(check_le("convergence", "grid box doubled" + label, dl, 1e-9));

    const FockSpinBasis b1(c.n_max), b2(2 * c.n_max);
    const Eigen::VectorXd e1 = diagonalize(build_hamiltonian(at, b1)).eigenvalues;
    const Eigen::VectorXd e2 = diagonalize(build_hamiltonian(at, b2)).eigenvalues;
    const int half = static_cast<int>(e1.size()) / 2;
    out.push_back(check_le("convergence", "lowest 50% eigenvalues, n_max doubled" + label,
                           (e1.head(half) - e2.head(half)).cwiseAbs().maxCoeff(), 1e-8));
    return out;
}

} // namespace detail

namespace detail {
inline std::string short_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}
} // namespace detail

/// Runs the invariant suites and prints one line per check; exit 0 iff all pass.
inline int cmd_verify(const CommandContext& ctx) {
    return detail::guarded(ctx, [&] {
        const RunConfig& c = ctx.config;
        c.validate();
        std::ostream& os = *ctx.report;
        std::vector<SuiteCheck> checks = detail::truncation_suite(c);
        const bool truncation_ok = std::all_of(checks.begin(), checks.end(), [](const auto& s) { return s.passed; });

        const auto run = [&](const std::string& suite, auto&& body) {
            try {
                auto more = body();
                checks.insert(checks.end(), more.begin(), more.end());
            } catch (const Error& e) {
                checks.push_back({suite, "evaluation", 0, 0, false, e.what()});
            }
        };
        if (truncation_ok) {
            std::vector<double> couplings;
            run("setup", [&] {
                couplings = detail::verification_couplings(c);
                return std::vector<SuiteCheck>{};
            });
            if (!couplings.empty()) {
                run("parity", [&] { return detail::parity_suite(c, couplings); });
                run("rotation", [&] { return detail::rotation_suite(c, couplings); });
                run("wkb-grid", [&] { return detail::wkb_grid_suite(c, couplings); });
                run("convergence", [&] { return detail::convergence_suite(c, couplings); });
            }
        } else {
            os << "truncation suite failed; remaining suites skipped\n";
        }

        bool all = true;
        for (const auto& s : checks) {
            all &= s.passed;
            os << (s.passed ? "PASS " : "FAIL ") << s.suite << ": " << s.name;
            if (s.message.empty() || s.passed)
                os << " value=" << detail::short_double(s.value) << " tol=" << detail::short_double(s.tolerance);
            if (!s.message.empty() && !s.passed) os << " -- " << s.message;
            os << '\n';
        }
        os << (all ? "all suites passed" : "invariant failures detected") << '\n';
        return all ? exit_ok : exit_invariant_failure;
    });
}

} // namespace bsshift
