// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "bsshift/resonance.hpp"
#include "bsshift/rotation.hpp"

using namespace bsshift;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool passed{true};
    std::string detail;

    void require(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!ok) detail += (detail.empty() ? "" : "; ") + what;
    }
};

int failures = 0;

template <typename F>
void criterion(int id, const char* title, double budget_s, F&& body) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double t = seconds_since(t0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "runtime %.1f s exceeds %.0f s", t, budget_s);
    out.require(t < budget_s, buf);
    if (!out.passed) ++failures;
    std::printf("%s criterion %d: %s (%.1f s)%s%s\n", out.passed ? "PASS" : "FAIL", id, title, t,
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const ModelParams kFig{11.0, 1.0, 0.0, 60.0};
const std::vector<int> kOrders{6, 7, 8, 9, 10};  // 2k+1 = 13 .. 21

} // namespace

int main() {
    std::printf("acceptance run, dE = 11, n_mean = 60, n_max = 200\n");

    criterion(1, "uncoupled spectrum is the analytic ladder (n_max=120)", 5.0, [](Outcome& o) {
        const FockSpinBasis basis(120);
        const RealSpectrum s = diagonalize(build_hamiltonian({11.0, 1.0, 0.0, 60.0}, basis));
        std::vector<double> ladder;
        for (int n = 0; n <= 120; ++n) {
            ladder.push_back(n + 5.5);
            ladder.push_back(n - 5.5);
        }
        std::sort(ladder.begin(), ladder.end());
        o.require(s.size() == 242, "eigenvalue count " + std::to_string(s.size()));
        double worst = 0;
        for (int i = 0; i < s.size(); ++i) worst = std::max(worst, std::abs(s.eigenvalues[i] - ladder[i]) / std::abs(ladder[i]));
        o.require(worst <= 1e-12, fmt("max relative error %.3e", worst));
        o.detail += fmt("max relative error %.3e", worst);
    });

    criterion(2, "rotation preserves the spectrum and splits into H0+V+W (g=0.5, n_max=200)", 120.0, [](Outcome& o) {
        const ModelParams p = kFig.with_coupling(coupling_for_g({0.5}, kFig));
        const RotationReport r = verify_rotation(p, FockSpinBasis(200));
        o.require(r.spectral_invariance <= 1e-7, fmt("spectral invariance %.3e", r.spectral_invariance));
        o.require(r.decomposition <= 1e-6, fmt("decomposition residual %.3e", r.decomposition));
        if (o.passed) o.detail = fmt("spectral %.2e, decomposition %.2e", r.spectral_invariance, r.decomposition);
    });

    criterion(3, "WKB dressed splitting vs grid eigenvalues (n=100)", 60.0, [](Outcome& o) {
        const double e0 = wkb_dressed_energy({0.0}, 100, 11.0);
        o.require(std::abs(e0 - 11.0) <= 1e-10 * 11.0, fmt("dE_WKB(0) = %.15g", e0));
        const ModelParams p = kFig.with_n_ref(100);
        const auto grid = GridEigenproblem::for_levels(108);
        double worst = 0;
        for (double g : {0.1, 0.3, 0.6, 1.0}) {
            const double wkb = wkb_dressed_energy({g}, 100, 11.0);
            const double gap = grid_dressed_gap(p, {g}, 100, grid);
            const double rel = std::abs(wkb - gap) / gap;
            worst = std::max(worst, rel);
            o.require(rel <= 0.01, fmt("g=%.1f relative difference %.3e", g, rel));
        }
        if (o.passed) o.detail = fmt("max relative difference %.3e", worst);
    });

    criterion(4, "even separations cross, odd resonances anticross and converge", 600.0, [](Outcome& o) {
        std::string info;
        for (int q : {12, 14}) {
            const SplittingResult s = exact_pair_splitting(q, kFig);
            o.require(s.kind == CrossingKind::crossing, "q=" + std::to_string(q) + " not classified as crossing");
            o.require(s.gap < 1e-6, fmt("q=%.0f gap %.3e", q, s.gap));
            info += fmt("q=%.0f gap %.1e; ", q, s.gap);
        }
        for (int k : {6, 7}) {
            ExactOptions a, b;
            a.n_max = 200;
            b.n_max = 300;
            const double g1 = exact_splitting(k, kFig, a).gap, g2 = exact_splitting(k, kFig, b).gap;
            const double rel = std::abs(g1 - g2) / g1;
            o.require(g1 > 0 && g2 > 0, fmt("q=%.0f non-positive gap", 2 * k + 1));
            o.require(rel <= 0.01, fmt("q=%.0f gap changes by %.3e under n_max 200->300", 2 * k + 1, rel));
            info += fmt("q=%.0f gap %.4e (change %.1e); ", 2 * k + 1, g1, rel);
        }
        if (o.passed) o.detail = info;
    });

    std::vector<SplittingResult> exact;
    double exact_seconds = 0;
    {
        const auto t0 = Clock::now();
        for (int k : kOrders) exact.push_back(exact_splitting(k, kFig));
        exact_seconds = seconds_since(t0);
    }

    criterion(5, "weak-coupling formula vs exact splitting", 900.0 - exact_seconds, [&](Outcome& o) {
        std::vector<double> rel;
        for (const auto& s : exact) {
            const double sh = shirley_splitting(s.k, {s.g_at_min}, kFig).gap;
            rel.push_back(std::abs(sh - s.gap) / s.gap);
            std::printf("  2k+1=%d g0=%.5f exact=%.5e shirley=%.5e rel=%.4f\n", s.quanta, s.g_at_min, s.gap, sh,
                        rel.back());
            if (s.gap < 0.05)
                o.require(rel.back() <= 0.10, fmt("2k+1=%.0f (gap %.3e < 0.05) differs by %.1f%%", s.quanta, s.gap,
                                                  100 * rel.back()));
        }
        // rows are in increasing g0
        for (std::size_t i = 1; i < exact.size(); ++i) {
            o.require(exact[i].g_at_min > exact[i - 1].g_at_min, "g0 not increasing with order");
            o.require(rel[i] > rel[i - 1], fmt("discrepancy not monotone between 2k+1=%.0f and %.0f",
                                               exact[i - 1].quanta, exact[i].quanta));
        }
    });

    criterion(6, "rotated-frame perturbation theory vs exact splitting", 1200.0 - exact_seconds, [&](Outcome& o) {
        for (const auto& s : exact) {
            const double pt = degenerate_pt_splitting(s.k, kFig).gap;
            const double sh = shirley_splitting(s.k, {s.g_at_min}, kFig).gap;
            const double rp = std::abs(pt - s.gap) / s.gap, rs = std::abs(sh - s.gap) / s.gap;
            std::printf("  2k+1=%d exact=%.5e pt=%.5e rel_pt=%.4f rel_shirley=%.4f\n", s.quanta, s.gap, pt, rp, rs);
            o.require(rp <= 0.15, fmt("2k+1=%.0f PT differs by %.1f%%", s.quanta, 100 * rp));
            o.require(rp < rs, fmt("2k+1=%.0f PT (%.1f%%) not closer than weak-coupling formula (%.1f%%)", s.quanta,
                                   100 * rp, 100 * rs));
        }
    });

    criterion(7, "first-order <W> on the resonant states below (U/dE)^2", 60.0, [](Outcome& o) {
        double worst = 0;
        for (int k : kOrders) {
            const ResonancePair pair = resonance_pair(2 * k + 1, kFig.n_ref);
            const double u = find_resonance(k, kFig.with_n_ref(pair.n_mean())).coupling_u;
            const double bound = (u / 11.0) * (u / 11.0);
            const auto [a, b] = w_expectation(k, kFig);
            worst = std::max({worst, a / bound, b / bound});
            o.require(a <= bound && b <= bound, fmt("2k+1=%.0f <W> = %.3e, %.3e > %.3e", 2 * k + 1, a, b, bound));
        }
        if (o.passed) o.detail = fmt("max <W>/(U/dE)^2 = %.3f", worst);
    });

    criterion(8, "fig2 is byte-identical across clean runs", 1e9, [](Outcome& o) {
        const fs::path root = fs::temp_directory_path() / ("bsshift_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(root);
        std::vector<std::string> outputs;
        // same config both times (output_dir is echoed into the CSV), clean directory and cache each run
        const fs::path dir = root / "out";
        for (const char* run : {"first", "second"}) {
            fs::remove_all(dir);
            const std::string cmd = std::string(BSSHIFT_CLI_PATH) + " --out " + dir.string() + " --threads 5 fig2 2>/dev/null";
            const int status = std::system(cmd.c_str());
            o.require(status == 0, std::string(run) + " fig2 run exited with " + std::to_string(status));
            outputs.push_back(slurp(dir / "fig2.csv"));
        }
        o.require(!outputs[0].empty(), "fig2.csv missing");
        o.require(outputs[0] == outputs[1], "fig2.csv differs between runs");
        fs::remove_all(root);
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
