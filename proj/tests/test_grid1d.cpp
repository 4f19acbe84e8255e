#include <sstream>

#include <gtest/gtest.h>

#include "bsshift/grid1d.hpp"
#include "oracles.hpp"

using namespace bsshift;

namespace {

ModelParams at_g(double g, double n_ref = 60.0) {
    const ModelParams p{11.0, 1.0, 0.0, n_ref};
    return p.with_coupling(coupling_for_g({g}, p));
}

} // namespace

TEST(GridEigenproblem, BoxHoldsTurningPoints) {
    for (int n : {0, 5, 60, 130}) {
        const auto g = GridEigenproblem::for_levels(n);
        EXPECT_GE(g.half_width, 1.5 * std::sqrt(2.0 * n + 1.0));
        EXPECT_NEAR(g.y(0), -g.half_width, 1e-12);
        EXPECT_NEAR(g.y(g.points - 1), g.half_width, 1e-9);
    }
    EXPECT_THROW((void)GridEigenproblem::for_levels(10, 2.0), ConfigurationError);
}

TEST(Oscillator, HarmonicLimit) {
    const ModelParams p{11.0, 1.0, 0.0, 60.0};
    const auto grid = GridEigenproblem::for_levels(30);
    const auto up = solve_effective_oscillator(p, Spin::up, 31, grid);
    const auto down = solve_effective_oscillator(p, Spin::down, 31, grid);
    for (int n = 0; n <= 30; ++n) {
        EXPECT_NEAR(up[n].energy, n + 5.5, 1e-7);
        EXPECT_NEAR(down[n].energy, n - 5.5, 1e-7);
    }
}

TEST(Oscillator, HermiteFunctionsAtZeroCoupling) {
    const auto grid = GridEigenproblem::for_levels(20);
    const auto lv = solve_effective_oscillator({11.0, 1.0, 0.0, 60.0}, Spin::up, 21, grid);
    for (int n : {0, 1, 7, 20}) {
        double dot = 0.0;
        for (int i = 0; i < grid.points; ++i) dot += lv[n].function.values[i] * oracle::hermite_function(n, grid.y(i));
        EXPECT_NEAR(std::abs(dot * grid.step), 1.0, 1e-8) << n;
    }
}

TEST(Oscillator, ParityNodesNormAndDecay) {
    const auto grid = GridEigenproblem::for_levels(68);
    const ModelParams p = at_g(0.6);
    for (Spin m : {Spin::up, Spin::down}) {
        const auto lv = solve_effective_oscillator(p, m, 61, grid);
        for (int n = 0; n <= 60; ++n) {
            const auto& f = lv[n].function;
            EXPECT_LE(f.parity_residual(n % 2 ? -1 : 1), 1e-7) << n;
            EXPECT_EQ(f.node_count(), n);
            EXPECT_NEAR(f.norm(), 1.0, 1e-8);
            EXPECT_LE(f.edge_amplitude(), 1e-6);
        }
        EXPECT_LE(std::abs(lv[10].function.inner(lv[13].function)), 1e-8);
    }
}

TEST(Oscillator, GridTooSmallIsAConfigurationError) {
    EXPECT_THROW((void)solve_effective_oscillator({}, Spin::up, 50, GridEigenproblem::for_levels(10)),
                 ConfigurationError);
}

TEST(Oscillator, ConvergesUnderRefinement) {
    const ModelParams p = at_g(0.8);
    const auto base = GridEigenproblem::for_levels(68);
    const auto fine = GridEigenproblem::for_levels(68, 2.0 * kDefaultPointsPerWavelength);
    const auto wide = GridEigenproblem::for_levels(68, kDefaultPointsPerWavelength, 2.0);
    for (Spin m : {Spin::up, Spin::down}) {
        const auto a = solve_effective_oscillator(p, m, 61, base);
        const auto b = solve_effective_oscillator(p, m, 61, fine);
        const auto c = solve_effective_oscillator(p, m, 61, wide);
        for (int n = 0; n <= 60; ++n) {
            EXPECT_LT(std::abs(a[n].energy - b[n].energy), 1e-7);
            EXPECT_LT(std::abs(a[n].energy - c[n].energy), 1e-9);
        }
    }
}

TEST(Wkb, ZeroCouplingIsBareSplitting) {
    for (double n : {1.0, 60.0, 100.0}) EXPECT_NEAR(wkb_dressed_energy({0.0}, n, 11.0), 11.0, 1e-10 * 11.0);
}

TEST(Wkb, Monotone) {
    const double e0 = wkb_dressed_energy({0.0}, 100, 11.0);
    const double e1 = wkb_dressed_energy({0.25}, 100, 11.0);
    const double e2 = wkb_dressed_energy({0.5}, 100, 11.0);
    EXPECT_GT(e2, e1);
    EXPECT_GT(e1, e0);
}

TEST(Wkb, AgreesWithEllipticIntegral) {
    for (double g : {0.05, 0.3, 0.6, 1.0, 3.0, 5.0})
        for (double n : {20.0, 60.0, 100.0})
            EXPECT_NEAR(wkb_dressed_energy({g}, n, 11.0) / oracle::dressed_energy_elliptic(g, n, 11.0), 1.0, 1e-12);
}

TEST(Wkb, TransformedAndUntransformedQuadratureAgree) {
    for (double g : {0.0, 0.1, 0.3, 0.6, 1.0}) {
        const double t = wkb_dressed_energy({g}, 100, 11.0);
        const double u = wkb_dressed_energy_untransformed({g}, 100, 11.0);
        EXPECT_LE(std::abs(t - u) / t, 1e-8) << g;
    }
}

TEST(Wkb, MatchesGridLevelGap) {
    const auto grid = GridEigenproblem::for_levels(68);
    const ModelParams p{11.0, 1.0, 0.0, 60.0};
    for (double g : {0.1, 0.4, 0.8}) {
        const double wkb = wkb_dressed_energy({g}, 60, 11.0);
        const double gap = grid_dressed_gap(p, {g}, 60, grid);
        EXPECT_LE(std::abs(wkb - gap) / gap, 0.01) << g;
    }
}

TEST(DressedLevels, Structure) {
    const ModelParams p{11.0, 1.0, 0.0, 60.0};
    EXPECT_NEAR(dressed_level_energy({7, Spin::up}, {0.0}, p), 7.0 + 5.5, 1e-12);
    EXPECT_NEAR(dressed_level_energy({7, Spin::down}, {0.0}, p), 7.0 - 5.5, 1e-12);
    const double gap = wkb_dressed_energy({0.4}, 60, 11.0);
    for (int n : {0, 13, 60})
        EXPECT_NEAR(dressed_level_energy({n, Spin::up}, {0.4}, p) - dressed_level_energy({n, Spin::down}, {0.4}, p), gap,
                    1e-12);
    // degenerate pair exactly when the dressed gap is an odd number of quanta
    const double lo = dressed_level_energy({50, Spin::up}, {0.0}, p);
    const double hi = dressed_level_energy({61, Spin::down}, {0.0}, p);
    EXPECT_NEAR(lo, hi, 1e-12);
}

TEST(EigenfunctionPair, HarmonicLimitOrthogonalAndNodeCounts) {
    const auto grid = GridEigenproblem::for_levels(40);
    const auto [a, b] = rotated_eigenfunction_pair({11.0, 1.0, 0.0, 60.0}, {0.0}, {20, Spin::up}, {33, Spin::down}, grid);
    EXPECT_LE(std::abs(a.function.inner(b.function)), 1e-8);
    EXPECT_EQ(a.function.node_count(), 20);
    EXPECT_EQ(b.function.node_count(), 33);
}

TEST(EigenfunctionPair, DecayAtModerateCoupling) {
    const auto grid = GridEigenproblem::for_levels(71);
    const auto [a, b] = rotated_eigenfunction_pair({11.0, 1.0, 0.0, 60.0}, {0.6}, {60, Spin::up}, {63, Spin::down}, grid);
    EXPECT_LE(a.function.edge_amplitude(), 1e-6);
    EXPECT_LE(b.function.edge_amplitude(), 1e-6);
    EXPECT_THROW((void)rotated_eigenfunction_pair({}, {0.6}, {60, Spin::up}, {63, Spin::up}, grid), ContractError);
}

TEST(VMatrixElement, ZeroCouplingAndParitySelection) {
    const auto grid = GridEigenproblem::for_levels(40);
    const ModelParams p0{11.0, 1.0, 0.0, 30.0};
    const auto [a, b] = rotated_eigenfunction_pair(p0, {0.0}, {20, Spin::up}, {33, Spin::down}, grid);
    EXPECT_EQ(v_matrix_element_grid(p0, a.function, b.function), 0.0);
    const ModelParams p = at_g(0.4, 30.0);
    const auto [c, d] = rotated_eigenfunction_pair(p, {0.4}, {20, Spin::up}, {32, Spin::down}, grid);
    EXPECT_LT(std::abs(v_matrix_element_grid(p, c.function, d.function)), 1e-10);
    const auto [e, f] = rotated_eigenfunction_pair(p, {0.4}, {20, Spin::up}, {33, Spin::down}, grid);
    EXPECT_GT(std::abs(v_matrix_element_grid(p, e.function, f.function)), 1e-8);
}

TEST(GridFunctionCsv, TwoColumns) {
    const auto grid = GridEigenproblem::for_levels(2);
    const auto lv = solve_effective_oscillator({}, Spin::up, 1, grid);
    std::ostringstream os;
    write_grid_function_csv(os, lv[0].function);
    const std::string s = os.str();
    EXPECT_EQ(s.rfind("y,u\n", 0), 0u);
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), grid.points + 1);
}
