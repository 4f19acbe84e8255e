// Prints the three splitting estimates for the 13-quantum resonance at dE = 11.

#include <cstdio>

#include "bsshift/resonance.hpp"

int main() {
    using namespace bsshift;
    const ModelParams p{11.0, 1.0, 0.0, 60.0};
    const int k = 6;
    const SplittingResult exact = exact_splitting(k, p);
    const SplittingResult shirley = shirley_splitting(k, {exact.g_at_min}, p);
    const SplittingResult pt = degenerate_pt_splitting(k, p);
    std::printf("2k+1 = %d  g0 = %.6f\n", 2 * k + 1, exact.g_at_min);
    std::printf("exact   %.6e\nshirley %.6e\npt      %.6e\n", exact.gap, shirley.gap, pt.gap);
}
