#include "diffext/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace diffext {

double fourier_cocycle(const ModeMap& a, const ModeMap& b) {
    double sum = 0.0;
    for (const auto& [j, aj] : a)
        if (const auto it = b.find(-j); it != b.end()) sum += j * aj * it->second;
    return std::numbers::pi * sum;
}

AnalyticElement analytic_multiply(const AnalyticElement& a, const AnalyticElement& b) {
    return {loop_multiply(a.loop, b.loop), a.alpha + b.alpha + heisenberg_cocycle_circle(a.loop, b.loop)};
}

HeisenbergElement phi_iso(const LoopPos& f, double alpha, double cutoff) {
    const ModeMap m = to_cos_sin(f.logval(), cutoff);
    HeisenbergElement out;
    for (const auto& [j, aj] : m) {
        if (j == 0)
            out.zero_mode = aj;
        else
            out.modes[j] = aj;
    }
    out.central = alpha / (2.0 * std::numbers::pi) + 0.5 * kappa(out, out);
    return out;
}

double distance(const HeisenbergElement& a, const HeisenbergElement& b) {
    double m = std::max(std::abs(a.central - b.central), std::abs(a.zero_mode - b.zero_mode));
    std::set<int> keys;
    for (const auto& kv : a.modes) keys.insert(kv.first);
    for (const auto& kv : b.modes) keys.insert(kv.first);
    for (int j : keys) m = std::max(m, std::abs(a.mode(j) - b.mode(j)));
    return m;
}

}  // namespace diffext
