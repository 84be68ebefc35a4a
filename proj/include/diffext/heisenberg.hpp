#pragma once

#include "diffext/gauge.hpp"

#include <map>

namespace diffext {

/// exp(alpha c) exp(sum_{j<=0} a_j H_j) exp(sum_{j>0} a_j H_j), with finitely many nonzero a_j.
///
/// Templated on the scalar so the group law can be checked in exact rational arithmetic.
template <class T>
struct BasicHeisenbergElement {
    T central{};
    T zero_mode{};
    /// a_j for j != 0; absent keys are zero.
    std::map<int, T> modes;

    T mode(int j) const {
        if (j == 0) return zero_mode;
        const auto it = modes.find(j);
        return it == modes.end() ? T{} : it->second;
    }

    /// Drops stored zeros so that equality is componentwise.
    BasicHeisenbergElement& normalize() {
        std::erase_if(modes, [](const auto& kv) { return kv.second == T{}; });
        return *this;
    }

    friend bool operator==(BasicHeisenbergElement a, BasicHeisenbergElement b) {
        a.normalize();
        b.normalize();
        return a.central == b.central && a.zero_mode == b.zero_mode && a.modes == b.modes;
    }
};

using HeisenbergElement = BasicHeisenbergElement<double>;

/// sum_{j>0} j a_j b_{-j}, the central term of the group law.
template <class T>
T kappa(const BasicHeisenbergElement<T>& a, const BasicHeisenbergElement<T>& b) {
    T sum{};
    for (const auto& [j, aj] : a.modes)
        if (j > 0) sum += T(j) * aj * b.mode(-j);
    return sum;
}

template <class T>
BasicHeisenbergElement<T> h_multiply(const BasicHeisenbergElement<T>& a, const BasicHeisenbergElement<T>& b) {
    BasicHeisenbergElement<T> out;
    out.central = a.central + b.central + kappa(a, b);
    out.zero_mode = a.zero_mode + b.zero_mode;
    out.modes = a.modes;
    for (const auto& [j, bj] : b.modes) out.modes[j] += bj;
    return out.normalize();
}

/// (-alpha + sum_{j>0} j a_j a_{-j}, -a): the unique two-sided inverse under h_multiply.
template <class T>
BasicHeisenbergElement<T> h_inverse(const BasicHeisenbergElement<T>& a) {
    BasicHeisenbergElement<T> out;
    out.central = -a.central + kappa(a, a);
    out.zero_mode = -a.zero_mode;
    for (const auto& [j, aj] : a.modes) out.modes[j] = -aj;
    return out.normalize();
}

/// pi sum_{j in Z} j a_j b_{-j}.
double fourier_cocycle(const ModeMap& a, const ModeMap& b);

/// Element (f, alpha) of the analytic extension of Map(S^1, R*) with the circle cocycle.
struct AnalyticElement {
    LoopPos loop;
    double alpha = 0.0;
};

/// (f, alpha)(g, beta) = (fg, alpha + beta + C(f, g)).
AnalyticElement analytic_multiply(const AnalyticElement& a, const AnalyticElement& b);

/// Modes of ln|f| in the cos/sin convention, central part alpha / 2pi + 1/2 sum_{j>0} j a_j a_{-j}.
HeisenbergElement phi_iso(const LoopPos& f, double alpha, double cutoff = 0.0);

/// Max over the central part and every mode of |a - b|.
double distance(const HeisenbergElement& a, const HeisenbergElement& b);

}  // namespace diffext
