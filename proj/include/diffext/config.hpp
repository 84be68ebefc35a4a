#pragma once

namespace diffext {

// Residual budgets shared by the library, the verify harness and the tests.
// The CLI may override the algebraic and composition budgets.
struct Tolerances {
    double algebraic = 1e-8;          // purely algebraic identities
    double oracle = 1e-10;            // agreement with an independent oracle
    double finite_difference = 1e-4;  // anything computed by finite differences
    double composition = 1e-7;        // identities that go through diffeo composition
    double exact = 1e-12;             // "exact" claims, relative to the operand scale
};

// Domain thresholds used by the certificates.
struct Thresholds {
    double positivity = 1e-6;     // |a(x)| floor before taking ln|a|
    double invertibility = 1e-4;  // |det m(x)| floor for pointwise matrix inversion
    double regularity = 1e-3;     // |det F^J(x)| floor for a represented diffeomorphism
    double spill_ratio = 1e-10;   // truncated energy fraction that raises the loss flag
    int newton_max_steps = 100;
    int flow_steps = 64;
};

inline constexpr Thresholds default_thresholds{};

}  // namespace diffext
