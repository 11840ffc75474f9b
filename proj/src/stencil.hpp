#pragma once

// Finite-difference stencils shared by the solver and the flow-rate
// evaluation. Weights are unscaled; callers divide by the spacing.

#include "rgflow/darcy.hpp"

#include <array>

namespace rgflow::detail {

struct Tap {
    int offset;
    double weight;
};

struct Stencil {
    std::array<Tap, 5> taps{};
    int size = 0;

    void add(int offset, double weight) { taps[size++] = {offset, weight}; }
    auto begin() const { return taps.begin(); }
    auto end() const { return taps.begin() + size; }
};

/// First derivative at idx with no ghost values available: centred
/// fourth order in the interior, biased/one-sided fourth order within two
/// nodes of either end.
inline Stencil first_derivative_one_sided(int idx, int n) {
    Stencil s;
    if (idx >= 2 && idx <= n - 3) {
        s.add(-2, -StencilCoeffs::a2);
        s.add(-1, -StencilCoeffs::a1);
        s.add(1, StencilCoeffs::a1);
        s.add(2, StencilCoeffs::a2);
    } else if (idx == 0) {
        for (int k = 0; k < 5; ++k) s.add(k, std::array{-25.0, 48.0, -36.0, 16.0, -3.0}[k] / 12.0);
    } else if (idx == 1) {
        for (int k = 0; k < 5; ++k) s.add(k - 1, std::array{-3.0, -10.0, 18.0, -6.0, 1.0}[k] / 12.0);
    } else if (idx == n - 2) {
        for (int k = 0; k < 5; ++k) s.add(1 - k, std::array{3.0, 10.0, -18.0, 6.0, -1.0}[k] / 12.0);
    } else {
        for (int k = 0; k < 5; ++k) s.add(-k, std::array{25.0, -48.0, 36.0, -16.0, 3.0}[k] / 12.0);
    }
    return s;
}

/// First derivative of phi along x at column i: fourth order, dropping to
/// second order next to the Dirichlet columns. Not valid at i = 0, n-1.
inline Stencil first_derivative_x(int i, int n) {
    Stencil s;
    if (i >= 2 && i <= n - 3) {
        s.add(-2, -StencilCoeffs::a2);
        s.add(-1, -StencilCoeffs::a1);
        s.add(1, StencilCoeffs::a1);
        s.add(2, StencilCoeffs::a2);
    } else {
        s.add(-1, -0.5);
        s.add(1, 0.5);
    }
    return s;
}

inline Stencil second_derivative_x(int i, int n) {
    Stencil s;
    if (i >= 2 && i <= n - 3) {
        s.add(-2, StencilCoeffs::b2);
        s.add(-1, StencilCoeffs::b1);
        s.add(0, StencilCoeffs::b0);
        s.add(1, StencilCoeffs::b1);
        s.add(2, StencilCoeffs::b2);
    } else {
        s.add(-1, 1.0);
        s.add(0, -2.0);
        s.add(1, 1.0);
    }
    return s;
}

/// Centred fourth-order first derivative; out-of-range rows are resolved
/// by fold_row (ghost nodes mirror the Neumann edges).
inline Stencil first_derivative_y() {
    Stencil s;
    s.add(-2, -StencilCoeffs::a2);
    s.add(-1, -StencilCoeffs::a1);
    s.add(1, StencilCoeffs::a1);
    s.add(2, StencilCoeffs::a2);
    return s;
}

inline Stencil second_derivative_y() {
    Stencil s;
    s.add(-2, StencilCoeffs::b2);
    s.add(-1, StencilCoeffs::b1);
    s.add(0, StencilCoeffs::b0);
    s.add(1, StencilCoeffs::b1);
    s.add(2, StencilCoeffs::b2);
    return s;
}

/// Ghost-node mirror for zero-Neumann rows: phi(-k) = phi(k),
/// phi(n-1+k) = phi(n-1-k).
inline int fold_row(int j, int n) {
    if (j < 0) return -j;
    if (j > n - 1) return 2 * (n - 1) - j;
    return j;
}

} // namespace rgflow::detail
