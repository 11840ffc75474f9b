#pragma once

#include "rgflow/field.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace rgflow {

/// Integer wavenumber (m_x, m_y); the physical wavevector is 2 pi m.
using Mode = std::array<int, 2>;

/// Largest grid accepted by build_spectral (dense n^2 x n^2 storage).
inline constexpr int kMaxSpectralGrid = 32;

/// Dense Fourier-space operator M(k, k') = k . a_hat(k - k') . k' of a
/// periodic field on the unit torus. Modes run over m in [-n/2, n/2) per
/// axis, ordered by (m_y, m_x) ascending. The k = 0 mode is omitted: its
/// row and column vanish identically and the mean of phi is fixed to zero.
struct SpectralOperator {
    int n = 0;
    std::vector<Mode> modes;
    Eigen::MatrixXcd matrix;

    /// Position of mode m in `modes`, or -1.
    int find(Mode m) const;
};

/// Operator restricted to a set of retained modes.
struct ReducedOperator {
    std::vector<Mode> modes;
    Eigen::MatrixXcd matrix;
};

/// True when max(|m_x|, |m_y|) <= kc.
bool is_low_mode(Mode m, int kc);

/// Throws ConfigError when n > kMaxSpectralGrid.
SpectralOperator build_spectral(const TensorField& field);

/// Schur complement a_<< - a_<> a_>>^-1 a_>< onto the low modes with cutoff
/// kc. Throws SolverError carrying the smallest singular value of a_>> when
/// it cannot be factorized.
ReducedOperator reduce_operator(const SpectralOperator& op, int kc);
/// Further reduction of an already reduced operator to a smaller cutoff.
ReducedOperator reduce_operator(const ReducedOperator& op, int kc);

struct ExactnessReport {
    /// max |phi_full(k) - phi_reduced(k)| over the low modes.
    double max_deviation = 0.0;
    /// max_deviation / max |phi_full(k)| over the low modes.
    double relative_deviation = 0.0;
    /// Norm of the source outside the low modes; zero when the premise holds.
    double source_high_norm = 0.0;
    /// 2-norm condition number of the eliminated block a_>>.
    double high_block_condition = 0.0;
};

/// Solves M phi = s on all modes and S phi_< = s_< on the reduced operator
/// and compares them on the low modes. `source` is indexed like op.modes.
ExactnessReport verify_low_mode_exactness(const TensorField& field, int kc,
                                          const Eigen::VectorXcd& source);

/// Source vector with unit amplitude at mode m and its conjugate -m.
Eigen::VectorXcd unit_source(const SpectralOperator& op, Mode m);

/// Max entry of |A - B| over max |B|, for equally sized matrices.
double relative_difference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

} // namespace rgflow
