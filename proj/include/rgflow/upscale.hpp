#pragma once

#include "rgflow/field.hpp"

#include <string>
#include <vector>

namespace rgflow {

enum class Method { mg, kk, mean };

/// "MG", "KK" or "Mean".
std::string to_string(Method method);
/// Case-insensitive inverse of to_string. Throws ConfigError.
Method method_from_string(const std::string& s);

/// Tensor components of a 2x2 block. First subscript is the row (y), second
/// the column (x): a11 sits at (x0, y0), a12 at (x1, y0), a21 at (x0, y1).
struct BlockTensors {
    double a11, a12, a21, a22; // xx
    double b11, b12, b21, b22; // yy
    double c11 = 0, c12 = 0, c21 = 0, c22 = 0; // xy

    /// The block whose lower-left cell is (i, j).
    static BlockTensors from_field(const TensorField& field, int i, int j);
    /// x <-> y relabeling: a and b swap roles and the off-diagonal cells swap.
    BlockTensors transposed() const;
};

/// Closed-form MG reduction of a 2x2 block with zero xy components.
/// Throws ConfigError on non-positive entries or nonzero xy.
Tensor2 mg_decimate_2x2(const BlockTensors& block);

struct DecimateDiagnostics {
    /// |a_xy - a_yx| / max|a| of the reduced tensor before symmetrization.
    double asymmetry = 0.0;
};

/// MG reduction of one periodic m x m tile by eliminating every nonzero
/// wavenumber of the tile with a Schur complement. `tile` must be m x m with
/// m >= 2; its cells need not satisfy GridShape size rules. Throws
/// SolverError if the eliminated block is numerically singular.
Tensor2 mg_decimate_general(std::span<const double> axx, std::span<const double> axy,
                            std::span<const double> ayy, int m,
                            DecimateDiagnostics* diag = nullptr);
Tensor2 mg_decimate_general(const TensorField& tile, DecimateDiagnostics* diag = nullptr);

/// KK reduction; ignores xy and returns a_xy = 0. With as_printed the second
/// factor under the root is inverted and the b11 + a21 term of the yy
/// formula is kept literally, reproducing the original transcription.
Tensor2 kk_decimate_2x2(const BlockTensors& block, bool as_printed = false);

/// Component-wise arithmetic mean of an m x m tile.
Tensor2 mean_decimate(std::span<const double> axx, std::span<const double> axy,
                      std::span<const double> ayy);

struct UpscalePlan {
    Method method = Method::mg;
    int n_block = 2;
    int n_target = 32;
    bool kk_as_printed = false;

    /// Number of sweeps taking n to n_target. Throws ConfigError unless
    /// n_target * n_block^K == n for some K >= 1, and n_block == 2 for KK.
    int sweeps(int n) const;
};

struct UpscaleResult {
    /// Output of each sweep, finest first; back() is the n_target field.
    std::vector<TensorField> levels;
    std::vector<double> sweep_seconds;
    /// Largest pre-symmetrization asymmetry seen by the general MG path.
    double max_asymmetry = 0.0;

    const TensorField& final_field() const { return levels.back(); }
};

/// One sweep mapping an n x n field to (n / n_block) x (n / n_block).
/// Throws InvariantError if a reduced tensor is not positive definite.
TensorField decimate_once(const TensorField& field, Method method, int n_block,
                          bool kk_as_printed = false, double* max_asymmetry = nullptr);

UpscaleResult run_plan(const TensorField& field, const UpscalePlan& plan);

/// Predicted operation count: n^2 n_block^p sum_{k<K} n_block^{-2k}, with
/// p = 4 for MG and p = 2 for KK and Mean.
double cost_model(int n, int n_block, int n_target, Method method);

} // namespace rgflow
