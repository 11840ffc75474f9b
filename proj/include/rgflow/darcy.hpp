#pragma once

#include "rgflow/field.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace rgflow {

/// Centred fourth-order finite-difference weights, before division by the
/// node spacing (first derivative) or its square (second derivative).
struct StencilCoeffs {
    static constexpr double a1 = 8.0 / 12.0;
    static constexpr double a2 = -1.0 / 12.0;
    static constexpr double b0 = -30.0 / 12.0;
    static constexpr double b1 = 16.0 / 12.0;
    static constexpr double b2 = -1.0 / 12.0;
};

/// Dirichlet values on the x = 0 and x = 1 edges.
struct PressureDrop {
    double left = 1.0;
    double right = 0.0;
};

inline constexpr double kDefaultRatioTol = 1.05;

/// Discretized Darcy operator. Unknowns are the nodes of columns 1..n-2 (all
/// rows), numbered row-major: unknown(i, j) = j*(n-2) + (i-1). The Dirichlet
/// columns are folded into rhs, the Neumann rows use mirrored ghost nodes.
struct LinearSystem {
    int n = 0;
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;

    int unknowns() const noexcept { return (n - 2) * n; }
    int unknown(int i, int j) const noexcept { return j * (n - 2) + (i - 1); }
};

LinearSystem assemble_system(const TensorField& field, PressureDrop drop = {});

/// Direct sparse LU solve of matrix * x = rhs. Throws SolverError when the
/// factorization fails.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs);

/// Expands unknowns plus Dirichlet columns into a full nodal pressure field.
PressureField expand_solution(int n, const Eigen::VectorXd& unknowns, PressureDrop drop = {});

struct SolveReport {
    PressureField phi;
    /// Flow rate through each column x_i.
    std::vector<double> flow_profile;
    /// Mean of flow_profile over columns 2..n-3.
    double f = 0.0;
    /// max/min of flow_profile; +inf when any column carries no positive flow.
    double validation_ratio = 0.0;
    /// ||A x - b|| / ||b||.
    double residual_norm = 0.0;
    double seconds = 0.0;
};

SolveReport solve(const TensorField& field, PressureDrop drop = {});

/// Fourth-order end-corrected trapezoid weights over the n nodes of [0, 1].
/// They sum to one and integrate cubics exactly.
std::vector<double> quadrature_weights(int n);

/// Per-column flow rate -sum_j w_j (a_xx dphi/dx + a_xy dphi/dy).
std::vector<double> flow_rate_profile(const TensorField& field, const PressureField& phi);

/// Mean over interior columns, skipping the two nearest each Dirichlet edge.
double interior_mean(std::span<const double> profile);

/// max/min over the whole profile.
double profile_ratio(std::span<const double> profile);

/// True iff report.validation_ratio <= ratio_tol. Requires ratio_tol > 1.
bool validate(const SolveReport& report, double ratio_tol = kDefaultRatioTol);

/// Percentage error (f_exact - f_model) / f_exact * 100. Negative values
/// mean the model overpredicts the flow.
double flow_error(double f_exact, double f_model);

} // namespace rgflow
