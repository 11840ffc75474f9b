#include "rgflow/darcy.hpp"

#include "rgflow/error.hpp"
#include "stencil.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace rgflow {

using detail::fold_row;

namespace {

/// d/dx and d/dy of one coefficient component at (i, j). Along x the stencil
/// matches the pressure stencil of the row; along y it turns one-sided at the
/// walls because the coefficients have no ghost values.
struct Gradient {
    double dx = 0.0;
    double dy = 0.0;
};

Gradient coefficient_gradient(std::span<const double> c, const GridShape& shape, int i, int j) {
    const int n = shape.n();
    const double inv = 1.0 / shape.spacing();
    Gradient g;
    for (const auto& t : detail::first_derivative_x(i, n))
        g.dx += t.weight * c[shape.index(i + t.offset, j)];
    for (const auto& t : detail::first_derivative_one_sided(j, n))
        g.dy += t.weight * c[shape.index(i, j + t.offset)];
    g.dx *= inv;
    g.dy *= inv;
    return g;
}

} // namespace

LinearSystem assemble_system(const TensorField& field, PressureDrop drop) {
    const auto& shape = field.shape();
    const int n = shape.n();
    const double spacing = shape.spacing();
    // Rows are scaled by spacing^2 so entries are O(a).
    const double first_scale = spacing;
    const double second_scale = 1.0;

    LinearSystem sys;
    sys.n = n;
    const int m = sys.unknowns();
    sys.rhs = Eigen::VectorXd::Zero(m);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m) * 25);

    const auto dy1 = detail::first_derivative_y();
    const auto dy2 = detail::second_derivative_y();

    for (int j = 0; j < n; ++j) {
        for (int i = 1; i <= n - 2; ++i) {
            const int row = sys.unknown(i, j);
            const Tensor2 a = field.at(i, j);
            const auto gxx = coefficient_gradient(field.axx(), shape, i, j);
            const auto gxy = coefficient_gradient(field.axy(), shape, i, j);
            const auto gyy = coefficient_gradient(field.ayy(), shape, i, j);
            // (d_x a_xx + d_y a_yx) d_x phi + (d_x a_xy + d_y a_yy) d_y phi
            const double drift_x = gxx.dx + gxy.dy;
            const double drift_y = gxy.dx + gyy.dy;

            auto add = [&](int ii, int jj, double w) {
                if (w == 0.0) return;
                jj = fold_row(jj, n);
                if (ii == 0)
                    sys.rhs[row] -= w * drop.left;
                else if (ii == n - 1)
                    sys.rhs[row] -= w * drop.right;
                else
                    triplets.emplace_back(row, sys.unknown(ii, jj), w);
            };

            const auto dx1 = detail::first_derivative_x(i, n);
            const auto dx2 = detail::second_derivative_x(i, n);
            for (const auto& t : dx1) add(i + t.offset, j, drift_x * t.weight * first_scale);
            for (const auto& t : dy1) add(i, j + t.offset, drift_y * t.weight * first_scale);
            for (const auto& t : dx2) add(i + t.offset, j, a.xx * t.weight * second_scale);
            for (const auto& t : dy2) add(i, j + t.offset, a.yy * t.weight * second_scale);
            if (a.xy != 0.0) {
                for (const auto& tx : dx1)
                    for (const auto& ty : dy1)
                        add(i + tx.offset, j + ty.offset, 2.0 * a.xy * tx.weight * ty.weight);
            }
        }
    }

    sys.matrix.resize(m, m);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();
    return sys;
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(matrix);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw SolverError("sparse LU solve produced a non-finite result");

    // A couple of refinement steps recover digits lost to high contrast.
    const double bnorm = std::max(rhs.norm(), std::numeric_limits<double>::min());
    for (int step = 0; step < 3; ++step) {
        const Eigen::VectorXd r = rhs - matrix * x;
        if (r.norm() <= 1e-14 * bnorm) break;
        x += lu.solve(r);
    }
    return x;
}

PressureField expand_solution(int n, const Eigen::VectorXd& unknowns, PressureDrop drop) {
    const auto shape = GridShape::unchecked(n);
    std::vector<double> phi(shape.cells());
    for (int j = 0; j < n; ++j) {
        phi[shape.index(0, j)] = drop.left;
        phi[shape.index(n - 1, j)] = drop.right;
        for (int i = 1; i <= n - 2; ++i) phi[shape.index(i, j)] = unknowns[j * (n - 2) + (i - 1)];
    }
    return PressureField(GridShape(n), std::move(phi));
}

SolveReport solve(const TensorField& field, PressureDrop drop) {
    const auto start = std::chrono::steady_clock::now();
    const auto sys = assemble_system(field, drop);

    Eigen::VectorXd x;
    try {
        x = solve_linear(sys.matrix, sys.rhs);
    } catch (const SolverError& e) {
        const auto [lo, hi] = field.eigenvalue_range();
        std::ostringstream msg;
        msg << e.what() << " (n=" << field.n() << ", tensor eigenvalues in [" << lo << ", " << hi
            << "])";
        throw SolverError(msg.str());
    }

    const double bnorm = sys.rhs.norm();
    const double residual = (sys.matrix * x - sys.rhs).norm() / (bnorm > 0.0 ? bnorm : 1.0);

    SolveReport report{expand_solution(field.n(), x, drop), {}, 0.0, 0.0, residual, 0.0};
    report.flow_profile = flow_rate_profile(field, report.phi);
    report.f = interior_mean(report.flow_profile);
    report.validation_ratio = profile_ratio(report.flow_profile);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<double> quadrature_weights(int n) {
    if (n < 6) throw ConfigError("quadrature needs at least 6 nodes");
    const double h = 1.0 / (n - 1);
    std::vector<double> w(n, h);
    constexpr double end[] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    for (int k = 0; k < 3; ++k) w[k] = w[n - 1 - k] = end[k] * h;
    return w;
}

std::vector<double> flow_rate_profile(const TensorField& field, const PressureField& phi) {
    const auto& shape = field.shape();
    if (!(phi.shape() == shape)) throw ConfigError("pressure and permeability grids differ");
    const int n = shape.n();
    const double inv = 1.0 / shape.spacing();
    const auto dy1 = detail::first_derivative_y();

    const auto weight = quadrature_weights(n);
    std::vector<double> profile(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto dx1 = detail::first_derivative_one_sided(i, n);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double px = 0.0;
            for (const auto& t : dx1) px += t.weight * phi.at(i + t.offset, j);
            double py = 0.0;
            for (const auto& t : dy1) py += t.weight * phi.at(i, fold_row(j + t.offset, n));
            const Tensor2 a = field.at(i, j);
            sum += weight[j] * (a.xx * px + a.xy * py) * inv;
        }
        profile[i] = -sum;
    }
    return profile;
}

double interior_mean(std::span<const double> profile) {
    const auto n = profile.size();
    if (n < 5) throw ConfigError("flow profile too short for an interior mean");
    return std::accumulate(profile.begin() + 2, profile.end() - 2, 0.0) / static_cast<double>(n - 4);
}

double profile_ratio(std::span<const double> profile) {
    const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
    if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
    return *hi / *lo;
}

bool validate(const SolveReport& report, double ratio_tol) {
    if (!(ratio_tol > 1.0)) throw ConfigError("ratio_tol must exceed 1");
    return report.validation_ratio <= ratio_tol;
}

double flow_error(double f_exact, double f_model) {
    if (f_exact == 0.0) throw ConfigError("flow_error: exact flow rate is zero");
    return (f_exact - f_model) / f_exact * 100.0;
}

} // namespace rgflow
