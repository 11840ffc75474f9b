#pragma once

#include "rgflow/field.hpp"
#include "rgflow/rng.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rgtest {

using rgflow::GridShape;
using rgflow::TensorField;

/// Node coordinate of index k on an n-point closed unit interval.
inline double coord(int k, int n) { return static_cast<double>(k) / (n - 1); }

/// Field sampled from a tensor-valued function of (x, y) at the nodes.
inline TensorField sample(int n, const std::function<rgflow::Tensor2(double, double)>& fn) {
    const auto shape = GridShape::is_valid_size(n) ? GridShape(n) : GridShape::unchecked(n);
    std::vector<double> xx(shape.cells()), xy(shape.cells()), yy(shape.cells());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const auto t = fn(coord(i, n), coord(j, n));
            const auto k = shape.index(i, j);
            xx[k] = t.xx;
            xy[k] = t.xy;
            yy[k] = t.yy;
        }
    return TensorField(shape, std::move(xx), std::move(xy), std::move(yy));
}

/// Random positive-definite field: log-uniform diagonals in [lo, hi] and
/// a_xy = rho sqrt(a_xx a_yy) with |rho| <= rho_max.
inline TensorField random_field(int n, std::uint64_t seed, double lo = 0.1, double hi = 10.0,
                                double rho_max = 0.0) {
    rgflow::SplitMix64 rng(seed);
    const auto shape = GridShape::is_valid_size(n) ? GridShape(n) : GridShape::unchecked(n);
    std::vector<double> xx(shape.cells()), xy(shape.cells()), yy(shape.cells());
    auto draw = [&] { return std::exp(rng.uniform(std::log(lo), std::log(hi))); };
    for (std::size_t k = 0; k < shape.cells(); ++k) {
        xx[k] = draw();
        yy[k] = draw();
        xy[k] = rng.uniform(-rho_max, rho_max) * std::sqrt(xx[k] * yy[k]);
    }
    return TensorField(shape, std::move(xx), std::move(xy), std::move(yy));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("rgflow_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace rgtest
