#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rgflow {

/// Square grid over the unit square. Only n is stored.
///
/// Two lengths derive from n: the cell size h = 1/n, and the node spacing
/// 1/(n-1) used by the stencils and the flow-rate quadrature, because the
/// first and last nodes sit on the domain boundary.
class GridShape {
public:
    /// Throws ShapeError unless n >= 8 and n is a power of two.
    explicit GridShape(int n);

    /// Unchecked construction for small tiles and periodic test grids.
    static GridShape unchecked(int n) noexcept;

    static bool is_valid_size(int n) noexcept;

    int n() const noexcept { return n_; }
    std::size_t cells() const noexcept { return static_cast<std::size_t>(n_) * n_; }
    double h() const noexcept { return 1.0 / n_; }
    double spacing() const noexcept { return 1.0 / (n_ - 1); }

    /// Row-major index, x (i) is the fast axis.
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * n_ + i;
    }

    bool operator==(const GridShape&) const = default;

private:
    struct Unchecked {};
    GridShape(int n, Unchecked) noexcept : n_(n) {}

    int n_;
};

/// Symmetric 2x2 permeability tensor of one cell.
struct Tensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const noexcept { return xx * yy - xy * xy; }
    bool positive_definite() const noexcept { return xx > 0.0 && yy > 0.0 && det() > 0.0; }
    /// Eigenvalues in ascending order.
    std::pair<double, double> eigenvalues() const noexcept;

    bool operator==(const Tensor2&) const = default;
};

/// Per-cell symmetric tensor permeability. a_yx is never stored; it equals
/// a_xy by construction. Immutable once built: every constructor validates
/// positivity and positive definiteness of every cell.
class TensorField {
public:
    /// Throws InvariantError naming the first offending cell.
    TensorField(GridShape shape, std::vector<double> axx, std::vector<double> axy,
                std::vector<double> ayy);

    static TensorField uniform(GridShape shape, Tensor2 value);

    const GridShape& shape() const noexcept { return shape_; }
    int n() const noexcept { return shape_.n(); }

    std::span<const double> axx() const noexcept { return axx_; }
    std::span<const double> axy() const noexcept { return axy_; }
    std::span<const double> ayy() const noexcept { return ayy_; }

    Tensor2 at(int i, int j) const noexcept {
        const auto k = shape_.index(i, j);
        return {axx_[k], axy_[k], ayy_[k]};
    }

    /// True when every a_xy entry is exactly zero.
    bool diagonal() const noexcept;

    /// Smallest and largest tensor eigenvalue over all cells.
    std::pair<double, double> eigenvalue_range() const noexcept;

    /// Mirror about y = 1/2 with a_xy -> -a_xy.
    TensorField mirrored_y() const;

    bool operator==(const TensorField& other) const noexcept;

private:
    void validate() const;

    GridShape shape_;
    std::vector<double> axx_;
    std::vector<double> axy_;
    std::vector<double> ayy_;
};

/// Nodal pressure on the same lattice as the permeability.
class PressureField {
public:
    PressureField(GridShape shape, std::vector<double> phi);

    const GridShape& shape() const noexcept { return shape_; }
    int n() const noexcept { return shape_.n(); }
    std::span<const double> phi() const noexcept { return phi_; }
    double at(int i, int j) const noexcept { return phi_[shape_.index(i, j)]; }

    bool operator==(const PressureField&) const = default;

private:
    GridShape shape_;
    std::vector<double> phi_;
};

} // namespace rgflow
