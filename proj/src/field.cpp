#include "rgflow/field.hpp"

#include "rgflow/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace rgflow {

GridShape::GridShape(int n) : n_(n) {
    if (!is_valid_size(n)) {
        std::ostringstream msg;
        msg << "grid size n=" << n << " is not a power of two >= 8";
        throw ShapeError(msg.str());
    }
}

GridShape GridShape::unchecked(int n) noexcept { return GridShape(n, Unchecked{}); }

bool GridShape::is_valid_size(int n) noexcept {
    return n >= 8 && std::has_single_bit(static_cast<unsigned>(n));
}

std::pair<double, double> Tensor2::eigenvalues() const noexcept {
    const double mean = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return {mean - r, mean + r};
}

TensorField::TensorField(GridShape shape, std::vector<double> axx, std::vector<double> axy,
                         std::vector<double> ayy)
    : shape_(shape), axx_(std::move(axx)), axy_(std::move(axy)), ayy_(std::move(ayy)) {
    validate();
}

TensorField TensorField::uniform(GridShape shape, Tensor2 value) {
    const auto cells = shape.cells();
    return TensorField(shape, std::vector<double>(cells, value.xx),
                       std::vector<double>(cells, value.xy), std::vector<double>(cells, value.yy));
}

void TensorField::validate() const {
    const auto cells = shape_.cells();
    if (axx_.size() != cells || axy_.size() != cells || ayy_.size() != cells) {
        std::ostringstream msg;
        msg << "component length mismatch: expected " << cells << " values per component";
        throw InvariantError(msg.str(), -1, -1);
    }
    // Visit every cell; report the first violation in scan order.
    for (int j = 0; j < shape_.n(); ++j) {
        for (int i = 0; i < shape_.n(); ++i) {
            const Tensor2 t = at(i, j);
            const char* problem = nullptr;
            if (!std::isfinite(t.xx) || !std::isfinite(t.xy) || !std::isfinite(t.yy))
                problem = "non-finite component";
            else if (!(t.xx > 0.0))
                problem = "a_xx <= 0";
            else if (!(t.yy > 0.0))
                problem = "a_yy <= 0";
            else if (!(t.det() > 0.0))
                problem = "tensor not positive definite (a_xx*a_yy - a_xy^2 <= 0)";
            if (problem) {
                std::ostringstream msg;
                msg.precision(17);
                msg << problem << " at cell (i=" << i << ", j=" << j << "): a_xx=" << t.xx
                    << " a_xy=" << t.xy << " a_yy=" << t.yy;
                throw InvariantError(msg.str(), i, j);
            }
        }
    }
}

bool TensorField::diagonal() const noexcept {
    return std::all_of(axy_.begin(), axy_.end(), [](double v) { return v == 0.0; });
}

std::pair<double, double> TensorField::eigenvalue_range() const noexcept {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = 0; k < axx_.size(); ++k) {
        const auto [e0, e1] = Tensor2{axx_[k], axy_[k], ayy_[k]}.eigenvalues();
        lo = std::min(lo, e0);
        hi = std::max(hi, e1);
    }
    return {lo, hi};
}

TensorField TensorField::mirrored_y() const {
    const int n = shape_.n();
    std::vector<double> xx(axx_.size()), xy(axy_.size()), yy(ayy_.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto src = shape_.index(i, n - 1 - j);
            const auto dst = shape_.index(i, j);
            xx[dst] = axx_[src];
            xy[dst] = -axy_[src];
            yy[dst] = ayy_[src];
        }
    }
    return TensorField(shape_, std::move(xx), std::move(xy), std::move(yy));
}

bool TensorField::operator==(const TensorField& other) const noexcept {
    // Bitwise comparison so that -0.0 and 0.0 differ and NaNs are never equal.
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        return a.size() == b.size() &&
               std::equal(a.begin(), a.end(), b.begin(), [](double x, double y) {
                   return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
               });
    };
    return shape_ == other.shape_ && same(axx_, other.axx_) && same(axy_, other.axy_) &&
           same(ayy_, other.ayy_);
}

PressureField::PressureField(GridShape shape, std::vector<double> phi)
    : shape_(shape), phi_(std::move(phi)) {
    if (phi_.size() != shape_.cells())
        throw InvariantError("pressure field length does not match grid", -1, -1);
}

} // namespace rgflow
