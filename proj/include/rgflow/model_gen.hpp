#pragma once

#include "rgflow/field.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rgflow {

enum class XyMode { zero, finite };

std::string to_string(XyMode mode);
XyMode xy_mode_from_string(const std::string& s);

inline constexpr double kWaterLevel = 1e-6;
inline constexpr double kPercolationThreshold = 1e-3;
inline constexpr int kMinFeatureWidth = 6;
inline constexpr int kMaxGenerationAttempts = 100;

struct Range {
    double min = 0.0;
    double max = 0.0;
};

/// Parameters of the random channel pieces. Lengths and widths are in cells,
/// angles in radians measured from the x-axis.
struct ChannelSpec {
    Range piece_len_range;
    /// Target length-to-width ratio. The width is floored at
    /// kMinFeatureWidth, so short pieces end up stubbier than requested.
    Range aspect_range{2.0, 8.0};
    Range incline_range{-1.0471975511965976, 1.0471975511965976};
    Range magnitude_range{0.5, 2.0};
    XyMode xy_mode = XyMode::zero;
    /// a_xy = rho * sqrt(a_xx * a_yy), rho drawn from this range.
    Range xy_fraction_range{-0.8, 0.8};
    /// Standard deviation, in cells, of the Gaussian that resolves piece
    /// edges after rasterization. 0 keeps the raw step edges.
    double edge_sigma = 2.0;

    /// Defaults for an n x n grid: piece length in [n/20, n/10], at least
    /// kMinFeatureWidth.
    static ChannelSpec defaults_for(int n);

    /// Throws ConfigError when a constraint is violated for grid size n.
    void validate(int n) const;
};

struct ModelParams {
    GridShape shape{64};
    ChannelSpec channel = ChannelSpec::defaults_for(64);
    std::uint64_t seed = 0;
};

/// One rasterized channel piece: an oriented rectangle whose axis runs from
/// (x0, y0) to (x1, y1), in cell-index coordinates.
struct ChannelPiece {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double width = 0.0;
    double angle = 0.0;
    Tensor2 value;

    /// True if cell centre (i, j) lies inside the rectangle.
    bool contains(double i, double j) const noexcept;
};

struct GeneratedModel {
    /// Field after edge resolution; this is what solvers see.
    TensorField field;
    /// Step-edged rasterization before edge resolution.
    TensorField sharp;
    std::vector<ChannelPiece> pieces;
    int attempts = 1;
};

/// Random tensor field with at least one channel percolating from column 0
/// to column n-1. Deterministic in params.seed.
GeneratedModel generate_model_detailed(const ModelParams& params);
TensorField generate_model(const ModelParams& params);

/// Separable Gaussian blur of every component with mirrored edges. The
/// kernel radius is 6 sigma so its tail falls below the water level. Cells
/// whose whole window holds one value keep that value bit-for-bit.
TensorField resolve_edges(const TensorField& field, double sigma);

/// True iff a 4-connected path of cells with a_xx > threshold joins
/// column 0 to column n-1.
bool percolation_check(const TensorField& field, double threshold = kPercolationThreshold);

} // namespace rgflow
