#include "rgflow/model_gen.hpp"

#include "rgflow/error.hpp"
#include "rgflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>

namespace rgflow {

std::string to_string(XyMode mode) { return mode == XyMode::zero ? "zero" : "finite"; }

XyMode xy_mode_from_string(const std::string& s) {
    if (s == "zero") return XyMode::zero;
    if (s == "finite") return XyMode::finite;
    throw ConfigError("xy_mode must be \"zero\" or \"finite\", got \"" + s + "\"");
}

ChannelSpec ChannelSpec::defaults_for(int n) {
    ChannelSpec spec;
    const double max_len = n / 10.0;
    spec.piece_len_range = {std::min(max_len, std::max<double>(kMinFeatureWidth, n / 20.0)), max_len};
    return spec;
}

void ChannelSpec::validate(int n) const {
    auto fail = [](const std::string& what) { throw ConfigError("channel spec: " + what); };
    auto ordered = [](Range r) { return r.min <= r.max; };

    if (n < 64) fail("grid size must be at least 64 so a 6-cell feature fits under the n/10 cap");
    if (!ordered(piece_len_range) || !ordered(aspect_range) || !ordered(incline_range) ||
        !ordered(magnitude_range) || !ordered(xy_fraction_range))
        fail("every range needs min <= max");
    if (piece_len_range.min <= 0.0) fail("piece length must be positive");
    if (piece_len_range.max > n / 10.0) fail("piece length exceeds n/10");
    if (aspect_range.min <= 0.0) fail("aspect ratio must be positive");
    constexpr double half_pi = std::numbers::pi / 2;
    if (incline_range.min <= -half_pi || incline_range.max >= half_pi)
        fail("inclination must lie strictly inside (-pi/2, pi/2) so pieces advance in x");
    if (magnitude_range.min <= kWaterLevel || magnitude_range.max > 2.0)
        fail("magnitude range must lie in (1e-6, 2]");
    if (xy_fraction_range.min <= -0.9 || xy_fraction_range.max >= 0.9)
        fail("xy fraction range must lie inside (-0.9, 0.9)");
    if (!(edge_sigma >= 0.0) || edge_sigma > n / 16.0) fail("edge_sigma must lie in [0, n/16]");
}

bool ChannelPiece::contains(double i, double j) const noexcept {
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double len = std::hypot(dx, dy);
    const double ux = dx / len;
    const double uy = dy / len;
    const double px = i - x0;
    const double py = j - y0;
    const double along = px * ux + py * uy;
    const double across = -px * uy + py * ux;
    constexpr double eps = 1e-9;
    return along >= -eps && along <= len + eps && std::abs(across) <= 0.5 * width + eps;
}

namespace {

std::vector<ChannelPiece> build_channel(int n, const ChannelSpec& spec, SplitMix64& rng) {
    std::vector<ChannelPiece> pieces;
    double x = 0.0;
    double y = rng.uniform(0.25 * (n - 1), 0.75 * (n - 1));

    while (x < n - 1) {
        const double len = rng.uniform(spec.piece_len_range.min, spec.piece_len_range.max);
        const double aspect = rng.uniform(spec.aspect_range.min, spec.aspect_range.max);
        const double width = std::max<double>(kMinFeatureWidth, len / aspect);
        double angle = rng.uniform(spec.incline_range.min, spec.incline_range.max);
        const double axx = rng.uniform(spec.magnitude_range.min, spec.magnitude_range.max);
        const double ayy = rng.uniform(spec.magnitude_range.min, spec.magnitude_range.max);
        // Drawn in both modes so zero and finite surveys share geometry per seed.
        const double rho = rng.uniform(spec.xy_fraction_range.min, spec.xy_fraction_range.max);

        // Each piece reaches back over its predecessor's end so consecutive
        // pieces always share cells.
        const double overlap = std::min(0.5 * width, 0.5 * len);
        const double advance = len - overlap;
        const double lo = 0.5 * width;
        const double hi = (n - 1) - 0.5 * width;
        auto end_y = [&](double a) { return y + advance * std::sin(a); };
        if (end_y(angle) < lo || end_y(angle) > hi) angle = -angle;
        if (end_y(angle) < lo || end_y(angle) > hi) angle = 0.0;

        const double ux = std::cos(angle);
        const double uy = std::sin(angle);
        ChannelPiece piece;
        piece.x0 = x - overlap * ux;
        piece.y0 = y - overlap * uy;
        piece.x1 = x + advance * ux;
        piece.y1 = y + advance * uy;
        piece.width = width;
        piece.angle = angle;
        piece.value = {axx, spec.xy_mode == XyMode::finite ? rho * std::sqrt(axx * ayy) : 0.0, ayy};
        pieces.push_back(piece);

        x = piece.x1;
        y = piece.y1;
    }
    return pieces;
}

void rasterize(const ChannelPiece& piece, int n, std::vector<double>& xx, std::vector<double>& xy,
               std::vector<double>& yy) {
    const double r = 0.5 * piece.width;
    const int i0 = std::max(0, static_cast<int>(std::floor(std::min(piece.x0, piece.x1) - r)));
    const int i1 = std::min(n - 1, static_cast<int>(std::ceil(std::max(piece.x0, piece.x1) + r)));
    const int j0 = std::max(0, static_cast<int>(std::floor(std::min(piece.y0, piece.y1) - r)));
    const int j1 = std::min(n - 1, static_cast<int>(std::ceil(std::max(piece.y0, piece.y1) + r)));
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            if (!piece.contains(i, j)) continue;
            const auto k = static_cast<std::size_t>(j) * n + i;
            xx[k] = piece.value.xx;
            xy[k] = piece.value.xy;
            yy[k] = piece.value.yy;
        }
    }
}

std::vector<double> blur_axis(const std::vector<double>& in, int n, std::span<const double> kernel,
                              bool along_x) {
    const int radius = static_cast<int>(kernel.size() / 2);
    auto mirror = [n](int k) {
        while (k < 0 || k > n - 1) k = k < 0 ? -k : 2 * (n - 1) - k;
        return k;
    };
    std::vector<double> out(in.size());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto at = [&](int d) {
                return along_x ? in[static_cast<std::size_t>(j) * n + mirror(i + d)]
                               : in[static_cast<std::size_t>(mirror(j + d)) * n + i];
            };
            const double first = at(-radius);
            bool constant = true;
            double sum = 0.0;
            for (int d = -radius; d <= radius; ++d) {
                const double v = at(d);
                constant = constant && v == first;
                sum += kernel[d + radius] * v;
            }
            out[static_cast<std::size_t>(j) * n + i] = constant ? first : sum;
        }
    }
    return out;
}

} // namespace

TensorField resolve_edges(const TensorField& field, double sigma) {
    if (sigma == 0.0) return field;
    const int n = field.n();
    const int radius = static_cast<int>(std::ceil(6.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int d = -radius; d <= radius; ++d)
        total += kernel[d + radius] = std::exp(-0.5 * d * d / (sigma * sigma));
    for (auto& w : kernel) w /= total;

    auto blur = [&](std::span<const double> c) {
        const std::vector<double> raw(c.begin(), c.end());
        return blur_axis(blur_axis(raw, n, kernel, true), n, kernel, false);
    };
    return TensorField(field.shape(), blur(field.axx()), blur(field.axy()), blur(field.ayy()));
}

GeneratedModel generate_model_detailed(const ModelParams& params) {
    const int n = params.shape.n();
    params.channel.validate(n);

    const SplitMix64 root(params.seed);
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        auto rng = root.split(static_cast<std::uint64_t>(attempt));
        auto pieces = build_channel(n, params.channel, rng);

        std::vector<double> xx(params.shape.cells(), kWaterLevel);
        std::vector<double> xy(params.shape.cells(), 0.0);
        std::vector<double> yy(params.shape.cells(), kWaterLevel);
        for (const auto& piece : pieces) rasterize(piece, n, xx, xy, yy);

        TensorField sharp(params.shape, std::move(xx), std::move(xy), std::move(yy));
        if (!percolation_check(sharp, kPercolationThreshold)) continue;
        auto field = resolve_edges(sharp, params.channel.edge_sigma);
        if (percolation_check(field, kPercolationThreshold))
            return GeneratedModel{std::move(field), std::move(sharp), std::move(pieces), attempt + 1};
    }
    std::ostringstream msg;
    msg << "no percolating channel after " << kMaxGenerationAttempts << " attempts (seed "
        << params.seed << ")";
    throw GenerationError(msg.str(), params.seed, kMaxGenerationAttempts);
}

TensorField generate_model(const ModelParams& params) {
    return generate_model_detailed(params).field;
}

bool percolation_check(const TensorField& field, double threshold) {
    const int n = field.n();
    const auto xx = field.axx();
    std::vector<char> seen(field.shape().cells(), 0);
    std::queue<std::pair<int, int>> frontier;
    for (int j = 0; j < n; ++j) {
        const auto k = field.shape().index(0, j);
        if (xx[k] > threshold) {
            seen[k] = 1;
            frontier.emplace(0, j);
        }
    }
    constexpr int di[] = {1, -1, 0, 0};
    constexpr int dj[] = {0, 0, 1, -1};
    while (!frontier.empty()) {
        const auto [i, j] = frontier.front();
        frontier.pop();
        if (i == n - 1) return true;
        for (int d = 0; d < 4; ++d) {
            const int a = i + di[d];
            const int b = j + dj[d];
            if (a < 0 || a >= n || b < 0 || b >= n) continue;
            const auto k = field.shape().index(a, b);
            if (seen[k] || !(xx[k] > threshold)) continue;
            seen[k] = 1;
            frontier.emplace(a, b);
        }
    }
    return false;
}

} // namespace rgflow
