#include "rgflow/error.hpp"
#include "rgflow/model_gen.hpp"

#include "../support.hpp"
#include "doctest.h"

#include <cmath>

using namespace rgflow;

namespace {

ModelParams params_for(int n, std::uint64_t seed, XyMode mode = XyMode::zero) {
    ModelParams p{GridShape(n), ChannelSpec::defaults_for(n), seed};
    p.channel.xy_mode = mode;
    return p;
}

bool in_any_piece(const GeneratedModel& m, int i, int j) {
    for (const auto& piece : m.pieces)
        if (piece.contains(i, j)) return true;
    return false;
}

} // namespace

TEST_CASE("generated models percolate and are deterministic") {
    for (std::uint64_t seed : {1, 2, 3, 17, 99}) {
        CAPTURE(seed);
        const auto p = params_for(128, seed);
        const auto a = generate_model_detailed(p);
        CHECK(percolation_check(a.sharp));
        CHECK(percolation_check(a.field));
        CHECK(generate_model(p) == a.field);
        CHECK(a.field.diagonal());
    }
    CHECK_FALSE(generate_model(params_for(128, 1)) == generate_model(params_for(128, 2)));
}

TEST_CASE("sharp rasterization: channel cells carry piece values, the rest is at the water level") {
    const auto m = generate_model_detailed(params_for(128, 5));
    int channel = 0;
    for (int j = 0; j < 128; ++j)
        for (int i = 0; i < 128; ++i) {
            const auto t = m.sharp.at(i, j);
            if (in_any_piece(m, i, j)) {
                ++channel;
                CHECK(t.xx >= 0.5);
                CHECK(t.xx <= 2.0);
            } else {
                REQUIRE(t.xx == kWaterLevel);
                REQUIRE(t.yy == kWaterLevel);
                REQUIRE(t.xy == 0.0);
            }
        }
    CHECK(channel > 0);
}

TEST_CASE("piece geometry honours the feature constraints") {
    for (int n : {64, 128, 512}) {
        CAPTURE(n);
        const auto m = generate_model_detailed(params_for(n, 11));
        REQUIRE_FALSE(m.pieces.empty());
        for (const auto& piece : m.pieces) {
            CHECK(piece.width >= kMinFeatureWidth);
            const double len = std::hypot(piece.x1 - piece.x0, piece.y1 - piece.y0);
            CHECK(len <= n / 10.0 + 1e-9);
            CHECK(piece.x1 > piece.x0);
        }
        CHECK(m.pieces.front().x0 <= 0.0);
        CHECK(m.pieces.back().x1 >= n - 1);
    }
}

TEST_CASE("finite xy mode gives positive-definite tensors with nonzero xy") {
    const auto zero = generate_model_detailed(params_for(128, 21, XyMode::zero));
    const auto finite = generate_model_detailed(params_for(128, 21, XyMode::finite));
    CHECK_FALSE(finite.field.diagonal());
    // Same seed, same geometry and diagonal magnitudes.
    CHECK(zero.pieces.size() == finite.pieces.size());
    for (std::size_t k = 0; k < zero.pieces.size(); ++k) {
        CHECK(zero.pieces[k].x1 == finite.pieces[k].x1);
        CHECK(zero.pieces[k].value.xx == finite.pieces[k].value.xx);
    }
    for (const auto& piece : finite.pieces) {
        const double rho = piece.value.xy / std::sqrt(piece.value.xx * piece.value.yy);
        CHECK(std::abs(rho) < 0.8);
    }
}

TEST_CASE("edge resolution") {
    const auto m = generate_model_detailed(params_for(128, 8));
    SUBCASE("sigma 0 is the identity") { CHECK(resolve_edges(m.sharp, 0.0) == m.sharp); }
    SUBCASE("uniform fields are fixed bit for bit") {
        const auto u = TensorField::uniform(GridShape(64), {0.3, 0.1, 0.7});
        CHECK(resolve_edges(u, 2.0) == u);
    }
    SUBCASE("far-field cells keep the water level and channel mass is conserved in the interior") {
        int far = 0;
        for (int j = 0; j < 128; ++j)
            for (int i = 0; i < 128; ++i) {
                bool near = false;
                for (int dj = -12; dj <= 12 && !near; ++dj)
                    for (int di = -12; di <= 12 && !near; ++di) {
                        const int a = i + di, b = j + dj;
                        if (a >= 0 && a < 128 && b >= 0 && b < 128 && m.sharp.at(a, b).xx != kWaterLevel)
                            near = true;
                    }
                if (!near) {
                    ++far;
                    REQUIRE(m.field.at(i, j).xx == kWaterLevel);
                }
            }
        CHECK(far > 0);
    }
    SUBCASE("values stay inside the sharp range") {
        for (int j = 0; j < 128; ++j)
            for (int i = 0; i < 128; ++i) {
                REQUIRE(m.field.at(i, j).xx >= kWaterLevel * (1 - 1e-12));
                REQUIRE(m.field.at(i, j).xx <= 2.0);
            }
    }
}

TEST_CASE("percolation check") {
    const GridShape g(8);
    std::vector<double> xx(g.cells(), kWaterLevel), xy(g.cells(), 0.0), yy(g.cells(), 1.0);
    for (int i = 0; i < 8; ++i) xx[g.index(i, 3)] = 1.0;
    CHECK(percolation_check(TensorField(g, xx, xy, yy)));
    xx[g.index(4, 3)] = kWaterLevel;
    CHECK_FALSE(percolation_check(TensorField(g, xx, xy, yy)));
    // A detour through the next row reconnects it; diagonal steps do not count.
    xx[g.index(3, 4)] = xx[g.index(4, 4)] = xx[g.index(5, 4)] = 1.0;
    CHECK(percolation_check(TensorField(g, xx, xy, yy)));
    xx[g.index(4, 4)] = kWaterLevel;
    xx[g.index(3, 4)] = xx[g.index(5, 4)] = kWaterLevel;
    xx[g.index(4, 2)] = 1.0;
    CHECK_FALSE(percolation_check(TensorField(g, xx, xy, yy)));
}

TEST_CASE("channel spec validation") {
    auto spec = ChannelSpec::defaults_for(128);
    CHECK_NOTHROW(spec.validate(128));
    CHECK(spec.piece_len_range.min >= kMinFeatureWidth);
    CHECK(spec.piece_len_range.max == 12.8);
    CHECK_THROWS_AS(spec.validate(32), ConfigError);
    auto bad = spec;
    bad.piece_len_range.max = 20.0;
    CHECK_THROWS_AS(bad.validate(128), ConfigError);
    bad = spec;
    bad.incline_range = {-2.0, 0.0};
    CHECK_THROWS_AS(bad.validate(128), ConfigError);
    bad = spec;
    bad.magnitude_range = {0.0, 1.0};
    CHECK_THROWS_AS(bad.validate(128), ConfigError);
    bad = spec;
    bad.edge_sigma = 9.0;
    CHECK_THROWS_AS(bad.validate(128), ConfigError);
    bad = spec;
    bad.aspect_range = {3.0, 2.0};
    CHECK_THROWS_AS(bad.validate(128), ConfigError);
    CHECK_THROWS_AS(xy_mode_from_string("both"), ConfigError);
    CHECK(xy_mode_from_string(to_string(XyMode::finite)) == XyMode::finite);
}
