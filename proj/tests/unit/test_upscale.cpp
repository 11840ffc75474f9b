#include "rgflow/error.hpp"
#include "rgflow/rng.hpp"
#include "rgflow/upscale.hpp"

#include "../support.hpp"
#include "doctest.h"

#include <cmath>

using namespace rgflow;

namespace {

BlockTensors random_block(SplitMix64& rng, double lo = 1e-3, double hi = 2.0) {
    auto draw = [&] { return std::exp(rng.uniform(std::log(lo), std::log(hi))); };
    return {draw(), draw(), draw(), draw(), draw(), draw(), draw(), draw()};
}

/// Frobenius distance between two symmetric tensors over the norm of b.
double tensor_distance(Tensor2 a, Tensor2 b) {
    const double d = std::sqrt(std::pow(a.xx - b.xx, 2) + 2 * std::pow(a.xy - b.xy, 2) + std::pow(a.yy - b.yy, 2));
    return d / std::sqrt(b.xx * b.xx + 2 * b.xy * b.xy + b.yy * b.yy);
}

std::array<std::vector<double>, 3> tile_of(const BlockTensors& k) {
    return {std::vector<double>{k.a11, k.a12, k.a21, k.a22}, std::vector<double>{k.c11, k.c12, k.c21, k.c22},
            std::vector<double>{k.b11, k.b12, k.b21, k.b22}};
}

int sweeps(Method m, int n_block, int n_target, int n) { return UpscalePlan{m, n_block, n_target}.sweeps(n); }

Tensor2 general_of(const BlockTensors& k) {
    const auto t = tile_of(k);
    return mg_decimate_general(t[0], t[1], t[2], 2);
}

} // namespace

TEST_CASE("MG closed form equals the general Schur reduction on random blocks") {
    SplitMix64 rng(2024);
    double worst = 0.0;
    for (int b = 0; b < 1000; ++b) {
        const auto block = random_block(rng);
        worst = std::max(worst, tensor_distance(mg_decimate_2x2(block), general_of(block)));
    }
    MESSAGE("largest relative Frobenius distance " << worst);
    CHECK(worst <= 1e-12);
}

TEST_CASE("uniform blocks are fixed points") {
    for (double c : {1e-6, 0.3, 2.0}) {
        CAPTURE(c);
        const BlockTensors u{c, c, c, c, 2 * c, 2 * c, 2 * c, 2 * c};
        const Tensor2 want{c, 0.0, 2 * c};
        CHECK(mg_decimate_2x2(u) == want);
        CHECK(tensor_distance(general_of(u), want) < 1e-14);
        const auto kk = kk_decimate_2x2(u);
        CHECK(kk.xx == doctest::Approx(c).epsilon(1e-15));
        CHECK(kk.yy == doctest::Approx(2 * c).epsilon(1e-15));
        const auto t = tile_of(u);
        CHECK(mean_decimate(t[0], t[1], t[2]) == want);
    }
    // A uniform tensor with xy goes through the general path.
    const std::vector<double> xx(16, 1.2), xy(16, 0.4), yy(16, 0.9);
    CHECK(tensor_distance(mg_decimate_general(xx, xy, yy, 4), {1.2, 0.4, 0.9}) < 1e-13);
}

TEST_CASE("KK as printed breaks the uniform fixed point") {
    const double c = 0.5;
    const BlockTensors u{c, c, c, c, c, c, c, c};
    const auto printed = kk_decimate_2x2(u, true);
    CHECK(printed.xx == doctest::Approx(1.0 / c));
    CHECK(std::abs(printed.xx - c) > 1.0);
    // At c = 1 the inversion is invisible, which is why the transcription can pass casual checks.
    const BlockTensors one{1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(kk_decimate_2x2(one, true).xx == doctest::Approx(1.0));
}

TEST_CASE("layered blocks reduce to series and parallel means") {
    const double p = 1.0, q = 0.01;
    // Columns differ: x flow crosses the layers in series.
    const BlockTensors series{p, q, p, q, 1, 1, 1, 1};
    CHECK(mg_decimate_2x2(series).xx == doctest::Approx(2 * p * q / (p + q)).epsilon(1e-14));
    CHECK(mg_decimate_2x2(series).xy == 0.0);
    // Rows differ: x flow runs along the layers in parallel.
    const BlockTensors parallel{p, p, q, q, 1, 1, 1, 1};
    CHECK(mg_decimate_2x2(parallel).xx == doctest::Approx((p + q) / 2).epsilon(1e-14));
    CHECK(kk_decimate_2x2(series).xx == doctest::Approx(2 * p * q / (p + q)).epsilon(1e-14));
    CHECK(kk_decimate_2x2(parallel).xx == doctest::Approx((p + q) / 2).epsilon(1e-14));
}

TEST_CASE("MG satisfies the arithmetic and harmonic bounds") {
    SplitMix64 rng(7);
    for (int b = 0; b < 500; ++b) {
        const auto k = random_block(rng);
        const auto t = mg_decimate_2x2(k);
        const double mean_xx = (k.a11 + k.a12 + k.a21 + k.a22) / 4;
        const double mean_yy = (k.b11 + k.b12 + k.b21 + k.b22) / 4;
        const double mean_inv_xx = (1 / k.a11 + 1 / k.a12 + 1 / k.a21 + 1 / k.a22) / 4;
        const double mean_inv_yy = (1 / k.b11 + 1 / k.b12 + 1 / k.b21 + 1 / k.b22) / 4;
        REQUIRE(t.positive_definite());
        REQUIRE(t.xx <= mean_xx * (1 + 1e-12));
        REQUIRE(t.yy <= mean_yy * (1 + 1e-12));
        REQUIRE(t.yy / t.det() <= mean_inv_xx * (1 + 1e-12));
        REQUIRE(t.xx / t.det() <= mean_inv_yy * (1 + 1e-12));
    }
}

TEST_CASE("x-y relabeling commutes with MG and corrected KK") {
    SplitMix64 rng(9);
    for (int b = 0; b < 100; ++b) {
        const auto k = random_block(rng);
        const auto mg = mg_decimate_2x2(k), mgt = mg_decimate_2x2(k.transposed());
        CHECK(mgt.xx == doctest::Approx(mg.yy).epsilon(1e-13));
        CHECK(mgt.yy == doctest::Approx(mg.xx).epsilon(1e-13));
        CHECK(mgt.xy == doctest::Approx(mg.xy).epsilon(1e-13));
        const auto kk = kk_decimate_2x2(k), kkt = kk_decimate_2x2(k.transposed());
        CHECK(kkt.xx == doctest::Approx(kk.yy).epsilon(1e-13));
        CHECK(kkt.yy == doctest::Approx(kk.xx).epsilon(1e-13));
    }
}

TEST_CASE("MG creates a_xy on an asymmetric diagonal block") {
    const BlockTensors k{2.0, 0.1, 0.1, 2.0, 2.0, 0.1, 0.1, 2.0};
    const auto t = mg_decimate_2x2(k);
    CHECK(t.xy != 0.0);
    CHECK(std::signbit(t.xy));
    CHECK(tensor_distance(t, general_of(k)) < 1e-12);
    CHECK(kk_decimate_2x2(k).xy == 0.0);
}

TEST_CASE("general MG handles xy and larger tiles") {
    const auto tile = rgtest::random_field(4, 31, 0.1, 3.0, 0.6);
    DecimateDiagnostics diag;
    const auto t = mg_decimate_general(tile, &diag);
    CHECK(t.positive_definite());
    CHECK(diag.asymmetry < 1e-12);
    // Reducing a 4x4 tile in one step or in two 2x2 sweeps differs in general,
    // but both stay between the bounds.
    double mean_xx = 0.0;
    for (double v : tile.axx()) mean_xx += v / 16;
    CHECK(t.xx <= mean_xx);
    CHECK_THROWS_AS(mg_decimate_general(std::vector<double>(3, 1.0), std::vector<double>(3, 0.0),
                                        std::vector<double>(3, 1.0), 2),
                    ConfigError);
}

TEST_CASE("input checks") {
    BlockTensors bad{1, 1, 1, 1, 1, 1, 1, 1};
    bad.a12 = 0.0;
    CHECK_THROWS_AS(mg_decimate_2x2(bad), ConfigError);
    CHECK_THROWS_AS(kk_decimate_2x2(bad), ConfigError);
    BlockTensors tensorial{1, 1, 1, 1, 1, 1, 1, 1};
    tensorial.c21 = 0.1;
    CHECK_THROWS_AS(mg_decimate_2x2(tensorial), ConfigError);
    CHECK(method_from_string("mean") == Method::mean);
    CHECK(method_from_string("Mg") == Method::mg);
    CHECK(to_string(Method::kk) == "KK");
    CHECK_THROWS_AS(method_from_string("harmonic"), ConfigError);
}

TEST_CASE("mean decimation averages each component") {
    const std::vector<double> xx{1, 2, 3, 4}, xy{0.1, -0.1, 0.2, 0.0}, yy{4, 4, 2, 2};
    const auto t = mean_decimate(xx, xy, yy);
    CHECK(t.xx == 2.5);
    CHECK(t.xy == doctest::Approx(0.05));
    CHECK(t.yy == 3.0);
}

TEST_CASE("sweep count") {
    CHECK(UpscalePlan{Method::mg, 2, 32}.sweeps(512) == 4);
    CHECK(UpscalePlan{Method::mg, 2, 32}.sweeps(128) == 2);
    CHECK(UpscalePlan{Method::mean, 4, 32}.sweeps(512) == 2);
    CHECK_THROWS_AS(sweeps(Method::mg, 2, 48, 512), ConfigError);
    CHECK_THROWS_AS(sweeps(Method::mg, 2, 512, 512), ConfigError);
    CHECK_THROWS_AS(sweeps(Method::kk, 4, 32, 512), ConfigError);
    CHECK_THROWS_AS(sweeps(Method::mg, 1, 32, 512), ConfigError);

    const auto field = rgtest::random_field(512, 5, 0.1, 2.0);
    const auto r = run_plan(field, UpscalePlan{Method::mg, 2, 32});
    REQUIRE(r.levels.size() == 4);
    CHECK(r.levels[0].n() == 256);
    CHECK(r.final_field().n() == 32);
    CHECK(r.sweep_seconds.size() == 4);
}

TEST_CASE("pyramid levels are repeated single sweeps") {
    const auto field = rgtest::random_field(64, 12, 0.01, 2.0);
    for (Method m : {Method::mg, Method::kk, Method::mean}) {
        const auto r = run_plan(field, UpscalePlan{m, 2, 16});
        REQUIRE(r.levels.size() == 2);
        CHECK(r.levels[0] == decimate_once(field, m, 2));
        CHECK(r.levels[1] == decimate_once(r.levels[0], m, 2));
    }
}

TEST_CASE("cost model") {
    for (int k = 1; k <= 4; ++k) {
        CAPTURE(k);
        const int target = 512 >> k;
        double sum = 0.0;
        for (int i = 0; i < k; ++i) sum += std::pow(4.0, -i);
        CHECK(cost_model(512, 2, target, Method::mg) == doctest::Approx(512.0 * 512 * 16 * sum).epsilon(1e-15));
        CHECK(cost_model(512, 2, target, Method::mean) == doctest::Approx(512.0 * 512 * 4 * sum).epsilon(1e-15));
        CHECK(cost_model(512, 2, target, Method::kk) < cost_model(512, 2, target, Method::mg));
    }
    CHECK(cost_model(512, 2, 32, Method::mg) == 512.0 * 512 * 16 * (1 + 0.25 + 0.0625 + 0.015625));
    CHECK(cost_model(512, 16, 32, Method::mg) == 512.0 * 512 * 65536);
}
