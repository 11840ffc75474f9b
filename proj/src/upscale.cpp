#include "rgflow/upscale.hpp"

#include "rgflow/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace rgflow {

namespace {

using cd = std::complex<double>;

bool all_positive(std::initializer_list<double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
}

void require_positive(const BlockTensors& b) {
    if (!all_positive({b.a11, b.a12, b.a21, b.a22, b.b11, b.b12, b.b21, b.b22}))
        throw ConfigError("block xx and yy entries must be positive and finite");
}

} // namespace

std::string to_string(Method method) {
    switch (method) {
    case Method::mg: return "MG";
    case Method::kk: return "KK";
    case Method::mean: return "Mean";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mg") return Method::mg;
    if (lower == "kk") return Method::kk;
    if (lower == "mean") return Method::mean;
    throw ConfigError("unknown method \"" + s + "\" (expected MG, KK or Mean)");
}

BlockTensors BlockTensors::from_field(const TensorField& f, int i, int j) {
    const auto c00 = f.at(i, j), c10 = f.at(i + 1, j), c01 = f.at(i, j + 1), c11 = f.at(i + 1, j + 1);
    return {c00.xx, c10.xx, c01.xx, c11.xx,
            c00.yy, c10.yy, c01.yy, c11.yy,
            c00.xy, c10.xy, c01.xy, c11.xy};
}

BlockTensors BlockTensors::transposed() const {
    return {b11, b21, b12, b22, a11, a21, a12, a22, c11, c21, c12, c22};
}

Tensor2 mg_decimate_2x2(const BlockTensors& k) {
    require_positive(k);
    if (k.c11 != 0.0 || k.c12 != 0.0 || k.c21 != 0.0 || k.c22 != 0.0)
        throw ConfigError("closed-form MG requires zero xy components");
    const double sa = k.a11 + k.a12 + k.a21 + k.a22;
    const double sb = k.b11 + k.b12 + k.b21 + k.b22;
    const double D = (k.a11 + k.a12) * (k.a21 + k.a22) * sb + sa * (k.b11 + k.b21) * (k.b12 + k.b22);
    if (!(D > 0.0)) throw SolverError("closed-form MG denominator vanished");
    const double ta = k.a11 * k.a12 * k.a21 + k.a11 * k.a12 * k.a22 + k.a11 * k.a21 * k.a22 +
                      k.a12 * k.a21 * k.a22;
    const double tb = k.b11 * k.b12 * k.b21 + k.b11 * k.b12 * k.b22 + k.b11 * k.b21 * k.b22 +
                      k.b12 * k.b21 * k.b22;
    const double N1 = ta * sb + (k.a11 + k.a21) * (k.a12 + k.a22) * (k.b11 + k.b21) * (k.b12 + k.b22);
    const double N2 = (k.a11 + k.a12) * (k.a21 + k.a22) * (k.b11 + k.b12) * (k.b21 + k.b22) + tb * sa;
    const double det_a = k.a11 * k.a22 - k.a12 * k.a21;
    const double det_b = k.b11 * k.b22 - k.b12 * k.b21;
    return {N1 / D, 0.0 - det_a * det_b / D, N2 / D};
}

Tensor2 mg_decimate_general(std::span<const double> axx, std::span<const double> axy,
                            std::span<const double> ayy, int m, DecimateDiagnostics* diag) {
    const auto cells = static_cast<std::size_t>(m) * m;
    if (m < 2 || axx.size() != cells || axy.size() != cells || ayy.size() != cells)
        throw ConfigError("tile must be m x m with m >= 2");

    // Tile DFT: hat(K) = m^-2 sum_r a(r) exp(-i K.r).
    const double w = 2.0 * std::numbers::pi / m;
    std::vector<cd> unit(m);
    for (int k = 0; k < m; ++k) unit[k] = std::polar(1.0, w * k);
    std::vector<std::array<cd, 3>> hat(cells, {cd{}, cd{}, cd{}});
    for (int q = 0; q < m; ++q) {
        for (int p = 0; p < m; ++p) {
            std::array<cd, 3> acc{};
            for (int y = 0; y < m; ++y) {
                for (int x = 0; x < m; ++x) {
                    const cd e = std::conj(unit[(p * x + q * y) % m]);
                    const auto r = static_cast<std::size_t>(y) * m + x;
                    acc[0] += axx[r] * e;
                    acc[1] += axy[r] * e;
                    acc[2] += ayy[r] * e;
                }
            }
            for (auto& v : acc) v /= static_cast<double>(cells);
            hat[static_cast<std::size_t>(q) * m + p] = acc;
        }
    }
    auto tensor_at = [&](int p, int q) {
        const auto& h = hat[static_cast<std::size_t>(((q % m) + m) % m) * m + ((p % m) + m) % m];
        Eigen::Matrix2cd t;
        t << h[0], h[1], h[1], h[2];
        return t;
    };

    // Forward-difference symbol of each eliminated mode.
    const int modes = static_cast<int>(cells) - 1;
    std::vector<std::pair<int, int>> index;
    std::vector<Eigen::Vector2cd> d;
    for (int q = 0; q < m; ++q) {
        for (int p = 0; p < m; ++p) {
            if (p == 0 && q == 0) continue;
            index.emplace_back(p, q);
            d.emplace_back(unit[p] - 1.0, unit[q] - 1.0);
        }
    }

    Eigen::MatrixXcd M(modes, modes);
    Eigen::MatrixXcd B(modes, 2);
    for (int g = 0; g < modes; ++g) {
        const auto [p, q] = index[g];
        const Eigen::RowVector2cd dg = d[g].adjoint();
        for (int h = 0; h < modes; ++h) {
            const auto [p2, q2] = index[h];
            M(g, h) = (dg * tensor_at(p - p2, q - q2) * d[h])(0, 0);
        }
        B.row(g) = dg * tensor_at(p, q);
    }

    Eigen::LLT<Eigen::MatrixXcd> llt(M);
    if (llt.info() != Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
        const auto& s = svd.singularValues();
        std::ostringstream msg;
        msg << "eliminated-mode block is not positive definite (sigma_min " << s(s.size() - 1)
            << ", sigma_max " << s(0) << ")";
        throw SolverError(msg.str());
    }
    const Eigen::Matrix2cd reduced = tensor_at(0, 0) - B.adjoint() * llt.solve(B);
    const Eigen::Matrix2d re = reduced.real();
    if (diag) {
        const double scale = re.cwiseAbs().maxCoeff();
        diag->asymmetry = scale > 0.0 ? std::abs(re(0, 1) - re(1, 0)) / scale : 0.0;
    }
    return {re(0, 0), 0.5 * (re(0, 1) + re(1, 0)), re(1, 1)};
}

Tensor2 mg_decimate_general(const TensorField& tile, DecimateDiagnostics* diag) {
    return mg_decimate_general(tile.axx(), tile.axy(), tile.ayy(), tile.n(), diag);
}

Tensor2 kk_decimate_2x2(const BlockTensors& k, bool as_printed) {
    require_positive(k);
    const double first_x = (k.a11 + k.a21) * (k.a12 + k.a22) / ((k.a11 + k.a12) * (k.a21 + k.a22));
    const double num_x = k.a11 * k.a12 * (k.a21 + k.a22) + k.a21 * k.a22 * (k.a11 + k.a12);
    const double sum_a = k.a11 + k.a12 + k.a21 + k.a22;

    const double first_y = (k.b11 + k.b12) * (k.b21 + k.b22) / ((k.b11 + k.b21) * (k.b12 + k.b22));
    const double sum_b = k.b11 + k.b12 + k.b21 + k.b22;
    const double tail = as_printed ? k.b11 + k.a21 : k.b11 + k.b21;
    const double num_y = k.b11 * k.b21 * (k.b12 + k.b22) + k.b12 * k.b22 * tail;

    if (as_printed) return {std::sqrt(first_x * sum_a / num_x), 0.0, std::sqrt(first_y * sum_b / num_y)};
    return {std::sqrt(first_x * num_x / sum_a), 0.0, std::sqrt(first_y * num_y / sum_b)};
}

Tensor2 mean_decimate(std::span<const double> axx, std::span<const double> axy,
                      std::span<const double> ayy) {
    if (axx.empty() || axx.size() != axy.size() || axx.size() != ayy.size())
        throw ConfigError("mean_decimate needs equal, non-empty components");
    auto mean = [](std::span<const double> v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    return {mean(axx), mean(axy), mean(ayy)};
}

int UpscalePlan::sweeps(int n) const {
    if (n_block < 2) throw ConfigError("n_block must be at least 2");
    if (method == Method::kk && n_block != 2) throw ConfigError("KK only supports n_block = 2");
    if (n_target < 1 || n_target >= n) throw ConfigError("n_target must lie in [1, n)");
    int k = 0;
    long size = n_target;
    while (size < n) {
        size *= n_block;
        ++k;
    }
    if (size != n) {
        std::ostringstream msg;
        msg << "n_target " << n_target << " times a power of n_block " << n_block << " never equals n " << n;
        throw ConfigError(msg.str());
    }
    return k;
}

TensorField decimate_once(const TensorField& field, Method method, int n_block, bool kk_as_printed,
                          double* max_asymmetry) {
    const int n = field.n();
    if (n_block < 2 || n % n_block != 0) throw ConfigError("n_block must divide the grid size");
    if (method == Method::kk && n_block != 2) throw ConfigError("KK only supports n_block = 2");
    const int nc = n / n_block;
    const auto coarse_cells = static_cast<std::size_t>(nc) * nc;
    std::vector<double> xx(coarse_cells), xy(coarse_cells), yy(coarse_cells);
    const auto tile_cells = static_cast<std::size_t>(n_block) * n_block;
    std::vector<double> tx(tile_cells), txy(tile_cells), ty(tile_cells);

    for (int J = 0; J < nc; ++J) {
        for (int I = 0; I < nc; ++I) {
            const int i0 = I * n_block, j0 = J * n_block;
            bool zero_xy = true;
            for (int v = 0; v < n_block; ++v) {
                for (int u = 0; u < n_block; ++u) {
                    const auto t = field.at(i0 + u, j0 + v);
                    const auto r = static_cast<std::size_t>(v) * n_block + u;
                    tx[r] = t.xx;
                    txy[r] = t.xy;
                    ty[r] = t.yy;
                    zero_xy = zero_xy && t.xy == 0.0;
                }
            }
            Tensor2 out;
            switch (method) {
            case Method::mean:
                out = mean_decimate(tx, txy, ty);
                break;
            case Method::kk:
                out = kk_decimate_2x2(BlockTensors::from_field(field, i0, j0), kk_as_printed);
                break;
            case Method::mg:
                if (n_block == 2 && zero_xy) {
                    out = mg_decimate_2x2(BlockTensors::from_field(field, i0, j0));
                } else {
                    DecimateDiagnostics diag;
                    out = mg_decimate_general(tx, txy, ty, n_block, &diag);
                    if (max_asymmetry) *max_asymmetry = std::max(*max_asymmetry, diag.asymmetry);
                }
                break;
            }
            const auto k = static_cast<std::size_t>(J) * nc + I;
            xx[k] = out.xx;
            xy[k] = out.xy;
            yy[k] = out.yy;
        }
    }
    const auto shape = GridShape::is_valid_size(nc) ? GridShape(nc) : GridShape::unchecked(nc);
    return TensorField(shape, std::move(xx), std::move(xy), std::move(yy));
}

UpscaleResult run_plan(const TensorField& field, const UpscalePlan& plan) {
    const int k = plan.sweeps(field.n());
    UpscaleResult result;
    result.levels.reserve(k);
    const TensorField* current = &field;
    for (int s = 0; s < k; ++s) {
        const auto t0 = std::chrono::steady_clock::now();
        result.levels.push_back(
            decimate_once(*current, plan.method, plan.n_block, plan.kk_as_printed, &result.max_asymmetry));
        result.sweep_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        current = &result.levels.back();
    }
    return result;
}

double cost_model(int n, int n_block, int n_target, Method method) {
    const UpscalePlan plan{method, n_block, n_target};
    const int k = plan.sweeps(n);
    const double nb = n_block;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += std::pow(nb, -2.0 * i);
    const double power = method == Method::mg ? 4.0 : 2.0;
    return static_cast<double>(n) * n * std::pow(nb, power) * sum;
}

} // namespace rgflow
