#include "rgflow/spectral.hpp"

#include "rgflow/error.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace rgflow {

namespace {

using cd = std::complex<double>;

int wrap(int m, int n) { return ((m % n) + n) % n; }

struct Partition {
    std::vector<int> low;
    std::vector<int> high;
};

Partition partition(const std::vector<Mode>& modes, int kc) {
    Partition p;
    for (int k = 0; k < static_cast<int>(modes.size()); ++k)
        (is_low_mode(modes[k], kc) ? p.low : p.high).push_back(k);
    return p;
}

Eigen::MatrixXcd gather(const Eigen::MatrixXcd& m, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXcd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
    return out;
}

double smallest_singular_value(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().minCoeff();
}

ReducedOperator schur(const std::vector<Mode>& modes, const Eigen::MatrixXcd& matrix, int kc) {
    if (kc < 1) throw ConfigError("cutoff kc must be at least 1");
    const auto part = partition(modes, kc);
    ReducedOperator out;
    for (int k : part.low) out.modes.push_back(modes[k]);
    const Eigen::MatrixXcd ll = gather(matrix, part.low, part.low);
    if (part.high.empty()) {
        out.matrix = ll;
        return out;
    }
    const Eigen::MatrixXcd hh = gather(matrix, part.high, part.high);
    const Eigen::MatrixXcd hl = gather(matrix, part.high, part.low);
    Eigen::LLT<Eigen::MatrixXcd> llt(hh);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "high-mode block is singular (smallest singular value " << smallest_singular_value(hh) << ")";
        throw SolverError(msg.str());
    }
    out.matrix = ll - hl.adjoint() * llt.solve(hl);
    return out;
}

} // namespace

int SpectralOperator::find(Mode m) const {
    for (int k = 0; k < static_cast<int>(modes.size()); ++k)
        if (modes[k] == m) return k;
    return -1;
}

bool is_low_mode(Mode m, int kc) { return std::max(std::abs(m[0]), std::abs(m[1])) <= kc; }

SpectralOperator build_spectral(const TensorField& field) {
    const int n = field.n();
    if (n > kMaxSpectralGrid) {
        std::ostringstream msg;
        msg << "spectral operator limited to n <= " << kMaxSpectralGrid << ", got " << n;
        throw ConfigError(msg.str());
    }

    // a_hat(m) = n^-2 sum_r a(r) exp(-2 pi i m.r / n), stored by wrapped index.
    const double w = 2.0 * std::numbers::pi / n;
    const auto cells = static_cast<std::size_t>(n) * n;
    std::vector<std::array<cd, 3>> hat(cells);
    for (int q = 0; q < n; ++q) {
        for (int p = 0; p < n; ++p) {
            std::array<cd, 3> acc{};
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    const cd e = std::polar(1.0, -w * ((p * x + q * y) % n));
                    const auto t = field.at(x, y);
                    acc[0] += t.xx * e;
                    acc[1] += t.xy * e;
                    acc[2] += t.yy * e;
                }
            }
            for (auto& v : acc) v /= static_cast<double>(cells);
            hat[static_cast<std::size_t>(q) * n + p] = acc;
        }
    }

    SpectralOperator op;
    op.n = n;
    for (int my = -n / 2; my < n / 2; ++my)
        for (int mx = -n / 2; mx < n / 2; ++mx)
            if (mx != 0 || my != 0) op.modes.push_back({mx, my});

    const int size = static_cast<int>(op.modes.size());
    const double two_pi = 2.0 * std::numbers::pi;
    op.matrix.resize(size, size);
    for (int r = 0; r < size; ++r) {
        const double kx = two_pi * op.modes[r][0], ky = two_pi * op.modes[r][1];
        for (int c = 0; c < size; ++c) {
            const double lx = two_pi * op.modes[c][0], ly = two_pi * op.modes[c][1];
            const auto& h = hat[static_cast<std::size_t>(wrap(op.modes[r][1] - op.modes[c][1], n)) * n +
                                wrap(op.modes[r][0] - op.modes[c][0], n)];
            op.matrix(r, c) = kx * h[0] * lx + kx * h[1] * ly + ky * h[1] * lx + ky * h[2] * ly;
        }
    }
    return op;
}

ReducedOperator reduce_operator(const SpectralOperator& op, int kc) { return schur(op.modes, op.matrix, kc); }

ReducedOperator reduce_operator(const ReducedOperator& op, int kc) { return schur(op.modes, op.matrix, kc); }

ExactnessReport verify_low_mode_exactness(const TensorField& field, int kc, const Eigen::VectorXcd& source) {
    const auto op = build_spectral(field);
    if (source.size() != static_cast<Eigen::Index>(op.modes.size()))
        throw ConfigError("source length must equal the number of nonzero modes");
    const auto part = partition(op.modes, kc);
    const auto reduced = reduce_operator(op, kc);

    ExactnessReport report;
    for (int k : part.high) report.source_high_norm += std::norm(source(k));
    report.source_high_norm = std::sqrt(report.source_high_norm);

    Eigen::LLT<Eigen::MatrixXcd> full(op.matrix);
    if (full.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "full operator is singular (smallest singular value " << smallest_singular_value(op.matrix)
            << ")";
        throw SolverError(msg.str());
    }
    const Eigen::VectorXcd phi = full.solve(source);

    Eigen::VectorXcd low_source(part.low.size());
    for (std::size_t r = 0; r < part.low.size(); ++r) low_source(r) = source(part.low[r]);
    const Eigen::VectorXcd phi_low = reduced.matrix.ldlt().solve(low_source);

    double scale = 0.0;
    for (std::size_t r = 0; r < part.low.size(); ++r) {
        report.max_deviation = std::max(report.max_deviation, std::abs(phi(part.low[r]) - phi_low(r)));
        scale = std::max(scale, std::abs(phi(part.low[r])));
    }
    report.relative_deviation = scale > 0.0 ? report.max_deviation / scale : report.max_deviation;

    if (!part.high.empty()) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gather(op.matrix, part.high, part.high));
        const auto& s = svd.singularValues();
        report.high_block_condition = s(0) / s(s.size() - 1);
    }
    return report;
}

Eigen::VectorXcd unit_source(const SpectralOperator& op, Mode m) {
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.modes.size()));
    const int k = op.find(m);
    const int kn = op.find({-m[0], -m[1]});
    if (k < 0) throw ConfigError("mode not present on this grid");
    s(k) = 1.0;
    if (kn >= 0 && kn != k) s(kn) = 1.0;
    return s;
}

double relative_difference(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("matrix shapes differ");
    const double scale = b.cwiseAbs().maxCoeff();
    const double diff = (a - b).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

} // namespace rgflow
