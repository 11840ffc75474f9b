#include "rgflow/survey.hpp"

#include "rgflow/darcy.hpp"
#include "rgflow/error.hpp"
#include "rgflow/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace rgflow {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool reachable(int n, int target, int n_block) {
    long size = target;
    while (size < n) size *= n_block;
    return size == n;
}

/// Smallest 1, 2 or 5 times a power of ten strictly above x.
double nice_ceiling(double x) {
    if (!(x > 0.0)) return 1.0;
    double decade = std::pow(10.0, std::floor(std::log10(x)));
    for (;;) {
        for (double m : {1.0, 2.0, 5.0})
            if (m * decade > x) return m * decade;
        decade *= 10.0;
    }
}

} // namespace

const char* library_version() { return RGFLOW_VERSION; }

void SurveyConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("survey config: " + msg); };
    if (n_models < 1) fail("n_models must be positive");
    if (!GridShape::is_valid_size(n)) fail("n must be a power of two >= 8");
    if (n_block < 2) fail("n_block must be at least 2");
    if (resolutions.empty()) fail("resolutions must not be empty");
    const int floor = allow_small_targets ? 8 : 32;
    for (int r : resolutions) {
        if (r < floor) {
            std::ostringstream msg;
            msg << "resolution " << r << " is below " << floor
                << (allow_small_targets ? "" : " (set allow_small_targets to go lower)");
            fail(msg.str());
        }
        if (r >= n || !reachable(n, r, n_block)) fail("resolution " + std::to_string(r) + " is not n / n_block^K");
    }
    if (methods.empty()) fail("methods must not be empty");
    if (std::set<Method>(methods.begin(), methods.end()).size() != methods.size()) fail("methods repeat");
    if (n_block != 2 && std::find(methods.begin(), methods.end(), Method::kk) != methods.end())
        fail("KK requires n_block = 2");
    if (!(ratio_tol > 1.0)) fail("ratio_tol must exceed 1");
    if (parallelism < 1) fail("parallelism must be at least 1");
}

std::vector<int> SurveyConfig::ladder() const {
    std::vector<int> out(resolutions);
    std::sort(out.begin(), out.end(), std::greater<>());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ChannelSpec SurveyConfig::channel() const {
    auto spec = ChannelSpec::defaults_for(n);
    spec.xy_mode = xy_mode;
    if (edge_sigma >= 0.0) spec.edge_sigma = edge_sigma;
    return spec;
}

ModelFactory default_model_factory() {
    return [](const SurveyConfig& config, std::uint64_t seed) {
        ModelParams params{GridShape(config.n), config.channel(), seed};
        return generate_model(params);
    };
}

ModelOutcome evaluate_model(const SurveyConfig& config, int index, const ModelFactory& factory) {
    ModelOutcome out;
    auto& rec = out.record;
    rec.index = index;
    rec.seed = config.seed0 + static_cast<std::uint64_t>(index);

    std::optional<TensorField> field;
    try {
        auto t0 = Clock::now();
        field.emplace(factory(config, rec.seed));
        out.timing.generate_seconds = since(t0);
        t0 = Clock::now();
        const auto exact = solve(*field);
        out.timing.exact_seconds = since(t0);
        rec.f_exact = exact.f;
        rec.validation_ratio = exact.validation_ratio;
        rec.residual_norm = exact.residual_norm;
        rec.solved = true;
        rec.admissible = validate(exact, config.ratio_tol);
    } catch (const std::exception& e) {
        rec.error = e.what();
        return out;
    }
    if (!rec.admissible) return out;

    const auto ladder = config.ladder();
    for (Method method : config.methods) {
        std::vector<PanelValue> values;
        for (int r : ladder) {
            PanelValue v;
            v.method = method;
            v.resolution = r;
            values.push_back(std::move(v));
        }
        try {
            const auto t0 = Clock::now();
            const auto pyramid = run_plan(*field, UpscalePlan{method, config.n_block, ladder.back(),
                                                              config.kk_as_printed});
            out.timing.upscale_seconds += since(t0);
            for (auto& v : values) {
                const auto level = std::find_if(pyramid.levels.begin(), pyramid.levels.end(),
                                                [&](const TensorField& f) { return f.n() == v.resolution; });
                try {
                    const auto t1 = Clock::now();
                    const auto coarse = solve(*level);
                    out.timing.coarse_seconds += since(t1);
                    v.f_model = coarse.f;
                    v.coarse_ratio = coarse.validation_ratio;
                    v.epsilon = flow_error(rec.f_exact, coarse.f);
                    v.ok = std::isfinite(v.epsilon);
                    if (!v.ok) v.error = "non-finite flow error";
                } catch (const std::exception& e) {
                    v.error = e.what();
                }
            }
        } catch (const std::exception& e) {
            for (auto& v : values) v.error = e.what();
        }
        rec.panels.insert(rec.panels.end(), values.begin(), values.end());
    }
    return out;
}

SurveyRun run_survey(const SurveyConfig& config, const ModelFactory& factory) {
    config.validate();
    std::vector<ModelOutcome> outcomes(config.n_models);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < config.n_models; i = next++) outcomes[i] = evaluate_model(config, i, factory);
    };
    {
        std::vector<std::jthread> pool;
        const int workers = std::min(config.parallelism, config.n_models);
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }

    SurveyRun run;
    run.report.config = config;
    for (auto& o : outcomes) {
        run.report.records.push_back(std::move(o.record));
        run.timing.push_back(o.timing);
    }
    aggregate(run.report);
    return run;
}

std::vector<double> SurveyReport::errors(Method method, int resolution) const {
    std::vector<double> out;
    for (const auto& rec : records) {
        if (!rec.admissible) continue;
        for (const auto& v : rec.panels)
            if (v.method == method && v.resolution == resolution && v.ok) out.push_back(v.epsilon);
    }
    return out;
}

const Panel* SurveyReport::panel(Method method, int resolution) const {
    for (const auto& p : panels)
        if (p.method == method && p.resolution == resolution) return &p;
    return nullptr;
}

void aggregate(SurveyReport& report) {
    report.panels.clear();
    report.cdf_grid.clear();
    report.admissible = static_cast<int>(
        std::count_if(report.records.begin(), report.records.end(), [](const ModelRecord& r) { return r.admissible; }));
    report.excluded = static_cast<int>(report.records.size()) - report.admissible;
    report.aborted = 2 * report.admissible < static_cast<int>(report.records.size());
    if (report.aborted) return;

    double largest = 0.0;
    for (Method m : report.config.methods)
        for (int r : report.config.ladder())
            for (double e : report.errors(m, r)) largest = std::max(largest, std::abs(e));
    const double top = nice_ceiling(largest);
    constexpr int kGridPoints = 101;
    for (int k = 0; k < kGridPoints; ++k) report.cdf_grid.push_back(top * k / (kGridPoints - 1));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Method m : report.config.methods) {
        for (int r : report.config.ladder()) {
            Panel p;
            p.method = m;
            p.resolution = r;
            const auto errs = report.errors(m, r);
            p.count = static_cast<int>(errs.size());
            p.failures = report.admissible - p.count;
            if (errs.empty()) {
                p.median_abs = nan;
                p.bias = {nan, nan};
            } else {
                std::vector<double> mags(errs.size());
                std::transform(errs.begin(), errs.end(), mags.begin(), [](double e) { return std::abs(e); });
                p.median_abs = median(mags);
                p.bias = bias_summary(errs);
                p.histogram = fd_histogram(errs);
                p.cdf = cdf_table(errs, report.cdf_grid);
            }
            report.panels.push_back(std::move(p));
        }
    }
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("quantile of empty data");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

Histogram fd_histogram(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("histogram of empty data");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
    Histogram h;
    if (!(hi > lo)) {
        h.edges = {lo - 0.5, lo + 0.5};
        h.probabilities = {1.0};
        return h;
    }
    constexpr int kMaxBins = 200;
    int bins = width > 0.0 ? static_cast<int>(std::ceil((hi - lo) / width)) : kMaxBins;
    bins = std::clamp(bins, 1, kMaxBins);
    const double step = (hi - lo) / bins;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + step * b);
    std::vector<int> counts(bins, 0);
    for (double v : values) counts[std::min(bins - 1, static_cast<int>((v - lo) / step))]++;
    for (int c : counts) h.probabilities.push_back(static_cast<double>(c) / static_cast<double>(values.size()));
    return h;
}

std::vector<double> cdf_table(const std::vector<double>& errors, const std::vector<double>& grid) {
    if (errors.empty()) throw ConfigError("cdf of empty data");
    std::vector<double> mags(errors.size());
    std::transform(errors.begin(), errors.end(), mags.begin(), [](double e) { return std::abs(e); });
    std::sort(mags.begin(), mags.end());
    std::vector<double> out;
    out.reserve(grid.size());
    for (double x : grid) {
        const auto below = std::lower_bound(mags.begin(), mags.end(), x) - mags.begin();
        out.push_back(static_cast<double>(below) / static_cast<double>(mags.size()));
    }
    return out;
}

BiasSummary bias_summary(const std::vector<double>& errors) {
    if (errors.empty()) throw ConfigError("bias summary of empty data");
    const auto negative = std::count_if(errors.begin(), errors.end(), [](double e) { return e < 0.0; });
    return {median(errors), static_cast<double>(negative) / static_cast<double>(errors.size())};
}

Interval bootstrap(int count, const std::function<double(const std::vector<int>&)>& statistic, int resamples,
                   std::uint64_t seed, double alpha) {
    if (count < 1 || resamples < 1) throw ConfigError("bootstrap needs data and resamples");
    SplitMix64 rng(seed);
    std::vector<double> stats;
    stats.reserve(resamples);
    std::vector<int> idx(count);
    for (int b = 0; b < resamples; ++b) {
        for (auto& i : idx) i = std::min(count - 1, static_cast<int>(rng.uniform() * count));
        stats.push_back(statistic(idx));
    }
    return {quantile(stats, alpha / 2.0), quantile(stats, 1.0 - alpha / 2.0)};
}

} // namespace rgflow
