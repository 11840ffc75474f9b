#pragma once

#include "rgflow/field.hpp"
#include "rgflow/model_gen.hpp"
#include "rgflow/upscale.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rgflow {

const char* library_version();

struct SurveyConfig {
    int n_models = 100;
    int n = 128;
    std::vector<int> resolutions{64, 32};
    std::vector<Method> methods{Method::mg, Method::kk, Method::mean};
    XyMode xy_mode = XyMode::zero;
    double ratio_tol = 1.05;
    std::uint64_t seed0 = 1;
    int parallelism = 1;
    int n_block = 2;
    /// Permit targets below 32.
    bool allow_small_targets = false;
    bool kk_as_printed = false;
    /// Channel edge resolution; negative selects the generator default.
    double edge_sigma = -1.0;

    /// Throws ConfigError.
    void validate() const;
    /// Resolutions sorted finest first.
    std::vector<int> ladder() const;
    /// Channel parameters handed to the generator for grid size n.
    ChannelSpec channel() const;
};

/// Missing keys take the defaults above; unknown keys are a ConfigError.
SurveyConfig survey_config_from_json(const std::string& text);
std::string survey_config_to_json(const SurveyConfig& config);

struct PanelValue {
    Method method = Method::mg;
    int resolution = 0;
    bool ok = false;
    double f_model = std::numeric_limits<double>::quiet_NaN();
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double coarse_ratio = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

struct ModelRecord {
    int index = 0;
    std::uint64_t seed = 0;
    /// False when generation or the exact solve threw.
    bool solved = false;
    bool admissible = false;
    double f_exact = std::numeric_limits<double>::quiet_NaN();
    double validation_ratio = std::numeric_limits<double>::quiet_NaN();
    double residual_norm = std::numeric_limits<double>::quiet_NaN();
    std::string error;
    std::vector<PanelValue> panels;
};

struct ModelTiming {
    double generate_seconds = 0.0;
    double exact_seconds = 0.0;
    double upscale_seconds = 0.0;
    double coarse_seconds = 0.0;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<double> probabilities;
};

struct BiasSummary {
    double median = 0.0;
    double negative_fraction = 0.0;
};

/// Aggregate over the admissible models of one (method, resolution) pair.
struct Panel {
    Method method = Method::mg;
    int resolution = 0;
    int count = 0;
    int failures = 0;
    double median_abs = 0.0;
    BiasSummary bias;
    Histogram histogram;
    std::vector<double> cdf;
};

struct SurveyReport {
    SurveyConfig config;
    std::vector<ModelRecord> records;
    std::vector<Panel> panels;
    /// Abscissae shared by every panel's cdf.
    std::vector<double> cdf_grid;
    int admissible = 0;
    int excluded = 0;
    bool aborted = false;

    /// Errors of one panel over admissible models, in model order.
    std::vector<double> errors(Method method, int resolution) const;
    const Panel* panel(Method method, int resolution) const;
};

/// Produces the starting model for one seed. The default draws a channel
/// model through generate_model.
using ModelFactory = std::function<TensorField(const SurveyConfig&, std::uint64_t seed)>;
ModelFactory default_model_factory();

/// Outcome of one model, as computed by a worker.
struct ModelOutcome {
    ModelRecord record;
    ModelTiming timing;
};

ModelOutcome evaluate_model(const SurveyConfig& config, int index, const ModelFactory& factory);

struct SurveyRun {
    SurveyReport report;
    std::vector<ModelTiming> timing;
};

/// Runs every model, gathers results in model order and aggregates.
/// Per-model failures are recorded. The report is flagged aborted when fewer
/// than half the models are admissible; aggregates are then left empty.
SurveyRun run_survey(const SurveyConfig& config, const ModelFactory& factory = default_model_factory());

/// Fills panels, cdf grid and counts from the records.
void aggregate(SurveyReport& report);

// Statistics

/// Linear-interpolation quantile of unsorted data, p in [0, 1].
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);
/// Freedman-Diaconis bins; a single unit-width bin when the spread is zero.
Histogram fd_histogram(const std::vector<double>& values);
/// P(|e| < x) for each x of the grid. Throws ConfigError on empty errors.
std::vector<double> cdf_table(const std::vector<double>& errors, const std::vector<double>& grid);
BiasSummary bias_summary(const std::vector<double>& errors);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Percentile bootstrap of a statistic computed from resampled model
/// indices 0..count-1. Returns the [alpha/2, 1 - alpha/2] quantiles.
Interval bootstrap(int count, const std::function<double(const std::vector<int>&)>& statistic,
                   int resamples, std::uint64_t seed, double alpha = 0.05);

// Output

std::string report_to_json(const SurveyReport& report);
SurveyReport report_from_json(const std::string& text);
std::string histograms_csv(const SurveyReport& report);
std::string cdf_csv(const SurveyReport& report);
std::string histograms_svg(const SurveyReport& report);
std::string cdf_svg(const SurveyReport& report);
std::string timing_json(const std::vector<ModelTiming>& timing);

/// Writes report.json, histograms.csv, cdf.csv, histograms.svg and cdf.svg
/// into out_dir, each atomically. Throws IoError.
void emit_report(const SurveyReport& report, const std::filesystem::path& out_dir);

/// Atomic text write via a temporary sibling file.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

} // namespace rgflow
