#include "rgflow/error.hpp"
#include "rgflow/rng.hpp"
#include "rgflow/survey.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rgflow {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kReportFormat = "rgflow-survey/1";

ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

double read_number(const ojson& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

ojson config_json(const SurveyConfig& c) {
    ojson methods = ojson::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    return ojson{{"n_models", c.n_models},
                 {"n", c.n},
                 {"resolutions", c.resolutions},
                 {"methods", methods},
                 {"xy_mode", to_string(c.xy_mode)},
                 {"ratio_tol", c.ratio_tol},
                 {"seed0", c.seed0},
                 {"parallelism", c.parallelism},
                 {"n_block", c.n_block},
                 {"allow_small_targets", c.allow_small_targets},
                 {"kk_as_printed", c.kk_as_printed},
                 {"edge_sigma", c.edge_sigma}};
}

SurveyConfig config_from(const ojson& j) {
    if (!j.is_object()) throw ConfigError("survey config must be a JSON object");
    SurveyConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "n_models") c.n_models = value.get<int>();
            else if (key == "n") c.n = value.get<int>();
            else if (key == "resolutions") c.resolutions = value.get<std::vector<int>>();
            else if (key == "methods") {
                c.methods.clear();
                for (const auto& m : value) c.methods.push_back(method_from_string(m.get<std::string>()));
            } else if (key == "xy_mode") c.xy_mode = xy_mode_from_string(value.get<std::string>());
            else if (key == "ratio_tol") c.ratio_tol = value.get<double>();
            else if (key == "seed0") c.seed0 = value.get<std::uint64_t>();
            else if (key == "parallelism") c.parallelism = value.get<int>();
            else if (key == "n_block") c.n_block = value.get<int>();
            else if (key == "allow_small_targets") c.allow_small_targets = value.get<bool>();
            else if (key == "kk_as_printed") c.kk_as_printed = value.get<bool>();
            else if (key == "edge_sigma") c.edge_sigma = value.get<double>();
            else throw ConfigError("survey config: unknown key \"" + key + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("survey config: ") + e.what());
    }
    return c;
}

// Minimal SVG canvas.
class Svg {
public:
    Svg(double width, double height) : width_(width), height_(height) {}

    void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "middle") {
        body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
              << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w) << "\" height=\""
              << fmt(h) << "\" fill=\"" << fill << "\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#333") {
        body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\""
              << fmt(y2) << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        body_ << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << stroke << "\" points=\"";
        for (const auto& [x, y] : pts) body_ << fmt(x) << ',' << fmt(y) << ' ';
        body_ << "\"/>\n";
    }
    std::string str() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_) << "\" height=\""
            << fmt(height_) << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
        return out.str();
    }

private:
    double width_, height_;
    std::ostringstream body_;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Frame {
    double x, y, w, h;
    double px(double t) const { return x + t * w; }
    double py(double t) const { return y + h - t * h; }
};

void axes(Svg& svg, const Frame& f, const std::string& title, const std::string& lo, const std::string& hi) {
    svg.line(f.x, f.y + f.h, f.x + f.w, f.y + f.h);
    svg.line(f.x, f.y, f.x, f.y + f.h);
    svg.text(f.x + f.w / 2, f.y - 6, title, 12);
    svg.text(f.x, f.y + f.h + 14, lo, 10);
    svg.text(f.x + f.w, f.y + f.h + 14, hi, 10);
}

} // namespace

std::string survey_config_to_json(const SurveyConfig& config) { return config_json(config).dump(2) + "\n"; }

SurveyConfig survey_config_from_json(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("survey config is not valid JSON: ") + e.what());
    }
    return config_from(j);
}

std::string report_to_json(const SurveyReport& report) {
    const auto& c = report.config;
    ojson j;
    j["format"] = kReportFormat;
    j["provenance"] = {
        {"code_version", library_version()},
        {"prng", SplitMix64::kName},
        {"model_seed", "seed0 + model index"},
        {"flow_rate", "mean of the column profile over columns 2..n-3"},
        {"flow_quadrature", "fourth-order end-corrected trapezoid over the node rows"},
        {"validation_ratio", "max/min of the column profile over all columns"},
        {"error", "(f_exact - f_model) / f_exact * 100"},
        {"kk_orientation", c.kk_as_printed ? "as printed" : "corrected (uniform fixed point)"},
        {"mg_path", "closed form for zero-xy 2x2 tiles, Fourier Schur complement otherwise"},
        {"edge_sigma", c.channel().edge_sigma}};
    j["config"] = config_json(c);
    j["summary"] = {{"models", report.records.size()},
                    {"admissible", report.admissible},
                    {"excluded", report.excluded},
                    {"aborted", report.aborted}};

    ojson panels = ojson::array();
    for (const auto& p : report.panels) {
        ojson probs = ojson::array(), edges = ojson::array(), cdf = ojson::array();
        for (double v : p.histogram.edges) edges.push_back(v);
        for (double v : p.histogram.probabilities) probs.push_back(v);
        for (double v : p.cdf) cdf.push_back(v);
        panels.push_back({{"method", to_string(p.method)},
                          {"resolution", p.resolution},
                          {"count", p.count},
                          {"failures", p.failures},
                          {"median_abs_error", number(p.median_abs)},
                          {"median_error", number(p.bias.median)},
                          {"negative_fraction", number(p.bias.negative_fraction)},
                          {"histogram", {{"edges", edges}, {"probabilities", probs}}},
                          {"cdf", cdf}});
    }
    j["cdf_grid"] = report.cdf_grid;
    j["panels"] = panels;

    ojson records = ojson::array();
    for (const auto& r : report.records) {
        ojson values = ojson::array();
        for (const auto& v : r.panels)
            values.push_back({{"method", to_string(v.method)},
                              {"resolution", v.resolution},
                              {"ok", v.ok},
                              {"f_model", number(v.f_model)},
                              {"epsilon", number(v.epsilon)},
                              {"coarse_ratio", number(v.coarse_ratio)},
                              {"error", v.error}});
        records.push_back({{"index", r.index},
                           {"seed", r.seed},
                           {"solved", r.solved},
                           {"admissible", r.admissible},
                           {"f_exact", number(r.f_exact)},
                           {"validation_ratio", number(r.validation_ratio)},
                           {"residual_norm", number(r.residual_norm)},
                           {"error", r.error},
                           {"panels", values}});
    }
    j["records"] = records;
    return j.dump(2) + "\n";
}

SurveyReport report_from_json(const std::string& text) {
    try {
        const auto j = ojson::parse(text);
        if (j.value("format", "") != kReportFormat) throw FormatError("not a survey report");
        SurveyReport report;
        report.config = config_from(j.at("config"));
        for (const auto& r : j.at("records")) {
            ModelRecord rec;
            rec.index = r.at("index").get<int>();
            rec.seed = r.at("seed").get<std::uint64_t>();
            rec.solved = r.at("solved").get<bool>();
            rec.admissible = r.at("admissible").get<bool>();
            rec.f_exact = read_number(r.at("f_exact"));
            rec.validation_ratio = read_number(r.at("validation_ratio"));
            rec.residual_norm = read_number(r.at("residual_norm"));
            rec.error = r.at("error").get<std::string>();
            for (const auto& v : r.at("panels")) {
                PanelValue pv;
                pv.method = method_from_string(v.at("method").get<std::string>());
                pv.resolution = v.at("resolution").get<int>();
                pv.ok = v.at("ok").get<bool>();
                pv.f_model = read_number(v.at("f_model"));
                pv.epsilon = read_number(v.at("epsilon"));
                pv.coarse_ratio = read_number(v.at("coarse_ratio"));
                pv.error = v.at("error").get<std::string>();
                rec.panels.push_back(std::move(pv));
            }
            report.records.push_back(std::move(rec));
        }
        aggregate(report);
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed survey report: ") + e.what());
    }
}

std::string histograms_csv(const SurveyReport& report) {
    std::ostringstream out;
    out << "method,resolution,bin_lower,bin_upper,probability\n";
    for (const auto& p : report.panels)
        for (std::size_t b = 0; b < p.histogram.probabilities.size(); ++b)
            out << to_string(p.method) << ',' << p.resolution << ',' << fmt(p.histogram.edges[b]) << ','
                << fmt(p.histogram.edges[b + 1]) << ',' << fmt(p.histogram.probabilities[b]) << '\n';
    return out.str();
}

std::string cdf_csv(const SurveyReport& report) {
    std::ostringstream out;
    out << "method,resolution,x,p\n";
    for (const auto& p : report.panels)
        for (std::size_t k = 0; k < p.cdf.size(); ++k)
            out << to_string(p.method) << ',' << p.resolution << ',' << fmt(report.cdf_grid[k]) << ','
                << fmt(p.cdf[k]) << '\n';
    return out.str();
}

std::string histograms_svg(const SurveyReport& report) {
    const auto& methods = report.config.methods;
    const auto ladder = report.config.ladder();
    const double pw = 220, ph = 150, gap = 50;
    Svg svg(gap + ladder.size() * (pw + gap), gap + methods.size() * (ph + gap) + 10);
    for (std::size_t row = 0; row < methods.size(); ++row) {
        for (std::size_t col = 0; col < ladder.size(); ++col) {
            const Frame f{gap + col * (pw + gap), gap + row * (ph + gap), pw, ph};
            const Panel* p = report.panel(methods[row], ladder[col]);
            const std::string title = to_string(methods[row]) + " " + std::to_string(ladder[col]) + "x" +
                                      std::to_string(ladder[col]);
            if (!p || p->histogram.probabilities.empty()) {
                axes(svg, f, title + " (no data)", "", "");
                continue;
            }
            const auto& e = p->histogram.edges;
            axes(svg, f, title, fmt(e.front()), fmt(e.back()));
            const double span = e.back() - e.front();
            const double top = *std::max_element(p->histogram.probabilities.begin(), p->histogram.probabilities.end());
            for (std::size_t b = 0; b < p->histogram.probabilities.size(); ++b) {
                const double x0 = f.px((e[b] - e.front()) / span), x1 = f.px((e[b + 1] - e.front()) / span);
                const double y = f.py(p->histogram.probabilities[b] / top);
                svg.rect(x0, y, std::max(0.5, x1 - x0 - 0.5), f.y + f.h - y, kPalette[row % 6]);
            }
            if (e.front() < 0.0 && e.back() > 0.0) {
                const double x0 = f.px(-e.front() / span);
                svg.line(x0, f.y, x0, f.y + f.h, "#999");
            }
        }
    }
    svg.text(gap, 20, "error distribution (percent), zero marked in grey", 12, "start");
    return svg.str();
}

std::string cdf_svg(const SurveyReport& report) {
    const auto& methods = report.config.methods;
    const auto ladder = report.config.ladder();
    const double pw = 260, ph = 180, gap = 55;
    const std::size_t panels = methods.size() + 1;
    Svg svg(gap + panels * (pw + gap), 2 * gap + ph + 20 * std::max(ladder.size(), methods.size()) + 20);
    const double top = report.cdf_grid.empty() ? 1.0 : report.cdf_grid.back();

    auto curve = [&](const Frame& f, const Panel* p, const char* colour) {
        if (!p || p->cdf.empty()) return;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t k = 0; k < p->cdf.size(); ++k)
            pts.emplace_back(f.px(report.cdf_grid[k] / top), f.py(p->cdf[k]));
        svg.polyline(pts, colour);
    };

    for (std::size_t m = 0; m <= methods.size(); ++m) {
        const Frame f{gap + m * (pw + gap), gap, pw, ph};
        const bool summary = m == methods.size();
        const int deepest = ladder.back();
        axes(svg, f,
             summary ? "all methods at " + std::to_string(deepest) + "x" + std::to_string(deepest)
                     : to_string(methods[m]),
             "0", fmt(top));
        svg.text(f.x - 6, f.y + 4, "1", 10, "end");
        if (summary) {
            for (std::size_t k = 0; k < methods.size(); ++k) {
                curve(f, report.panel(methods[k], deepest), kPalette[k % 6]);
                svg.text(f.x, f.y + f.h + 32 + 16 * k, to_string(methods[k]), 10, "start");
                svg.line(f.x + 40, f.y + f.h + 28 + 16 * k, f.x + 60, f.y + f.h + 28 + 16 * k, kPalette[k % 6]);
            }
        } else {
            for (std::size_t r = 0; r < ladder.size(); ++r) {
                curve(f, report.panel(methods[m], ladder[r]), kPalette[r % 6]);
                svg.text(f.x, f.y + f.h + 32 + 16 * r, std::to_string(ladder[r]), 10, "start");
                svg.line(f.x + 40, f.y + f.h + 28 + 16 * r, f.x + 60, f.y + f.h + 28 + 16 * r, kPalette[r % 6]);
            }
        }
    }
    svg.text(gap, 20, "P(|error| < x), x in percent", 12, "start");
    return svg.str();
}

std::string timing_json(const std::vector<ModelTiming>& timing) {
    ojson arr = ojson::array();
    for (std::size_t i = 0; i < timing.size(); ++i)
        arr.push_back({{"index", i},
                       {"generate_seconds", timing[i].generate_seconds},
                       {"exact_seconds", timing[i].exact_seconds},
                       {"upscale_seconds", timing[i].upscale_seconds},
                       {"coarse_seconds", timing[i].coarse_seconds}});
    return arr.dump(2) + "\n";
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out.flush()) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void emit_report(const SurveyReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_text_atomic(out_dir / "report.json", report_to_json(report));
    write_text_atomic(out_dir / "histograms.csv", histograms_csv(report));
    write_text_atomic(out_dir / "cdf.csv", cdf_csv(report));
    write_text_atomic(out_dir / "histograms.svg", histograms_svg(report));
    write_text_atomic(out_dir / "cdf.svg", cdf_svg(report));
}

} // namespace rgflow
