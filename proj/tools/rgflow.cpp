// rgflow: command-line front end for the Darcy solver, upscalers, spectral
// oracle and ensemble survey.

#include "rgflow/darcy.hpp"
#include "rgflow/error.hpp"
#include "rgflow/field_io.hpp"
#include "rgflow/model_gen.hpp"
#include "rgflow/spectral.hpp"
#include "rgflow/survey.hpp"
#include "rgflow/upscale.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace rgflow;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

struct GenerateArgs {
    int n = 128;
    std::uint64_t seed = 1;
    std::string xy_mode = "zero";
    double edge_sigma = -1.0;
    std::string out;
    std::string sharp_out;
};

int run_generate(const GenerateArgs& a) {
    ModelParams params{GridShape(a.n), ChannelSpec::defaults_for(a.n), a.seed};
    params.channel.xy_mode = xy_mode_from_string(a.xy_mode);
    if (a.edge_sigma >= 0.0) params.channel.edge_sigma = a.edge_sigma;
    const auto model = generate_model_detailed(params);
    write_field(model.field, a.out);
    if (!a.sharp_out.empty()) write_field(model.sharp, a.sharp_out);
    std::cout << "wrote " << a.out << " (" << a.n << "x" << a.n << ", " << model.pieces.size()
              << " pieces, attempt " << model.attempts << ")\n";
    return 0;
}

struct SolveArgs {
    std::string field;
    std::string out;
    std::string report;
    double ratio_tol = kDefaultRatioTol;
};

int run_solve(const SolveArgs& a) {
    const auto field = read_field(a.field);
    const auto r = solve(field);
    const bool ok = validate(r, a.ratio_tol);
    if (!a.out.empty()) write_pressure(r.phi, a.out);
    ojson j{{"n", field.n()},
            {"f", r.f},
            {"validation_ratio", finite_or_null(r.validation_ratio)},
            {"ratio_tol", a.ratio_tol},
            {"admissible", ok},
            {"residual_norm", r.residual_norm},
            {"seconds", r.seconds},
            {"flow_profile", r.flow_profile}};
    if (!a.report.empty()) write_text_atomic(a.report, j.dump(2) + "\n");
    std::cout << "f = " << r.f << "\nvalidation ratio = " << r.validation_ratio
              << (ok ? " (admissible)" : " (NOT admissible)") << "\nresidual = " << r.residual_norm << "\n";
    return 0;
}

struct UpscaleArgs {
    std::string field;
    std::string method = "MG";
    int n_block = 2;
    int n_target = 32;
    std::string out;
    std::string timing;
    bool kk_as_printed = false;
};

int run_upscale(const UpscaleArgs& a) {
    const auto field = read_field(a.field);
    const UpscalePlan plan{method_from_string(a.method), a.n_block, a.n_target, a.kk_as_printed};
    const auto result = run_plan(field, plan);
    write_field(result.final_field(), a.out);
    if (!a.timing.empty()) {
        ojson j{{"method", to_string(plan.method)},
                {"n", field.n()},
                {"n_block", plan.n_block},
                {"n_target", plan.n_target},
                {"sweeps", result.levels.size()},
                {"sweep_seconds", result.sweep_seconds},
                {"cost_model", cost_model(field.n(), plan.n_block, plan.n_target, plan.method)},
                {"max_asymmetry", result.max_asymmetry}};
        write_text_atomic(a.timing, j.dump(2) + "\n");
    }
    std::cout << to_string(plan.method) << ": " << field.n() << " -> " << plan.n_target << " in "
              << result.levels.size() << " sweeps\n";
    return 0;
}

struct OracleArgs {
    std::string field;
    int kc = 2;
    std::vector<int> mode{1, 0};
    std::string report;
};

int run_oracle(const OracleArgs& a) {
    const auto field = read_field(a.field);
    const auto op = build_spectral(field);
    if (a.mode.size() != 2) throw ConfigError("--mode takes two integers");
    const Mode m{a.mode[0], a.mode[1]};
    if (!is_low_mode(m, a.kc)) throw ConfigError("--mode must lie inside the cutoff");
    const auto exact = verify_low_mode_exactness(field, a.kc, unit_source(op, m));
    const auto reduced = reduce_operator(op, a.kc);
    ojson j{{"n", field.n()},
            {"kc", a.kc},
            {"source_mode", a.mode},
            {"hermitian_error", relative_difference(op.matrix, op.matrix.adjoint())},
            {"reduced_hermitian_error", relative_difference(reduced.matrix, reduced.matrix.adjoint())},
            {"max_deviation", exact.max_deviation},
            {"relative_deviation", exact.relative_deviation},
            {"high_block_condition", exact.high_block_condition}};
    if (a.kc > 1) {
        const auto direct = reduce_operator(op, a.kc - 1);
        j["nesting_error"] = relative_difference(reduce_operator(reduced, a.kc - 1).matrix, direct.matrix);
    }
    const auto text = j.dump(2) + "\n";
    if (!a.report.empty()) write_text_atomic(a.report, text);
    std::cout << text;
    return 0;
}

struct SurveyArgs {
    std::string config;
    std::string out = "results";
    int parallelism = 0;
};

void print_panels(const SurveyReport& report) {
    std::cout << "admissible " << report.admissible << " / " << report.records.size() << "\n";
    for (const auto& p : report.panels)
        std::cout << "  " << to_string(p.method) << " " << p.resolution << ": n=" << p.count
                  << " median|e|=" << p.median_abs << " median e=" << p.bias.median
                  << " P(e<0)=" << p.bias.negative_fraction << "\n";
}

int run_survey_cmd(const SurveyArgs& a) {
    auto config = survey_config_from_json(slurp(a.config));
    if (a.parallelism > 0) config.parallelism = a.parallelism;
    config.validate();
    const auto run = run_survey(config);
    emit_report(run.report, a.out);
    write_text_atomic(std::filesystem::path(a.out) / "timing.json", timing_json(run.timing));
    if (run.report.aborted) {
        std::cerr << "survey aborted: only " << run.report.admissible << " of " << run.report.records.size()
                  << " exact solves admissible\n";
        return kExitAborted;
    }
    print_panels(run.report);
    return 0;
}

struct ReportArgs {
    std::string in;
    std::string out;
};

int run_report(const ReportArgs& a) {
    const auto report = report_from_json(slurp(a.in));
    emit_report(report, a.out);
    print_panels(report);
    return report.aborted ? kExitAborted : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Darcy flow solver, permeability upscaling and ensemble surveys"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "draw a percolating channel model");
    g->add_option("--n", gen.n, "grid size")->default_val(128);
    g->add_option("--seed", gen.seed, "model seed")->default_val(1);
    g->add_option("--xy-mode", gen.xy_mode, "zero or finite")->default_val("zero");
    g->add_option("--edge-sigma", gen.edge_sigma, "edge resolution in cells (0 keeps step edges)");
    g->add_option("--out", gen.out, "output field file")->required();
    g->add_option("--sharp-out", gen.sharp_out, "also write the step-edged rasterization");

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "solve Darcy flow across x");
    s->add_option("--field", sol.field)->required();
    s->add_option("--out", sol.out, "pressure output file");
    s->add_option("--report", sol.report, "JSON summary with the column profile");
    s->add_option("--ratio-tol", sol.ratio_tol)->default_val(kDefaultRatioTol);

    UpscaleArgs up;
    auto* u = app.add_subcommand("upscale", "coarsen a field by repeated block decimation");
    u->add_option("--field", up.field)->required();
    u->add_option("--method", up.method, "mg, kk or mean")->default_val("mg");
    u->add_option("--n-block", up.n_block)->default_val(2);
    u->add_option("--n-target", up.n_target)->default_val(32);
    u->add_option("--out", up.out)->required();
    u->add_option("--timing", up.timing, "per-sweep timing JSON");
    u->add_flag("--kk-as-printed", up.kk_as_printed, "use the uncorrected KK transcription");

    OracleArgs orc;
    auto* o = app.add_subcommand("oracle", "check the spectral Schur reduction on a small periodic field");
    o->add_option("--field", orc.field)->required();
    o->add_option("--kc", orc.kc)->default_val(2);
    o->add_option("--mode", orc.mode, "source wavenumber mx my")->expected(2);
    o->add_option("--report", orc.report);

    SurveyArgs sur;
    auto* v = app.add_subcommand("survey", "run an upscaling error survey");
    v->add_option("--config", sur.config)->required();
    v->add_option("--out", sur.out)->default_val("results");
    v->add_option("--parallelism", sur.parallelism, "override the worker count");

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "regenerate CSV and SVG output from report.json");
    r->add_option("--in", rep.in)->required();
    r->add_option("--out", rep.out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (g->parsed()) return run_generate(gen);
        if (s->parsed()) return run_solve(sol);
        if (u->parsed()) return run_upscale(up);
        if (o->parsed()) return run_oracle(orc);
        if (v->parsed()) return run_survey_cmd(sur);
        if (r->parsed()) return run_report(rep);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
