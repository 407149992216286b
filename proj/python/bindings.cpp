#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "survsynth/error.hpp"
#include "survsynth/fcs.hpp"
#include "survsynth/pipeline.hpp"
#include "survsynth/serialization.hpp"
#include "survsynth/simulate.hpp"
#include "survsynth/survival_model.hpp"
#include "survsynth/utility.hpp"

namespace py = pybind11;
using namespace survsynth;

// Datasets cross the boundary as CSV text plus a schema JSON string; models
// and plans as JSON strings.

namespace {

Dataset parse(const std::string& csv, const std::string& schema_json) {
    return parse_dataset(csv, schema_from_json(Json::parse(schema_json), false), false);
}

py::dict test_dict(const TestResult& r) {
    py::dict d;
    d["test"] = r.test_name;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["df"] = r.df;
    return d;
}

py::dict logrank_dict(const LogrankResult& r) {
    py::dict d;
    d["chi_sq"] = r.chi_sq;
    d["p_value"] = r.p_value;
    d["observed"] = r.observed_a;
    d["expected"] = r.expected_a;
    d["variance"] = r.variance;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spline survival models, covariate synthesis and utility measures";

    auto base = py::register_exception<Error>(m, "SurvSynthError");
    py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
    py::register_exception<ModelContractError>(m, "ModelContractError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def(
        "read_columns",
        [](const std::string& csv, const std::string& schema_json) {
            Dataset d = parse(csv, schema_json);
            py::dict out;
            for (const auto& c : d.schema()) {
                auto col = d.column(c.name);
                out[py::str(c.name)] = std::vector<double>(col.begin(), col.end());
            }
            return out;
        },
        py::arg("csv"), py::arg("schema_json"), "Parse CSV text into {column: values}; discrete columns as level codes.");

    m.def(
        "fit",
        [](const std::string& csv, const std::string& schema_json, const std::vector<std::string>& predictors, int df,
           const std::string& knots_json, int max_iter, double tol) {
            Dataset d = parse(csv, schema_json);
            KnotChoice knots = df;
            if (!knots_json.empty()) knots = knots_from_json(Json::parse(knots_json));
            FitOptions opts;
            opts.max_iter = max_iter;
            opts.tol = tol;
            return dump_json(model_to_json(fit(d, knots, predictors, opts)));
        },
        py::arg("csv"), py::arg("schema_json"), py::arg("predictors"), py::arg("df") = 1, py::arg("knots_json") = "",
        py::arg("max_iter") = 500, py::arg("tol") = 1e-5, "Fit the spline survival model; returns the model JSON.");

    m.def(
        "predict",
        [](const std::string& model_json, double t, const std::vector<double>& z) {
            SurvivalPrediction p = predict(model_from_json(Json::parse(model_json)), t, z);
            py::dict d;
            d["time"] = p.time;
            d["survival"] = p.survival;
            d["cumulative_hazard"] = p.cumulative_hazard;
            d["hazard"] = p.hazard;
            return d;
        },
        py::arg("model_json"), py::arg("t"), py::arg("z") = std::vector<double>{});

    m.def(
        "synthesize",
        [](const std::string& csv, const std::string& schema_json, const std::string& plan_json, std::uint64_t seed,
           long long n) {
            Dataset d = parse(csv, schema_json);
            SynthesisPlan plan = plan_from_json(plan_json.empty() ? Json() : Json::parse(plan_json), d.schema());
            plan.seed = seed;
            FittedSynthesizer s = fit_synthesizer(d, plan);
            const std::size_t rows = n > 0 ? static_cast<std::size_t>(n) : synthetic_size(plan, d.n_rows());
            return format_dataset(generate(s, rows, seed));
        },
        py::arg("csv"), py::arg("schema_json"), py::arg("plan_json") = "", py::arg("seed") = 0, py::arg("n") = -1,
        "Synthesize the plan's columns; returns CSV text.");

    m.def(
        "simulate",
        [](const std::string& model_json, const std::string& csv, const std::string& schema_json, double study_span,
           std::uint64_t seed, bool emit_cause) {
            SimulateOptions opts;
            opts.emit_cause = emit_cause;
            return format_dataset(
                simulate_cohort(model_from_json(Json::parse(model_json)), parse(csv, schema_json), {study_span}, seed, opts));
        },
        py::arg("model_json"), py::arg("csv"), py::arg("schema_json"), py::arg("study_span"), py::arg("seed"),
        py::arg("emit_cause") = false, "Append simulated time/status (and cause) columns; returns CSV text.");

    m.def("pmse", [](const std::vector<double>& p, double c) { return pmse(p, c); }, py::arg("p_hat"), py::arg("c"));
    m.def(
        "null_pmse_moments",
        [](std::size_t mm, std::size_t n) {
            NullMoments r = null_pmse_moments(mm, n);
            return py::make_tuple(r.expected, r.variance);
        },
        py::arg("m"), py::arg("n"));
    m.def(
        "km_estimate",
        [](const std::vector<double>& t, const std::vector<double>& e) {
            KMCurve k = km_estimate(t, e);
            py::dict d;
            d["times"] = k.times;
            d["survival"] = k.survival;
            d["ci_low"] = k.ci_low;
            d["ci_high"] = k.ci_high;
            d["at_risk"] = k.at_risk;
            d["events"] = k.events;
            return d;
        },
        py::arg("times"), py::arg("events"));
    m.def(
        "logrank_test",
        [](const std::vector<double>& ta, const std::vector<double>& ea, const std::vector<double>& tb,
           const std::vector<double>& eb) { return logrank_dict(logrank_test({ta, ea}, {tb, eb})); },
        py::arg("times_a"), py::arg("events_a"), py::arg("times_b"), py::arg("events_b"));
    m.def(
        "welch_t", [](const std::vector<double>& x, const std::vector<double>& y) { return test_dict(welch_t(x, y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "mann_whitney",
        [](const std::vector<double>& x, const std::vector<double>& y) { return test_dict(mann_whitney(x, y)); },
        py::arg("x"), py::arg("y"));
    m.def(
        "prop_test",
        [](std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) { return test_dict(prop_test(k1, n1, k2, n2)); },
        py::arg("k1"), py::arg("n1"), py::arg("k2"), py::arg("n2"));
    m.def(
        "ks_two_sample",
        [](const std::vector<double>& x, const std::vector<double>& y) { return test_dict(ks_two_sample(x, y)); },
        py::arg("x"), py::arg("y"));

    m.def(
        "propensity_utility",
        [](const std::string& original_csv, const std::string& synthetic_csv, const std::string& schema_json,
           const std::vector<std::string>& variables, bool interactions) {
            PropensityOptions opts;
            opts.interactions = interactions;
            PropensityResult r =
                propensity_utility(parse(original_csv, schema_json), parse(synthetic_csv, schema_json), variables, opts);
            py::dict d;
            d["pmse"] = r.pmse;
            d["expected_null"] = r.expected_null;
            d["var_null"] = r.var_null;
            d["s_pmse_ratio"] = r.s_pmse_ratio;
            d["s_pmse_z"] = r.s_pmse_z;
            d["m"] = r.m;
            d["n"] = r.n;
            d["separated"] = r.separated;
            return d;
        },
        py::arg("original_csv"), py::arg("synthetic_csv"), py::arg("schema_json"), py::arg("variables"),
        py::arg("interactions") = false);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> full{"survsynth"};
            full.insert(full.end(), args.begin(), args.end());
            std::vector<const char*> argv;
            for (const auto& a : full) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line in-process; returns (exit code, stdout, stderr).");
}
