#include "survsynth/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include <CLI11.hpp>

#include "survsynth/error.hpp"

namespace survsynth {

namespace {

std::filesystem::path resolve(const Json& j, const std::string& where, const std::filesystem::path& base) {
    if (!j.is_string() || j.get<std::string>().empty()) throw SchemaError(where + " must be a non-empty path string");
    std::filesystem::path p = j.get<std::string>();
    return p.is_absolute() ? p : base / p;
}

const Json& required(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
    return j.at(key);
}

bool flag(const Json& j, const char* key) {
    if (!j.contains(key)) return false;
    if (!j.at(key).is_boolean()) throw SchemaError(std::string(key) + " must be true or false");
    return j.at(key).get<bool>();
}

std::vector<std::string> strings(const Json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw SchemaError(where + " must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

const ColumnSpec& column(const Schema& schema, const std::string& name, const std::string& where) {
    for (const auto& c : schema)
        if (c.name == name) return c;
    throw SchemaError(where + " references unknown column '" + name + "'");
}

std::string outcome_column(const Schema& schema, Role role) {
    for (const auto& c : schema)
        if (c.role == role) return c.name;
    throw SchemaError("schema has no " + std::string(to_string(role)) + " column");
}

std::string fixed(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

void progress(RunLog& log, const std::string& message) {
    if (log.verbose) log.err << "[survsynth] " << message << '\n';
}

void print_fit_summary(std::ostream& out, const RoystonParmarModel& m) {
    const FitInfo& f = m.fit_info;
    out << "log-likelihood: " << format_number(f.log_likelihood) << " (initial " << format_number(f.initial_log_likelihood)
        << ")\n";
    out << "converged: " << (f.converged ? "yes" : "no") << ", iterations " << f.iterations << ", relative gradient "
        << fixed("%.3g", f.relative_gradient) << '\n';
    out << "events: " << f.n_events << " of " << f.n_obs << '\n';
    out << "knots (log time): " << format_number(m.knots.k_min);
    for (double k : m.knots.internal) out << ", " << format_number(k);
    out << ", " << format_number(m.knots.k_max) << '\n';
    out << "coefficients:\n";
    for (std::size_t j = 0; j < m.gamma.size(); ++j)
        out << "  gamma" << j << "  " << fixed("%12.6f", m.gamma[j]) << '\n';
    for (std::size_t j = 0; j < m.beta.size(); ++j)
        out << "  " << m.design_legend[j] << "  " << fixed("%12.6f", m.beta[j]) << '\n';
    for (const auto& w : f.warnings) out << "warning: " << w << '\n';
}

} // namespace

PipelineConfig parse_config(const Json& j, const std::filesystem::path& base_dir) {
    require_keys_subset(j,
                        {"input_csv", "schema", "model", "synthesis", "window", "seed", "strata", "outputs",
                         "emit_cause", "interactions", "threshold"},
                        "config");
    PipelineConfig cfg;
    cfg.input_csv = resolve(required(j, "input_csv", "config"), "input_csv", base_dir);
    cfg.schema = schema_from_json(required(j, "schema", "config"));

    const Json& seed = required(j, "seed", "config");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
        throw SchemaError("seed must be a non-negative integer");
    cfg.seed = seed.get<std::uint64_t>();

    const Json& model = required(j, "model", "config");
    require_keys_subset(model, {"df", "knots", "predictors", "max_iter", "tol"}, "model");
    if (model.contains("df") == model.contains("knots")) throw SchemaError("model needs exactly one of \"df\" or \"knots\"");
    if (model.contains("df")) {
        const Json& df = model.at("df");
        if (!df.is_number_integer() || df.get<int>() < 1 || df.get<int>() > 4)
            throw SchemaError("model.df must be an integer from 1 to 4; give explicit knots for more");
        cfg.knots = df.get<int>();
    } else {
        cfg.knots = knots_from_json(model.at("knots"));
    }
    cfg.predictors = strings(required(model, "predictors", "model"), "model.predictors");
    if (model.contains("max_iter")) {
        if (!model.at("max_iter").is_number_integer() || model.at("max_iter").get<int>() < 1)
            throw SchemaError("model.max_iter must be a positive integer");
        cfg.fit.max_iter = model.at("max_iter").get<int>();
    }
    if (model.contains("tol")) {
        if (!model.at("tol").is_number() || !(model.at("tol").get<double>() > 0))
            throw SchemaError("model.tol must be a positive number");
        cfg.fit.tol = model.at("tol").get<double>();
    }

    cfg.plan = plan_from_json(j.contains("synthesis") ? j.at("synthesis") : Json(), cfg.schema);
    cfg.plan.seed = cfg.seed + kSynthesisSeedOffset;
    const auto generated = output_columns(cfg.schema, cfg.plan);
    for (const auto& p : cfg.predictors) {
        const ColumnSpec& c = column(cfg.schema, p, "model.predictors");
        if (c.role == Role::surv_time || c.role == Role::event || c.role == Role::ignore)
            throw SchemaError("model predictor '" + p + "' has role " + std::string(to_string(c.role)));
        if (std::find(generated.begin(), generated.end(), p) == generated.end())
            throw SchemaError("model predictor '" + p + "' is neither synthesized nor passed through");
    }

    const Json& window = required(j, "window", "config");
    require_keys_subset(window, {"study_span"}, "window");
    const Json& span = required(window, "study_span", "window");
    if (!span.is_number() || !(span.get<double>() > 0)) throw SchemaError("window.study_span must be a positive number");
    cfg.window.study_span = span.get<double>();

    if (j.contains("strata")) {
        if (!j.at("strata").is_array()) throw SchemaError("strata must be an array");
        for (const auto& s : j.at("strata")) {
            require_keys_subset(s, {"column", "cuts"}, "strata entry");
            const Json& name = required(s, "column", "strata entry");
            if (!name.is_string()) throw SchemaError("strata column must be a string");
            StratumSpec spec{name.get<std::string>(), {}};
            if (s.contains("cuts")) {
                if (!s.at("cuts").is_array()) throw SchemaError("strata cuts must be an array of numbers");
                for (const auto& c : s.at("cuts")) {
                    if (!c.is_number()) throw SchemaError("strata cuts must be an array of numbers");
                    spec.cuts.push_back(c.get<double>());
                }
            }
            const ColumnSpec& c = column(cfg.schema, spec.column, "strata");
            if (c.role == Role::surv_time || c.role == Role::event || c.role == Role::ignore)
                throw SchemaError("cannot stratify on '" + spec.column + "'");
            if (std::find(generated.begin(), generated.end(), spec.column) == generated.end())
                throw SchemaError("stratum column '" + spec.column + "' is not part of the synthetic cohort");
            stratum_levels(c, spec);
            cfg.strata.push_back(std::move(spec));
        }
    }

    const Json& outputs = required(j, "outputs", "config");
    require_keys_subset(outputs, {"synthetic_csv", "model_json", "report_json", "report_txt", "km_csv"}, "outputs");
    cfg.outputs.synthetic_csv = resolve(required(outputs, "synthetic_csv", "outputs"), "outputs.synthetic_csv", base_dir);
    cfg.outputs.model_json = resolve(required(outputs, "model_json", "outputs"), "outputs.model_json", base_dir);
    cfg.outputs.report_json = resolve(required(outputs, "report_json", "outputs"), "outputs.report_json", base_dir);
    cfg.outputs.report_txt = resolve(required(outputs, "report_txt", "outputs"), "outputs.report_txt", base_dir);
    cfg.outputs.km_csv = resolve(required(outputs, "km_csv", "outputs"), "outputs.km_csv", base_dir);

    cfg.emit_cause = flag(j, "emit_cause");
    cfg.interactions = flag(j, "interactions");
    if (j.contains("threshold")) {
        if (!j.at("threshold").is_number() || !(j.at("threshold").get<double>() > 0))
            throw SchemaError("threshold must be a positive number");
        cfg.threshold = j.at("threshold").get<double>();
    }
    if (cfg.emit_cause)
        for (const auto& c : cfg.schema)
            if (c.name == "cause") throw SchemaError("emit_cause needs the column name 'cause', which the schema already uses");
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_json_file(path), path.parent_path());
}

Schema synthetic_schema(const PipelineConfig& config) {
    const auto generated = output_columns(config.schema, config.plan);
    Schema out;
    for (const auto& c : config.schema)
        if (c.role == Role::surv_time || c.role == Role::event ||
            std::find(generated.begin(), generated.end(), c.name) != generated.end())
            out.push_back(c);
    return out;
}

RoystonParmarModel cmd_fit(const PipelineConfig& config, RunLog& log) {
    progress(log, "loading " + config.input_csv.string());
    Dataset data = load_dataset(config.input_csv, config.schema);
    progress(log, "fitting survival model on " + std::to_string(data.n_rows()) + " rows");
    RoystonParmarModel model = fit(data, config.knots, config.predictors, config.fit);
    write_text_file(config.outputs.model_json, dump_json(model_to_json(model)));
    progress(log, "wrote " + config.outputs.model_json.string());
    print_fit_summary(log.out, model);
    return model;
}

Dataset cmd_synthesize(const PipelineConfig& config, RunLog& log) {
    progress(log, "reading model " + config.outputs.model_json.string());
    RoystonParmarModel model = model_from_json(read_json_file(config.outputs.model_json));
    if (!model.fit_info.monotone || !is_monotone(model.knots, model.gamma))
        throw ModelContractError("refusing to simulate: the model's cumulative hazard is not increasing over the knot "
                                 "range, so survival times cannot be obtained by inversion; refit with different knots");
    Dataset data = load_dataset(config.input_csv, config.schema);
    progress(log, "fitting conditional models");
    FittedSynthesizer synth = fit_synthesizer(data, config.plan);
    for (const auto& w : synth.warnings()) log.err << "warning: " << w << '\n';
    const std::size_t n = synthetic_size(config.plan, data.n_rows());
    progress(log, "generating " + std::to_string(n) + " synthetic rows");
    Dataset covariates = generate(synth, n, config.seed + kSynthesisSeedOffset);
    SimulateOptions sim;
    sim.time_column = outcome_column(config.schema, Role::surv_time);
    sim.status_column = outcome_column(config.schema, Role::event);
    sim.emit_cause = config.emit_cause;
    Dataset cohort = simulate_cohort(model, covariates, config.window, config.seed + kSimulationSeedOffset, sim);
    write_text_file(config.outputs.synthetic_csv, format_dataset(cohort));
    progress(log, "wrote " + config.outputs.synthetic_csv.string());

    auto status = cohort.column(sim.status_column);
    const auto deaths = static_cast<std::size_t>(std::count(status.begin(), status.end(), 1.0));
    log.out << "synthetic cohort: " << cohort.n_rows() << " rows, " << deaths << " deaths, " << cohort.n_rows() - deaths
            << " censored\n";
    return cohort;
}

UtilityReport cmd_evaluate(const PipelineConfig& config, RunLog& log) {
    Dataset original = load_dataset(config.input_csv, config.schema);
    progress(log, "loading " + config.outputs.synthetic_csv.string());
    Dataset synthetic = load_dataset(config.outputs.synthetic_csv, synthetic_schema(config));
    ReportOptions options;
    options.propensity.interactions = config.interactions;
    options.threshold = config.threshold;
    UtilityReport report = compare_report(original, synthetic, config.plan, config.strata, options);
    const std::string table = render_report_table(report);
    write_text_file(config.outputs.report_json, dump_json(report_to_json(report)));
    write_text_file(config.outputs.report_txt, table);
    write_text_file(config.outputs.km_csv, render_km_csv(report));
    progress(log, "wrote report to " + config.outputs.report_txt.string());
    if (log.verbose) log.out << table;
    log.out << "log-rank p: " << fixed("%.4g", report.overall_logrank.p_value) << '\n';
    log.out << report.n_above_threshold() << " variables above threshold\n";
    return report;
}

void cmd_pipeline(const PipelineConfig& config, RunLog& log) {
    cmd_fit(config, log);
    cmd_synthesize(config, log);
    cmd_evaluate(config, log);
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ModelContractError*>(&e)) return 3;
    if (dynamic_cast<const NumericalError*>(&e)) return 4;
    if (dynamic_cast<const SchemaError*>(&e)) return 2;
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
    return 1;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fit a spline survival model, synthesize a cohort and score its utility."};
    app.footer("Exit codes: 0 ok, 2 config/schema error, 3 model contract violation, 4 numerical failure.\n"
               "Seeds: the config seed drives every stage. Covariate synthesis uses seed + 1,\n"
               "survival-time simulation uses seed + 2 (row i draws from its own stream).");
    app.require_subcommand(1);
    std::string config_path;
    bool verbose = false;
    const std::pair<const char*, const char*> commands[] = {
        {"fit", "Fit the survival model and write the model JSON"},
        {"synthesize", "Synthesize covariates and simulate outcomes from the model JSON"},
        {"evaluate", "Compare the synthetic cohort with the original"},
        {"pipeline", "Run fit, synthesize and evaluate in order"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Pipeline config (JSON)")->required();
        sub->add_flag("--verbose", verbose, "Report progress on stderr");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    RunLog log{out, err, verbose};
    try {
        PipelineConfig config = load_config(config_path);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "fit") cmd_fit(config, log);
        else if (cmd == "synthesize") cmd_synthesize(config, log);
        else if (cmd == "evaluate") cmd_evaluate(config, log);
        else cmd_pipeline(config, log);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}

} // namespace survsynth
