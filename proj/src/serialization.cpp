#include "survsynth/serialization.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "survsynth/error.hpp"

namespace survsynth {

namespace {

// Non-finite doubles have no JSON literal; they become null.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <class E = SchemaError>
const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw E(where + ": missing \"" + key + "\"");
    return j.at(key);
}

template <class E = SchemaError>
double as_double(const Json& j, const std::string& where) {
    if (!j.is_number()) throw E(where + " must be a number");
    return j.get<double>();
}

template <class E = SchemaError>
std::vector<double> as_doubles(const Json& j, const std::string& where) {
    if (!j.is_array()) throw E(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_double<E>(v, where));
    return out;
}

template <class E = SchemaError>
std::vector<std::string> as_strings(const Json& j, const std::string& where) {
    if (!j.is_array()) throw E(where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw E(where + " must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace

void require_keys_subset(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw SchemaError(where + ": unknown key \"" + key + "\"");
    }
}

Json schema_to_json(const Schema& schema) {
    Json out = Json::array();
    for (const auto& c : schema) {
        Json col = {{"name", c.name}, {"role", to_string(c.role)}, {"kind", to_string(c.kind)}};
        if (!c.levels.empty()) col["levels"] = c.levels;
        out.push_back(std::move(col));
    }
    return out;
}

Schema schema_from_json(const Json& j, bool require_outcome) {
    if (!j.is_array() || j.empty()) throw SchemaError("schema must be a non-empty array of column objects");
    Schema schema;
    for (const auto& col : j) {
        require_keys_subset(col, {"name", "role", "kind", "levels"}, "schema column");
        const Json& name = field(col, "name", "schema column");
        if (!name.is_string()) throw SchemaError("schema column name must be a string");
        const std::string where = "schema column '" + name.get<std::string>() + "'";
        ColumnSpec spec;
        spec.name = name.get<std::string>();
        const Json& role = field(col, "role", where);
        const Json& kind = field(col, "kind", where);
        if (!role.is_string() || !kind.is_string()) throw SchemaError(where + ": role and kind must be strings");
        spec.role = parse_role(role.get<std::string>());
        spec.kind = parse_kind(kind.get<std::string>());
        if (col.contains("levels")) spec.levels = as_strings(col.at("levels"), where + " levels");
        schema.push_back(std::move(spec));
    }
    validate_schema(schema, require_outcome);
    return schema;
}

Json knots_to_json(const KnotSet& knots) {
    return {{"k_min", knots.k_min}, {"k_max", knots.k_max}, {"internal", knots.internal}};
}

KnotSet knots_from_json(const Json& j) {
    require_keys_subset(j, {"k_min", "k_max", "internal"}, "knots");
    KnotSet k;
    k.k_min = as_double(field(j, "k_min", "knots"), "knots.k_min");
    k.k_max = as_double(field(j, "k_max", "knots"), "knots.k_max");
    if (j.contains("internal")) k.internal = as_doubles(j.at("internal"), "knots.internal");
    k.validate();
    return k;
}

Json model_to_json(const RoystonParmarModel& model) {
    const FitInfo& f = model.fit_info;
    Json info = {{"log_likelihood", number(f.log_likelihood)},
                 {"initial_log_likelihood", number(f.initial_log_likelihood)},
                 {"converged", f.converged},
                 {"n_events", f.n_events},
                 {"n_obs", f.n_obs},
                 {"iterations", f.iterations},
                 {"relative_gradient", number(f.relative_gradient)},
                 {"monotone", f.monotone},
                 {"warnings", f.warnings}};
    return {{"knots", knots_to_json(model.knots)},
            {"gamma", model.gamma},
            {"beta", model.beta},
            {"design_legend", model.design_legend},
            {"predictors", model.predictors},
            {"fit_info", std::move(info)}};
}

RoystonParmarModel model_from_json(const Json& j) {
    using E = ModelContractError;
    if (!j.is_object()) throw E("model document must be a JSON object");
    RoystonParmarModel m;
    try {
        m.knots = knots_from_json(field<E>(j, "knots", "model"));
    } catch (const SchemaError& e) {
        throw E(std::string("model knots: ") + e.what());
    }
    m.gamma = as_doubles<E>(field<E>(j, "gamma", "model"), "model gamma");
    m.beta = as_doubles<E>(field<E>(j, "beta", "model"), "model beta");
    m.design_legend = as_strings<E>(field<E>(j, "design_legend", "model"), "model design_legend");
    m.predictors = as_strings<E>(field<E>(j, "predictors", "model"), "model predictors");
    if (j.contains("fit_info")) {
        const Json& f = j.at("fit_info");
        auto num = [&](const char* key) {
            return f.contains(key) && f.at(key).is_number() ? f.at(key).get<double>() : 0.0;
        };
        m.fit_info.log_likelihood = num("log_likelihood");
        m.fit_info.initial_log_likelihood = num("initial_log_likelihood");
        m.fit_info.relative_gradient = num("relative_gradient");
        m.fit_info.n_events = static_cast<std::size_t>(num("n_events"));
        m.fit_info.n_obs = static_cast<std::size_t>(num("n_obs"));
        m.fit_info.iterations = static_cast<int>(num("iterations"));
        if (f.contains("converged") && f.at("converged").is_boolean()) m.fit_info.converged = f.at("converged").get<bool>();
        if (f.contains("monotone") && f.at("monotone").is_boolean()) m.fit_info.monotone = f.at("monotone").get<bool>();
        if (f.contains("warnings")) m.fit_info.warnings = as_strings<E>(f.at("warnings"), "model fit_info warnings");
    }
    m.validate();
    return m;
}

SynthesisPlan plan_from_json(const Json& j, const Schema& schema) {
    const Json empty = Json::object();
    const Json& s = j.is_null() ? empty : j;
    require_keys_subset(s, {"seq", "pred", "methods", "method_params", "n_multiplier", "passthrough"}, "synthesis");
    SynthesisPlan plan = default_plan(schema);
    if (s.contains("seq")) plan.seq = as_strings(s.at("seq"), "synthesis.seq");
    if (s.contains("passthrough")) plan.passthrough = as_strings(s.at("passthrough"), "synthesis.passthrough");
    if (s.contains("n_multiplier")) plan.n_multiplier = as_double(s.at("n_multiplier"), "synthesis.n_multiplier");

    plan.pred.clear();
    for (std::size_t t = 0; t < plan.seq.size(); ++t) {
        std::vector<std::string> preds(plan.seq.begin(), plan.seq.begin() + static_cast<std::ptrdiff_t>(t));
        preds.insert(preds.end(), plan.passthrough.begin(), plan.passthrough.end());
        plan.pred[plan.seq[t]] = std::move(preds);
    }
    if (s.contains("pred")) {
        const Json& p = s.at("pred");
        if (!p.is_object()) throw SchemaError("synthesis.pred must map target names to predictor lists");
        for (const auto& [target, preds] : p.items()) plan.pred[target] = as_strings(preds, "synthesis.pred." + target);
    }

    std::map<std::string, std::string> methods;
    for (const auto& name : plan.seq)
        for (const auto& c : schema)
            if (c.name == name) methods[name] = default_method(c.kind);
    if (s.contains("methods")) {
        const Json& m = s.at("methods");
        if (!m.is_object()) throw SchemaError("synthesis.methods must map target names to method names");
        for (const auto& [target, method] : m.items()) {
            if (!method.is_string()) throw SchemaError("synthesis.methods." + target + " must be a string");
            methods[target] = method.get<std::string>();
        }
    }
    plan.method = std::move(methods);

    if (s.contains("method_params")) {
        const Json& mp = s.at("method_params");
        if (!mp.is_object()) throw SchemaError("synthesis.method_params must be an object");
        for (const auto& [target, params] : mp.items()) {
            if (!params.is_object()) throw SchemaError("synthesis.method_params." + target + " must be an object");
            for (const auto& [key, value] : params.items()) {
                const std::string where = "synthesis.method_params." + target + "." + key;
                plan.method_params[target][key] =
                    value.is_array() ? as_doubles(value, where) : std::vector<double>{as_double(value, where)};
            }
        }
    }
    validate_plan(schema, plan);
    return plan;
}

Json plan_to_json(const SynthesisPlan& plan) {
    Json params = Json::object();
    for (const auto& [target, p] : plan.method_params) params[target] = p;
    return {{"seq", plan.seq},       {"pred", plan.pred},
            {"methods", plan.method}, {"method_params", params},
            {"n_multiplier", plan.n_multiplier}, {"passthrough", plan.passthrough}};
}

Json report_to_json(const UtilityReport& report) {
    auto test_json = [](const TestResult& t) {
        return Json{{"test", t.test_name}, {"statistic", number(t.statistic)}, {"p_value", number(t.p_value)},
                    {"df", number(t.df)}};
    };
    auto logrank_json = [](const LogrankResult& l) {
        return Json{{"chi_sq", number(l.chi_sq)},         {"p_value", number(l.p_value)},
                    {"observed", number(l.observed_a)},   {"expected", number(l.expected_a)},
                    {"variance", number(l.variance)}};
    };
    Json rows = Json::array();
    for (const VariableRow& r : report.rows) {
        Json tests = Json::array();
        for (const auto& t : r.tests) tests.push_back(test_json(t));
        Json row = {{"name", r.name},
                    {"kind", to_string(r.kind)},
                    {"test_name", r.test_name()},
                    {"p_value", number(r.p_value())},
                    {"s_pmse_ratio", number(r.s_pmse_ratio)},
                    {"s_pmse_z", number(r.s_pmse_z)},
                    {"tests", std::move(tests)},
                    {"notices", r.notices}};
        if (r.kind == Kind::continuous) {
            row["original"] = r.original_summary;
            row["synthetic"] = r.synthetic_summary;
        } else {
            Json levels = Json::array();
            for (const auto& l : r.levels)
                levels.push_back({{"label", l.label}, {"original", l.original}, {"synthetic", l.synthetic}});
            row["levels"] = std::move(levels);
        }
        rows.push_back(std::move(row));
    }
    Json strata = Json::array();
    for (const StratumResult& s : report.strata) {
        Json item = {{"column", s.column},         {"stratum", s.label},   {"n_original", s.n_original},
                     {"n_synthetic", s.n_synthetic}, {"skipped", s.skipped}};
        if (s.skipped) item["notice"] = s.notice;
        else {
            item["chi_sq"] = number(s.chi_sq);
            item["p_value"] = number(s.p_value);
        }
        strata.push_back(std::move(item));
    }
    const PropensityResult& p = report.propensity;
    Json propensity = {{"pmse", number(p.pmse)},
                       {"expected_null", number(p.expected_null)},
                       {"var_null", number(p.var_null)},
                       {"s_pmse_ratio", number(p.s_pmse_ratio)},
                       {"s_pmse_z", number(p.s_pmse_z)},
                       {"m", p.m},
                       {"n", p.n},
                       {"c", number(p.c)},
                       {"separated", p.separated}};
    if (!p.diagnostic.empty()) propensity["diagnostic"] = p.diagnostic;
    return {{"n_original", report.n_original},
            {"n_synthetic", report.n_synthetic},
            {"variables", std::move(rows)},
            {"overall_logrank", logrank_json(report.overall_logrank)},
            {"stratified_logrank", std::move(strata)},
            {"propensity", std::move(propensity)},
            {"threshold", report.threshold},
            {"n_above_threshold", report.n_above_threshold()},
            {"notes", report.notes}};
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw SchemaError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write " + path.string());
    out << text;
    if (!out) throw SchemaError("failed writing " + path.string());
}

} // namespace survsynth
