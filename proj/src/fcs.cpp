#include "survsynth/fcs.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>

#include "survsynth/distributions.hpp"
#include "survsynth/error.hpp"
#include "survsynth/regression.hpp"
#include "survsynth/spline.hpp"

namespace survsynth {

namespace fcs_detail {

class ConditionalModel {
public:
    virtual ~ConditionalModel() = default;
    virtual double sample(std::span<const double> row, Rng& rng) const = 0;
};

} // namespace fcs_detail

namespace {

using fcs_detail::ConditionalModel;
using ModelPtr = std::shared_ptr<const ConditionalModel>;

constexpr int kPmmDonors = 5;

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, CustomMethod>& registry() {
    static std::map<std::string, CustomMethod> r;
    return r;
}

bool is_builtin(const std::string& name) {
    return std::find_if(std::begin(kBuiltinMethods), std::end(kBuiltinMethods),
                        [&](const char* m) { return name == m; }) != std::end(kBuiltinMethods);
}

std::optional<CustomMethod> find_custom(const std::string& name) {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) return std::nullopt;
    return it->second;
}

bool method_accepts(const std::string& method, Kind kind) {
    if (method == "logistic" || method == "lasso_logistic") return kind == Kind::binary;
    if (method == "polytomous") return kind == Kind::categorical || kind == Kind::ordered;
    if (method == "propodds") return kind == Kind::ordered;
    if (method == "lda") return kind != Kind::continuous;
    if (method == "normrank" || method == "pmm" || method == "linear" || method == "linear_prior" ||
        method == "lasso_linear")
        return kind == Kind::continuous;
    return true; // custom
}

double row_dot(const Eigen::VectorXd& coef, std::span<const double> row) {
    double eta = coef[0];
    for (std::size_t j = 0; j < row.size(); ++j) eta += coef[static_cast<Eigen::Index>(j + 1)] * row[j];
    return eta;
}

std::size_t draw_index(std::span<const double> probs, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        cum += probs[k];
        if (u < cum) return k;
    }
    return probs.size() - 1;
}

class ConstantModel final : public ConditionalModel {
public:
    explicit ConstantModel(double v) : value_(v) {}
    double sample(std::span<const double>, Rng&) const override { return value_; }

private:
    double value_;
};

class LogisticModel final : public ConditionalModel {
public:
    explicit LogisticModel(Eigen::VectorXd coef) : coef_(std::move(coef)) {}
    double sample(std::span<const double> row, Rng& rng) const override {
        const double p = 1.0 / (1.0 + std::exp(-row_dot(coef_, row)));
        return rng.bernoulli(p) ? 1.0 : 0.0;
    }

private:
    Eigen::VectorXd coef_;
};

// Class-probability models over the observed levels, mapped back to codes.
template <class Fit, auto Probabilities>
class ClassModel final : public ConditionalModel {
public:
    ClassModel(Fit fit, std::vector<double> codes) : fit_(std::move(fit)), codes_(std::move(codes)) {}
    double sample(std::span<const double> row, Rng& rng) const override {
        std::vector<double> probs = Probabilities(fit_, row);
        return codes_[draw_index(probs, rng)];
    }

private:
    Fit fit_;
    std::vector<double> codes_;
};

using MultinomialModel = ClassModel<regression::MultinomialFit, &regression::multinomial_probabilities>;
using PropOddsModel = ClassModel<regression::PropOddsFit, &regression::propodds_probabilities>;
using LdaModel = ClassModel<regression::LdaFit, &regression::lda_posterior>;

class GaussianModel final : public ConditionalModel {
public:
    GaussianModel(Eigen::VectorXd coef, double sigma) : coef_(std::move(coef)), sigma_(sigma) {}
    double sample(std::span<const double> row, Rng& rng) const override {
        return row_dot(coef_, row) + rng.normal(0.0, sigma_);
    }

private:
    Eigen::VectorXd coef_;
    double sigma_;
};

class NormRankModel final : public ConditionalModel {
public:
    NormRankModel(Eigen::VectorXd coef, double sigma, std::vector<double> sorted)
        : coef_(std::move(coef)), sigma_(sigma), sorted_(std::move(sorted)) {}
    double sample(std::span<const double> row, Rng& rng) const override {
        const double z = row_dot(coef_, row) + rng.normal(0.0, sigma_);
        const double v = quantile(sorted_, dist::normal_cdf(z));
        return std::clamp(v, sorted_.front(), sorted_.back());
    }

private:
    Eigen::VectorXd coef_;
    double sigma_;
    std::vector<double> sorted_;
};

class PmmModel final : public ConditionalModel {
public:
    PmmModel(Eigen::VectorXd coef, std::vector<std::pair<double, double>> donors)
        : coef_(std::move(coef)), donors_(std::move(donors)) {}
    double sample(std::span<const double> row, Rng& rng) const override {
        const double target = row_dot(coef_, row);
        // Grow a window of kPmmDonors nearest predicted values around the target.
        auto mid = std::lower_bound(donors_.begin(), donors_.end(), std::make_pair(target, -HUGE_VAL));
        auto lo = static_cast<std::ptrdiff_t>(mid - donors_.begin());
        auto hi = lo;
        const auto n = static_cast<std::ptrdiff_t>(donors_.size());
        while (hi - lo < kPmmDonors) {
            const bool can_left = lo > 0, can_right = hi < n;
            if (can_left && (!can_right || target - donors_[static_cast<std::size_t>(lo - 1)].first <=
                                               donors_[static_cast<std::size_t>(hi)].first - target))
                --lo;
            else
                ++hi;
        }
        const auto pick = lo + static_cast<std::ptrdiff_t>(rng.below(kPmmDonors));
        return donors_[static_cast<std::size_t>(pick)].second;
    }

private:
    Eigen::VectorXd coef_;
    std::vector<std::pair<double, double>> donors_; // (predicted, observed), sorted
};

// Empirical conditional sampling within strata of the predictor design.
class StrataModel final : public ConditionalModel {
public:
    StrataModel(std::vector<std::vector<double>> cuts, std::vector<bool> binned, const Eigen::MatrixXd& x,
                std::span<const double> y)
        : cuts_(std::move(cuts)), binned_(std::move(binned)), marginal_(y.begin(), y.end()) {
        std::vector<double> row(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
            strata_[key(row)].push_back(y[static_cast<std::size_t>(i)]);
        }
    }
    double sample(std::span<const double> row, Rng& rng) const override {
        auto it = strata_.find(key(row));
        const std::vector<double>& pool = (it != strata_.end() && it->second.size() >= kMinStratum) ? it->second : marginal_;
        return pool[rng.below(pool.size())];
    }

private:
    static constexpr std::size_t kMinStratum = 5;

    std::vector<double> key(std::span<const double> row) const {
        std::vector<double> k(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (!binned_[j]) {
                k[j] = row[j];
                continue;
            }
            const auto& c = cuts_[j];
            k[j] = static_cast<double>(std::count_if(c.begin(), c.end(), [&](double cut) { return cut < row[j]; }));
        }
        return k;
    }

    std::vector<std::vector<double>> cuts_;
    std::vector<bool> binned_;
    std::vector<double> marginal_;
    std::map<std::vector<double>, std::vector<double>> strata_;
};

class CustomModel final : public ConditionalModel {
public:
    explicit CustomModel(Sampler s) : sampler_(std::move(s)) {}
    double sample(std::span<const double> row, Rng& rng) const override { return sampler_(row, rng); }

private:
    Sampler sampler_;
};

struct TargetData {
    const ColumnSpec* spec = nullptr;
    Eigen::MatrixXd x; // kept design columns
    std::vector<std::string> sources; // originating dataset column per kept design column
    std::span<const double> y;
    const MethodParams* params = nullptr;
    std::uint64_t seed = 0;
};

Eigen::VectorXd as_vector(std::span<const double> y) {
    return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

std::vector<double> param_or(const MethodParams* params, const std::string& key, std::size_t size, double fallback) {
    std::vector<double> out(size, fallback);
    if (!params) return out;
    auto it = params->find(key);
    if (it == params->end()) return out;
    if (it->second.size() == 1) return std::vector<double>(size, it->second[0]);
    if (it->second.size() != size)
        throw SchemaError("method parameter '" + key + "' has " + std::to_string(it->second.size()) +
                          " entries, expected " +
                          (size == 1 ? std::string("1") : "1 or " + std::to_string(size)) + " (one per slope)");
    return it->second;
}

ModelPtr strata_fallback(const TargetData& d, const Schema& schema) {
    std::vector<std::vector<double>> cuts(static_cast<std::size_t>(d.x.cols()));
    std::vector<bool> binned(static_cast<std::size_t>(d.x.cols()), false);
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
        auto src = std::find_if(schema.begin(), schema.end(),
                                [&](const ColumnSpec& c) { return c.name == d.sources[static_cast<std::size_t>(j)]; });
        if (src == schema.end() || src->kind != Kind::continuous) continue;
        std::vector<double> col(d.x.col(j).data(), d.x.col(j).data() + d.x.rows());
        std::sort(col.begin(), col.end());
        cuts[static_cast<std::size_t>(j)] = {quantile(col, 0.25), quantile(col, 0.5), quantile(col, 0.75)};
        binned[static_cast<std::size_t>(j)] = true;
    }
    return std::make_shared<StrataModel>(std::move(cuts), std::move(binned), d.x, d.y);
}

// Observed classes of a discrete target and the target re-coded to 0..K-1.
std::pair<std::vector<double>, std::vector<int>> recode(std::span<const double> y) {
    std::vector<double> codes(y.begin(), y.end());
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    std::vector<int> idx;
    idx.reserve(y.size());
    for (double v : y) idx.push_back(static_cast<int>(std::lower_bound(codes.begin(), codes.end(), v) - codes.begin()));
    return {codes, idx};
}

struct Built {
    ModelPtr model;
    bool fallback = false;
};

Built build_model(const std::string& method, const TargetData& d, const Schema& schema) {
    const auto n = static_cast<std::size_t>(d.x.rows());
    const Eigen::VectorXd y = as_vector(d.y);
    if (method == "logistic") {
        auto fit = regression::logistic(d.x, y);
        if (fit.separated) return {strata_fallback(d, schema), true};
        return {std::make_shared<LogisticModel>(fit.coef)};
    }
    if (method == "polytomous" || method == "propodds" || method == "lda") {
        auto [codes, idx] = recode(d.y);
        const int k = static_cast<int>(codes.size());
        if (method == "polytomous") {
            auto fit = regression::multinomial(d.x, idx, k);
            if (fit.separated) return {strata_fallback(d, schema), true};
            return {std::make_shared<MultinomialModel>(std::move(fit), codes)};
        }
        if (method == "propodds") {
            auto fit = regression::proportional_odds(d.x, idx, k);
            if (fit.separated) return {strata_fallback(d, schema), true};
            return {std::make_shared<PropOddsModel>(std::move(fit), codes)};
        }
        return {std::make_shared<LdaModel>(regression::lda(d.x, idx, k), codes)};
    }
    if (method == "normrank") {
        if (n < 3) throw NumericalError("normrank needs at least 3 rows");
        std::vector<double> sorted(d.y.begin(), d.y.end());
        std::sort(sorted.begin(), sorted.end());
        // Mid-ranks for ties.
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            auto lo = std::lower_bound(sorted.begin(), sorted.end(), d.y[i]) - sorted.begin();
            auto hi = std::upper_bound(sorted.begin(), sorted.end(), d.y[i]) - sorted.begin();
            const double rank = 0.5 * static_cast<double>(lo + 1 + hi);
            z[static_cast<Eigen::Index>(i)] = dist::normal_quantile(rank / static_cast<double>(n + 1));
        }
        auto fit = regression::ols(d.x, z);
        return {std::make_shared<NormRankModel>(fit.coef, std::sqrt(fit.sigma2), std::move(sorted))};
    }
    if (method == "linear") {
        auto fit = regression::ols(d.x, y);
        return {std::make_shared<GaussianModel>(fit.coef, std::sqrt(fit.sigma2))};
    }
    if (method == "linear_prior") {
        const auto p = static_cast<std::size_t>(d.x.cols());
        auto mean = param_or(d.params, "prior_mean", p, 0.0);
        auto precision = param_or(d.params, "prior_precision", p, 1.0);
        auto fit = regression::linear_prior(d.x, y, as_vector(mean), as_vector(precision));
        return {std::make_shared<GaussianModel>(fit.coef, std::sqrt(fit.sigma2))};
    }
    if (method == "pmm") {
        if (n < static_cast<std::size_t>(kPmmDonors)) throw NumericalError("pmm needs at least 5 donor rows");
        auto fit = regression::ols(d.x, y);
        Eigen::VectorXd yhat = (d.x * fit.coef.tail(fit.coef.size() - 1)).array() + fit.coef[0];
        std::vector<std::pair<double, double>> donors(n);
        for (std::size_t i = 0; i < n; ++i) donors[i] = {yhat[static_cast<Eigen::Index>(i)], d.y[i]};
        std::sort(donors.begin(), donors.end());
        return {std::make_shared<PmmModel>(fit.coef, std::move(donors))};
    }
    if (method == "lasso_linear") {
        Eigen::VectorXd coef;
        if (d.x.cols() == 0) {
            coef = Eigen::VectorXd::Constant(1, y.mean());
        } else {
            coef = regression::lasso_linear_cv(d.x, y, d.seed).coef;
        }
        Eigen::VectorXd resid = y - ((d.x * coef.tail(coef.size() - 1)).array() + coef[0]).matrix();
        return {std::make_shared<GaussianModel>(coef, std::sqrt(resid.squaredNorm() / static_cast<double>(n)))};
    }
    if (method == "lasso_logistic") {
        if (d.x.cols() == 0) {
            auto fit = regression::logistic(d.x, y);
            return {std::make_shared<LogisticModel>(fit.coef)};
        }
        return {std::make_shared<LogisticModel>(regression::lasso_logistic_cv(d.x, y, d.seed).coef)};
    }
    auto custom = find_custom(method);
    if (!custom) throw SchemaError("unknown synthesis method '" + method + "'");
    Sampler sampler = (*custom)(d.x, d.y);
    if (!sampler) throw ModelContractError("custom method '" + method + "' returned an empty sampler");
    return {std::make_shared<CustomModel>(std::move(sampler))};
}

Dataset partial_dataset(const Schema& schema, const std::vector<std::string>& visible,
                        const std::map<std::string, std::vector<double>>& columns) {
    Schema sub;
    std::vector<std::vector<double>> cols;
    for (const auto& c : schema) {
        if (std::find(visible.begin(), visible.end(), c.name) == visible.end()) continue;
        sub.push_back(c);
        cols.push_back(columns.at(c.name));
    }
    return Dataset(std::move(sub), std::move(cols));
}

} // namespace

const std::vector<std::string>& SynthesisPlan::predictors_of(const std::string& target) const {
    static const std::vector<std::string> none;
    auto it = pred.find(target);
    return it == pred.end() ? none : it->second;
}

std::string default_method(Kind kind) {
    switch (kind) {
    case Kind::binary: return "logistic";
    case Kind::categorical: return "polytomous";
    case Kind::ordered: return "propodds";
    case Kind::continuous: return "normrank";
    }
    return "normrank";
}

SynthesisPlan default_plan(const Schema& schema) {
    validate_schema(schema, false);
    SynthesisPlan plan;
    for (const auto& c : schema) {
        if (c.role != Role::covariate && c.role != Role::entry_time && c.role != Role::dropout) continue;
        plan.pred[c.name] = plan.seq;
        plan.method[c.name] = default_method(c.kind);
        plan.seq.push_back(c.name);
    }
    return plan;
}

void register_custom_method(const std::string& name, CustomMethod method) {
    if (name.empty()) throw SchemaError("custom method needs a name");
    if (!method) throw SchemaError("custom method '" + name + "' has no fitter");
    if (is_builtin(name)) throw SchemaError("method name '" + name + "' is built in");
    std::lock_guard lock(registry_mutex());
    if (!registry().emplace(name, std::move(method)).second)
        throw SchemaError("method '" + name + "' is already registered");
}

bool is_known_method(const std::string& name) { return is_builtin(name) || find_custom(name).has_value(); }

void validate_plan(const Schema& schema, const SynthesisPlan& plan) {
    auto find = [&](const std::string& name) -> const ColumnSpec& {
        for (const auto& c : schema)
            if (c.name == name) return c;
        throw SchemaError("synthesis plan references unknown column '" + name + "'");
    };
    if (!(plan.n_multiplier > 0.0) || !std::isfinite(plan.n_multiplier))
        throw SchemaError("n_multiplier must be a positive number");

    std::set<std::string> seen;
    for (const auto& name : plan.seq) {
        const ColumnSpec& c = find(name);
        if (c.role != Role::covariate && c.role != Role::entry_time && c.role != Role::dropout)
            throw SchemaError("column '" + name + "' with role " + std::string(to_string(c.role)) + " cannot be synthesized");
        if (!seen.insert(name).second) throw SchemaError("column '" + name + "' appears twice in seq");
    }
    for (const auto& c : schema)
        if ((c.role == Role::entry_time || c.role == Role::dropout) && !seen.count(c.name))
            throw SchemaError("seq must contain the " + std::string(to_string(c.role)) + " column '" + c.name + "'");

    std::set<std::string> pass;
    for (const auto& name : plan.passthrough) {
        const ColumnSpec& c = find(name);
        if (c.role != Role::covariate) throw SchemaError("passthrough column '" + name + "' must be a covariate");
        if (seen.count(name)) throw SchemaError("column '" + name + "' is both synthesized and passthrough");
        if (!pass.insert(name).second) throw SchemaError("column '" + name + "' appears twice in passthrough");
    }

    for (const auto& [target, preds] : plan.pred) {
        if (!seen.count(target)) throw SchemaError("pred lists predictors for '" + target + "', which is not in seq");
        const auto pos = std::find(plan.seq.begin(), plan.seq.end(), target) - plan.seq.begin();
        std::set<std::string> uniq;
        for (const auto& p : preds) {
            find(p);
            if (!uniq.insert(p).second) throw SchemaError("predictor '" + p + "' listed twice for '" + target + "'");
            const auto ppos = std::find(plan.seq.begin(), plan.seq.end(), p) - plan.seq.begin();
            const bool earlier = ppos < pos;
            if (!earlier && !pass.count(p))
                throw SchemaError("predictor '" + p + "' of '" + target +
                                  "' is neither synthesized earlier in seq nor a passthrough column");
        }
    }

    for (const auto& name : plan.seq) {
        auto it = plan.method.find(name);
        if (it == plan.method.end()) throw SchemaError("no synthesis method for '" + name + "'");
        if (!is_known_method(it->second)) throw SchemaError("unknown synthesis method '" + it->second + "'");
        const ColumnSpec& c = find(name);
        if (!method_accepts(it->second, c.kind))
            throw SchemaError("method '" + it->second + "' cannot model " + std::string(to_string(c.kind)) +
                              " column '" + name + "'");
    }
    for (const auto& [name, m] : plan.method)
        if (!seen.count(name)) throw SchemaError("method given for '" + name + "', which is not in seq");
    for (const auto& [name, p] : plan.method_params)
        if (!seen.count(name)) throw SchemaError("method parameters given for '" + name + "', which is not in seq");
}

std::vector<std::string> output_columns(const Schema& schema, const SynthesisPlan& plan) {
    std::vector<std::string> out;
    for (const auto& c : schema)
        if (std::find(plan.seq.begin(), plan.seq.end(), c.name) != plan.seq.end() ||
            std::find(plan.passthrough.begin(), plan.passthrough.end(), c.name) != plan.passthrough.end())
            out.push_back(c.name);
    return out;
}

std::size_t synthetic_size(const SynthesisPlan& plan, std::size_t n_original) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(plan.n_multiplier * static_cast<double>(n_original))));
}

FittedSynthesizer fit_synthesizer(const Dataset& data, const SynthesisPlan& plan) {
    validate_plan(data.schema(), plan);
    if (data.n_rows() == 0) throw SchemaError("cannot fit a synthesizer on an empty dataset");
    FittedSynthesizer synth;
    synth.plan_ = plan;
    synth.n_original_ = data.n_rows();
    for (const auto& name : output_columns(data.schema(), plan)) synth.schema_.push_back(data.spec(name));
    for (const auto& name : plan.passthrough) {
        auto col = data.column(name);
        synth.passthrough_values_[name].assign(col.begin(), col.end());
    }

    for (std::size_t t = 0; t < plan.seq.size(); ++t) {
        const std::string& target = plan.seq[t];
        FittedTarget ft;
        ft.target = target;
        ft.method = plan.method.at(target);
        ft.predictors = plan.predictors_of(target);

        DesignMatrix design = encode_design(data, ft.predictors);
        std::vector<std::string> sources;
        for (std::size_t j = 0; j < design.legend.size(); ++j) {
            if (design.legend[j].zero_variance) continue;
            ft.kept_columns.push_back(j);
            ft.design_names.push_back(design.legend[j].name);
            sources.push_back(design.legend[j].source);
        }
        TargetData d;
        d.spec = &data.spec(target);
        d.x.resize(design.x.rows(), static_cast<Eigen::Index>(ft.kept_columns.size()));
        for (std::size_t j = 0; j < ft.kept_columns.size(); ++j)
            d.x.col(static_cast<Eigen::Index>(j)) = design.x.col(static_cast<Eigen::Index>(ft.kept_columns[j]));
        d.sources = std::move(sources);
        d.y = data.column(target);
        auto params = plan.method_params.find(target);
        d.params = params == plan.method_params.end() ? nullptr : &params->second;
        d.seed = mix_seed(plan.seed + 1000 + t);

        const bool constant = std::all_of(d.y.begin(), d.y.end(), [&](double v) { return v == d.y[0]; });
        const bool is_custom = !is_builtin(ft.method);
        if (constant && !is_custom) {
            ft.degenerate = true;
            ft.model = std::make_shared<ConstantModel>(d.y[0]);
            synth.warnings_.push_back("'" + target + "' is constant in the original data; synthetic values repeat it");
        } else {
            Built built = build_model(ft.method, d, data.schema());
            ft.model = std::move(built.model);
            ft.fallback = built.fallback;
            if (ft.fallback)
                synth.warnings_.push_back("'" + target + "': " + ft.method +
                                          " fit is separated; sampling empirically within predictor strata");
        }
        synth.targets_.push_back(std::move(ft));
    }
    return synth;
}

Dataset generate(const FittedSynthesizer& synth, std::size_t n, std::uint64_t rng_seed, const GenerateObserver& observer) {
    if (n == 0) throw SchemaError("synthetic size must be at least 1");
    Rng rng(mix_seed(rng_seed));
    std::map<std::string, std::vector<double>> columns;
    std::vector<std::string> visible;

    const SynthesisPlan& plan = synth.plan();
    if (!plan.passthrough.empty()) {
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = n == synth.n_original() ? i : rng.below(synth.n_original());
        for (const auto& name : plan.passthrough) {
            const auto& source = synth.passthrough_values_.at(name);
            auto& col = columns[name];
            col.reserve(n);
            for (std::size_t r : rows) col.push_back(source[r]);
            visible.push_back(name);
        }
    }

    std::vector<double> row;
    for (const FittedTarget& ft : synth.targets()) {
        if (observer) observer(ft.target, visible);
        Eigen::MatrixXd x;
        if (!ft.kept_columns.empty()) {
            x = encode_design(partial_dataset(synth.schema(), visible, columns), ft.predictors).x;
        }
        auto& out = columns[ft.target];
        out.resize(n);
        row.resize(ft.kept_columns.size());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < ft.kept_columns.size(); ++j)
                row[j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ft.kept_columns[j]));
            out[i] = ft.model->sample(row, rng);
        }
        visible.push_back(ft.target);
    }

    std::vector<std::vector<double>> cols;
    for (const auto& c : synth.schema()) cols.push_back(std::move(columns.at(c.name)));
    return Dataset(synth.schema(), std::move(cols));
}

} // namespace survsynth
