#include "survsynth/simulate.hpp"

#include <cmath>

#include "survsynth/error.hpp"

namespace survsynth {

namespace {

constexpr double kBracket = 50.0;

void require_monotone(const RoystonParmarModel& model) {
    model.validate();
    if (!is_monotone(model.knots, model.gamma))
        throw ModelContractError("the model's log cumulative hazard is not increasing on the knot range; "
                                 "survival times cannot be simulated from it");
}

double bisect(const RoystonParmarModel& model, double target) {
    double lo = model.knots.k_min - kBracket, hi = model.knots.k_max + kBracket;
    const double f_lo = spline_value(lo, model.knots, model.gamma) - target;
    const double f_hi = spline_value(hi, model.knots, model.gamma) - target;
    if (!(f_lo < 0.0 && f_hi > 0.0)) {
        if (f_lo == 0.0) return lo;
        if (f_hi == 0.0) return hi;
        throw NumericalError("no sign change of s(x) - " + format_number(target) + " on [" + format_number(lo) + ", " +
                             format_number(hi) + "]");
    }
    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = spline_value(mid, model.knots, model.gamma) - target;
        if (f == 0.0) break;
        (f < 0.0 ? lo : hi) = mid;
    }
    const double residual = std::abs(spline_value(mid, model.knots, model.gamma) - target);
    if (!(residual < 1e-10 * std::max(1.0, std::abs(target))))
        throw NumericalError("bisection stalled with residual " + format_number(residual));
    return mid;
}

double invert_unchecked(const RoystonParmarModel& model, double target, InversionMethod method) {
    if (method == InversionMethod::automatic && model.knots.internal.empty())
        return (target - model.gamma[0]) / model.gamma[1];
    return bisect(model, target);
}

double time_unchecked(const RoystonParmarModel& model, double eta, double u, InversionMethod method) {
    if (!(u > 0.0 && u < 1.0)) throw NumericalError("uniform draw must lie in (0, 1)");
    return std::exp(invert_unchecked(model, std::log(-std::log(u)) - eta, method));
}

} // namespace

std::string_view to_string(Cause cause) {
    switch (cause) {
    case Cause::event: return "event";
    case Cause::admin_censor: return "admin_censor";
    case Cause::dropout: return "dropout";
    }
    return "event";
}

double invert_log_time(const RoystonParmarModel& model, double target, InversionMethod method) {
    require_monotone(model);
    return invert_unchecked(model, target, method);
}

double survival_time_for(const RoystonParmarModel& model, std::span<const double> z, double u, InversionMethod method) {
    require_monotone(model);
    return time_unchecked(model, linear_predictor(model, z), u, method);
}

double draw_survival_time(const RoystonParmarModel& model, std::span<const double> z, Rng& rng, InversionMethod method) {
    return survival_time_for(model, z, rng.uniform(), method);
}

SyntheticOutcome assemble_outcome(double death_time, double admin_limit, bool dropout) {
    if (!(admin_limit > 0.0)) throw SchemaError("administrative limit must be positive");
    if (dropout) return {std::min(death_time, admin_limit), Status::censored, Cause::dropout};
    if (death_time > admin_limit) return {admin_limit, Status::censored, Cause::admin_censor};
    return {death_time, Status::dead, Cause::event};
}

Dataset simulate_cohort(const RoystonParmarModel& model, const Dataset& covariates, const StudyWindow& window,
                        std::uint64_t rng_seed, const SimulateOptions& options) {
    if (!(window.study_span > 0.0) || !std::isfinite(window.study_span))
        throw SchemaError("study_span must be a positive number");
    require_monotone(model);
    for (const auto& name : {options.time_column, options.status_column})
        if (covariates.has_column(name)) throw SchemaError("covariates already contain a column named '" + name + "'");
    if (options.emit_cause && covariates.has_column(options.cause_column))
        throw SchemaError("covariates already contain a column named '" + options.cause_column + "'");

    for (const auto& p : model.predictors)
        if (!covariates.has_column(p))
            throw ModelContractError("model predictor '" + p + "' is missing from the covariates");
    DesignMatrix design = encode_design(covariates, model.predictors);
    if (design.names() != model.design_legend)
        throw ModelContractError("covariate design legend does not match the model's legend");

    const std::size_t n = covariates.n_rows();
    auto entry_name = covariates.column_with_role(Role::entry_time);
    auto dropout_name = covariates.column_with_role(Role::dropout);
    std::span<const double> entry = entry_name ? covariates.column(*entry_name) : std::span<const double>{};
    std::span<const double> drop = dropout_name ? covariates.column(*dropout_name) : std::span<const double>{};

    std::vector<double> times(n), status(n), cause(n);
    std::vector<double> z(static_cast<std::size_t>(design.x.cols()));
    for (std::size_t i = 0; i < n; ++i) {
        const double limit = window.study_span - (entry.empty() ? 0.0 : entry[i]);
        if (!(limit > 0.0))
            throw SchemaError("row " + std::to_string(i + 1) + ": entry time " + format_number(entry[i]) +
                              " is not before the end of the study span " + format_number(window.study_span));
        for (std::size_t k = 0; k < z.size(); ++k) z[k] = design.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        Rng rng(mix_seed(rng_seed + i));
        const double t = time_unchecked(model, linear_predictor(model, z), rng.uniform(), InversionMethod::automatic);
        SyntheticOutcome out = assemble_outcome(t, limit, !drop.empty() && drop[i] != 0.0);
        times[i] = out.observed_time;
        status[i] = out.status == Status::dead ? 1.0 : 0.0;
        cause[i] = static_cast<double>(static_cast<int>(out.cause));
    }

    Dataset result = covariates.with_column({options.time_column, Role::surv_time, Kind::continuous, {}}, std::move(times));
    result = result.with_column({options.status_column, Role::event, Kind::binary, {}}, std::move(status));
    if (options.emit_cause)
        result = result.with_column({options.cause_column, Role::ignore, Kind::categorical, {"event", "admin_censor", "dropout"}},
                                    std::move(cause));
    return result;
}

} // namespace survsynth
