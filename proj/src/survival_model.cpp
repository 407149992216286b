#include "survsynth/survival_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survsynth/optim.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

std::string require_role(const Dataset& data, Role role) {
    auto name = data.column_with_role(role);
    if (!name) throw SchemaError("dataset has no column with role " + std::string(to_string(role)));
    return *name;
}

Eigen::VectorXd pack(std::span<const double> gamma, std::span<const double> beta) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(gamma.size() + beta.size()));
    for (std::size_t j = 0; j < gamma.size(); ++j) theta[static_cast<Eigen::Index>(j)] = gamma[j];
    for (std::size_t j = 0; j < beta.size(); ++j) theta[static_cast<Eigen::Index>(gamma.size() + j)] = beta[j];
    return theta;
}

void unpack(const Eigen::VectorXd& theta, std::size_t n_gamma, std::vector<double>& gamma, std::vector<double>& beta) {
    gamma.assign(theta.data(), theta.data() + n_gamma);
    beta.assign(theta.data() + n_gamma, theta.data() + theta.size());
}

void check_legend(const RoystonParmarModel& model, const std::vector<std::string>& legend) {
    if (legend != model.design_legend)
        throw ModelContractError("design legend of the data does not match the model's legend");
}

} // namespace

void RoystonParmarModel::validate() const {
    knots.validate();
    if (gamma.size() != knots.n_coef())
        throw ModelContractError("model has " + std::to_string(gamma.size()) + " spline coefficients, knots need " +
                                 std::to_string(knots.n_coef()));
    if (beta.size() != design_legend.size())
        throw ModelContractError("model has " + std::to_string(beta.size()) + " coefficients but " +
                                 std::to_string(design_legend.size()) + " legend entries");
}

std::size_t SurvivalData::n_events() const {
    return static_cast<std::size_t>(std::count(event.begin(), event.end(), 1.0));
}

SurvivalData prepare_survival_data(const Dataset& data, std::span<const std::string> predictors) {
    SurvivalData rows;
    auto times = data.column(require_role(data, Role::surv_time));
    auto events = data.column(require_role(data, Role::event));
    rows.log_time.reserve(times.size());
    for (double t : times) rows.log_time.push_back(std::log(t));
    rows.event.assign(events.begin(), events.end());
    DesignMatrix design = encode_design(data, predictors);
    rows.z = std::move(design.x);
    rows.legend = design.names();
    return rows;
}

double log_likelihood(const KnotSet& knots, const Eigen::VectorXd& theta, const SurvivalData& rows,
                      Eigen::VectorXd* grad) {
    const std::size_t ng = knots.n_coef();
    const Eigen::Index nb = rows.z.cols();
    if (static_cast<Eigen::Index>(ng) + nb != theta.size())
        throw ModelContractError("parameter vector length does not match knots and design");
    std::vector<double> b(ng), db(ng);
    double total = 0.0;
    if (grad) grad->setZero(theta.size());
    for (std::size_t i = 0; i < rows.log_time.size(); ++i) {
        const double x = rows.log_time[i];
        basis_into(x, knots, b);
        basis_deriv_into(x, knots, db);
        double s = 0.0, ds = 0.0;
        for (std::size_t j = 0; j < ng; ++j) {
            s += theta[static_cast<Eigen::Index>(j)] * b[j];
            ds += theta[static_cast<Eigen::Index>(j)] * db[j];
        }
        const auto ii = static_cast<Eigen::Index>(i);
        double eta = s;
        for (Eigen::Index k = 0; k < nb; ++k) eta += theta[static_cast<Eigen::Index>(ng) + k] * rows.z(ii, k);
        const double cum_hazard = std::exp(eta);
        const bool is_event = rows.event[i] != 0.0;
        if (is_event) {
            if (!(ds > 0.0)) return kMinusInf;
            total += std::log(ds) + eta;
        }
        total -= cum_hazard;
        if (grad) {
            const double w = (is_event ? 1.0 : 0.0) - cum_hazard;
            for (std::size_t j = 0; j < ng; ++j) {
                double g = w * b[j];
                if (is_event) g += db[j] / ds;
                (*grad)[static_cast<Eigen::Index>(j)] += g;
            }
            for (Eigen::Index k = 0; k < nb; ++k) (*grad)[static_cast<Eigen::Index>(ng) + k] += w * rows.z(ii, k);
        }
    }
    return std::isfinite(total) ? total : kMinusInf;
}

Eigen::MatrixXd log_likelihood_hessian(const KnotSet& knots, const Eigen::VectorXd& theta, const SurvivalData& rows) {
    const std::size_t ng = knots.n_coef();
    const Eigen::Index nb = rows.z.cols();
    const Eigen::Index dim = static_cast<Eigen::Index>(ng) + nb;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<double> b(ng), db(ng);
    Eigen::VectorXd full(dim), dfull = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < rows.log_time.size(); ++i) {
        basis_into(rows.log_time[i], knots, b);
        basis_deriv_into(rows.log_time[i], knots, db);
        double ds = 0.0;
        for (std::size_t j = 0; j < ng; ++j) {
            full[static_cast<Eigen::Index>(j)] = b[j];
            dfull[static_cast<Eigen::Index>(j)] = db[j];
            ds += theta[static_cast<Eigen::Index>(j)] * db[j];
        }
        full.tail(nb) = rows.z.row(static_cast<Eigen::Index>(i)).transpose();
        double eta = full.dot(theta);
        hess.noalias() -= std::exp(eta) * full * full.transpose();
        if (rows.event[i] != 0.0 && ds > 0.0) hess.noalias() -= dfull * dfull.transpose() / (ds * ds);
    }
    return hess;
}

double log_likelihood(const RoystonParmarModel& model, const Dataset& data) {
    model.validate();
    SurvivalData rows = prepare_survival_data(data, model.predictors);
    check_legend(model, rows.legend);
    return log_likelihood(model.knots, pack(model.gamma, model.beta), rows);
}

InitialValues initial_values(const Dataset& data, const KnotSet& knots, std::span<const std::string> predictors) {
    knots.validate();
    SurvivalData rows = prepare_survival_data(data, predictors);
    const std::size_t n_events = rows.n_events();
    if (n_events < 2) throw NumericalError("initial values need at least 2 events (got " + std::to_string(n_events) + ")");

    auto times = data.column(require_role(data, Role::surv_time));
    auto events = data.column(require_role(data, Role::event));
    KMCurve km = km_estimate(times, events);

    const std::size_t ng = knots.n_coef();
    const Eigen::Index nb = rows.z.cols();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n_events), static_cast<Eigen::Index>(ng) + nb);
    Eigen::VectorXd response(static_cast<Eigen::Index>(n_events));
    std::vector<double> b(ng);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < rows.log_time.size(); ++i) {
        if (rows.event[i] == 0.0) continue;
        double s = std::clamp(km.at(times[i]), 1e-6, 1.0 - 1e-6);
        response[r] = std::log(-std::log(s));
        basis_into(rows.log_time[i], knots, b);
        for (std::size_t j = 0; j < ng; ++j) design(r, static_cast<Eigen::Index>(j)) = b[j];
        design.row(r).tail(nb) = rows.z.row(static_cast<Eigen::Index>(i));
        ++r;
    }
    if (design.rows() < design.cols())
        throw SingularDesignError("initial values: " + std::to_string(n_events) + " events for " +
                                  std::to_string(design.cols()) + " parameters");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols())
        throw SingularDesignError("initial values: rank-deficient design (collinear covariates or knots)");
    Eigen::VectorXd coef = qr.solve(response);

    InitialValues init;
    unpack(coef, ng, init.gamma, init.beta);
    Eigen::VectorXd theta = pack(init.gamma, init.beta);
    if (!std::isfinite(log_likelihood(knots, theta, rows))) {
        // The least-squares spline can dip below zero slope at an event time;
        // restart from its Weibull part, then from the unit-slope exponential.
        init.warnings.push_back("least-squares start had non-positive spline slope; using a Weibull start");
        std::fill(init.gamma.begin() + 2, init.gamma.end(), 0.0);
        if (!(init.gamma[1] > 0.0)) {
            init.gamma[0] = 0.0;
            init.gamma[1] = 1.0;
        }
    }
    return init;
}

KnotSet resolve_knots(const Dataset& data, const KnotChoice& choice) {
    if (const auto* explicit_knots = std::get_if<KnotSet>(&choice)) {
        explicit_knots->validate();
        return *explicit_knots;
    }
    auto times = data.column(require_role(data, Role::surv_time));
    auto events = data.column(require_role(data, Role::event));
    std::vector<double> event_log_times;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (events[i] != 0.0) event_log_times.push_back(std::log(times[i]));
    if (event_log_times.empty()) throw NumericalError("all observations are censored; nothing to fit");
    return place_knots(event_log_times, std::get<int>(choice));
}

bool is_monotone(const KnotSet& knots, std::span<const double> gamma, int grid) {
    for (int g = 0; g < grid; ++g) {
        double x = knots.k_min + (knots.k_max - knots.k_min) * g / (grid - 1);
        if (!(spline_deriv(x, knots, gamma) > 0.0)) return false;
    }
    return true;
}

RoystonParmarModel fit(const Dataset& data, const KnotChoice& knot_choice, std::span<const std::string> predictors,
                       const FitOptions& options) {
    auto events = data.column(require_role(data, Role::event));
    const auto n_events = static_cast<std::size_t>(std::count(events.begin(), events.end(), 1.0));
    if (n_events == 0) throw NumericalError("all observations are censored; nothing to fit");
    if (n_events < 2) throw NumericalError("fit needs at least 2 events (got 1)");

    RoystonParmarModel model;
    model.knots = resolve_knots(data, knot_choice);
    model.predictors.assign(predictors.begin(), predictors.end());
    SurvivalData rows = prepare_survival_data(data, predictors);
    model.design_legend = rows.legend;

    InitialValues init = initial_values(data, model.knots, predictors);
    model.fit_info.warnings = init.warnings;
    const std::size_t ng = model.knots.n_coef();
    Eigen::VectorXd theta0 = pack(init.gamma, init.beta);

    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
        double ll = log_likelihood(model.knots, theta, rows, grad);
        if (grad) *grad = -*grad;
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    optim::Options opts;
    opts.max_iter = options.max_iter;
    opts.rel_grad_tol = std::min(options.tol * 1e-3, 1e-9);
    // The log-likelihood is concave, so its negated Hessian at the start is a
    // sound initial curvature for BFGS.
    Eigen::MatrixXd neg_hess = -log_likelihood_hessian(model.knots, theta0, rows);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
    if (llt.info() == Eigen::Success) opts.initial_inverse_hessian = llt.solve(Eigen::MatrixXd::Identity(theta0.size(), theta0.size()));
    else if (theta0.size() > 0) opts.initial_inverse_hessian = Eigen::MatrixXd::Identity(theta0.size(), theta0.size()) / std::max(1.0, static_cast<double>(rows.log_time.size()));

    const double initial_ll = log_likelihood(model.knots, theta0, rows);
    optim::Result res = optim::bfgs_minimize(objective, theta0, opts);

    Eigen::VectorXd best = res.x;
    double best_ll = -res.value;
    if (!(best_ll >= initial_ll)) {
        best = theta0;
        best_ll = initial_ll;
    }
    unpack(best, ng, model.gamma, model.beta);

    auto ll_only = [&](const Eigen::VectorXd& theta) { return log_likelihood(model.knots, theta, rows); };
    Eigen::VectorXd num_grad = optim::numeric_gradient(ll_only, best, 1e-6);
    FitInfo& info = model.fit_info;
    info.log_likelihood = best_ll;
    info.initial_log_likelihood = initial_ll;
    info.n_events = n_events;
    info.n_obs = rows.log_time.size();
    info.iterations = res.iterations;
    info.relative_gradient = num_grad.allFinite() ? optim::relative_gradient(best, num_grad, best_ll)
                                                   : std::numeric_limits<double>::infinity();
    info.converged = info.relative_gradient < options.tol;
    info.monotone = is_monotone(model.knots, model.gamma);
    if (!info.monotone)
        info.warnings.push_back("spline log cumulative hazard is not increasing on the knot range; "
                                "the model cannot be inverted for simulation");
    if (!info.converged)
        throw NonConvergenceError("maximum likelihood did not converge within " + std::to_string(options.max_iter) +
                                      " iterations (relative gradient " + format_number(info.relative_gradient) + ")",
                                  model);
    return model;
}

double linear_predictor(const RoystonParmarModel& model, std::span<const double> z) {
    if (z.size() != model.beta.size())
        throw ModelContractError("covariate row has " + std::to_string(z.size()) + " entries, model legend has " +
                                 std::to_string(model.beta.size()));
    double eta = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) eta += model.beta[k] * z[k];
    return eta;
}

SurvivalPrediction predict(const RoystonParmarModel& model, double t, std::span<const double> z) {
    if (!(t > 0.0)) throw SchemaError("prediction time must be positive");
    const double x = std::log(t);
    const double log_h = spline_value(x, model.knots, model.gamma) + linear_predictor(model, z);
    SurvivalPrediction out;
    out.time = t;
    out.cumulative_hazard = std::exp(log_h);
    out.survival = std::exp(-out.cumulative_hazard);
    out.hazard = out.cumulative_hazard * spline_deriv(x, model.knots, model.gamma) / t;
    return out;
}

} // namespace survsynth
