#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "survsynth/error.hpp"
#include "survsynth/spline.hpp"
#include "survsynth/tabular.hpp"

namespace survsynth {

struct FitInfo {
    double log_likelihood = 0.0;
    double initial_log_likelihood = 0.0;
    bool converged = false;
    std::size_t n_events = 0;
    std::size_t n_obs = 0;
    int iterations = 0;
    double relative_gradient = 0.0; // at the optimum, central differences
    bool monotone = true;           // s'(x) > 0 on the knot-range grid
    std::vector<std::string> warnings;
};

// Proportional-hazards spline model
//   log H(t; z) = s(log t; gamma) + beta' z
// with s a natural cubic spline in log time.
struct RoystonParmarModel {
    KnotSet knots;
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<std::string> design_legend; // one entry per beta
    std::vector<std::string> predictors;    // dataset columns encoded into the legend
    FitInfo fit_info;

    void validate() const;
};

struct SurvivalPrediction {
    double time = 0.0;
    double survival = 1.0;
    double cumulative_hazard = 0.0;
    double hazard = 0.0;
};

struct FitOptions {
    int max_iter = 500;
    double tol = 1e-5; // relative gradient, see FitInfo::relative_gradient
};

// Either a built-in d.f. (1..4) or explicit knots on the log-time scale.
using KnotChoice = std::variant<int, KnotSet>;

// Rows of a dataset prepared for the likelihood: log times, event flags and
// the encoded covariate design.
struct SurvivalData {
    std::vector<double> log_time;
    std::vector<double> event;
    Eigen::MatrixXd z;
    std::vector<std::string> legend;

    std::size_t n_events() const;
};

SurvivalData prepare_survival_data(const Dataset& data, std::span<const std::string> predictors);

// Sum over rows of delta_i [log s'(x_i) + eta_i] - exp(eta_i), where
// x_i = log t_i and eta_i = s(x_i) + beta' z_i. The data constant
// -sum delta_i log t_i is omitted. theta = (gamma, beta). Returns -inf if
// s' <= 0 at any event. Fills the analytic gradient when requested.
double log_likelihood(const KnotSet& knots, const Eigen::VectorXd& theta, const SurvivalData& rows,
                      Eigen::VectorXd* grad = nullptr);
// Analytic Hessian of the same expression (negative semi-definite).
Eigen::MatrixXd log_likelihood_hessian(const KnotSet& knots, const Eigen::VectorXd& theta,
                                       const SurvivalData& rows);

// Model-level likelihood. Throws ModelContractError when the dataset encodes
// to a different design legend than the model carries.
double log_likelihood(const RoystonParmarModel& model, const Dataset& data);

struct InitialValues {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<std::string> warnings;
};

// Least squares of log(-log S_KM(t)) on the spline basis of log t and the
// covariates, over the event rows.
InitialValues initial_values(const Dataset& data, const KnotSet& knots, std::span<const std::string> predictors);

class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(const std::string& what, RoystonParmarModel best)
        : NumericalError(what), best_(std::move(best)) {}
    const RoystonParmarModel& best() const { return best_; }

private:
    RoystonParmarModel best_;
};

// Maximum likelihood by BFGS from initial_values. Throws NonConvergenceError
// (carrying the best iterate) when the gradient criterion is not met.
RoystonParmarModel fit(const Dataset& data, const KnotChoice& knots, std::span<const std::string> predictors,
                       const FitOptions& options = {});

// Knots implied by a KnotChoice for this dataset.
KnotSet resolve_knots(const Dataset& data, const KnotChoice& knots);

// True when s'(x) > 0 at `grid` equally spaced points spanning [k_min, k_max].
bool is_monotone(const KnotSet& knots, std::span<const double> gamma, int grid = 512);

double linear_predictor(const RoystonParmarModel& model, std::span<const double> z);
SurvivalPrediction predict(const RoystonParmarModel& model, double t, std::span<const double> z);

} // namespace survsynth
