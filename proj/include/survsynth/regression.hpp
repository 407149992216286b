#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

// Regression fitters used by the conditional synthesis methods and the
// propensity model. Designs are passed WITHOUT an intercept column; every
// fitter adds one and returns it as coefficient 0.

namespace survsynth::regression {

// [1 | x]
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

struct LinearFit {
    Eigen::VectorXd coef;  // intercept first
    double sigma2 = 0.0;   // residual variance, RSS / n
};

// Ordinary least squares. Throws SingularDesignError on rank deficiency.
LinearFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Gaussian-prior (ridge) posterior mean: (X'X + P)^-1 (X'y + P m) where the
// intercept carries zero precision and P = diag(precision) on the slopes.
LinearFit linear_prior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& prior_mean,
                       const Eigen::VectorXd& prior_precision);

struct LogisticFit {
    Eigen::VectorXd coef;
    bool converged = false;
    // Complete or quasi-complete separation: coefficients diverging
    // (norm > 1e3), IRLS failing to settle, or fitted probabilities
    // numerically 0/1.
    bool separated = false;
    int iterations = 0;
};

LogisticFit logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_iter = 100);
Eigen::VectorXd logistic_probabilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& coef);

struct MultinomialFit {
    // (p+1) x (K-1) coefficients against reference class 0.
    Eigen::MatrixXd coef;
    bool converged = false;
    bool separated = false;
};

// Polytomous (baseline-category) logistic regression; classes coded 0..K-1,
// every class must occur.
MultinomialFit multinomial(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes, int max_iter = 100);
// Class probabilities for one design row (without intercept).
std::vector<double> multinomial_probabilities(const MultinomialFit& fit, std::span<const double> row);

struct PropOddsFit {
    // P(Y <= k | x) = logistic(cutpoint_k - x' beta), k = 0..K-2.
    Eigen::VectorXd cutpoints;
    Eigen::VectorXd beta;
    bool converged = false;
    bool separated = false;
};

PropOddsFit proportional_odds(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes);
std::vector<double> propodds_probabilities(const PropOddsFit& fit, std::span<const double> row);

// Lasso by cyclic coordinate descent on standardised columns; the intercept
// is unpenalised. lambda is on the mean-loss scale:
//   linear:   (1/2n) ||y - b0 - X b||^2 + lambda ||b||_1
//   logistic: (1/n) negative log-likelihood + lambda ||b||_1
Eigen::VectorXd lasso_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);
Eigen::VectorXd lasso_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

// Smallest lambda that zeroes every slope.
double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct LassoCv {
    std::vector<double> lambdas; // decreasing, 50 log-spaced points
    std::vector<double> cv_loss;
    double best_lambda = 0.0;
    Eigen::VectorXd coef; // refit on all rows at best_lambda
};

// 5-fold cross-validation (folds from the seed) over a 50-point log grid
// from lambda_max down to lambda_max * 1e-3. Loss is squared error for the
// linear model and deviance for the logistic one.
LassoCv lasso_linear_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed);
LassoCv lasso_logistic_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed);

struct LdaFit {
    Eigen::VectorXd log_prior;  // per class
    Eigen::MatrixXd means;      // K x p
    Eigen::MatrixXd precision;  // pooled within-class covariance inverse
};

LdaFit lda(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes);
std::vector<double> lda_posterior(const LdaFit& fit, std::span<const double> row);

} // namespace survsynth::regression
