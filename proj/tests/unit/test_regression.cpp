#include <doctest.h>

#include <cmath>

#include "survsynth/error.hpp"
#include "survsynth/random.hpp"
#include "survsynth/regression.hpp"

using namespace survsynth;
using namespace survsynth::regression;

namespace {

Eigen::MatrixXd random_design(Rng& rng, Eigen::Index n, Eigen::Index p) {
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    return x;
}

} // namespace

TEST_CASE("ols: exact fit and residual variance") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXd y(4);
    y << 1, 3, 5, 7;
    LinearFit f = ols(x, y);
    CHECK(f.coef[0] == doctest::Approx(1));
    CHECK(f.coef[1] == doctest::Approx(2));
    CHECK(f.sigma2 == doctest::Approx(0).epsilon(1e-12));
    Eigen::MatrixXd dup(4, 2);
    dup << 0, 0, 1, 1, 2, 2, 3, 3;
    CHECK_THROWS_AS(ols(dup, y), SingularDesignError);
}

TEST_CASE("linear_prior: infinite precision pins slopes, zero precision is OLS") {
    Rng rng(1);
    Eigen::MatrixXd x = random_design(rng, 50, 2);
    Eigen::VectorXd y = (x * Eigen::Vector2d(1.5, -2)).array() + 0.5;
    LinearFit pinned = linear_prior(x, y, Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(1e12, 1e12));
    CHECK(pinned.coef[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(pinned.coef[2] == doctest::Approx(0.7).epsilon(1e-6));
    LinearFit flat = linear_prior(x, y, Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0));
    CHECK(flat.coef[1] == doctest::Approx(1.5));
    CHECK(flat.coef[2] == doctest::Approx(-2));
}

TEST_CASE("logistic: intercept-only is the log odds") {
    Eigen::MatrixXd x(10, 0);
    Eigen::VectorXd y(10);
    y << 1, 1, 1, 0, 0, 0, 0, 0, 0, 0;
    LogisticFit f = logistic(x, y);
    CHECK(f.converged);
    CHECK_FALSE(f.separated);
    CHECK(f.coef[0] == doctest::Approx(std::log(0.3 / 0.7)));
}

TEST_CASE("logistic: recovers coefficients") {
    Rng rng(2);
    Eigen::MatrixXd x = random_design(rng, 4000, 2);
    Eigen::VectorXd y(4000);
    for (Eigen::Index i = 0; i < 4000; ++i) {
        const double eta = -0.5 + x(i, 0) - 0.7 * x(i, 1);
        y[i] = rng.bernoulli(1 / (1 + std::exp(-eta)));
    }
    LogisticFit f = logistic(x, y);
    CHECK(f.converged);
    CHECK(f.coef[0] == doctest::Approx(-0.5).epsilon(0.1));
    CHECK(f.coef[1] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(f.coef[2] == doctest::Approx(-0.7).epsilon(0.1));
}

TEST_CASE("logistic: perfect separation is detected") {
    Eigen::MatrixXd x(40, 1);
    Eigen::VectorXd y(40);
    for (int i = 0; i < 40; ++i) {
        x(i, 0) = i % 2;
        y[i] = i % 2;
    }
    CHECK(logistic(x, y).separated);
}

TEST_CASE("multinomial: intercept-only gives the class frequencies") {
    Eigen::MatrixXd x(9, 0);
    const int y[] = {0, 1, 2, 0, 1, 2, 0, 1, 2};
    MultinomialFit f = multinomial(x, y, 3);
    auto p = multinomial_probabilities(f, {});
    for (double v : p) CHECK(std::abs(v - 1.0 / 3.0) < 1e-6);
}

TEST_CASE("proportional odds with two levels reduces to logistic") {
    Rng rng(3);
    Eigen::MatrixXd x = random_design(rng, 300, 2);
    std::vector<int> y(300);
    Eigen::VectorXd yv(300);
    for (int i = 0; i < 300; ++i) {
        const double eta = 0.3 + 0.8 * x(i, 0) - 0.4 * x(i, 1);
        y[static_cast<std::size_t>(i)] = rng.bernoulli(1 / (1 + std::exp(-eta))) ? 1 : 0;
        yv[i] = y[static_cast<std::size_t>(i)];
    }
    PropOddsFit po = proportional_odds(x, y, 2);
    LogisticFit lg = logistic(x, yv);
    CHECK(po.converged);
    for (int i = 0; i < 20; ++i) {
        const double row[] = {x(i, 0), x(i, 1)};
        auto probs = propodds_probabilities(po, row);
        const double eta = lg.coef[0] + lg.coef[1] * row[0] + lg.coef[2] * row[1];
        CHECK(std::abs(probs[1] - 1 / (1 + std::exp(-eta))) < 1e-8);
    }
}

TEST_CASE("proportional odds: intercept-only cumulative frequencies") {
    Eigen::MatrixXd x(10, 0);
    const int y[] = {0, 0, 1, 1, 1, 2, 2, 2, 2, 2};
    PropOddsFit po = proportional_odds(x, y, 3);
    auto p = propodds_probabilities(po, {});
    CHECK(p[0] == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(p[2] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("lasso: penalty at lambda_max zeroes every slope") {
    Rng rng(4);
    Eigen::MatrixXd x = random_design(rng, 200, 3);
    Eigen::VectorXd y = (x * Eigen::Vector3d(1, 0, -1)).array() + 2 + 0.1 * rng.normal();
    const double lmax = lasso_lambda_max(x, y);
    Eigen::VectorXd c = lasso_linear(x, y, lmax * 1.0001);
    CHECK(c.tail(3).isZero(0.0));
    CHECK(c[0] == doctest::Approx(y.mean()));
    Eigen::VectorXd huge = lasso_linear(x, y, 1e9);
    CHECK(huge.tail(3).isZero(0.0));
    Eigen::VectorXd yb(200);
    for (int i = 0; i < 200; ++i) yb[i] = x(i, 0) > 0 ? 1 : 0;
    CHECK(lasso_logistic(x, yb, 1e9).tail(3).isZero(0.0));
}

TEST_CASE("lasso: tiny penalty approaches OLS, CV picks a grid point") {
    Rng rng(5);
    Eigen::MatrixXd x = random_design(rng, 300, 3);
    Eigen::VectorXd y(300);
    for (int i = 0; i < 300; ++i) y[i] = 1 + 2 * x(i, 0) - x(i, 2) + 0.5 * rng.normal();
    Eigen::VectorXd c = lasso_linear(x, y, 1e-10);
    LinearFit f = ols(x, y);
    CHECK((c - f.coef).cwiseAbs().maxCoeff() < 1e-6);
    LassoCv cv = lasso_linear_cv(x, y, 42);
    CHECK(cv.lambdas.size() == 50);
    CHECK(cv.lambdas.back() == doctest::Approx(cv.lambdas.front() * 1e-3));
    CHECK(std::find(cv.lambdas.begin(), cv.lambdas.end(), cv.best_lambda) != cv.lambdas.end());
    CHECK(cv.coef[1] == doctest::Approx(2).epsilon(0.1));
    CHECK(std::abs(cv.coef[2]) < 0.15);
}

TEST_CASE("lda: pooled Gaussian posterior") {
    Rng rng(6);
    Eigen::MatrixXd x(1000, 1);
    std::vector<int> y(1000);
    for (int i = 0; i < 1000; ++i) {
        y[static_cast<std::size_t>(i)] = i < 300 ? 1 : 0;
        x(i, 0) = (i < 300 ? 5 : -5) + rng.normal();
    }
    LdaFit f = lda(x, y, 2);
    CHECK(std::exp(f.log_prior[1]) == doctest::Approx(0.3));
    const double at_plus[] = {5.0}, mid[] = {0.0};
    CHECK(lda_posterior(f, at_plus)[1] > 0.999);
    // at the midpoint the likelihoods tie, so the posterior is the prior
    CHECK(lda_posterior(f, mid)[1] == doctest::Approx(0.3).epsilon(0.05));
}
