#include "survsynth/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survsynth/error.hpp"
#include "survsynth/optim.hpp"
#include "survsynth/random.hpp"

namespace survsynth::regression {

namespace {

constexpr double kSeparationNorm = 1e3;
constexpr double kDegenerateEta = 30.0;

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

struct Standardized {
    Eigen::MatrixXd x;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale; // 0 marks a constant column, which stays at 0
};

Standardized standardize(const Eigen::MatrixXd& x) {
    Standardized s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean();
    s.x = x.rowwise() - s.mean.transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double sd = std::sqrt(s.x.col(j).squaredNorm() / n);
        s.scale[j] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? sd : 0.0;
        if (s.scale[j] > 0) s.x.col(j) /= s.scale[j];
        else s.x.col(j).setZero();
    }
    return s;
}

Eigen::VectorXd unstandardize(const Standardized& s, double intercept, const Eigen::VectorXd& b) {
    Eigen::VectorXd coef(b.size() + 1);
    coef[0] = intercept;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        double beta = s.scale[j] > 0 ? b[j] / s.scale[j] : 0.0;
        coef[j + 1] = beta;
        coef[0] -= beta * s.mean[j];
    }
    return coef;
}

// Coordinate descent for (1/2n) sum w_i (z_i - b0 - x_i b)^2 + lambda |b|_1 on
// standardised x. Updates b0 and b in place.
void weighted_cd(const Eigen::MatrixXd& xs, const Eigen::VectorXd& z, const Eigen::VectorXd& w, double lambda,
                 double& b0, Eigen::VectorXd& b, int max_sweeps = 10000, double tol = 1e-10) {
    const double n = static_cast<double>(xs.rows());
    Eigen::VectorXd resid = z - xs * b - Eigen::VectorXd::Constant(xs.rows(), b0);
    Eigen::VectorXd denom(xs.cols());
    for (Eigen::Index j = 0; j < xs.cols(); ++j) denom[j] = xs.col(j).cwiseAbs2().dot(w) / n;
    const double wsum = w.sum();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        double shift = resid.dot(w) / wsum;
        b0 += shift;
        resid.array() -= shift;
        max_change = std::max(max_change, std::abs(shift));
        for (Eigen::Index j = 0; j < xs.cols(); ++j) {
            if (denom[j] <= 0.0) continue;
            double num = (xs.col(j).cwiseProduct(w)).dot(resid) / n + denom[j] * b[j];
            double updated = soft_threshold(num, lambda) / denom[j];
            double delta = updated - b[j];
            if (delta != 0.0) {
                resid -= delta * xs.col(j);
                b[j] = updated;
                max_change = std::max(max_change, std::abs(delta) * std::sqrt(denom[j]));
            }
        }
        if (max_change < tol) break;
    }
}

std::vector<int> fold_assignment(std::size_t n, std::uint64_t seed, int k) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<int> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return fold;
}

std::vector<double> lambda_grid(double lambda_max) {
    std::vector<double> grid(50);
    for (int k = 0; k < 50; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::pow(1e-3, k / 49.0);
    return grid;
}

template <class Fit, class Loss>
LassoCv run_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed, Fit fit, Loss loss) {
    constexpr int kFolds = 5;
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < kFolds) throw NumericalError("lasso cross-validation needs at least 5 rows");
    LassoCv cv;
    cv.lambdas = lambda_grid(lasso_lambda_max(x, y));
    cv.cv_loss.assign(cv.lambdas.size(), 0.0);
    auto fold = fold_assignment(n, seed, kFolds);
    for (int f = 0; f < kFolds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd xtr = x(train, Eigen::all), xte = x(test, Eigen::all);
        Eigen::VectorXd ytr = y(train), yte = y(test);
        for (std::size_t k = 0; k < cv.lambdas.size(); ++k) {
            Eigen::VectorXd coef = fit(xtr, ytr, cv.lambdas[k]);
            cv.cv_loss[k] += loss(xte, yte, coef);
        }
    }
    auto best = std::min_element(cv.cv_loss.begin(), cv.cv_loss.end()) - cv.cv_loss.begin();
    cv.best_lambda = cv.lambdas[static_cast<std::size_t>(best)];
    cv.coef = fit(x, y, cv.best_lambda);
    return cv;
}

bool eta_degenerate(const Eigen::VectorXd& eta) {
    return eta.size() > 0 && eta.cwiseAbs().maxCoeff() > kDegenerateEta;
}

} // namespace

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(x.rows(), x.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(x.cols()) = x;
    return out;
}

LinearFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd x1 = with_intercept(x);
    if (x1.rows() < x1.cols())
        throw SingularDesignError("least squares with " + std::to_string(x1.rows()) + " rows and " +
                                  std::to_string(x1.cols()) + " coefficients");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x1);
    qr.setThreshold(1e-10);
    if (qr.rank() < x1.cols()) throw SingularDesignError("rank-deficient design in least squares");
    LinearFit fit;
    fit.coef = qr.solve(y);
    fit.sigma2 = (y - x1 * fit.coef).squaredNorm() / static_cast<double>(y.size());
    return fit;
}

LinearFit linear_prior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& prior_mean,
                       const Eigen::VectorXd& prior_precision) {
    Eigen::MatrixXd x1 = with_intercept(x);
    Eigen::MatrixXd a = x1.transpose() * x1;
    Eigen::VectorXd b = x1.transpose() * y;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        a(j + 1, j + 1) += prior_precision[j];
        b[j + 1] += prior_precision[j] * prior_mean[j];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
        throw SingularDesignError("singular system in prior-weighted regression");
    LinearFit fit;
    fit.coef = ldlt.solve(b);
    fit.sigma2 = (y - x1 * fit.coef).squaredNorm() / static_cast<double>(y.size());
    return fit;
}

Eigen::VectorXd logistic_probabilities(const Eigen::MatrixXd& x, const Eigen::VectorXd& coef) {
    Eigen::VectorXd eta = (x * coef.tail(coef.size() - 1)).array() + coef[0];
    return eta.unaryExpr([](double e) { return sigmoid(e); });
}

LogisticFit logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int max_iter) {
    Eigen::MatrixXd x1 = with_intercept(x);
    const Eigen::Index p = x1.cols();
    LogisticFit fit;
    fit.coef = Eigen::VectorXd::Zero(p);
    double ybar = std::clamp(y.mean(), 1e-6, 1 - 1e-6);
    fit.coef[0] = std::log(ybar / (1 - ybar));
    auto deviance = [&](const Eigen::VectorXd& eta) {
        double d = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i) d += log1p_exp(eta[i]) - y[i] * eta[i];
        return 2.0 * d;
    };
    Eigen::VectorXd eta = x1 * fit.coef;
    double dev = deviance(eta);
    for (fit.iterations = 1; fit.iterations <= max_iter; ++fit.iterations) {
        Eigen::VectorXd prob = eta.unaryExpr([](double e) { return sigmoid(e); });
        Eigen::VectorXd w = prob.cwiseProduct(Eigen::VectorXd::Ones(prob.size()) - prob);
        Eigen::MatrixXd info = x1.transpose() * w.asDiagonal() * x1;
        Eigen::VectorXd score = x1.transpose() * (y - prob);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(score);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            fit.separated = true;
            return fit;
        }
        double scale = 1.0;
        Eigen::VectorXd candidate;
        double cand_dev = dev;
        for (int half = 0; half < 30; ++half, scale *= 0.5) {
            candidate = fit.coef + scale * step;
            eta = x1 * candidate;
            cand_dev = deviance(eta);
            if (std::isfinite(cand_dev) && cand_dev <= dev + 1e-12 * std::abs(dev)) break;
        }
        fit.coef = candidate;
        double change = std::abs(cand_dev - dev) / (std::abs(cand_dev) + 0.1);
        dev = cand_dev;
        if (fit.coef.norm() > kSeparationNorm) {
            fit.separated = true;
            return fit;
        }
        if (change < 1e-12) {
            fit.converged = true;
            break;
        }
    }
    fit.separated = !fit.converged || eta_degenerate(eta);
    return fit;
}

MultinomialFit multinomial(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes, int max_iter) {
    const Eigen::MatrixXd x1 = with_intercept(x);
    const Eigen::Index n = x1.rows(), p = x1.cols(), k1 = n_classes - 1;
    MultinomialFit fit;
    fit.coef = Eigen::MatrixXd::Zero(p, std::max<Eigen::Index>(k1, 0));
    if (k1 <= 0) {
        fit.converged = true;
        return fit;
    }
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (int c : y) counts[static_cast<std::size_t>(c)] += 1.0;
    for (Eigen::Index k = 0; k < k1; ++k)
        fit.coef(0, k) = std::log(std::max(counts[static_cast<std::size_t>(k + 1)], 0.5) / std::max(counts[0], 0.5));

    auto probabilities = [&](const Eigen::MatrixXd& coef, Eigen::MatrixXd& prob) {
        Eigen::MatrixXd eta = x1 * coef; // n x k1
        prob.resize(n, n_classes);
        double loglik = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double top = std::max(0.0, eta.row(i).maxCoeff());
            double denom = std::exp(-top);
            for (Eigen::Index k = 0; k < k1; ++k) denom += std::exp(eta(i, k) - top);
            prob(i, 0) = std::exp(-top) / denom;
            for (Eigen::Index k = 0; k < k1; ++k) prob(i, k + 1) = std::exp(eta(i, k) - top) / denom;
            int c = y[static_cast<std::size_t>(i)];
            loglik += (c == 0 ? 0.0 : eta(i, c - 1)) - top - std::log(denom);
        }
        return loglik;
    };

    Eigen::MatrixXd prob;
    double loglik = probabilities(fit.coef, prob);
    const Eigen::Index dim = p * k1;
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd score(dim);
        Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
        for (Eigen::Index a = 0; a < k1; ++a) {
            Eigen::VectorXd resid(n);
            for (Eigen::Index i = 0; i < n; ++i)
                resid[i] = (y[static_cast<std::size_t>(i)] == a + 1 ? 1.0 : 0.0) - prob(i, a + 1);
            score.segment(a * p, p) = x1.transpose() * resid;
            for (Eigen::Index b = a; b < k1; ++b) {
                Eigen::VectorXd w(n);
                for (Eigen::Index i = 0; i < n; ++i)
                    w[i] = prob(i, a + 1) * ((a == b ? 1.0 : 0.0) - prob(i, b + 1));
                Eigen::MatrixXd block = x1.transpose() * w.asDiagonal() * x1;
                info.block(a * p, b * p, p, p) = block;
                if (a != b) info.block(b * p, a * p, p, p) = block.transpose();
            }
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(score);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            fit.separated = true;
            return fit;
        }
        double scale = 1.0;
        Eigen::MatrixXd candidate;
        Eigen::MatrixXd cand_prob;
        double cand_ll = loglik;
        for (int half = 0; half < 30; ++half, scale *= 0.5) {
            candidate = fit.coef + scale * Eigen::Map<const Eigen::MatrixXd>(step.data(), p, k1);
            cand_ll = probabilities(candidate, cand_prob);
            if (std::isfinite(cand_ll) && cand_ll >= loglik - 1e-12 * std::abs(loglik)) break;
        }
        double change = std::abs(cand_ll - loglik) / (std::abs(cand_ll) + 0.1);
        fit.coef = candidate;
        prob = cand_prob;
        loglik = cand_ll;
        if (fit.coef.norm() > kSeparationNorm) {
            fit.separated = true;
            return fit;
        }
        if (change < 1e-12) {
            fit.converged = true;
            break;
        }
    }
    Eigen::MatrixXd eta = x1 * fit.coef;
    fit.separated = !fit.converged || eta.cwiseAbs().maxCoeff() > kDegenerateEta;
    return fit;
}

std::vector<double> multinomial_probabilities(const MultinomialFit& fit, std::span<const double> row) {
    const Eigen::Index k1 = fit.coef.cols();
    std::vector<double> eta(static_cast<std::size_t>(k1) + 1, 0.0);
    for (Eigen::Index k = 0; k < k1; ++k) {
        double e = fit.coef(0, k);
        for (std::size_t j = 0; j < row.size(); ++j) e += fit.coef(static_cast<Eigen::Index>(j) + 1, k) * row[j];
        eta[static_cast<std::size_t>(k) + 1] = e;
    }
    double top = *std::max_element(eta.begin(), eta.end());
    double total = 0.0;
    for (double& e : eta) total += (e = std::exp(e - top));
    for (double& e : eta) e /= total;
    return eta;
}

PropOddsFit proportional_odds(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes) {
    const Eigen::Index n = x.rows(), p = x.cols(), k1 = n_classes - 1;
    PropOddsFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    if (k1 <= 0) {
        fit.converged = true;
        return fit;
    }
    // theta = (a0, log increments d_1..d_{K-2}, beta)
    auto cutpoints_of = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd cut(k1);
        cut[0] = theta[0];
        for (Eigen::Index k = 1; k < k1; ++k) cut[k] = cut[k - 1] + std::exp(theta[k]);
        return cut;
    };
    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) -> double {
        Eigen::VectorXd cut = cutpoints_of(theta);
        Eigen::VectorXd beta = theta.tail(p);
        Eigen::VectorXd eta = x * beta;
        Eigen::VectorXd d_cut = Eigen::VectorXd::Zero(k1);
        Eigen::VectorXd d_eta(n);
        double nll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            int c = y[static_cast<std::size_t>(i)];
            // upper = F(cut_c - eta), lower = F(cut_{c-1} - eta)
            double upper = c < k1 ? sigmoid(cut[c] - eta[i]) : 1.0;
            double lower = c > 0 ? sigmoid(cut[c - 1] - eta[i]) : 0.0;
            double lik;
            if (c == 0) lik = upper;
            else if (c == k1) lik = sigmoid(eta[i] - cut[c - 1]);
            else lik = upper - lower;
            if (!(lik > 0.0)) return std::numeric_limits<double>::infinity();
            nll -= std::log(lik);
            double f_up = c < k1 ? upper * (1.0 - upper) : 0.0;
            double f_lo = c > 0 ? lower * (1.0 - lower) : 0.0;
            if (c < k1) d_cut[c] -= f_up / lik;
            if (c > 0) d_cut[c - 1] += f_lo / lik;
            d_eta[i] = (f_up - f_lo) / lik;
        }
        if (grad) {
            grad->resize(theta.size());
            // chain rule through the cumulative cutpoint parameterisation
            double tail = 0.0;
            for (Eigen::Index k = k1 - 1; k >= 1; --k) {
                tail += d_cut[k];
                (*grad)[k] = tail * std::exp(theta[k]);
            }
            (*grad)[0] = tail + d_cut[0];
            grad->tail(p) = x.transpose() * d_eta;
            *grad /= static_cast<double>(n);
        }
        return nll / static_cast<double>(n);
    };

    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (int c : y) counts[static_cast<std::size_t>(c)] += 1.0;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k1 + p);
    double cumulative = 0.0, prev_cut = 0.0;
    for (Eigen::Index k = 0; k < k1; ++k) {
        cumulative += counts[static_cast<std::size_t>(k)];
        double q = std::clamp(cumulative / static_cast<double>(n), 1e-4, 1 - 1e-4);
        double cut = std::log(q / (1 - q));
        if (k == 0) theta[0] = cut;
        else theta[k] = std::log(std::max(cut - prev_cut, 1e-3));
        prev_cut = k == 0 ? cut : prev_cut + std::exp(theta[k]);
    }
    optim::Options opts;
    opts.max_iter = 2000;
    opts.rel_grad_tol = 1e-12;
    auto res = optim::bfgs_minimize(objective, theta, opts);
    fit.cutpoints = cutpoints_of(res.x);
    fit.beta = res.x.tail(p);
    fit.converged = res.converged;
    Eigen::VectorXd eta = x * fit.beta;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < k1; ++k) worst = std::max(worst, std::abs(fit.cutpoints[k] - eta[i]));
    fit.separated = !std::isfinite(res.value) || res.x.norm() > kSeparationNorm || worst > kDegenerateEta;
    if (!fit.converged) {
        // BFGS may stall short of the tolerance on flat objectives; accept if
        // the absolute gradient is negligible.
        fit.converged = res.grad.cwiseAbs().maxCoeff() < 1e-7;
        fit.separated = fit.separated || !fit.converged;
    }
    return fit;
}

std::vector<double> propodds_probabilities(const PropOddsFit& fit, std::span<const double> row) {
    double eta = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) eta += fit.beta[static_cast<Eigen::Index>(j)] * row[j];
    const auto k1 = fit.cutpoints.size();
    std::vector<double> prob(static_cast<std::size_t>(k1) + 1);
    double lower = 0.0;
    for (Eigen::Index k = 0; k < k1; ++k) {
        double upper = sigmoid(fit.cutpoints[k] - eta);
        prob[static_cast<std::size_t>(k)] = upper - lower;
        lower = upper;
    }
    prob.back() = k1 > 0 ? sigmoid(eta - fit.cutpoints[k1 - 1]) : 1.0;
    return prob;
}

double lasso_lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.cols() == 0) return 0.0;
    Standardized s = standardize(x);
    Eigen::VectorXd centered = y.array() - y.mean();
    return (s.x.transpose() * centered).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

Eigen::VectorXd lasso_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    Standardized s = standardize(x);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
    double b0 = y.mean();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(x.rows());
    weighted_cd(s.x, y, w, lambda, b0, b);
    return unstandardize(s, b0, b);
}

Eigen::VectorXd lasso_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
    Standardized s = standardize(x);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(x.cols());
    double ybar = std::clamp(y.mean(), 1e-6, 1 - 1e-6);
    double b0 = std::log(ybar / (1 - ybar));
    for (int outer = 0; outer < 100; ++outer) {
        Eigen::VectorXd eta = (s.x * b).array() + b0;
        Eigen::VectorXd prob = eta.unaryExpr([](double e) { return sigmoid(e); });
        Eigen::VectorXd w = prob.unaryExpr([](double q) { return std::max(q * (1 - q), 1e-5); });
        Eigen::VectorXd z = eta + (y - prob).cwiseQuotient(w);
        double old_b0 = b0;
        Eigen::VectorXd old_b = b;
        weighted_cd(s.x, z, w, lambda, b0, b, 1000, 1e-10);
        double change = std::abs(b0 - old_b0);
        if (b.size() > 0) change = std::max(change, (b - old_b).cwiseAbs().maxCoeff());
        if (change < 1e-9 || std::abs(b0) > kSeparationNorm) break;
    }
    return unstandardize(s, b0, b);
}

LassoCv lasso_linear_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
    return run_cv(
        x, y, seed, [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double l) { return lasso_linear(a, b, l); },
        [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& coef) {
            Eigen::VectorXd pred = (a * coef.tail(coef.size() - 1)).array() + coef[0];
            return (b - pred).squaredNorm();
        });
}

LassoCv lasso_logistic_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
    return run_cv(
        x, y, seed, [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double l) { return lasso_logistic(a, b, l); },
        [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& coef) {
            Eigen::VectorXd prob = logistic_probabilities(a, coef);
            double dev = 0.0;
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                double q = std::clamp(prob[i], 1e-12, 1 - 1e-12);
                dev -= 2.0 * (b[i] * std::log(q) + (1 - b[i]) * std::log(1 - q));
            }
            return dev;
        });
}

LdaFit lda(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes) {
    const Eigen::Index n = x.rows(), p = x.cols();
    LdaFit fit;
    fit.means = Eigen::MatrixXd::Zero(n_classes, p);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        int c = y[static_cast<std::size_t>(i)];
        counts[c] += 1.0;
        fit.means.row(c) += x.row(i);
    }
    for (int c = 0; c < n_classes; ++c) {
        if (counts[c] == 0) throw NumericalError("discriminant analysis: class without observations");
        fit.means.row(c) /= counts[c];
    }
    fit.log_prior = (counts / static_cast<double>(n)).array().log();
    if (p == 0) {
        fit.precision.resize(0, 0);
        return fit;
    }
    if (n <= n_classes) throw SingularDesignError("discriminant analysis needs more rows than classes");
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::RowVectorXd d = x.row(i) - fit.means.row(y[static_cast<std::size_t>(i)]);
        cov += d.transpose() * d;
    }
    cov /= static_cast<double>(n - n_classes);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
        throw SingularDesignError("singular pooled covariance in discriminant analysis");
    fit.precision = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    return fit;
}

std::vector<double> lda_posterior(const LdaFit& fit, std::span<const double> row) {
    const Eigen::Index k = fit.means.rows(), p = fit.means.cols();
    Eigen::Map<const Eigen::VectorXd> xv(row.data(), p);
    std::vector<double> score(static_cast<std::size_t>(k));
    for (Eigen::Index c = 0; c < k; ++c) {
        double s = fit.log_prior[c];
        if (p > 0) {
            Eigen::VectorXd mu = fit.means.row(c).transpose();
            Eigen::VectorXd pm = fit.precision * mu;
            s += xv.dot(pm) - 0.5 * mu.dot(pm);
        }
        score[static_cast<std::size_t>(c)] = s;
    }
    double top = *std::max_element(score.begin(), score.end());
    double total = 0.0;
    for (double& s : score) total += (s = std::exp(s - top));
    for (double& s : score) s /= total;
    return score;
}

} // namespace survsynth::regression
