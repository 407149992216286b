#include "survsynth/optim.hpp"

#include <cmath>
#include <limits>

namespace survsynth::optim {

double relative_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, double value) {
    double scale = std::max(std::abs(value), 1.0);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j)
        worst = std::max(worst, std::abs(grad[j]) * std::max(std::abs(x[j]), 1.0) / scale);
    return worst;
}

Result bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const Options& options) {
    const Eigen::Index p = x0.size();
    Result res;
    res.x = std::move(x0);
    res.grad.resize(p);
    res.value = f(res.x, &res.grad);
    if (!std::isfinite(res.value)) {
        res.value = std::numeric_limits<double>::infinity();
        return res;
    }
    if (p == 0) {
        res.converged = true;
        return res;
    }
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd inv_h = options.initial_inverse_hessian.value_or(identity);
    Eigen::VectorXd trial_grad(p);
    bool reset_once = false;

    for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
        if (relative_gradient(res.x, res.grad, res.value) < options.rel_grad_tol) {
            res.converged = true;
            return res;
        }
        Eigen::VectorXd dir = -inv_h * res.grad;
        double slope = dir.dot(res.grad);
        if (!(slope < 0.0)) {
            inv_h = identity;
            dir = -res.grad;
            slope = dir.dot(res.grad);
        }
        double step = 1.0;
        double trial_value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd trial;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            trial = res.x + step * dir;
            trial_value = f(trial, &trial_grad);
            if (std::isfinite(trial_value) && trial_value <= res.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (reset_once) break;
            // Retry once from steepest descent with a fresh curvature estimate.
            reset_once = true;
            inv_h = identity / std::max(1.0, res.grad.norm());
            continue;
        }
        reset_once = false;
        Eigen::VectorXd s = trial - res.x;
        Eigen::VectorXd y = trial_grad - res.grad;
        double sy = s.dot(y);
        double previous = res.value;
        res.x = std::move(trial);
        res.value = trial_value;
        res.grad = trial_grad;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            double rho = 1.0 / sy;
            Eigen::MatrixXd left = identity - rho * s * y.transpose();
            inv_h = left * inv_h * left.transpose() + rho * s * s.transpose();
        }
        if (std::abs(previous - res.value) <= 4 * std::numeric_limits<double>::epsilon() * std::abs(res.value) &&
            s.norm() <= 1e-14 * std::max(1.0, res.x.norm())) {
            break; // no further progress possible at double precision
        }
    }
    res.converged = relative_gradient(res.x, res.grad, res.value) < options.rel_grad_tol;
    return res;
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                 double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double step = h * std::max(std::abs(x[j]), 1.0);
        probe[j] = x[j] + step;
        double up = f(probe);
        probe[j] = x[j] - step;
        double down = f(probe);
        probe[j] = x[j];
        g[j] = (up - down) / (2.0 * step);
    }
    return g;
}

} // namespace survsynth::optim
