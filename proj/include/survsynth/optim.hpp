#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

namespace survsynth::optim {

// Objective value at x; fills *grad when non-null. Returning +inf (or NaN)
// marks x as infeasible, which the line search backs away from.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct Options {
    int max_iter = 500;
    // Stop when max_j |g_j| * max(|x_j|, 1) / max(|f|, 1) falls below this.
    double rel_grad_tol = 1e-10;
    // Starting inverse Hessian; identity when absent.
    std::optional<Eigen::MatrixXd> initial_inverse_hessian;
};

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd grad;
    int iterations = 0;
    bool converged = false;
};

double relative_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& grad, double value);

// BFGS with backtracking Armijo line search.
Result bfgs_minimize(const Objective& f, Eigen::VectorXd x0, const Options& options = {});

// Central-difference gradient with step h * max(|x_j|, 1).
Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                 double h = 1e-5);

} // namespace survsynth::optim
