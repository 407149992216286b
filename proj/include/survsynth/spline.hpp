#pragma once

#include <span>
#include <vector>

namespace survsynth {

// Knots of a natural cubic spline on the log-time scale.
struct KnotSet {
    double k_min = 0.0;
    double k_max = 1.0;
    std::vector<double> internal; // strictly increasing, inside (k_min, k_max)

    std::size_t n_internal() const { return internal.size(); }
    // Number of spline coefficients: intercept, linear term, one per internal knot.
    std::size_t n_coef() const { return internal.size() + 2; }

    // Throws SchemaError unless k_min < k_1 < ... < k_m < k_max.
    void validate() const;

    friend bool operator==(const KnotSet&, const KnotSet&) = default;
};

// Linear-interpolation quantile of a sample at probability q (position
// q*(n-1) between order statistics).
double quantile(std::span<const double> values, double q);

// Boundary knots at the extreme event log-times, internal knots at the
// centiles {50}, {33, 67} or {25, 50, 75} for df = 2, 3, 4. df = 1 gives
// no internal knots (Weibull).
KnotSet place_knots(std::span<const double> event_log_times, int df);

// Natural cubic spline basis (1, x, v_1(x), ..., v_m(x)) with
//   v_j(x) = (x - k_j)^3_+ - l_j (x - k_min)^3_+ - (1 - l_j)(x - k_max)^3_+,
//   l_j = (k_max - k_j) / (k_max - k_min).
std::vector<double> basis(double x, const KnotSet& knots);
// d/dx of basis: (0, 1, v_1'(x), ..., v_m'(x)).
std::vector<double> basis_deriv(double x, const KnotSet& knots);

// In-place variants writing n_coef() entries, for hot loops.
void basis_into(double x, const KnotSet& knots, std::span<double> out);
void basis_deriv_into(double x, const KnotSet& knots, std::span<double> out);

// s(x; gamma) and s'(x; gamma). Throw SchemaError when gamma has the wrong length.
double spline_value(double x, const KnotSet& knots, std::span<const double> gamma);
double spline_deriv(double x, const KnotSet& knots, std::span<const double> gamma);

} // namespace survsynth
