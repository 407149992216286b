#include "survsynth/spline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "survsynth/error.hpp"
#include "survsynth/tabular.hpp"

namespace survsynth {

namespace {

double pos3(double v) { return v > 0.0 ? v * v * v : 0.0; }
double pos2(double v) { return v > 0.0 ? v * v : 0.0; }

void check_gamma(const KnotSet& knots, std::span<const double> gamma) {
    if (gamma.size() != knots.n_coef())
        throw SchemaError("spline has " + std::to_string(knots.n_coef()) + " coefficients, got " +
                          std::to_string(gamma.size()));
}

} // namespace

void KnotSet::validate() const {
    if (!std::isfinite(k_min) || !std::isfinite(k_max) || !(k_min < k_max))
        throw SchemaError("boundary knots must satisfy k_min < k_max (got " + format_number(k_min) + ", " +
                          format_number(k_max) + ")");
    double prev = k_min;
    for (double k : internal) {
        if (!std::isfinite(k) || !(k > prev))
            throw SchemaError("internal knot " + format_number(k) + " is not strictly inside the previous knot " +
                              format_number(prev));
        prev = k;
    }
    if (!(k_max > prev)) throw SchemaError("internal knot " + format_number(prev) + " is not below k_max");
}

double quantile(std::span<const double> values, double q) {
    if (values.empty()) throw SchemaError("quantile of an empty sample");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

KnotSet place_knots(std::span<const double> event_log_times, int df) {
    if (df < 1 || df > 4)
        throw SchemaError("built-in knot placement covers df 1..4 (got " + std::to_string(df) +
                          "); supply explicit knots for more");
    if (event_log_times.empty()) throw SchemaError("knot placement needs at least one event time");
    auto [lo, hi] = std::minmax_element(event_log_times.begin(), event_log_times.end());
    if (!(*lo < *hi)) throw SchemaError("knot placement needs at least 2 distinct event times");

    static const std::vector<double> centiles[] = {{}, {0.50}, {0.33, 0.67}, {0.25, 0.50, 0.75}};
    KnotSet knots{*lo, *hi, {}};
    for (double q : centiles[df - 1]) knots.internal.push_back(quantile(event_log_times, q));
    try {
        knots.validate();
    } catch (const SchemaError& e) {
        throw SchemaError(std::string("centile knots collide (tied event times): ") + e.what());
    }
    return knots;
}

void basis_into(double x, const KnotSet& knots, std::span<double> out) {
    out[0] = 1.0;
    out[1] = x;
    const double range = knots.k_max - knots.k_min;
    const double tail_min = pos3(x - knots.k_min);
    const double tail_max = pos3(x - knots.k_max);
    for (std::size_t j = 0; j < knots.internal.size(); ++j) {
        double kj = knots.internal[j];
        double lambda = (knots.k_max - kj) / range;
        out[j + 2] = pos3(x - kj) - lambda * tail_min - (1.0 - lambda) * tail_max;
    }
}

void basis_deriv_into(double x, const KnotSet& knots, std::span<double> out) {
    out[0] = 0.0;
    out[1] = 1.0;
    const double range = knots.k_max - knots.k_min;
    const double tail_min = pos2(x - knots.k_min);
    const double tail_max = pos2(x - knots.k_max);
    for (std::size_t j = 0; j < knots.internal.size(); ++j) {
        double kj = knots.internal[j];
        double lambda = (knots.k_max - kj) / range;
        out[j + 2] = 3.0 * (pos2(x - kj) - lambda * tail_min - (1.0 - lambda) * tail_max);
    }
}

std::vector<double> basis(double x, const KnotSet& knots) {
    std::vector<double> out(knots.n_coef());
    basis_into(x, knots, out);
    return out;
}

std::vector<double> basis_deriv(double x, const KnotSet& knots) {
    std::vector<double> out(knots.n_coef());
    basis_deriv_into(x, knots, out);
    return out;
}

double spline_value(double x, const KnotSet& knots, std::span<const double> gamma) {
    check_gamma(knots, gamma);
    auto b = basis(x, knots);
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) s += gamma[j] * b[j];
    return s;
}

double spline_deriv(double x, const KnotSet& knots, std::span<const double> gamma) {
    check_gamma(knots, gamma);
    auto b = basis_deriv(x, knots);
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) s += gamma[j] * b[j];
    return s;
}

} // namespace survsynth
