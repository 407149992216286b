#pragma once

// Seeded cohort generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "survsynth/random.hpp"
#include "survsynth/tabular.hpp"

namespace testing_support {

using survsynth::ColumnSpec;
using survsynth::Dataset;
using survsynth::Kind;
using survsynth::Role;
using survsynth::Schema;

inline ColumnSpec col(std::string name, Role role, Kind kind, std::vector<std::string> levels = {}) {
    return {std::move(name), role, kind, std::move(levels)};
}

// Weibull proportional hazards, H(t|x) = t^shape * exp(beta x), x ~ Bernoulli(0.5),
// administrative censoring at `censor_at` (no censoring when <= 0).
inline Dataset weibull_cohort(std::size_t n, double shape, double beta, double censor_at, std::uint64_t seed) {
    survsynth::Rng rng(seed);
    std::vector<double> x(n), t(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        const double death = std::pow(-std::log(rng.uniform()) * std::exp(-beta * x[i]), 1.0 / shape);
        if (censor_at > 0 && death > censor_at) {
            t[i] = censor_at;
            d[i] = 0.0;
        } else {
            t[i] = death;
            d[i] = 1.0;
        }
    }
    Schema schema{col("x", Role::covariate, Kind::binary), col("time", Role::surv_time, Kind::continuous),
                  col("status", Role::event, Kind::binary)};
    return Dataset(schema, {x, t, d});
}

// Exponential(1) times, no covariates, no censoring.
inline Dataset exponential_cohort(std::size_t n, std::uint64_t seed) {
    survsynth::Rng rng(seed);
    std::vector<double> t(n), d(n, 1.0);
    for (auto& v : t) v = -std::log(rng.uniform());
    Schema schema{col("time", Role::surv_time, Kind::continuous), col("status", Role::event, Kind::binary)};
    return Dataset(schema, {t, d});
}

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect_root(F f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Administrative censoring time giving a 20% censored fraction for the
// Weibull cohort above: 0.5 [S(c | x=0) + S(c | x=1)] = 0.2.
inline double censor_time_for_fraction(double shape, double beta, double fraction) {
    return bisect_root(
        [&](double c) {
            const double h = std::pow(c, shape);
            return 0.5 * (std::exp(-h) + std::exp(-h * std::exp(beta))) - fraction;
        },
        1e-6, 50.0);
}

// Mixed covariates: age and bmi continuous, sex binary, stage three-level.
// With `outcome`, adds entry times on [0, 2), a 5% dropout flag and Weibull
// PH times (shape 1.3) observed over a study span of 6 with the same
// censoring rules as the simulator.
inline constexpr double kMixedStudySpan = 6.0;

inline Dataset mixed_cohort(std::size_t n, std::uint64_t seed, bool outcome = false) {
    survsynth::Rng rng(seed);
    std::vector<double> age(n), bmi(n), sex(n), stage(n), entry(n), drop(n), t(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        sex[i] = rng.bernoulli(0.45) ? 1.0 : 0.0;
        age[i] = rng.normal(62.0 + 3.0 * sex[i], 9.0);
        bmi[i] = std::exp(rng.normal(3.2 + 0.004 * (age[i] - 62.0), 0.15));
        const double u = rng.uniform();
        const double shift = 0.02 * (age[i] - 62.0);
        stage[i] = u < 0.35 - shift ? 0.0 : (u < 0.75 - shift ? 1.0 : 2.0);
        if (!outcome) continue;
        entry[i] = 2.0 * rng.uniform();
        drop[i] = rng.bernoulli(0.05) ? 1.0 : 0.0;
        const double eta = -1.6 + 0.03 * (age[i] - 62.0) + 0.4 * sex[i] + 0.5 * stage[i];
        const double death = std::pow(-std::log(rng.uniform()) * std::exp(-eta), 1.0 / 1.3);
        const double limit = kMixedStudySpan - entry[i];
        if (drop[i] != 0.0) {
            t[i] = std::min(death, limit);
            d[i] = 0.0;
        } else if (death > limit) {
            t[i] = limit;
            d[i] = 0.0;
        } else {
            t[i] = death;
            d[i] = 1.0;
        }
    }
    Schema schema{col("age", Role::covariate, Kind::continuous), col("bmi", Role::covariate, Kind::continuous),
                  col("sex", Role::covariate, Kind::binary, {"F", "M"}),
                  col("stage", Role::covariate, Kind::categorical, {"I", "II", "III"})};
    std::vector<std::vector<double>> cols{age, bmi, sex, stage};
    if (outcome) {
        schema.push_back(col("entry", Role::entry_time, Kind::continuous));
        schema.push_back(col("dropout", Role::dropout, Kind::binary));
        schema.push_back(col("time", Role::surv_time, Kind::continuous));
        schema.push_back(col("status", Role::event, Kind::binary));
        cols.insert(cols.end(), {entry, drop, t, d});
    }
    return Dataset(schema, std::move(cols));
}

} // namespace testing_support
