#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "survsynth/tabular.hpp"

namespace survsynth {

struct SynthesisPlan;

// ---------------------------------------------------------------------------
// Kaplan-Meier and log-rank

struct KMCurve {
    std::vector<double> times; // distinct event times, increasing
    std::vector<double> survival;
    std::vector<std::size_t> at_risk;
    std::vector<std::size_t> events;
    std::vector<double> ci_low; // pointwise 95%, log-scale Greenwood
    std::vector<double> ci_high;

    // Right-continuous step value S(t); 1 before the first event time.
    double at(double t) const;
};

KMCurve km_estimate(std::span<const double> times, std::span<const double> events);

struct SurvivalSample {
    std::span<const double> times;
    std::span<const double> events;
};

struct LogrankResult {
    double chi_sq = 0.0;
    double p_value = 1.0;
    double observed_a = 0.0; // events in the first group
    double expected_a = 0.0;
    double variance = 0.0;
};

// Two-sample log-rank, 1 d.f. Throws SchemaError if a group is empty or no
// group has events.
LogrankResult logrank_test(SurvivalSample a, SurvivalSample b);

// Log-rank stratified over a grouping: O-E and variances summed across
// strata, 1 d.f. Strata without events are ignored.
LogrankResult stratified_logrank_test(SurvivalSample a, std::span<const std::string> strata_a, SurvivalSample b,
                                      std::span<const std::string> strata_b);

// ---------------------------------------------------------------------------
// Two-sample tests

struct TestResult {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    double df = 0.0; // degrees of freedom where meaningful
};

// Unequal-variance t with Welch-Satterthwaite d.f., two-sided.
TestResult welch_t(std::span<const double> x, std::span<const double> y);
// U of the first sample; normal approximation with tie and continuity
// correction, two-sided.
TestResult mann_whitney(std::span<const double> x, std::span<const double> y);
// Chi-square on the 2x2 table, no continuity correction.
TestResult prop_test(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);
// Chi-square homogeneity on a 2 x L table of level counts.
TestResult chisq_homogeneity(std::span<const std::size_t> counts_a, std::span<const std::size_t> counts_b);
// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Propensity-score utility

double pmse(std::span<const double> p_hat, double c);

struct NullMoments {
    double expected = 0.0;
    double variance = 0.0;
};

// E = (M-1)/(8N), Var = 2(M-1)/(8N)^2.
NullMoments null_pmse_moments(std::size_t m, std::size_t n);

struct PropensityResult {
    double pmse = 0.0;
    double expected_null = 0.0;
    double var_null = 0.0;
    double s_pmse_ratio = 0.0; // pmse / expected_null
    double s_pmse_z = 0.0;     // (pmse - expected_null) / sqrt(var_null)
    std::size_t m = 1;         // fitted parameters including the intercept
    std::size_t n = 0;         // merged rows
    double c = 0.5;            // synthetic fraction
    bool separated = false;    // sources perfectly distinguishable; ratio = +inf
    std::string diagnostic;
};

struct PropensityOptions {
    bool interactions = false; // add pairwise products of design columns
};

// Logistic regression of the source indicator on the listed variables.
PropensityResult propensity_utility(const Dataset& original, const Dataset& synthetic,
                                    std::span<const std::string> variables, const PropensityOptions& options = {});

// ---------------------------------------------------------------------------
// Comparison report

// Stratification for survival comparisons: every level of a discrete column,
// or classes of a continuous column split at the given cut points
// (x <= c1, c1 < x <= c2, ..., x > ck).
struct StratumSpec {
    std::string column;
    std::vector<double> cuts;
};

// Stratum label per row, one per dataset row.
std::vector<std::string> stratum_labels(const Dataset& data, const StratumSpec& spec);
// All labels a stratification can produce, in display order.
std::vector<std::string> stratum_levels(const ColumnSpec& column, const StratumSpec& spec);

struct LevelCount {
    std::string label;
    std::size_t original = 0;
    std::size_t synthetic = 0;
};

struct VariableRow {
    std::string name;
    Kind kind = Kind::continuous;
    std::vector<TestResult> tests; // every applicable test, primary first
    double s_pmse_ratio = 0.0;
    double s_pmse_z = 0.0;
    std::string original_summary; // continuous: "median (Q1, Q3)"
    std::string synthetic_summary;
    std::vector<LevelCount> levels; // discrete: counts per level
    std::vector<std::string> notices;

    const std::string& test_name() const;
    double p_value() const;
};

struct StratumResult {
    std::string column;
    std::string label; // "(combined)" for the stratified statistic over all labels
    std::size_t n_original = 0;
    std::size_t n_synthetic = 0;
    double chi_sq = 0.0;
    double p_value = 1.0;
    bool skipped = false;
    std::string notice;
};

struct KMSeries {
    std::string cohort; // "original" | "synthetic"
    std::string group;  // "all" or "column=label"
    KMCurve curve;
};

struct UtilityReport {
    std::size_t n_original = 0;
    std::size_t n_synthetic = 0;
    std::vector<VariableRow> rows; // synthesized variables, then the survival-status row
    LogrankResult overall_logrank;
    std::vector<StratumResult> strata;
    PropensityResult propensity; // all synthesized variables, main effects
    std::vector<KMSeries> km;
    std::vector<std::string> notes;
    double threshold = 3.0;

    std::size_t n_above_threshold() const;
};

struct ReportOptions {
    PropensityOptions propensity;
    double threshold = 3.0;
};

// Per-variable tests (Welch t and Mann-Whitney for continuous, proportions
// for binary, chi-square homogeneity for multi-level), single-variable
// S_pMSE, overall and stratified log-rank, and KM curves.
UtilityReport compare_report(const Dataset& original, const Dataset& synthetic, const SynthesisPlan& plan,
                             std::span<const StratumSpec> strata, const ReportOptions& options = {});

// Aligned text table: Characteristic, Original, Synthetic, p-val, S_pMSE.
std::string render_report_table(const UtilityReport& report);
// CSV with columns time,survival,ci_low,ci_high,group,cohort.
std::string render_km_csv(const UtilityReport& report);

} // namespace survsynth
