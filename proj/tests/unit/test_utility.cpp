#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "../support/cohorts.hpp"
#include "survsynth/error.hpp"
#include "survsynth/fcs.hpp"
#include "survsynth/random.hpp"
#include "survsynth/utility.hpp"

using namespace survsynth;
using testing_support::mixed_cohort;

TEST_CASE("pmse: worked examples") {
    const std::vector<double> flat{0.5, 0.5, 0.5, 0.5}, mid{0.75, 0.25, 0.75, 0.25}, hard{1, 0, 1, 0};
    CHECK(pmse(flat, 0.5) == 0.0);
    CHECK(pmse(mid, 0.5) == 0.0625);
    CHECK(pmse(hard, 0.5) == 0.25);
    CHECK_THROWS_AS(pmse(flat, 0.0), SchemaError);
    CHECK_THROWS_AS(pmse(flat, 1.0), SchemaError);
    CHECK_THROWS_AS(pmse(std::vector<double>{}, 0.5), SchemaError);
}

TEST_CASE("pmse: non-negative, zero only at c") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(1 + rng.below(20));
        for (auto& v : p) v = rng.uniform();
        const double c = 0.05 + 0.9 * rng.uniform();
        CHECK(pmse(p, c) > 0.0);
        std::vector<double> at_c(p.size(), c);
        CHECK(pmse(at_c, c) == 0.0);
    }
}

TEST_CASE("null pmse moments") {
    NullMoments m = null_pmse_moments(5, 1000);
    CHECK(m.expected == doctest::Approx(0.0005).epsilon(1e-15));
    CHECK(m.variance == doctest::Approx(1.25e-7).epsilon(1e-15));
    NullMoments one = null_pmse_moments(1, 77);
    CHECK(one.expected == 0.0);
    CHECK(one.variance == 0.0);
    NullMoments doubled = null_pmse_moments(5, 2000);
    CHECK(doubled.expected == doctest::Approx(m.expected / 2));
    CHECK(doubled.variance == doctest::Approx(m.variance / 4));
    CHECK_THROWS_AS(null_pmse_moments(0, 10), SchemaError);
    CHECK_THROWS_AS(null_pmse_moments(3, 0), SchemaError);
}

TEST_CASE("Kaplan-Meier: product-limit fixture") {
    const std::vector<double> t{2, 3, 5}, e{1, 1, 0};
    KMCurve km = km_estimate(t, e);
    CHECK(km.at(1.0) == 1.0);
    CHECK(km.at(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(km.at(3.0) == doctest::Approx(1.0 / 3.0));
    CHECK(km.at(5.0) == doctest::Approx(1.0 / 3.0));
    CHECK(km.times == std::vector<double>{2, 3});
    CHECK(km.at_risk == std::vector<std::size_t>{3, 2});
    for (std::size_t i = 0; i < km.times.size(); ++i) {
        CHECK(km.ci_low[i] <= km.survival[i]);
        CHECK(km.ci_high[i] >= km.survival[i]);
    }
}

TEST_CASE("Kaplan-Meier: degenerate inputs") {
    const std::vector<double> t{1, 2, 3}, none{0, 0, 0};
    KMCurve flat = km_estimate(t, none);
    CHECK(flat.times.empty());
    CHECK(flat.at(10.0) == 1.0);
    const std::vector<double> one{1}, ev{1};
    KMCurve single = km_estimate(one, ev);
    CHECK(single.at(1.0) == 0.0);
    CHECK(single.ci_low[0] == 0.0);
    CHECK(single.ci_high[0] == 0.0);
    CHECK_THROWS_AS(km_estimate(std::vector<double>{}, std::vector<double>{}), SchemaError);
}

TEST_CASE("Kaplan-Meier without censoring is one minus the empirical CDF") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> t(5 + rng.below(40));
        for (auto& v : t) v = std::round(10 * rng.uniform() * 10) / 10 + 0.1; // ties likely
        std::vector<double> e(t.size(), 1.0);
        KMCurve km = km_estimate(t, e);
        double prev = 1.0;
        for (std::size_t i = 0; i < km.times.size(); ++i) {
            CHECK(km.survival[i] <= prev);
            prev = km.survival[i];
            std::size_t le = 0;
            for (double v : t) le += v <= km.times[i];
            CHECK(km.survival[i] == doctest::Approx(1.0 - static_cast<double>(le) / static_cast<double>(t.size())));
        }
    }
}

TEST_CASE("log-rank: separated-groups worksheet") {
    // Group A dies at 1..5, group B at 6..10, no censoring. At time j <= 5
    // there are nA = 6 - j and nB = 5 at risk with one death, so
    // E_A = sum nA / n and V = sum nA nB / n^2; later times add nothing.
    const std::vector<double> ta{1, 2, 3, 4, 5}, tb{6, 7, 8, 9, 10}, ones(5, 1.0);
    double expected = 0, variance = 0;
    for (int j = 1; j <= 5; ++j) {
        const double na = 6 - j, nb = 5, n = na + nb;
        expected += na / n;
        variance += na * nb / (n * n);
    }
    // 5/10 + 4/9 + 3/8 + 2/7 + 1/6 and 25/100 + 20/81 + 15/64 + 10/49 + 5/36
    CHECK(expected == doctest::Approx(1.7718253968).epsilon(1e-10));
    CHECK(variance == doctest::Approx(1.0742591018).epsilon(1e-9));
    const double chi = (5 - expected) * (5 - expected) / variance;

    LogrankResult r = logrank_test({ta, ones}, {tb, ones});
    CHECK(r.observed_a == 5.0);
    CHECK(std::abs(r.expected_a - expected) < 1e-6);
    CHECK(std::abs(r.variance - variance) < 1e-6);
    CHECK(std::abs(r.chi_sq - chi) < 1e-6);
    CHECK(std::abs(r.chi_sq - 9.7007428201) < 1e-6);
    CHECK(r.p_value == doctest::Approx(std::erfc(std::sqrt(chi / 2))));

    LogrankResult swapped = logrank_test({tb, ones}, {ta, ones});
    CHECK(swapped.chi_sq == doctest::Approx(r.chi_sq).epsilon(1e-14));
}

TEST_CASE("log-rank: identical groups give zero") {
    const std::vector<double> t{1, 2, 2, 4, 7}, e{1, 0, 1, 1, 0};
    LogrankResult r = logrank_test({t, e}, {t, e});
    CHECK(r.chi_sq == 0.0);
    CHECK(r.p_value == 1.0);
    const std::vector<double> none(5, 0.0);
    CHECK_THROWS_AS(logrank_test({t, none}, {t, none}), SchemaError);
    CHECK_THROWS_AS(logrank_test({{}, {}}, {t, e}), SchemaError);
}

TEST_CASE("stratified log-rank sums the per-stratum pieces") {
    const std::vector<double> ta{1, 2, 3, 4, 5, 6}, ea{1, 1, 0, 1, 1, 1};
    const std::vector<double> tb{2, 3, 5, 7, 8, 9}, eb{1, 1, 1, 0, 1, 1};
    const std::vector<std::string> sa{"x", "x", "x", "y", "y", "y"}, sb{"x", "y", "x", "y", "x", "y"};
    LogrankResult total = stratified_logrank_test({ta, ea}, sa, {tb, eb}, sb);
    double o = 0, e = 0, v = 0;
    for (const std::string level : {"x", "y"}) {
        std::vector<double> a_t, a_e, b_t, b_e;
        for (std::size_t i = 0; i < 6; ++i) {
            if (sa[i] == level) a_t.push_back(ta[i]), a_e.push_back(ea[i]);
            if (sb[i] == level) b_t.push_back(tb[i]), b_e.push_back(eb[i]);
        }
        LogrankResult part = logrank_test({a_t, a_e}, {b_t, b_e});
        o += part.observed_a;
        e += part.expected_a;
        v += part.variance;
    }
    CHECK(total.observed_a == doctest::Approx(o));
    CHECK(total.expected_a == doctest::Approx(e));
    CHECK(total.variance == doctest::Approx(v));
    CHECK(total.chi_sq == doctest::Approx((o - e) * (o - e) / v));
}

TEST_CASE("Welch t") {
    const std::vector<double> x{1, 2, 3}, y{4, 5, 6};
    TestResult r = welch_t(x, y);
    CHECK(r.statistic == doctest::Approx(-3.0 / std::sqrt(2.0 / 3.0)));
    CHECK(r.statistic == doctest::Approx(-3.6742).epsilon(1e-4));
    CHECK(r.df == doctest::Approx(4.0));
    CHECK(r.p_value == doctest::Approx(0.0213).epsilon(0.01));
    // two-sided t(4) tail at 3.6742 in closed form: 1 - |t|(6 + t^2)/(t^2 + 4)^{3/2}
    const double t2 = 9.0 * 1.5;
    CHECK(r.p_value == doctest::Approx(1 - std::sqrt(t2) * (6 + t2) / std::pow(t2 + 4, 1.5)).epsilon(1e-10));
    TestResult same = welch_t(x, x);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
    const std::vector<double> c{2, 2, 2};
    CHECK_THROWS_AS(welch_t(c, c), SchemaError);
    CHECK_THROWS_AS(welch_t(std::vector<double>{1}, y), SchemaError);
}

TEST_CASE("Mann-Whitney") {
    const std::vector<double> x{1, 2}, y{3, 4};
    TestResult r = mann_whitney(x, y);
    CHECK(r.statistic == 0.0);
    CHECK(mann_whitney(y, x).statistic == 4.0);
    CHECK(r.p_value == doctest::Approx(mann_whitney(y, x).p_value));
    // mu = 2, sigma^2 = n1 n2 (n + 1) / 12 = 5/3, z = (2 - 0.5) / sqrt(5/3)
    CHECK(r.p_value == doctest::Approx(std::erfc(1.5 / std::sqrt(5.0 / 3.0) / std::sqrt(2.0))));
    const std::vector<double> t{1, 2, 2, 3};
    TestResult same = mann_whitney(t, t);
    CHECK(same.statistic == 8.0);
    CHECK(same.p_value == 1.0);
    const std::vector<double> c{5, 5, 5};
    CHECK(mann_whitney(c, c).p_value == 1.0);
}

TEST_CASE("proportion and homogeneity tests") {
    TestResult r = prop_test(50, 100, 50, 100);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    TestResult d = prop_test(30, 100, 50, 100);
    // pooled 0.4: chi = (0.2)^2 / (0.4 * 0.6 * (1/100 + 1/100))
    CHECK(d.statistic == doctest::Approx(0.04 / (0.24 * 0.02)));
    CHECK(prop_test(0, 10, 0, 20).p_value == 1.0);
    CHECK(prop_test(10, 10, 20, 20).statistic == 0.0);
    CHECK_THROWS_AS(prop_test(1, 0, 1, 2), SchemaError);

    const std::vector<std::size_t> a{10, 20, 30}, b{10, 20, 30};
    TestResult h = chisq_homogeneity(a, b);
    CHECK(h.statistic == 0.0);
    CHECK(h.p_value == 1.0);
    const std::vector<std::size_t> two_a{30, 70}, two_b{50, 50};
    CHECK(chisq_homogeneity(two_a, two_b).statistic == doctest::Approx(d.statistic));
    const std::vector<std::size_t> za{10, 0, 30}, zb{12, 0, 28};
    CHECK(chisq_homogeneity(za, zb).df == 1.0);
}

TEST_CASE("Kolmogorov-Smirnov") {
    const std::vector<double> x{1, 2, 3, 4}, y{5, 6, 7, 8};
    CHECK(ks_two_sample(x, y).statistic == 1.0);
    TestResult same = ks_two_sample(x, x);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
}

TEST_CASE("propensity: a copy is indistinguishable") {
    Dataset d = mixed_cohort(300, 21);
    const std::vector<std::string> vars{"age", "bmi", "sex", "stage"};
    PropensityResult r = propensity_utility(d, d, vars);
    CHECK(r.m == 6);
    CHECK(r.n == 600);
    CHECK(r.c == 0.5);
    CHECK(r.pmse < 1e-20);
    CHECK(r.s_pmse_ratio < 1e-12);
    CHECK_FALSE(r.separated);
    PropensityResult inter = propensity_utility(d, d, vars, {.interactions = true});
    CHECK(inter.m > r.m);
}

TEST_CASE("propensity: separated sources report an infinite ratio") {
    Dataset a = mixed_cohort(100, 22), b = mixed_cohort(100, 23);
    std::vector<std::vector<double>> cols_a, cols_b;
    for (std::size_t j = 0; j < a.n_cols(); ++j) {
        cols_a.emplace_back(a.column(j).begin(), a.column(j).end());
        cols_b.emplace_back(b.column(j).begin(), b.column(j).end());
    }
    for (auto& v : cols_b[0]) v += 1000; // ages no longer overlap
    const std::vector<std::string> vars{"age"};
    PropensityResult r = propensity_utility(Dataset(a.schema(), cols_a), Dataset(b.schema(), cols_b), vars);
    CHECK(r.separated);
    CHECK(std::isinf(r.s_pmse_ratio));
    CHECK_FALSE(r.diagnostic.empty());
}

// The null moments treat the original as fixed and the synthetic rows as
// drawn from its distribution: a bootstrap of the original sits near ratio 1.
// Two independent samples add the original's own sampling noise, which
// scales the expected pMSE by 1 / (1 - c), i.e. a ratio near 2 at c = 1/2.
TEST_CASE("propensity: null calibration") {
    const std::vector<std::string> vars{"age", "bmi", "sex", "stage"};
    double independent = 0, resampled = 0;
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep) {
        Dataset a = mixed_cohort(500, 1000 + 2 * rep), b = mixed_cohort(500, 1001 + 2 * rep);
        independent += propensity_utility(a, b, vars).s_pmse_ratio;
        Rng rng(5000 + rep);
        std::vector<std::vector<double>> cols(a.n_cols());
        for (std::size_t i = 0; i < a.n_rows(); ++i) {
            const auto k = rng.below(a.n_rows());
            for (std::size_t j = 0; j < a.n_cols(); ++j) cols[j].push_back(a.column(j)[k]);
        }
        resampled += propensity_utility(a, Dataset(a.schema(), cols), vars).s_pmse_ratio;
    }
    CHECK(resampled / reps > 0.5);
    CHECK(resampled / reps < 2.0);
    CHECK(independent / reps > 1.6);
    CHECK(independent / reps < 2.6);
}

TEST_CASE("stratum labels") {
    ColumnSpec age{"age", Role::covariate, Kind::continuous, {}};
    CHECK(stratum_levels(age, {"age", {50, 70}}) == std::vector<std::string>{"<=50", "(50,70]", ">70"});
    CHECK_THROWS_AS(stratum_levels(age, {"age", {}}), SchemaError);
    CHECK_THROWS_AS(stratum_levels(age, {"age", {70, 50}}), SchemaError);
    ColumnSpec stage{"stage", Role::covariate, Kind::categorical, {"I", "II", "III"}};
    CHECK(stratum_levels(stage, {"stage", {}}) == std::vector<std::string>{"I", "II", "III"});
    CHECK_THROWS_AS(stratum_levels(stage, {"stage", {1}}), SchemaError);
}

namespace {

SynthesisPlan covariate_plan(const Dataset& d) {
    SynthesisPlan plan = default_plan(d);
    return plan;
}

} // namespace

TEST_CASE("compare_report on identical cohorts") {
    Dataset d = mixed_cohort(400, 31, true);
    SynthesisPlan plan = covariate_plan(d);
    const std::vector<StratumSpec> strata{{"sex", {}}, {"age", {60}}};
    UtilityReport r = compare_report(d, d, plan, strata);
    CHECK(r.rows.size() == plan.seq.size() + 1);
    CHECK(r.rows.back().name == "status");
    CHECK(r.n_above_threshold() == 0);
    for (const auto& row : r.rows) {
        CHECK(row.s_pmse_ratio < 1e-10);
        for (const auto& t : row.tests) CHECK(t.p_value == 1.0);
    }
    const auto& age = r.rows.front();
    REQUIRE(age.tests.size() == 2);
    CHECK(age.tests[0].test_name != age.tests[1].test_name);
    CHECK(r.overall_logrank.chi_sq == 0.0);
    CHECK(r.overall_logrank.p_value == 1.0);
    // two labels for each stratification plus the combined statistic
    CHECK(r.strata.size() == 6);
    CHECK(r.strata[2].label == "(combined)");
    for (const auto& s : r.strata) CHECK(s.p_value == 1.0);
    // "all" plus one curve per label, for each cohort
    CHECK(r.km.size() == 2 * 5);

    const std::string table = render_report_table(r);
    const auto pos = [&](const char* s) { return table.find(s); };
    CHECK(pos("Characteristic") < pos("Original"));
    CHECK(pos("Original") < pos("Synthetic"));
    CHECK(pos("Synthetic") < pos("p-val"));
    CHECK(pos("p-val") < pos("S_pMSE"));
    CHECK(table.find("0 variables above threshold") != std::string::npos);

    const std::string csv = render_km_csv(r);
    CHECK(csv.rfind("time,survival,ci_low,ci_high,group,cohort\n", 0) == 0);
    std::size_t expected_lines = 1;
    for (const auto& s : r.km) expected_lines += s.curve.times.size();
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == expected_lines);
}

TEST_CASE("compare_report flags a shifted variable") {
    Dataset a = mixed_cohort(400, 41, true);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < a.n_cols(); ++j) cols.emplace_back(a.column(j).begin(), a.column(j).end());
    for (auto& v : cols[0]) v += 5 + 0.01 * v;
    Dataset b(a.schema(), cols);
    UtilityReport r = compare_report(a, b, default_plan(a), {});
    CHECK(r.rows.front().s_pmse_ratio > 3);
    CHECK(r.n_above_threshold() >= 1);
    CHECK(render_report_table(r).find("1 variable") != std::string::npos);
}
