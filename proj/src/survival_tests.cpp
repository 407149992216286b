#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "survsynth/distributions.hpp"
#include "survsynth/error.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

namespace {

struct Obs {
    double time;
    bool event;
    int group; // 0 = a, 1 = b
};

struct LogrankParts {
    double observed = 0.0;
    double expected = 0.0;
    double variance = 0.0;
    std::size_t events = 0;
};

void check_sample(SurvivalSample s, const char* who) {
    if (s.times.size() != s.events.size()) throw SchemaError(std::string(who) + ": times and events differ in length");
    if (s.times.empty()) throw SchemaError(std::string(who) + ": group is empty");
}

LogrankParts logrank_parts(std::vector<Obs> obs) {
    std::sort(obs.begin(), obs.end(), [](const Obs& l, const Obs& r) { return l.time < r.time; });
    double n_a = 0, n_b = 0;
    for (const auto& o : obs) (o.group == 0 ? n_a : n_b) += 1;
    LogrankParts parts;
    std::size_t i = 0;
    while (i < obs.size()) {
        std::size_t j = i;
        double d = 0, d_a = 0, leave_a = 0, leave_b = 0;
        while (j < obs.size() && obs[j].time == obs[i].time) {
            if (obs[j].event) {
                d += 1;
                if (obs[j].group == 0) d_a += 1;
            }
            (obs[j].group == 0 ? leave_a : leave_b) += 1;
            ++j;
        }
        if (d > 0) {
            const double n = n_a + n_b;
            parts.observed += d_a;
            parts.expected += d * n_a / n;
            if (n > 1) parts.variance += n_a * n_b * d * (n - d) / (n * n * (n - 1));
            parts.events += static_cast<std::size_t>(d);
        }
        n_a -= leave_a;
        n_b -= leave_b;
        i = j;
    }
    return parts;
}

std::vector<Obs> merge(SurvivalSample a, SurvivalSample b) {
    std::vector<Obs> obs;
    obs.reserve(a.times.size() + b.times.size());
    for (std::size_t i = 0; i < a.times.size(); ++i) obs.push_back({a.times[i], a.events[i] != 0.0, 0});
    for (std::size_t i = 0; i < b.times.size(); ++i) obs.push_back({b.times[i], b.events[i] != 0.0, 1});
    return obs;
}

LogrankResult finish(const LogrankParts& parts) {
    LogrankResult res;
    res.observed_a = parts.observed;
    res.expected_a = parts.expected;
    res.variance = parts.variance;
    if (parts.variance > 0.0) {
        const double diff = parts.observed - parts.expected;
        res.chi_sq = diff * diff / parts.variance;
        res.p_value = dist::chisq_upper(res.chi_sq, 1.0);
    }
    return res;
}

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double sample_var(std::span<const double> x, double m) {
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

} // namespace

double KMCurve::at(double t) const {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

KMCurve km_estimate(std::span<const double> times, std::span<const double> events) {
    if (times.empty()) throw SchemaError("Kaplan-Meier: empty input");
    if (times.size() != events.size()) throw SchemaError("Kaplan-Meier: times and events differ in length");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return times[l] < times[r]; });

    KMCurve km;
    std::size_t at_risk = times.size();
    double s = 1.0, greenwood = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = times[order[i]];
        std::size_t j = i, d = 0;
        while (j < order.size() && times[order[j]] == t) {
            if (events[order[j]] != 0.0) ++d;
            ++j;
        }
        if (d > 0) {
            const auto n = static_cast<double>(at_risk);
            s *= 1.0 - static_cast<double>(d) / n;
            km.times.push_back(t);
            km.survival.push_back(s);
            km.at_risk.push_back(at_risk);
            km.events.push_back(d);
            if (d < at_risk && s > 0.0) {
                greenwood += static_cast<double>(d) / (n * (n - static_cast<double>(d)));
                const double half = 1.959963984540054 * std::sqrt(greenwood);
                km.ci_low.push_back(s * std::exp(-half));
                km.ci_high.push_back(std::min(1.0, s * std::exp(half)));
            } else {
                km.ci_low.push_back(0.0);
                km.ci_high.push_back(0.0);
            }
        }
        at_risk -= j - i;
        i = j;
    }
    return km;
}

LogrankResult logrank_test(SurvivalSample a, SurvivalSample b) {
    check_sample(a, "log-rank");
    check_sample(b, "log-rank");
    LogrankParts parts = logrank_parts(merge(a, b));
    if (parts.events == 0) throw SchemaError("log-rank: no events in either group");
    return finish(parts);
}

LogrankResult stratified_logrank_test(SurvivalSample a, std::span<const std::string> strata_a, SurvivalSample b,
                                      std::span<const std::string> strata_b) {
    check_sample(a, "stratified log-rank");
    check_sample(b, "stratified log-rank");
    if (strata_a.size() != a.times.size() || strata_b.size() != b.times.size())
        throw SchemaError("stratified log-rank: one stratum label per row is required");
    std::map<std::string, std::vector<Obs>> by_stratum;
    for (std::size_t i = 0; i < a.times.size(); ++i) by_stratum[strata_a[i]].push_back({a.times[i], a.events[i] != 0.0, 0});
    for (std::size_t i = 0; i < b.times.size(); ++i) by_stratum[strata_b[i]].push_back({b.times[i], b.events[i] != 0.0, 1});
    LogrankParts total;
    for (auto& [label, obs] : by_stratum) {
        LogrankParts p = logrank_parts(std::move(obs));
        total.observed += p.observed;
        total.expected += p.expected;
        total.variance += p.variance;
        total.events += p.events;
    }
    if (total.events == 0) throw SchemaError("stratified log-rank: no events in any stratum");
    return finish(total);
}

TestResult welch_t(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) throw SchemaError("Welch t: each sample needs at least 2 values");
    const double mx = mean(x), my = mean(y);
    const double vx = sample_var(x, mx) / static_cast<double>(x.size());
    const double vy = sample_var(y, my) / static_cast<double>(y.size());
    const double se2 = vx + vy;
    if (!(se2 > 0.0)) throw SchemaError("Welch t: both samples have zero variance");
    TestResult res{"Welch t", (mx - my) / std::sqrt(se2), 1.0, 0.0};
    res.df = se2 * se2 / (vx * vx / static_cast<double>(x.size() - 1) + vy * vy / static_cast<double>(y.size() - 1));
    res.p_value = std::min(1.0, 2.0 * dist::t_upper(std::abs(res.statistic), res.df));
    return res;
}

TestResult mann_whitney(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw SchemaError("Mann-Whitney: empty sample");
    const std::size_t n1 = x.size(), n2 = y.size(), n = n1 + n2;
    std::vector<std::pair<double, int>> all;
    all.reserve(n);
    for (double v : x) all.emplace_back(v, 0);
    for (double v : y) all.emplace_back(v, 1);
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    double rank_sum = 0.0, tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (all[k].second == 0) rank_sum += avg_rank;
        const auto t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2), dn = static_cast<double>(n);
    TestResult res{"Mann-Whitney", rank_sum - d1 * (d1 + 1) / 2.0, 1.0, 0.0};
    const double mu = d1 * d2 / 2.0;
    const double sigma2 = d1 * d2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
    if (sigma2 > 0.0) {
        const double diff = res.statistic - mu;
        const double corrected = diff - (diff > 0 ? 0.5 : diff < 0 ? -0.5 : 0.0);
        const double z = corrected / std::sqrt(sigma2);
        res.p_value = std::min(1.0, 2.0 * dist::normal_cdf(-std::abs(z)));
    }
    return res;
}

TestResult prop_test(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
    if (n1 == 0 || n2 == 0) throw SchemaError("proportion test: empty sample");
    if (k1 > n1 || k2 > n2) throw SchemaError("proportion test: more successes than trials");
    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    TestResult res{"Proportions", 0.0, 1.0, 1.0};
    if (pooled <= 0.0 || pooled >= 1.0) return res;
    const double denom = pooled * (1 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
    res.statistic = (p1 - p2) * (p1 - p2) / denom;
    res.p_value = dist::chisq_upper(res.statistic, 1.0);
    return res;
}

TestResult chisq_homogeneity(std::span<const std::size_t> counts_a, std::span<const std::size_t> counts_b) {
    if (counts_a.size() != counts_b.size()) throw SchemaError("chi-square homogeneity: level counts differ in length");
    const double na = std::accumulate(counts_a.begin(), counts_a.end(), 0.0);
    const double nb = std::accumulate(counts_b.begin(), counts_b.end(), 0.0);
    if (na == 0.0 || nb == 0.0) throw SchemaError("chi-square homogeneity: empty sample");
    const double n = na + nb;
    TestResult res{"Chi-square", 0.0, 1.0, 0.0};
    int used = 0;
    for (std::size_t l = 0; l < counts_a.size(); ++l) {
        const double col = static_cast<double>(counts_a[l] + counts_b[l]);
        if (col == 0.0) continue;
        ++used;
        const double ea = na * col / n, eb = nb * col / n;
        const double oa = static_cast<double>(counts_a[l]), ob = static_cast<double>(counts_b[l]);
        res.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    res.df = used - 1;
    if (res.df < 1) {
        res.statistic = 0.0;
        return res;
    }
    res.p_value = dist::chisq_upper(res.statistic, res.df);
    return res;
}

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw SchemaError("Kolmogorov-Smirnov: empty sample");
    std::vector<double> a(x.begin(), x.end()), b(y.begin(), y.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return {"Kolmogorov-Smirnov", d, std::min(1.0, dist::kolmogorov_upper(lambda)), 0.0};
}

} // namespace survsynth
