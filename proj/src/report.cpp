#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "survsynth/error.hpp"
#include "survsynth/fcs.hpp"
#include "survsynth/spline.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

namespace {

const std::string kCombined = "(combined)";

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string format_cut(double v) { return fmt("%g", v); }

std::string quartile_summary(std::span<const double> x) {
    std::vector<double> v(x.begin(), x.end());
    std::sort(v.begin(), v.end());
    return fmt("%.4g", quantile(v, 0.5)) + " (" + fmt("%.4g", quantile(v, 0.25)) + ", " + fmt("%.4g", quantile(v, 0.75)) +
           ")";
}

std::vector<std::size_t> level_counts(std::span<const double> codes, std::size_t n_levels) {
    std::vector<std::size_t> counts(n_levels, 0);
    for (double c : codes) ++counts[static_cast<std::size_t>(c)];
    return counts;
}

std::string require_role(const Dataset& data, Role role) {
    auto name = data.column_with_role(role);
    if (!name) throw SchemaError("dataset has no " + std::string(to_string(role)) + " column");
    return *name;
}

std::string format_p(double p) {
    if (std::isnan(p)) return "-";
    if (p < 0.001) return "<0.001";
    return fmt("%.3f", p);
}

std::string format_ratio(double r) {
    if (std::isinf(r)) return "inf";
    if (std::isnan(r)) return "-";
    return fmt("%.3f", r);
}

std::string format_count(std::size_t k, std::size_t n) {
    return std::to_string(k) + " (" + fmt("%.1f", 100.0 * static_cast<double>(k) / static_cast<double>(n)) + "%)";
}

void add_test(VariableRow& row, const char* name, auto&& run) {
    try {
        row.tests.push_back(run());
    } catch (const SchemaError& e) {
        row.notices.push_back(std::string(name) + " not applicable: " + e.what());
    }
}

void fill_discrete(VariableRow& row, const ColumnSpec& spec, std::span<const double> a, std::span<const double> b) {
    const std::size_t n_levels = spec.n_levels();
    auto ca = level_counts(a, n_levels);
    auto cb = level_counts(b, n_levels);
    for (std::size_t l = 0; l < n_levels; ++l)
        row.levels.push_back({spec.label(static_cast<double>(l)), ca[l], cb[l]});
    if (n_levels == 2) {
        add_test(row, "proportion test", [&] { return prop_test(ca[1], a.size(), cb[1], b.size()); });
    } else {
        add_test(row, "chi-square test", [&] { return chisq_homogeneity(ca, cb); });
    }
}

struct Subset {
    std::vector<double> times, events;
};

Subset subset(std::span<const double> times, std::span<const double> events, std::span<const std::string> labels,
              const std::string& label) {
    Subset s;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (labels[i] == label) {
            s.times.push_back(times[i]);
            s.events.push_back(events[i]);
        }
    return s;
}

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string out = "\"";
    for (char ch : v) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::size_t count_events(std::span<const double> events) {
    return static_cast<std::size_t>(std::count(events.begin(), events.end(), 1.0));
}

} // namespace

std::vector<std::string> stratum_levels(const ColumnSpec& column, const StratumSpec& spec) {
    std::vector<std::string> out;
    if (column.kind == Kind::continuous) {
        if (spec.cuts.empty()) throw SchemaError("stratum column '" + column.name + "' is continuous and needs cut points");
        if (!std::is_sorted(spec.cuts.begin(), spec.cuts.end()) ||
            std::adjacent_find(spec.cuts.begin(), spec.cuts.end()) != spec.cuts.end())
            throw SchemaError("cut points for '" + column.name + "' must be strictly increasing");
        out.push_back("<=" + format_cut(spec.cuts.front()));
        for (std::size_t k = 1; k < spec.cuts.size(); ++k)
            out.push_back("(" + format_cut(spec.cuts[k - 1]) + "," + format_cut(spec.cuts[k]) + "]");
        out.push_back(">" + format_cut(spec.cuts.back()));
        return out;
    }
    if (!spec.cuts.empty()) throw SchemaError("stratum column '" + column.name + "' is discrete; cut points do not apply");
    for (std::size_t l = 0; l < column.n_levels(); ++l) out.push_back(column.label(static_cast<double>(l)));
    return out;
}

std::vector<std::string> stratum_labels(const Dataset& data, const StratumSpec& spec) {
    const ColumnSpec& column = data.spec(spec.column);
    const auto levels = stratum_levels(column, spec);
    auto values = data.column(spec.column);
    std::vector<std::string> out;
    out.reserve(values.size());
    for (double v : values) {
        if (column.kind == Kind::continuous) {
            auto k = std::lower_bound(spec.cuts.begin(), spec.cuts.end(), v) - spec.cuts.begin();
            out.push_back(levels[static_cast<std::size_t>(k)]);
        } else {
            out.push_back(levels[static_cast<std::size_t>(v)]);
        }
    }
    return out;
}

const std::string& VariableRow::test_name() const {
    static const std::string none;
    return tests.empty() ? none : tests.front().test_name;
}

double VariableRow::p_value() const {
    return tests.empty() ? std::numeric_limits<double>::quiet_NaN() : tests.front().p_value;
}

std::size_t UtilityReport::n_above_threshold() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [&](const VariableRow& r) { return r.s_pmse_ratio >= threshold; }));
}

UtilityReport compare_report(const Dataset& original, const Dataset& synthetic, const SynthesisPlan& plan,
                             std::span<const StratumSpec> strata, const ReportOptions& options) {
    const std::string time_col = require_role(original, Role::surv_time);
    const std::string event_col = require_role(original, Role::event);
    if (require_role(synthetic, Role::surv_time) != time_col || require_role(synthetic, Role::event) != event_col)
        throw SchemaError("original and synthetic cohorts name their outcome columns differently");

    UtilityReport report;
    report.n_original = original.n_rows();
    report.n_synthetic = synthetic.n_rows();
    report.threshold = options.threshold;

    bool used_chisq = false;
    std::vector<std::string> variables = plan.seq;
    variables.push_back(event_col);
    for (const auto& name : variables) {
        const ColumnSpec& spec = original.spec(name);
        if (!(synthetic.spec(name) == spec))
            throw SchemaError("column '" + name + "' differs between the original and synthetic schemas");
        VariableRow row;
        row.name = name;
        row.kind = spec.kind;
        auto a = original.column(name);
        auto b = synthetic.column(name);
        if (spec.kind == Kind::continuous) {
            row.original_summary = quartile_summary(a);
            row.synthetic_summary = quartile_summary(b);
            add_test(row, "Welch t", [&] { return welch_t(a, b); });
            add_test(row, "Mann-Whitney", [&] { return mann_whitney(a, b); });
        } else {
            fill_discrete(row, spec, a, b);
            used_chisq = used_chisq || spec.n_levels() > 2;
        }
        const std::string single[] = {name};
        PropensityResult p = propensity_utility(original, synthetic, single);
        row.s_pmse_ratio = p.s_pmse_ratio;
        row.s_pmse_z = p.s_pmse_z;
        if (p.separated) row.notices.push_back(p.diagnostic);
        report.rows.push_back(std::move(row));
    }

    auto ta = original.column(time_col), ea = original.column(event_col);
    auto tb = synthetic.column(time_col), eb = synthetic.column(event_col);
    report.overall_logrank = logrank_test({ta, ea}, {tb, eb});

    report.km.push_back({"original", "all", km_estimate(ta, ea)});
    report.km.push_back({"synthetic", "all", km_estimate(tb, eb)});

    for (const StratumSpec& s : strata) {
        const ColumnSpec& column = original.spec(s.column);
        const auto levels = stratum_levels(column, s);
        const auto la = stratum_labels(original, s);
        const auto lb = stratum_labels(synthetic, s);
        for (const auto& label : levels) {
            StratumResult r;
            r.column = s.column;
            r.label = label;
            Subset sa = subset(ta, ea, la, label), sb = subset(tb, eb, lb, label);
            r.n_original = sa.times.size();
            r.n_synthetic = sb.times.size();
            if (sa.times.empty() || sb.times.empty()) {
                r.skipped = true;
                r.notice = "stratum is empty in the " + std::string(sa.times.empty() ? "original" : "synthetic") + " cohort";
            } else if (count_events(sa.events) + count_events(sb.events) == 0) {
                r.skipped = true;
                r.notice = "no events in stratum";
            } else {
                LogrankResult lr = logrank_test({sa.times, sa.events}, {sb.times, sb.events});
                r.chi_sq = lr.chi_sq;
                r.p_value = lr.p_value;
            }
            if (!sa.times.empty())
                report.km.push_back({"original", s.column + "=" + label, km_estimate(sa.times, sa.events)});
            if (!sb.times.empty())
                report.km.push_back({"synthetic", s.column + "=" + label, km_estimate(sb.times, sb.events)});
            report.strata.push_back(std::move(r));
        }
        StratumResult combined;
        combined.column = s.column;
        combined.label = kCombined;
        combined.n_original = original.n_rows();
        combined.n_synthetic = synthetic.n_rows();
        LogrankResult lr = stratified_logrank_test({ta, ea}, la, {tb, eb}, lb);
        combined.chi_sq = lr.chi_sq;
        combined.p_value = lr.p_value;
        report.strata.push_back(std::move(combined));
    }

    report.propensity = propensity_utility(original, synthetic, plan.seq, options.propensity);
    if (report.propensity.separated) report.notes.push_back(report.propensity.diagnostic);
    if (used_chisq)
        report.notes.push_back("Variables with more than two levels are compared with a chi-square homogeneity test.");
    return report;
}

std::string render_report_table(const UtilityReport& report) {
    std::vector<std::array<std::string, 5>> lines;
    lines.push_back({"Characteristic", "Original", "Synthetic", "p-val", "S_pMSE"});
    lines.push_back({"N", std::to_string(report.n_original), std::to_string(report.n_synthetic), "", ""});
    for (const VariableRow& row : report.rows) {
        const std::string p = format_p(row.p_value());
        const std::string s = format_ratio(row.s_pmse_ratio);
        if (row.kind == Kind::continuous) {
            lines.push_back({row.name + ", median (Q1, Q3)", row.original_summary, row.synthetic_summary, p, s});
            continue;
        }
        lines.push_back({row.name + ", n (%)", "", "", p, s});
        for (const LevelCount& l : row.levels)
            lines.push_back({"  " + l.label, format_count(l.original, report.n_original),
                             format_count(l.synthetic, report.n_synthetic), "", ""});
    }

    std::array<std::size_t, 5> width{};
    for (const auto& l : lines)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], l[c].size());
    std::ostringstream out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& l = lines[i];
        std::string text = l[0] + std::string(width[0] - l[0].size(), ' ');
        for (std::size_t c = 1; c < 5; ++c) text += "  " + std::string(width[c] - l[c].size(), ' ') + l[c];
        while (!text.empty() && text.back() == ' ') text.pop_back();
        out << text << '\n';
        if (i == 0) {
            std::size_t total = width[0];
            for (std::size_t c = 1; c < 5; ++c) total += 2 + width[c];
            out << std::string(total, '-') << '\n';
        }
    }

    out << "\nLog-rank (original vs synthetic): chi-sq " << fmt("%.3f", report.overall_logrank.chi_sq) << ", p "
        << format_p(report.overall_logrank.p_value) << '\n';
    if (!report.strata.empty()) {
        out << "\nStratified log-rank\n";
        for (const StratumResult& s : report.strata) {
            out << "  " << s.column << " " << s.label << ": ";
            if (s.skipped) out << "skipped (" << s.notice << ")\n";
            else out << "n " << s.n_original << " / " << s.n_synthetic << ", p " << format_p(s.p_value) << '\n';
        }
    }
    out << "\nPropensity S_pMSE (all variables): " << format_ratio(report.propensity.s_pmse_ratio) << " (z "
        << format_ratio(report.propensity.s_pmse_z) << ")\n";
    for (const VariableRow& row : report.rows)
        for (const auto& n : row.notices) out << "Note: " << row.name << ": " << n << '\n';
    for (const auto& n : report.notes) out << "Note: " << n << '\n';
    out << report.n_above_threshold() << " variables above threshold (S_pMSE >= " << fmt("%g", report.threshold)
        << ")\n";
    return out.str();
}

std::string render_km_csv(const UtilityReport& report) {
    std::ostringstream out;
    out << "time,survival,ci_low,ci_high,group,cohort\n";
    for (const KMSeries& s : report.km) {
        const KMCurve& c = s.curve;
        for (std::size_t i = 0; i < c.times.size(); ++i)
            out << format_number(c.times[i]) << ',' << format_number(c.survival[i]) << ',' << format_number(c.ci_low[i])
                << ',' << format_number(c.ci_high[i]) << ',' << csv_field(s.group) << ',' << csv_field(s.cohort) << '\n';
    }
    return out.str();
}

} // namespace survsynth
