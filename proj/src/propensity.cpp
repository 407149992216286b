#include <cmath>
#include <limits>

#include "survsynth/error.hpp"
#include "survsynth/regression.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

double pmse(std::span<const double> p_hat, double c) {
    if (p_hat.empty()) throw SchemaError("pMSE: no predicted probabilities");
    if (!(c > 0.0 && c < 1.0)) throw SchemaError("pMSE: synthetic fraction must lie in (0, 1)");
    double sum = 0.0;
    for (double p : p_hat) sum += (p - c) * (p - c);
    return sum / static_cast<double>(p_hat.size());
}

NullMoments null_pmse_moments(std::size_t m, std::size_t n) {
    if (m < 1 || n < 1) throw SchemaError("null pMSE moments need M >= 1 and N >= 1");
    const double k = static_cast<double>(m - 1);
    const double eight_n = 8.0 * static_cast<double>(n);
    return {k / eight_n, 2.0 * k / (eight_n * eight_n)};
}

PropensityResult propensity_utility(const Dataset& original, const Dataset& synthetic,
                                    std::span<const std::string> variables, const PropensityOptions& options) {
    for (const auto& v : variables)
        if (!(original.spec(v) == synthetic.spec(v)))
            throw SchemaError("propensity: column '" + v + "' differs between the original and synthetic schemas");
    if (original.n_rows() == 0 || synthetic.n_rows() == 0) throw SchemaError("propensity: empty dataset");

    const Dataset a = original.select(variables);
    const Dataset b = synthetic.select(variables);
    std::vector<std::vector<double>> merged(a.n_cols());
    for (std::size_t j = 0; j < a.n_cols(); ++j) {
        auto ca = a.column(j);
        auto cb = b.column(j);
        merged[j].assign(ca.begin(), ca.end());
        merged[j].insert(merged[j].end(), cb.begin(), cb.end());
    }
    const Dataset both(a.schema(), std::move(merged));
    DesignMatrix design = encode_design(both, variables);

    std::vector<Eigen::VectorXd> cols;
    auto keep = [&](const Eigen::VectorXd& c) {
        if (c.size() > 0 && (c.array() != c[0]).any()) cols.push_back(c);
    };
    for (Eigen::Index j = 0; j < design.x.cols(); ++j) keep(design.x.col(j));
    if (options.interactions) {
        for (Eigen::Index j = 0; j < design.x.cols(); ++j)
            for (Eigen::Index k = j + 1; k < design.x.cols(); ++k)
                if (design.legend[static_cast<std::size_t>(j)].source != design.legend[static_cast<std::size_t>(k)].source)
                    keep(design.x.col(j).cwiseProduct(design.x.col(k)));
    }
    const std::size_t n = both.n_rows();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = cols[j];
    Eigen::VectorXd source(static_cast<Eigen::Index>(n));
    source.head(static_cast<Eigen::Index>(original.n_rows())).setZero();
    source.tail(static_cast<Eigen::Index>(synthetic.n_rows())).setOnes();

    PropensityResult res;
    res.n = n;
    res.m = cols.size() + 1;
    res.c = static_cast<double>(synthetic.n_rows()) / static_cast<double>(n);
    NullMoments null = null_pmse_moments(res.m, res.n);
    res.expected_null = null.expected;
    res.var_null = null.variance;

    regression::LogisticFit fit = regression::logistic(x, source);
    if (fit.separated) {
        res.separated = true;
        res.s_pmse_ratio = std::numeric_limits<double>::infinity();
        res.s_pmse_z = std::numeric_limits<double>::infinity();
        res.pmse = std::numeric_limits<double>::quiet_NaN();
        res.diagnostic = "propensity model separates the sources: original and synthetic rows are perfectly distinguishable";
        return res;
    }
    Eigen::VectorXd p_hat = regression::logistic_probabilities(x, fit.coef);
    res.pmse = pmse(std::span<const double>(p_hat.data(), static_cast<std::size_t>(p_hat.size())), res.c);
    if (res.m > 1) {
        res.s_pmse_ratio = res.pmse / res.expected_null;
        res.s_pmse_z = (res.pmse - res.expected_null) / std::sqrt(res.var_null);
    }
    return res;
}

} // namespace survsynth
