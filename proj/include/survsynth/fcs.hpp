#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "survsynth/random.hpp"
#include "survsynth/tabular.hpp"

namespace survsynth {

// Numeric method parameters, e.g. {"prior_mean": [0, 0], "prior_precision": [1]}.
using MethodParams = std::map<std::string, std::vector<double>>;

struct SynthesisPlan {
    std::vector<std::string> seq;                            // visit sequence
    std::map<std::string, std::vector<std::string>> pred;    // target -> predictors
    std::map<std::string, std::string> method;               // target -> method name
    std::map<std::string, MethodParams> method_params;       // target -> parameters
    std::vector<std::string> passthrough;                    // predictors never synthesized
    double n_multiplier = 2.0;
    std::uint64_t seed = 0;

    // Predictors of a target; empty when the target has no entry.
    const std::vector<std::string>& predictors_of(const std::string& target) const;
};

// Built-in method names.
inline constexpr const char* kBuiltinMethods[] = {"logistic", "polytomous",     "propodds",       "normrank", "pmm",
                                                  "linear",   "linear_prior",   "lasso_linear",   "lasso_logistic",
                                                  "lda"};

// Default method for a column kind: logistic, polytomous, propodds, normrank.
std::string default_method(Kind kind);

// seq = covariate, entry_time and dropout columns in schema order; each
// target predicted by every earlier column; methods by kind; multiplier 2.
SynthesisPlan default_plan(const Schema& schema);
inline SynthesisPlan default_plan(const Dataset& data) { return default_plan(data.schema()); }

// Throws SchemaError when the plan breaks the sequence restriction, names an
// unknown column or method, pairs a method with an incompatible kind, or
// leaves out the entry_time/dropout columns.
void validate_plan(const Schema& schema, const SynthesisPlan& plan);

// Columns of generate's output in schema order: seq plus passthrough.
std::vector<std::string> output_columns(const Schema& schema, const SynthesisPlan& plan);

// User-supplied conditional model. The fitter receives the predictor design
// (no intercept, zero-variance columns removed) and the target values of the
// original data, and returns a sampler for one design row.
using Sampler = std::function<double(std::span<const double> row, Rng& rng)>;
using CustomMethod = std::function<Sampler(const Eigen::MatrixXd& design, std::span<const double> target)>;

// Throws SchemaError when the name is taken (built-in or registered).
void register_custom_method(const std::string& name, CustomMethod method);
bool is_known_method(const std::string& name);

namespace fcs_detail {
class ConditionalModel;
}

struct FittedTarget {
    std::string target;
    std::string method;
    std::vector<std::string> predictors;
    std::vector<std::size_t> kept_columns; // design columns used by the model
    std::vector<std::string> design_names; // names of the kept columns
    std::shared_ptr<const fcs_detail::ConditionalModel> model;
    bool degenerate = false;               // constant target
    bool fallback = false;                 // empirical conditional sampling after separation
};

class FittedSynthesizer {
public:
    const SynthesisPlan& plan() const { return plan_; }
    const Schema& schema() const { return schema_; }
    std::size_t n_original() const { return n_original_; }
    const std::vector<FittedTarget>& targets() const { return targets_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    friend FittedSynthesizer fit_synthesizer(const Dataset&, const SynthesisPlan&);
    friend Dataset generate(const FittedSynthesizer&, std::size_t, std::uint64_t,
                            const std::function<void(const std::string&, const std::vector<std::string>&)>&);

    SynthesisPlan plan_;
    Schema schema_;
    std::size_t n_original_ = 0;
    std::vector<FittedTarget> targets_;
    std::map<std::string, std::vector<double>> passthrough_values_;
    std::vector<std::string> warnings_;
};

FittedSynthesizer fit_synthesizer(const Dataset& data, const SynthesisPlan& plan);

// Observer called before each target is drawn with the columns visible to
// its conditional model.
using GenerateObserver = std::function<void(const std::string& target, const std::vector<std::string>& visible)>;

// n synthetic rows of the plan's output columns. Passthrough columns keep
// their original values when n equals the original row count and are
// bootstrapped otherwise.
Dataset generate(const FittedSynthesizer& synth, std::size_t n, std::uint64_t rng_seed,
                 const GenerateObserver& observer = {});

// round(multiplier * n), at least 1.
std::size_t synthetic_size(const SynthesisPlan& plan, std::size_t n_original);

} // namespace survsynth
