#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "survsynth/random.hpp"
#include "survsynth/survival_model.hpp"
#include "survsynth/tabular.hpp"

namespace survsynth {

struct StudyWindow {
    double study_span = 0.0; // administrative limit, measured from each entry time
};

enum class Status { censored = 0, dead = 1 };
enum class Cause { event, admin_censor, dropout };

std::string_view to_string(Cause cause);

struct SyntheticOutcome {
    double observed_time = 0.0;
    Status status = Status::censored;
    Cause cause = Cause::admin_censor;
};

enum class InversionMethod {
    automatic, // closed form without internal knots, bisection otherwise
    bisection,
};

// Solves s(log t) = target on the log-time scale. Throws ModelContractError
// for a non-monotone model and NumericalError when the bracket
// [k_min - 50, k_max + 50] holds no sign change.
double invert_log_time(const RoystonParmarModel& model, double target, InversionMethod method = InversionMethod::automatic);

// t with S(t | z) = u, i.e. s(log t) = log(-log u) - beta' z.
double survival_time_for(const RoystonParmarModel& model, std::span<const double> z, double u,
                         InversionMethod method = InversionMethod::automatic);

// Draws u ~ Uniform(0, 1) from rng and inverts.
double draw_survival_time(const RoystonParmarModel& model, std::span<const double> z, Rng& rng,
                          InversionMethod method = InversionMethod::automatic);

// Status assembly for one row: dropout censors at min(t, L); otherwise
// death before L is an event and survival past L is censored at L.
SyntheticOutcome assemble_outcome(double death_time, double admin_limit, bool dropout);

struct SimulateOptions {
    std::string time_column = "time";
    std::string status_column = "status";
    std::string cause_column = "cause";
    bool emit_cause = false;
};

// Appends observed time, status and (optionally) cause columns to the
// covariates. Row i draws from Rng(mix_seed(rng_seed + i)), so each row's
// time depends only on the seed and its index.
Dataset simulate_cohort(const RoystonParmarModel& model, const Dataset& covariates, const StudyWindow& window,
                        std::uint64_t rng_seed, const SimulateOptions& options = {});

} // namespace survsynth
