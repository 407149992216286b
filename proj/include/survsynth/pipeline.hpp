#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "survsynth/fcs.hpp"
#include "survsynth/serialization.hpp"
#include "survsynth/simulate.hpp"
#include "survsynth/survival_model.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

// Stage seeds derive from the config seed by fixed offsets.
inline constexpr std::uint64_t kSynthesisSeedOffset = 1;
inline constexpr std::uint64_t kSimulationSeedOffset = 2;

struct OutputPaths {
    std::filesystem::path synthetic_csv;
    std::filesystem::path model_json;
    std::filesystem::path report_json;
    std::filesystem::path report_txt;
    std::filesystem::path km_csv;
};

struct PipelineConfig {
    std::filesystem::path input_csv;
    Schema schema;
    KnotChoice knots = 1;
    std::vector<std::string> predictors;
    FitOptions fit;
    SynthesisPlan plan;
    StudyWindow window;
    std::uint64_t seed = 0;
    std::vector<StratumSpec> strata;
    OutputPaths outputs;
    bool emit_cause = false;
    bool interactions = false;
    double threshold = 3.0;
};

// Relative paths resolve against base_dir. Throws SchemaError on any missing
// or malformed field; seed, window.study_span and model.df/knots have no
// defaults.
PipelineConfig parse_config(const Json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Schema of the synthetic cohort CSV: generated columns plus the outcome pair.
Schema synthetic_schema(const PipelineConfig& config);

struct RunLog {
    std::ostream& out;     // summaries
    std::ostream& err;     // progress when verbose
    bool verbose = false;
};

RoystonParmarModel cmd_fit(const PipelineConfig& config, RunLog& log);
Dataset cmd_synthesize(const PipelineConfig& config, RunLog& log);
UtilityReport cmd_evaluate(const PipelineConfig& config, RunLog& log);
void cmd_pipeline(const PipelineConfig& config, RunLog& log);

// 2 schema/config, 3 model contract, 4 numerical, 1 anything else.
int exit_code_for(const std::exception& e);

// Full command-line entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace survsynth
