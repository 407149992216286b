#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "survsynth/fcs.hpp"
#include "survsynth/survival_model.hpp"
#include "survsynth/tabular.hpp"
#include "survsynth/utility.hpp"

namespace survsynth {

using Json = nlohmann::json;

// Schema as [{"name", "role", "kind", "levels"?}, ...].
Json schema_to_json(const Schema& schema);
Schema schema_from_json(const Json& j, bool require_outcome = true);

Json knots_to_json(const KnotSet& knots);
KnotSet knots_from_json(const Json& j);

// {knots, gamma, beta, design_legend, predictors, fit_info}. Doubles are
// written in shortest round-trip form, so reading back is bit-exact.
Json model_to_json(const RoystonParmarModel& model);
// Throws ModelContractError when the document is not a valid model.
RoystonParmarModel model_from_json(const Json& j);

// Synthesis section of a config: {seq?, pred?, methods?, method_params?,
// n_multiplier?, passthrough?}. Missing parts take their defaults: seq from
// default_plan, each target predicted by all earlier seq columns plus the
// passthrough columns, methods by kind.
SynthesisPlan plan_from_json(const Json& j, const Schema& schema);
Json plan_to_json(const SynthesisPlan& plan);

Json report_to_json(const UtilityReport& report);

// Pretty-printed with a trailing newline.
std::string dump_json(const Json& j);
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Throws SchemaError naming the first key of `j` outside `allowed`.
void require_keys_subset(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

} // namespace survsynth
