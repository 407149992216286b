#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace survsynth {

enum class Role { covariate, entry_time, dropout, surv_time, event, ignore };
enum class Kind { continuous, binary, categorical, ordered };

std::string_view to_string(Role role);
std::string_view to_string(Kind kind);
Role parse_role(std::string_view text);
Kind parse_kind(std::string_view text);

struct ColumnSpec {
    std::string name;
    Role role = Role::covariate;
    Kind kind = Kind::continuous;
    // Categorical/ordered: ordered labels, first is the reference level.
    // Binary: optional pair of labels mapped to 0 and 1; empty means the
    // column is written as the digits 0/1.
    std::vector<std::string> levels;

    bool is_discrete() const { return kind != Kind::continuous; }
    // Number of distinct codes a discrete column can take.
    std::size_t n_levels() const;
    // Text label for a stored code (level index or 0/1).
    std::string label(double code) const;

    friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Schema = std::vector<ColumnSpec>;

// Throws SchemaError when the role/kind/level invariants do not hold. Loaded
// cohorts need exactly one surv_time and one event column; intermediate
// datasets (synthetic covariates) may lack them.
void validate_schema(const Schema& schema, bool require_outcome = true);

// Immutable validated cohort. Continuous values are stored as-is; binary as
// 0/1; categorical and ordered as level indices.
class Dataset {
public:
    Dataset() = default;

    // Validates every column against its spec (see validate_schema and the
    // value-domain checks in load_dataset) and throws SchemaError on failure.
    Dataset(Schema schema, std::vector<std::vector<double>> columns);

    const Schema& schema() const { return schema_; }
    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return schema_.size(); }

    bool has_column(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;
    const ColumnSpec& spec(std::string_view name) const;
    std::span<const double> column(std::string_view name) const;
    std::span<const double> column(std::size_t index) const { return columns_.at(index); }

    // Name of the unique column with the given role, if any.
    std::optional<std::string> column_with_role(Role role) const;

    // New dataset restricted to the given columns in the given order.
    Dataset select(std::span<const std::string> names) const;
    // New dataset holding the given rows (indices may repeat).
    Dataset take_rows(std::span<const std::size_t> rows) const;
    // New dataset with an extra column appended.
    Dataset with_column(ColumnSpec spec, std::vector<double> values) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    Schema schema_;
    std::size_t n_rows_ = 0;
    std::vector<std::vector<double>> columns_;
};

Dataset load_dataset(const std::filesystem::path& csv_path, const Schema& schema);
// Parses CSV text held in memory; same contract as load_dataset. A schema
// without outcome columns is accepted when require_outcome is false.
Dataset parse_dataset(std::string_view csv_text, const Schema& schema, bool require_outcome = true);

void write_dataset(const Dataset& data, const std::filesystem::path& csv_path);
std::string format_dataset(const Dataset& data);

// Shortest decimal text that reads back to the identical double.
std::string format_number(double value);

struct DesignColumn {
    std::string name;   // "age", "sex", "codon:MV"
    std::string source; // originating dataset column
    bool zero_variance = false;

    friend bool operator==(const DesignColumn&, const DesignColumn&) = default;
};

struct DesignMatrix {
    Eigen::MatrixXd x;
    std::vector<DesignColumn> legend;

    std::vector<std::string> names() const;
};

// Encodes the predictors without an intercept column: continuous and binary
// pass through, ordered become integer scores, categorical with L levels
// become L-1 reference-coded indicators.
DesignMatrix encode_design(const Dataset& data, std::span<const std::string> predictors);

// Width of encode_design's output for the given predictors.
std::size_t design_width(const Schema& schema, std::span<const std::string> predictors);

} // namespace survsynth
