#include "survsynth/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "survsynth/error.hpp"

namespace survsynth {

namespace {

constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::covariate, "covariate"}, {Role::entry_time, "entry_time"}, {Role::dropout, "dropout"},
    {Role::surv_time, "surv_time"}, {Role::event, "event"},           {Role::ignore, "ignore"},
};

constexpr std::pair<Kind, std::string_view> kKindNames[] = {
    {Kind::continuous, "continuous"},
    {Kind::binary, "binary"},
    {Kind::categorical, "categorical"},
    {Kind::ordered, "ordered"},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
        return std::nullopt;
    return value;
}

// RFC 4180 records: quoted fields may hold separators, doubled quotes and
// line breaks.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        bool blank = record.size() == 1 && record.front().empty();
        if (!blank) records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (ch == ',') {
            record.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (ch == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_record();
        } else if (ch == '\n') {
            end_record();
        } else {
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes) throw SchemaError("CSV: unterminated quoted field");
    if (field_started || !record.empty()) end_record();
    return records;
}

std::string quote_if_needed(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

bool is_code(double v, std::size_t n_codes) {
    return v >= 0.0 && v < static_cast<double>(n_codes) && v == std::floor(v);
}

void validate_values(const ColumnSpec& spec, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        auto fail = [&](const std::string& what) {
            throw SchemaError("column '" + spec.name + "', row " + std::to_string(i + 1) + ": " + what);
        };
        if (!std::isfinite(v)) fail("missing or non-finite value");
        switch (spec.kind) {
        case Kind::continuous:
            if (spec.role == Role::surv_time && v <= 0.0)
                fail("non-positive survival time " + format_number(v));
            if (spec.role == Role::entry_time && v < 0.0)
                fail("negative entry time " + format_number(v));
            break;
        case Kind::binary:
            if (v != 0.0 && v != 1.0) fail("value " + format_number(v) + " outside {0,1}");
            break;
        case Kind::categorical:
        case Kind::ordered:
            if (!is_code(v, spec.levels.size())) fail("invalid level index " + format_number(v));
            break;
        }
    }
}

double parse_cell(const ColumnSpec& spec, std::string_view raw, std::size_t row) {
    std::string_view cell = trim(raw);
    auto fail = [&](const std::string& what) -> double {
        throw SchemaError("column '" + spec.name + "', row " + std::to_string(row) + ": " + what);
    };
    if (cell.empty()) return fail("missing value");
    switch (spec.kind) {
    case Kind::continuous: {
        auto v = parse_double(cell);
        if (!v) return fail("unparseable number '" + std::string(cell) + "'");
        return *v;
    }
    case Kind::binary:
        if (spec.levels.empty()) {
            auto v = parse_double(cell);
            if (!v) return fail("unparseable value '" + std::string(cell) + "'");
            return *v; // domain check happens in validate_values
        }
        [[fallthrough]];
    case Kind::categorical:
    case Kind::ordered: {
        auto it = std::find(spec.levels.begin(), spec.levels.end(), cell);
        if (it == spec.levels.end()) return fail("unknown label '" + std::string(cell) + "'");
        return static_cast<double>(it - spec.levels.begin());
    }
    }
    return fail("unreachable");
}

} // namespace

std::string_view to_string(Role role) {
    for (auto& [r, name] : kRoleNames)
        if (r == role) return name;
    return "?";
}

std::string_view to_string(Kind kind) {
    for (auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "?";
}

Role parse_role(std::string_view text) {
    for (auto& [r, name] : kRoleNames)
        if (name == text) return r;
    throw SchemaError("unknown column role '" + std::string(text) + "'");
}

Kind parse_kind(std::string_view text) {
    for (auto& [k, name] : kKindNames)
        if (name == text) return k;
    throw SchemaError("unknown column kind '" + std::string(text) + "'");
}

std::size_t ColumnSpec::n_levels() const {
    switch (kind) {
    case Kind::continuous: return 0;
    case Kind::binary: return 2;
    default: return levels.size();
    }
}

std::string ColumnSpec::label(double code) const {
    if (kind == Kind::continuous || (kind == Kind::binary && levels.empty())) return format_number(code);
    return levels.at(static_cast<std::size_t>(code));
}

void validate_schema(const Schema& schema, bool require_outcome) {
    std::set<std::string> names;
    std::map<Role, int> role_count;
    for (const auto& col : schema) {
        if (col.name.empty()) throw SchemaError("column with empty name");
        if (!names.insert(col.name).second) throw SchemaError("duplicate column '" + col.name + "'");
        ++role_count[col.role];
        switch (col.kind) {
        case Kind::continuous:
            if (!col.levels.empty()) throw SchemaError("continuous column '" + col.name + "' declares levels");
            break;
        case Kind::binary:
            if (!col.levels.empty() && col.levels.size() != 2)
                throw SchemaError("binary column '" + col.name + "' must declare exactly 2 labels or none");
            break;
        case Kind::categorical:
        case Kind::ordered:
            if (col.levels.empty()) throw SchemaError("column '" + col.name + "' has an empty level list");
            break;
        }
        std::set<std::string> seen(col.levels.begin(), col.levels.end());
        if (seen.size() != col.levels.size()) throw SchemaError("column '" + col.name + "' repeats a level");
        if ((col.role == Role::surv_time || col.role == Role::entry_time) && col.kind != Kind::continuous)
            throw SchemaError("column '" + col.name + "' must be continuous for role " +
                              std::string(to_string(col.role)));
        if ((col.role == Role::event || col.role == Role::dropout) &&
            (col.kind != Kind::binary || !col.levels.empty()))
            throw SchemaError("column '" + col.name + "' must be an unlabelled 0/1 binary for role " +
                              std::string(to_string(col.role)));
    }
    for (Role r : {Role::surv_time, Role::event, Role::entry_time, Role::dropout}) {
        int n = role_count[r];
        if (n > 1) throw SchemaError("more than one column with role " + std::string(to_string(r)));
        if (require_outcome && (r == Role::surv_time || r == Role::event) && n != 1)
            throw SchemaError("schema needs exactly one column with role " + std::string(to_string(r)));
    }
}

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
    validate_schema(schema_, false);
    if (columns_.size() != schema_.size())
        throw SchemaError("dataset has " + std::to_string(columns_.size()) + " columns but schema declares " +
                          std::to_string(schema_.size()));
    n_rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].size() != n_rows_)
            throw SchemaError("column '" + schema_[j].name + "' has length " + std::to_string(columns_[j].size()) +
                              ", expected " + std::to_string(n_rows_));
        validate_values(schema_[j], columns_[j]);
    }
}

bool Dataset::has_column(std::string_view name) const {
    return std::any_of(schema_.begin(), schema_.end(), [&](const ColumnSpec& c) { return c.name == name; });
}

std::size_t Dataset::index_of(std::string_view name) const {
    for (std::size_t j = 0; j < schema_.size(); ++j)
        if (schema_[j].name == name) return j;
    throw SchemaError("no column named '" + std::string(name) + "'");
}

const ColumnSpec& Dataset::spec(std::string_view name) const { return schema_[index_of(name)]; }

std::span<const double> Dataset::column(std::string_view name) const { return columns_[index_of(name)]; }

std::optional<std::string> Dataset::column_with_role(Role role) const {
    for (const auto& c : schema_)
        if (c.role == role) return c.name;
    return std::nullopt;
}

Dataset Dataset::select(std::span<const std::string> names) const {
    Schema schema;
    std::vector<std::vector<double>> cols;
    for (const auto& name : names) {
        std::size_t j = index_of(name);
        schema.push_back(schema_[j]);
        cols.push_back(columns_[j]);
    }
    return Dataset(std::move(schema), std::move(cols));
}

Dataset Dataset::take_rows(std::span<const std::size_t> rows) const {
    std::vector<std::vector<double>> cols(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        cols[j].reserve(rows.size());
        for (std::size_t r : rows) cols[j].push_back(columns_[j].at(r));
    }
    return Dataset(schema_, std::move(cols));
}

Dataset Dataset::with_column(ColumnSpec spec, std::vector<double> values) const {
    Schema schema = schema_;
    auto cols = columns_;
    schema.push_back(std::move(spec));
    cols.push_back(std::move(values));
    return Dataset(std::move(schema), std::move(cols));
}

Dataset parse_dataset(std::string_view csv_text, const Schema& schema, bool require_outcome) {
    validate_schema(schema, require_outcome);
    auto records = split_records(csv_text);
    if (records.empty()) throw SchemaError("CSV is empty (no header)");
    const auto& header = records.front();
    std::vector<std::size_t> position;
    for (const auto& col : schema) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == col.name; });
        if (it == header.end()) throw SchemaError("CSV is missing column '" + col.name + "'");
        position.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    if (records.size() < 2) throw SchemaError("CSV has no data rows");
    std::vector<std::vector<double>> cols(schema.size());
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != header.size())
            throw SchemaError("CSV row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                              " fields, header has " + std::to_string(header.size()));
        for (std::size_t j = 0; j < schema.size(); ++j) cols[j].push_back(parse_cell(schema[j], rec[position[j]], r));
    }
    return Dataset(schema, std::move(cols));
}

Dataset load_dataset(const std::filesystem::path& csv_path, const Schema& schema) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + csv_path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str(), schema);
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

std::string format_dataset(const Dataset& data) {
    std::string out;
    const auto& schema = data.schema();
    for (std::size_t j = 0; j < schema.size(); ++j) {
        if (j) out.push_back(',');
        out += quote_if_needed(schema[j].name);
    }
    out.push_back('\n');
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (j) out.push_back(',');
            out += quote_if_needed(schema[j].label(data.column(j)[i]));
        }
        out.push_back('\n');
    }
    return out;
}

void write_dataset(const Dataset& data, const std::filesystem::path& csv_path) {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + csv_path.string() + "'");
    out << format_dataset(data);
    if (!out) throw Error("write to '" + csv_path.string() + "' failed");
}

std::vector<std::string> DesignMatrix::names() const {
    std::vector<std::string> out;
    for (const auto& c : legend) out.push_back(c.name);
    return out;
}

std::size_t design_width(const Schema& schema, std::span<const std::string> predictors) {
    std::size_t width = 0;
    for (const auto& name : predictors) {
        auto it = std::find_if(schema.begin(), schema.end(), [&](const ColumnSpec& c) { return c.name == name; });
        if (it == schema.end()) throw SchemaError("predictor '" + name + "' is not a column");
        width += it->kind == Kind::categorical ? it->levels.size() - 1 : 1;
    }
    return width;
}

DesignMatrix encode_design(const Dataset& data, std::span<const std::string> predictors) {
    const std::size_t n = data.n_rows();
    DesignMatrix out;
    out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(design_width(data.schema(), predictors)));
    Eigen::Index col = 0;
    auto flag_constant = [&](Eigen::Index c) {
        bool constant = true;
        for (Eigen::Index i = 1; i < out.x.rows() && constant; ++i) constant = out.x(i, c) == out.x(0, c);
        return constant;
    };
    for (const auto& name : predictors) {
        const ColumnSpec& spec = data.spec(name);
        if (spec.role == Role::ignore) throw SchemaError("predictor '" + name + "' has role ignore");
        auto values = data.column(name);
        if (spec.kind == Kind::categorical) {
            for (std::size_t level = 1; level < spec.levels.size(); ++level, ++col) {
                for (std::size_t i = 0; i < n; ++i) out.x(static_cast<Eigen::Index>(i), col) = values[i] == level ? 1.0 : 0.0;
                out.legend.push_back({name + ":" + spec.levels[level], name, flag_constant(col)});
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) out.x(static_cast<Eigen::Index>(i), col) = values[i];
            out.legend.push_back({name, name, flag_constant(col)});
            ++col;
        }
    }
    return out;
}

} // namespace survsynth
