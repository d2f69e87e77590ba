#include "sadd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sadd/error.hpp"
#include "sadd/random.hpp"

namespace sadd {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

// Comma separated fields with optional double quoting ("" escapes a quote).
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    fields.emplace_back(trim(field));
    return fields;
}

std::optional<double> parse_number(std::string_view token) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error("io", "cannot format number");
    return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& token) {
    if (token.find_first_of(",\"") == std::string::npos) return token;
    std::string out = "\"";
    for (char ch : token) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

int intern(std::vector<std::string>& vocabulary, const std::string& token) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), token);
    if (it != vocabulary.end()) return static_cast<int>(it - vocabulary.begin());
    vocabulary.push_back(token);
    return static_cast<int>(vocabulary.size() - 1);
}

AttributeKind parse_kind(std::string_view token) {
    std::string lower(token);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "numeric") return AttributeKind::Numeric;
    if (lower == "categorical") return AttributeKind::Categorical;
    throw Error("load", "unknown attribute kind '" + std::string(token) + "'");
}

}  // namespace

bool Dataset::has_missing() const {
    for (const auto& col : columns) {
        if (std::any_of(col.missing.begin(), col.missing.end(), [](auto m) { return m != 0; }))
            return true;
    }
    return false;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.schema = schema;
    out.class_names = class_names;
    out.class_column = class_column;
    out.columns.resize(columns.size());
    out.labels.reserve(rows.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const Column& src = columns[j];
        Column& dst = out.columns[j];
        dst.levels = src.levels;
        dst.missing.reserve(rows.size());
        if (is_numeric(j)) dst.numeric.reserve(rows.size());
        else dst.codes.reserve(rows.size());
        for (std::size_t r : rows) {
            if (is_numeric(j)) dst.numeric.push_back(src.numeric.at(r));
            else dst.codes.push_back(src.codes.at(r));
            dst.missing.push_back(src.missing[r]);
        }
    }
    for (std::size_t r : rows) out.labels.push_back(labels.at(r));
    return out;
}

void Dataset::validate() const {
    if (columns.size() != schema.size())
        throw Error("load", "schema has " + std::to_string(schema.size()) + " attributes but " +
                                std::to_string(columns.size()) + " columns are present");
    const std::size_t n = labels.size();
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const Column& col = columns[j];
        const std::size_t len = is_numeric(j) ? col.numeric.size() : col.codes.size();
        if (len != n || col.missing.size() != n)
            throw Error("load", "column '" + schema[j].name + "' has inconsistent length");
    }
    for (int label : labels) {
        if (label < -1 || label >= static_cast<int>(class_names.size()))
            throw Error("load", "class label index out of range");
    }
}

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw Error("load", "missing header row");

    const std::size_t n_fields = header.size();
    if (options.has_class_column && n_fields < 2)
        throw Error("load", "need at least one attribute column plus the class column");
    const std::size_t n_attrs = options.has_class_column ? n_fields - 1 : n_fields;

    std::vector<std::vector<std::string>> cells(n_fields);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n_fields)
            throw Error("load", "ragged row at line " + std::to_string(line_no) + ": expected " +
                                    std::to_string(n_fields) + " fields, found " +
                                    std::to_string(fields.size()));
        for (std::size_t j = 0; j < n_fields; ++j) cells[j].push_back(std::move(fields[j]));
    }
    const std::size_t n_rows = cells[0].size();
    if (n_rows == 0) throw Error("load", "dataset has no rows");

    Schema schema;
    if (options.schema_hint) {
        schema = *options.schema_hint;
        if (schema.size() == n_attrs + 1 && options.has_class_column) schema.pop_back();
        if (schema.size() != n_attrs)
            throw Error("load", "schema lists " + std::to_string(schema.size()) +
                                    " attributes but the file has " + std::to_string(n_attrs));
        for (std::size_t j = 0; j < n_attrs; ++j) {
            if (schema[j].name != header[j])
                throw Error("load", "schema attribute '" + schema[j].name +
                                        "' does not match header column '" + header[j] + "'");
        }
    } else {
        for (std::size_t j = 0; j < n_attrs; ++j) {
            const bool numeric = std::all_of(cells[j].begin(), cells[j].end(), [&](const auto& c) {
                return c == options.missing_token || parse_number(c).has_value();
            });
            schema.push_back({header[j], numeric ? AttributeKind::Numeric : AttributeKind::Categorical});
        }
    }

    Dataset data;
    data.schema = schema;
    data.columns.resize(n_attrs);
    for (std::size_t j = 0; j < n_attrs; ++j) {
        Column& col = data.columns[j];
        col.missing.resize(n_rows, 0);
        const bool numeric = schema[j].kind == AttributeKind::Numeric;
        if (numeric) col.numeric.resize(n_rows, 0.0);
        else col.codes.resize(n_rows, -1);
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::string& token = cells[j][r];
            if (token == options.missing_token) {
                col.missing[r] = 1;
                continue;
            }
            if (numeric) {
                const auto value = parse_number(token);
                if (!value)
                    throw Error("load", "unparseable numeric cell '" + token + "' in column '" +
                                            header[j] + "' at data row " + std::to_string(r + 1));
                col.numeric[r] = *value;
            } else {
                col.codes[r] = intern(col.levels, token);
            }
        }
    }

    data.labels.assign(n_rows, -1);
    if (options.has_class_column) {
        data.class_column = header.back();
        for (std::size_t r = 0; r < n_rows; ++r) {
            const std::string& token = cells[n_attrs][r];
            if (token == options.missing_token || token.empty())
                throw Error("load", "missing class label at data row " + std::to_string(r + 1));
            data.labels[r] = intern(data.class_names, token);
        }
    }
    data.validate();
    return data;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error("load", "cannot open '" + path.string() + "'");
    return parse_csv(in, options);
}

void write_csv(const Dataset& data, std::ostream& out, const std::string& missing_token) {
    for (std::size_t j = 0; j < data.attributes(); ++j) {
        if (j) out << ',';
        out << quote_if_needed(data.schema[j].name);
    }
    const bool labelled = !data.class_names.empty();
    if (labelled) out << (data.attributes() ? "," : "") << quote_if_needed(data.class_column);
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t j = 0; j < data.attributes(); ++j) {
            if (j) out << ',';
            if (data.is_missing(r, j)) out << missing_token;
            else if (data.is_numeric(j)) out << format_number(data.columns[j].numeric[r]);
            else out << quote_if_needed(data.columns[j].levels[data.columns[j].codes[r]]);
        }
        if (labelled) {
            out << (data.attributes() ? "," : "");
            const int label = data.labels[r];
            out << (label < 0 ? missing_token : quote_if_needed(data.class_names[label]));
        }
        out << '\n';
    }
    if (!out) throw Error("io", "write failed");
}

Schema parse_schema(std::istream& in) {
    Schema schema;
    std::string line;
    while (std::getline(in, line)) {
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto fields = split_csv_line(body);
        if (fields.size() != 2) throw Error("load", "schema line must be 'name,kind': " + line);
        schema.push_back({fields[0], parse_kind(fields[1])});
    }
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("load", "cannot open schema '" + path.string() + "'");
    return parse_schema(in);
}

ImputationStats compute_imputation(const Dataset& reference) {
    ImputationStats stats;
    stats.means.assign(reference.attributes(), 0.0);
    stats.modes.assign(reference.attributes(), -1);
    for (std::size_t j = 0; j < reference.attributes(); ++j) {
        const Column& col = reference.columns[j];
        std::size_t present = 0;
        if (reference.is_numeric(j)) {
            double sum = 0.0;
            for (std::size_t r = 0; r < reference.rows(); ++r) {
                if (col.missing[r]) continue;
                sum += col.numeric[r];
                ++present;
            }
            if (present) stats.means[j] = sum / static_cast<double>(present);
        } else {
            std::vector<std::size_t> counts(col.levels.size(), 0);
            for (std::size_t r = 0; r < reference.rows(); ++r) {
                if (col.missing[r]) continue;
                ++counts[col.codes[r]];
                ++present;
            }
            int best = -1;
            for (std::size_t v = 0; v < counts.size(); ++v) {
                if (counts[v] == 0) continue;
                if (best < 0 || counts[v] > counts[best] ||
                    (counts[v] == counts[best] && col.levels[v] < col.levels[best]))
                    best = static_cast<int>(v);
            }
            stats.modes[j] = best;
        }
        if (present == 0)
            throw Error("impute", "column '" + reference.schema[j].name +
                                      "' has no observed values in the reference data");
    }
    return stats;
}

Dataset apply_imputation(const Dataset& data, const ImputationStats& stats) {
    if (stats.means.size() != data.attributes() || stats.modes.size() != data.attributes())
        throw Error("impute", "imputation statistics do not match the schema");
    Dataset out = data;
    for (std::size_t j = 0; j < out.attributes(); ++j) {
        Column& col = out.columns[j];
        for (std::size_t r = 0; r < out.rows(); ++r) {
            if (!col.missing[r]) continue;
            if (out.is_numeric(j)) col.numeric[r] = stats.means[j];
            else col.codes[r] = stats.modes[j];
            col.missing[r] = 0;
        }
    }
    return out;
}

Dataset impute_missing(const Dataset& data, const Dataset& reference) {
    if (data.schema != reference.schema) throw Error("impute", "schema mismatch");
    return apply_imputation(data, compute_imputation(reference));
}

std::vector<std::size_t> FoldPlan::test_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of.size(); ++r)
        if (fold_of[r] == fold) rows.push_back(r);
    return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < fold_of.size(); ++r)
        if (fold_of[r] != fold) rows.push_back(r);
    return rows;
}

namespace {

std::vector<std::vector<std::size_t>> group_by_class(std::span<const std::size_t> rows,
                                                     std::span<const int> labels,
                                                     const char* stage) {
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t r : rows) {
        const int label = labels[r];
        if (label < 0) throw Error(stage, "row without a class label");
        if (static_cast<std::size_t>(label) >= groups.size()) groups.resize(label + 1);
        groups[label].push_back(r);
    }
    return groups;
}

}  // namespace

FoldPlan stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw Error("folds", "fold count must be at least 2");
    if (static_cast<std::size_t>(folds) > labels.size())
        throw Error("folds", "fold count " + std::to_string(folds) + " exceeds row count " +
                                 std::to_string(labels.size()));
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    auto groups = group_by_class(all, labels, "folds");

    FoldPlan plan;
    plan.folds = folds;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), -1);
    Rng rng(seed);
    std::size_t next = 0;
    for (auto& group : groups) {
        rng.shuffle(group);
        for (std::size_t r : group) {
            plan.fold_of[r] = static_cast<int>(next % folds);
            ++next;
        }
    }
    return plan;
}

FoldPlan stratified_folds(const Dataset& data, int folds, std::uint64_t seed) {
    return stratified_folds(data.labels, folds, seed);
}

LabeledSplit split_labeled_fraction(std::span<const std::size_t> train_rows,
                                    std::span<const int> labels, double fraction,
                                    std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error("split", "labeled fraction must lie in (0, 1]");
    auto groups = group_by_class(train_rows, labels, "split");
    const auto target = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(train_rows.size())));

    // Largest-remainder allocation keeps per-class proportions and hits the total exactly.
    std::vector<std::size_t> quota(groups.size());
    std::vector<double> remainder(groups.size());
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const double exact = fraction * static_cast<double>(groups[c].size());
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::vector<std::size_t> order(groups.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < target && !order.empty(); i = (i + 1) % order.size()) {
        const std::size_t c = order[i];
        if (quota[c] < groups[c].size()) {
            ++quota[c];
            ++assigned;
        }
    }

    LabeledSplit split;
    split.fraction = fraction;
    Rng rng(seed);
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto& group = groups[c];
        rng.shuffle(group);
        for (std::size_t i = 0; i < group.size(); ++i)
            (i < quota[c] ? split.labeled_rows : split.unlabeled_rows).push_back(group[i]);
    }
    std::sort(split.labeled_rows.begin(), split.labeled_rows.end());
    std::sort(split.unlabeled_rows.begin(), split.unlabeled_rows.end());
    return split;
}

}  // namespace sadd
