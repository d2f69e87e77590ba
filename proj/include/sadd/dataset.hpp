#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sadd {

enum class AttributeKind { Numeric, Categorical };

struct Attribute {
    std::string name;
    AttributeKind kind = AttributeKind::Numeric;

    bool operator==(const Attribute&) const = default;
};

using Schema = std::vector<Attribute>;

/// One attribute column. Numeric columns fill `numeric`; categorical columns
/// fill `codes`, which index into `levels`. Missing cells hold 0.0 / -1. The level vocabulary is fixed at
/// load time and shared by every subset of the dataset, so category codes mean
/// the same thing in every fold.
struct Column {
    std::vector<double> numeric;
    std::vector<int> codes;
    std::vector<std::string> levels;
    std::vector<std::uint8_t> missing;

    bool operator==(const Column&) const = default;
};

/// Columnar table with class labels. `labels[r]` indexes `class_names`;
/// -1 marks a row without a known class (prediction inputs).
struct Dataset {
    Schema schema;
    std::vector<Column> columns;
    std::vector<std::string> class_names;
    std::vector<int> labels;
    std::string class_column = "class";

    std::size_t rows() const { return labels.size(); }
    std::size_t attributes() const { return schema.size(); }
    std::size_t class_count() const { return class_names.size(); }

    bool is_numeric(std::size_t j) const { return schema[j].kind == AttributeKind::Numeric; }
    bool is_missing(std::size_t r, std::size_t j) const { return columns[j].missing[r] != 0; }
    bool has_missing() const;

    /// Rows in the given order; vocabularies are preserved.
    Dataset subset(std::span<const std::size_t> rows) const;

    /// Throws sadd::Error("load", ...) when column lengths disagree.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct CsvOptions {
    std::string missing_token = "?";
    std::optional<Schema> schema_hint;
    bool has_class_column = true;
};

Dataset parse_csv(std::istream& in, const CsvOptions& options = {});
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes header plus rows; numbers use the shortest round-trip form.
void write_csv(const Dataset& data, std::ostream& out, const std::string& missing_token = "?");

/// Sidecar schema: one `name,kind` line per attribute, kind is
/// `numeric` or `categorical`. Blank lines and `#` comments are ignored.
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(std::istream& in);

/// Per-column fill values computed from a reference partition.
struct ImputationStats {
    std::vector<double> means;  // numeric columns
    std::vector<int> modes;     // categorical columns (level code)
};

ImputationStats compute_imputation(const Dataset& reference);
Dataset apply_imputation(const Dataset& data, const ImputationStats& stats);

/// Mean/mode imputation using statistics of `reference` only.
Dataset impute_missing(const Dataset& data, const Dataset& reference);

struct FoldPlan {
    std::vector<int> fold_of;
    int folds = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_rows(int fold) const;
    std::vector<std::size_t> train_rows(int fold) const;
};

/// Shuffle each class with the seed, then deal rows round-robin into folds.
FoldPlan stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);
FoldPlan stratified_folds(const Dataset& data, int folds, std::uint64_t seed);

struct LabeledSplit {
    std::vector<std::size_t> labeled_rows;
    std::vector<std::size_t> unlabeled_rows;
    double fraction = 1.0;
};

/// Draws round(fraction * |train_rows|) rows stratified by class.
/// `labels` is indexed by the row ids stored in `train_rows`.
LabeledSplit split_labeled_fraction(std::span<const std::size_t> train_rows,
                                    std::span<const int> labels, double fraction,
                                    std::uint64_t seed);

}  // namespace sadd
