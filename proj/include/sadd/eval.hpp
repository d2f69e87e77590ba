#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sadd/dataset.hpp"
#include "sadd/discretizer.hpp"
#include "sadd/nb.hpp"
#include "sadd/stats.hpp"

namespace sadd {

/// One discretizer + classifier pipeline.
struct PipelineConfig {
    std::string name;
    Method method = Method::Sadd;
    SchemeParams scheme;
    Classifier classifier = Classifier::Nb;
    /// k-NN pseudo labels for unlabeled rows join scheme derivation.
    bool pseudo_label = true;
    /// Test-fold features (with pseudo labels, never true labels) join scheme
    /// derivation. Off means inductive: only training rows are used.
    bool transductive = true;
    /// Fraction of each training fold that keeps its labels; the rest is
    /// treated as unlabeled.
    double labeled_fraction = 1.0;
    /// Empty means the default odd grid 1..31.
    std::vector<std::size_t> k_grid;
    TrainOptions train;

    /// Throws sadd::Error("config", ...) on an inconsistent configuration.
    void validate() const;

    bool operator==(const PipelineConfig&) const = default;
};

/// Pipeline with the defaults matching `method` (pseudo labels for SADD only).
PipelineConfig make_config(std::string name, Method method, Classifier classifier);

struct DiagnosticsRow {
    std::size_t attribute = 0;
    std::string name;
    std::size_t intervals = 0;
    double mutual_information = 0.0;

    bool operator==(const DiagnosticsRow&) const = default;
};

/// Per numeric attribute interval count and MI with the class, plus averages.
struct DiagnosticsTable {
    std::vector<DiagnosticsRow> rows;
    double average_intervals = 0.0;
    double average_mutual_information = 0.0;

    bool operator==(const DiagnosticsTable&) const = default;
};

DiagnosticsTable diagnostics_table(const DiscretizationScheme& scheme, const DiscreteData& data);
void write_diagnostics(const DiagnosticsTable& table, std::ostream& out);

struct FoldResult {
    int fold = 0;
    std::size_t n_train = 0;
    std::size_t n_labeled = 0;
    std::size_t n_test = 0;
    std::size_t correct = 0;
    /// Percent correct on the test fold.
    double accuracy = 0.0;
    /// Selected k for pseudo labelling, 0 when pseudo labelling is off.
    std::size_t k = 0;
    /// Rows (dataset indices) that received pseudo labels, and the labels.
    std::vector<std::size_t> pseudo_rows;
    std::vector<int> pseudo_labels;
    double final_objective = 0.0;
    std::size_t train_iterations = 0;
    /// Scheme diagnostics measured on the labeled training rows.
    DiagnosticsTable diagnostics;

    bool operator==(const FoldResult&) const = default;
};

/// Runs the fold pipeline: impute with training statistics, optionally
/// pseudo-label unlabeled rows with a validation-tuned k-NN, derive the scheme
/// on labeled + pseudo-labeled rows, fit on labeled training rows only, and
/// score the test rows.
FoldResult run_fold(const Dataset& data, std::span<const std::size_t> train_rows,
                    std::span<const std::size_t> test_rows, const PipelineConfig& config,
                    std::uint64_t seed);

/// Fold-aggregated scheme diagnostics.
struct DiagnosticsSummary {
    std::vector<std::string> names;
    std::vector<double> mean_intervals;
    /// Most frequent interval count across folds (ties to the smaller count).
    std::vector<std::size_t> modal_intervals;
    std::vector<double> mean_mutual_information;
    double average_intervals = 0.0;
    double average_mutual_information = 0.0;
};

struct EvalReport {
    std::string dataset;
    PipelineConfig config;
    std::uint64_t seed = 0;
    int folds = 0;
    std::vector<FoldResult> fold_results;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over folds

    std::vector<double> accuracies() const;
    DiagnosticsSummary diagnostics() const;

    bool operator==(const EvalReport&) const = default;
};

/// Stratified k-fold cross-validation; all configs that share `seed` share
/// the same fold plan, so their fold accuracies pair up. Folds run on up to
/// `jobs` threads; results are reduced in fold order.
EvalReport cross_validate(const Dataset& data, const PipelineConfig& config, int folds,
                          std::uint64_t seed, std::size_t jobs = 1, std::string dataset_name = {});

/// All runs of one dataset plus one-tailed paired t-tests of the reference
/// run against every other run.
struct Comparison {
    std::string dataset;
    std::vector<EvalReport> runs;
    std::optional<std::size_t> reference;
    std::vector<std::optional<TTestResult>> versus_reference;

    bool operator==(const Comparison&) const = default;
};

Comparison compare_runs(std::string dataset, std::vector<EvalReport> runs,
                        std::optional<std::size_t> reference);

struct BenchReport {
    std::uint64_t seed = 0;
    std::string config_hash;
    int folds = 10;
    std::vector<Comparison> datasets;
    std::vector<std::string> failures;

    bool operator==(const BenchReport&) const = default;
};

std::string results_to_json(const BenchReport& report);
BenchReport results_from_json(std::string_view text);

/// Aligned accuracy table ("mean±std"); a trailing "•" marks runs the
/// reference beats significantly.
void write_table(const BenchReport& report, std::ostream& out);

enum class ReportFormat { Json, Table };
ReportFormat parse_report_format(std::string_view tag);
void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace sadd
