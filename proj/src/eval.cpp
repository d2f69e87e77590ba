#include "sadd/eval.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "sadd/error.hpp"
#include "sadd/pseudo_label.hpp"
#include "sadd/random.hpp"
#include "sadd/serialization.hpp"

namespace sadd {

namespace {

// Seed streams derived per fold so folds stay independent of scheduling.
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kKSelectStream = 2;

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(stage, e.what());
    }
}

std::vector<int> labels_of(const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(data.labels.at(r));
    return out;
}

std::string format_fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0))
        throw Error("config", "labeled_fraction must lie in (0, 1]");
    if (pseudo_label && !is_supervised(method))
        throw Error("config", "pseudo labelling needs a supervised discretizer");
    if (scheme.n0 == 0) throw Error("config", "N0 must be positive");
    if (scheme.bins == 0) throw Error("config", "bins must be positive");
    for (std::size_t k : k_grid)
        if (k == 0) throw Error("config", "k grid values must be positive");
}

PipelineConfig make_config(std::string name, Method method, Classifier classifier) {
    PipelineConfig c;
    c.name = std::move(name);
    c.method = method;
    c.classifier = classifier;
    c.pseudo_label = method == Method::Sadd;
    return c;
}

DiagnosticsTable diagnostics_table(const DiscretizationScheme& scheme, const DiscreteData& data) {
    if (scheme.attributes() != data.attributes())
        throw Error("eval", "scheme does not match the discretized data");
    DiagnosticsTable table;
    std::vector<int> column(data.n_rows);
    for (std::size_t j = 0; j < scheme.attributes(); ++j) {
        if (scheme.kinds[j] != AttributeKind::Numeric) continue;
        DiagnosticsRow row;
        row.attribute = j;
        row.name = scheme.attribute_names[j];
        row.intervals = scheme.intervals(j);
        if (data.n_rows > 0) {
            for (std::size_t r = 0; r < data.n_rows; ++r) column[r] = data.at(r, j);
            row.mutual_information = mutual_information(column, data.labels);
        }
        table.rows.push_back(std::move(row));
    }
    if (!table.rows.empty()) {
        for (const auto& row : table.rows) {
            table.average_intervals += static_cast<double>(row.intervals);
            table.average_mutual_information += row.mutual_information;
        }
        table.average_intervals /= static_cast<double>(table.rows.size());
        table.average_mutual_information /= static_cast<double>(table.rows.size());
    }
    return table;
}

void write_diagnostics(const DiagnosticsTable& table, std::ostream& out) {
    std::size_t width = 9;
    for (const auto& row : table.rows) width = std::max(width, row.name.size() + 2);
    out << std::left << std::setw(static_cast<int>(width)) << "attribute" << std::right
        << std::setw(10) << "intervals" << std::setw(10) << "MI" << '\n';
    for (const auto& row : table.rows) {
        out << std::left << std::setw(static_cast<int>(width)) << row.name << std::right
            << std::setw(10) << row.intervals << std::setw(10) << format_fixed(row.mutual_information, 4)
            << '\n';
    }
    out << std::left << std::setw(static_cast<int>(width)) << "AVG" << std::right << std::setw(10)
        << format_fixed(table.average_intervals, 2) << std::setw(10)
        << format_fixed(table.average_mutual_information, 4) << '\n';
}

FoldResult run_fold(const Dataset& data, std::span<const std::size_t> train_rows,
                    std::span<const std::size_t> test_rows, const PipelineConfig& config,
                    std::uint64_t seed) {
    config.validate();
    if (train_rows.empty()) throw Error("eval", "empty training fold");
    if (test_rows.empty()) throw Error("eval", "empty test fold");
    {
        std::vector<std::size_t> a(train_rows.begin(), train_rows.end());
        std::vector<std::size_t> b(test_rows.begin(), test_rows.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<std::size_t> both;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
        if (!both.empty()) throw Error("eval", "training and test rows overlap");
    }

    FoldResult result;
    result.n_train = train_rows.size();
    result.n_test = test_rows.size();

    // Imputation statistics come from the training rows only.
    const Dataset full = staged("impute", [&] {
        return apply_imputation(data, compute_imputation(data.subset(train_rows)));
    });

    std::vector<std::size_t> labeled(train_rows.begin(), train_rows.end());
    std::vector<std::size_t> unlabeled;
    if (config.labeled_fraction < 1.0) {
        auto split = staged("split", [&] {
            return split_labeled_fraction(train_rows, data.labels, config.labeled_fraction,
                                          derive_seed(seed, kSplitStream));
        });
        labeled = std::move(split.labeled_rows);
        unlabeled = std::move(split.unlabeled_rows);
    }
    result.n_labeled = labeled.size();
    const Dataset labeled_data = full.subset(labeled);
    const std::vector<int> labeled_y = labels_of(data, labeled);

    std::vector<std::size_t> scheme_rows = labeled;
    std::vector<int> scheme_labels = labeled_y;
    if (config.pseudo_label) {
        std::vector<std::size_t> targets = unlabeled;
        if (config.transductive) targets.insert(targets.end(), test_rows.begin(), test_rows.end());
        if (!targets.empty()) {
            staged("pseudo_label", [&] {
                const auto grid = config.k_grid.empty() ? default_k_grid(labeled.size()) : config.k_grid;
                result.k = select_k(labeled_data, labeled_y, grid, derive_seed(seed, kKSelectStream));
                result.pseudo_labels = pseudo_label(labeled_data, labeled_y, full.subset(targets), {result.k});
                result.pseudo_rows = targets;
                return 0;
            });
            scheme_rows.insert(scheme_rows.end(), targets.begin(), targets.end());
            scheme_labels.insert(scheme_labels.end(), result.pseudo_labels.begin(), result.pseudo_labels.end());
        }
    } else if (!is_supervised(config.method)) {
        // Unsupervised schemes may use every training row's features.
        scheme_rows.insert(scheme_rows.end(), unlabeled.begin(), unlabeled.end());
        scheme_labels.assign(scheme_rows.size(), 0);
    }

    const auto scheme = staged("discretize", [&] {
        return build_scheme(full.subset(scheme_rows), scheme_labels, config.method, config.scheme);
    });
    const DiscreteData train_d = staged("discretize", [&] { return apply_scheme(scheme, labeled_data); });
    const DiscreteData test_d = staged("discretize", [&] { return apply_scheme(scheme, full.subset(test_rows)); });

    const NbModel model = staged("nb", [&] { return fit_nb(train_d); });
    const TrainResult trained = staged("train", [&] {
        return train_weights(model, train_d, config.classifier, config.train);
    });
    result.final_objective = trained.objective_history.back();
    result.train_iterations = trained.iterations;

    staged("predict", [&] {
        for (std::size_t r = 0; r < test_d.n_rows; ++r)
            if (predict(model, trained.params, test_d.row(r)) == test_d.labels[r]) ++result.correct;
        return 0;
    });
    result.accuracy = 100.0 * static_cast<double>(result.correct) / static_cast<double>(result.n_test);
    result.diagnostics = diagnostics_table(scheme, train_d);
    return result;
}

std::vector<double> EvalReport::accuracies() const {
    std::vector<double> out;
    out.reserve(fold_results.size());
    for (const auto& f : fold_results) out.push_back(f.accuracy);
    return out;
}

DiagnosticsSummary EvalReport::diagnostics() const {
    DiagnosticsSummary summary;
    if (fold_results.empty()) return summary;
    const auto& first = fold_results.front().diagnostics.rows;
    const std::size_t m = first.size();
    summary.names.resize(m);
    summary.mean_intervals.assign(m, 0.0);
    summary.mean_mutual_information.assign(m, 0.0);
    summary.modal_intervals.assign(m, 0);
    for (std::size_t a = 0; a < m; ++a) {
        summary.names[a] = first[a].name;
        std::map<std::size_t, std::size_t> histogram;
        for (const auto& fold : fold_results) {
            const auto& row = fold.diagnostics.rows.at(a);
            summary.mean_intervals[a] += static_cast<double>(row.intervals);
            summary.mean_mutual_information[a] += row.mutual_information;
            ++histogram[row.intervals];
        }
        const double n = static_cast<double>(fold_results.size());
        summary.mean_intervals[a] /= n;
        summary.mean_mutual_information[a] /= n;
        std::size_t best_count = 0;
        for (const auto& [intervals, count] : histogram) {
            if (count > best_count) {
                best_count = count;
                summary.modal_intervals[a] = intervals;
            }
        }
        summary.average_intervals += summary.mean_intervals[a];
        summary.average_mutual_information += summary.mean_mutual_information[a];
    }
    if (m > 0) {
        summary.average_intervals /= static_cast<double>(m);
        summary.average_mutual_information /= static_cast<double>(m);
    }
    return summary;
}

EvalReport cross_validate(const Dataset& data, const PipelineConfig& config, int folds,
                          std::uint64_t seed, std::size_t jobs, std::string dataset_name) {
    config.validate();
    const FoldPlan plan = staged("folds", [&] { return stratified_folds(data, folds, seed); });

    EvalReport report;
    report.dataset = std::move(dataset_name);
    report.config = config;
    report.seed = seed;
    report.folds = folds;
    report.fold_results.resize(folds);

    auto run_one = [&](int f) {
        const auto train = plan.train_rows(f);
        const auto test = plan.test_rows(f);
        FoldResult r = run_fold(data, train, test, config, derive_seed(seed, 1000 + f));
        r.fold = f;
        return r;
    };

    const std::size_t width = std::max<std::size_t>(jobs, 1);
    for (int start = 0; start < folds; start += static_cast<int>(width)) {
        const int end = std::min(folds, start + static_cast<int>(width));
        if (width == 1) {
            report.fold_results[start] = run_one(start);
            continue;
        }
        std::vector<std::future<FoldResult>> pending;
        for (int f = start; f < end; ++f) pending.push_back(std::async(std::launch::async, run_one, f));
        for (int f = start; f < end; ++f) report.fold_results[f] = pending[f - start].get();
    }

    const auto acc = report.accuracies();
    report.mean = mean(acc);
    report.stddev = sample_std(acc);
    return report;
}

Comparison compare_runs(std::string dataset, std::vector<EvalReport> runs,
                        std::optional<std::size_t> reference) {
    Comparison c;
    c.dataset = std::move(dataset);
    c.runs = std::move(runs);
    c.versus_reference.assign(c.runs.size(), std::nullopt);
    if (reference && *reference >= c.runs.size()) throw Error("eval", "reference run out of range");
    if (c.runs.size() < 2) reference.reset();
    c.reference = reference;
    if (!reference) return c;
    const auto ref_acc = c.runs[*reference].accuracies();
    for (std::size_t i = 0; i < c.runs.size(); ++i) {
        if (i == *reference) continue;
        c.versus_reference[i] = paired_t_test_one_tailed(ref_acc, c.runs[i].accuracies());
    }
    return c;
}

std::string results_to_json(const BenchReport& report) { return nlohmann::json(report).dump(2) + "\n"; }

BenchReport results_from_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text).get<BenchReport>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("io", std::string("malformed results file: ") + e.what());
    }
}

void write_table(const BenchReport& report, std::ostream& out) {
    // Column order: first appearance of each config name across datasets.
    std::vector<std::string> columns;
    for (const auto& c : report.datasets)
        for (const auto& run : c.runs)
            if (std::find(columns.begin(), columns.end(), run.config.name) == columns.end())
                columns.push_back(run.config.name);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Dataset"};
    header.insert(header.end(), columns.begin(), columns.end());
    cells.push_back(header);

    std::vector<double> sums(columns.size(), 0.0);
    std::vector<std::size_t> counts(columns.size(), 0);
    bool any_tests = false;
    for (const auto& c : report.datasets) {
        std::vector<std::string> row{c.dataset};
        for (std::size_t col = 0; col < columns.size(); ++col) {
            std::string cell = "-";
            for (std::size_t i = 0; i < c.runs.size(); ++i) {
                if (c.runs[i].config.name != columns[col]) continue;
                cell = format_fixed(c.runs[i].mean, 2) + "±" + format_fixed(c.runs[i].stddev, 2);
                if (c.reference && i < c.versus_reference.size() && c.versus_reference[i]) {
                    any_tests = true;
                    if (c.versus_reference[i]->significant) cell += " •";
                }
                if (c.reference && i == *c.reference) cell += " (ref)";
                sums[col] += c.runs[i].mean;
                ++counts[col];
            }
            row.push_back(cell);
        }
        cells.push_back(std::move(row));
    }
    std::vector<std::string> avg{"AVG"};
    for (std::size_t col = 0; col < columns.size(); ++col)
        avg.push_back(counts[col] ? format_fixed(sums[col] / static_cast<double>(counts[col]), 2) : "-");
    cells.push_back(avg);

    auto display_width = [](const std::string& s) {
        // Count UTF-8 code points so "±" and "•" occupy one column.
        std::size_t w = 0;
        for (unsigned char ch : s)
            if ((ch & 0xC0) != 0x80) ++w;
        return w;
    };
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));

    out << "# seed " << report.seed << ", config " << report.config_hash << ", " << report.folds
        << "-fold stratified CV, accuracy % (mean±std)\n";
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            const auto& s = cells[r][i];
            out << s;
            if (i + 1 < cells[r].size()) out << std::string(widths[i] - display_width(s) + 2, ' ');
        }
        out << '\n';
    }
    if (any_tests)
        out << "• the reference run is significantly better (one-tailed paired t-test, p < 0.05)\n";
    for (const auto& failure : report.failures) out << "FAILED: " << failure << '\n';
}

ReportFormat parse_report_format(std::string_view tag) {
    if (tag == "json") return ReportFormat::Json;
    if (tag == "table") return ReportFormat::Table;
    throw Error("config", "unknown report format '" + std::string(tag) + "'");
}

void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write '" + path.string() + "'");
    if (format == ReportFormat::Json) out << results_to_json(report);
    else write_table(report, out);
    if (!out) throw Error("io", "write failed for '" + path.string() + "'");
}

}  // namespace sadd
