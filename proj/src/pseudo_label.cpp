#include "sadd/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sadd/error.hpp"

namespace sadd {

KnnClassifier::KnnClassifier(const Dataset& labeled, std::span<const int> labels)
    : schema_(labeled.schema), labels_(labels.begin(), labels.end()), n_classes_(labeled.class_count()) {
    if (labels.size() != labeled.rows())
        throw Error("pseudo_label", "label vector does not match the labeled rows");
    if (labeled.rows() == 0) throw Error("pseudo_label", "no labeled rows");
    if (labeled.has_missing()) throw Error("pseudo_label", "labeled data must be imputed first");
    for (int label : labels_) {
        if (label < 0) throw Error("pseudo_label", "labeled row without a class");
        n_classes_ = std::max(n_classes_, static_cast<std::size_t>(label) + 1);
    }

    const double n = static_cast<double>(labeled.rows());
    mean_.assign(labeled.attributes(), 0.0);
    inv_sd_.assign(labeled.attributes(), 0.0);
    scaled_.resize(labeled.attributes());
    codes_.resize(labeled.attributes());
    for (std::size_t j = 0; j < labeled.attributes(); ++j) {
        if (!labeled.is_numeric(j)) {
            codes_[j] = labeled.columns[j].codes;
            continue;
        }
        const auto& col = labeled.columns[j].numeric;
        const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : col) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / n);
        mean_[j] = mean;
        inv_sd_[j] = sd > 0.0 ? 1.0 / sd : 0.0;
        scaled_[j].resize(col.size());
        for (std::size_t r = 0; r < col.size(); ++r) scaled_[j][r] = (col[r] - mean) * inv_sd_[j];
    }
}

double KnnClassifier::squared_distance(const Dataset& query, std::size_t row, std::size_t ref) const {
    double d = 0.0;
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        if (schema_[j].kind == AttributeKind::Numeric) {
            const double z = (query.columns[j].numeric[row] - mean_[j]) * inv_sd_[j];
            const double diff = z - scaled_[j][ref];
            d += diff * diff;
        } else {
            d += query.columns[j].codes[row] == codes_[j][ref] ? 0.0 : 1.0;
        }
    }
    return d;
}

std::vector<std::size_t> KnnClassifier::neighbours(const Dataset& query, std::size_t row) const {
    if (query.schema != schema_) throw Error("pseudo_label", "schema mismatch");
    for (std::size_t j = 0; j < schema_.size(); ++j) {
        if (query.is_missing(row, j)) throw Error("pseudo_label", "query row must be imputed first");
    }
    std::vector<double> dist(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) dist[i] = squared_distance(query, row, i);
    std::vector<std::size_t> order(labels_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    return order;
}

int KnnClassifier::predict(const Dataset& query, std::size_t row, const KnnConfig& config) const {
    if (config.k < 1) throw Error("pseudo_label", "k must be at least 1");
    if (config.k > labels_.size())
        throw Error("pseudo_label", "k exceeds the number of labeled rows");
    const auto order = neighbours(query, row);
    std::vector<std::size_t> votes(n_classes_, 0);
    for (std::size_t i = 0; i < config.k; ++i) ++votes[labels_[order[i]]];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> KnnClassifier::predict_all(const Dataset& query, const KnnConfig& config) const {
    std::vector<int> out(query.rows());
    for (std::size_t r = 0; r < query.rows(); ++r) out[r] = predict(query, r, config);
    return out;
}

int knn_predict(const Dataset& labeled, std::span<const int> labels, const Dataset& query,
                std::size_t row, const KnnConfig& config) {
    return KnnClassifier(labeled, labels).predict(query, row, config);
}

std::vector<std::size_t> default_k_grid(std::size_t max_k) {
    std::vector<std::size_t> grid;
    for (std::size_t k = 1; k <= 31 && k <= max_k; k += 2) grid.push_back(k);
    if (grid.empty()) grid.push_back(1);
    return grid;
}

std::size_t select_k(const Dataset& train, std::span<const int> labels,
                     std::span<const std::size_t> grid, std::uint64_t seed) {
    if (grid.empty()) throw Error("pseudo_label", "empty k grid");
    if (labels.size() != train.rows())
        throw Error("pseudo_label", "label vector does not match the training rows");
    if (train.rows() < 2) throw Error("pseudo_label", "k selection needs at least two rows");

    const int parts = static_cast<int>(std::min<std::size_t>(9, train.rows()));
    const FoldPlan plan = stratified_folds(labels, parts, seed);
    const auto fit_rows = plan.train_rows(0);
    const auto val_rows = plan.test_rows(0);
    const Dataset fit = train.subset(fit_rows);
    const Dataset val = train.subset(val_rows);
    std::vector<int> fit_labels, val_labels;
    for (std::size_t r : fit_rows) fit_labels.push_back(labels[r]);
    for (std::size_t r : val_rows) val_labels.push_back(labels[r]);

    const KnnClassifier model(fit, fit_labels);
    // One neighbour ranking per validation row serves every grid value.
    std::vector<std::vector<std::size_t>> rankings;
    rankings.reserve(val.rows());
    for (std::size_t r = 0; r < val.rows(); ++r) rankings.push_back(model.neighbours(val, r));

    std::vector<std::size_t> sorted_grid(grid.begin(), grid.end());
    std::sort(sorted_grid.begin(), sorted_grid.end());
    std::size_t best_k = 0;
    std::size_t best_correct = 0;
    const std::size_t n_classes = std::max<std::size_t>(
        train.class_count(), static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1);
    for (std::size_t k : sorted_grid) {
        if (k < 1 || k > fit.rows()) continue;
        std::size_t correct = 0;
        for (std::size_t r = 0; r < val.rows(); ++r) {
            std::vector<std::size_t> votes(n_classes, 0);
            for (std::size_t i = 0; i < k; ++i) ++votes[fit_labels[rankings[r][i]]];
            const int pred = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            if (pred == val_labels[r]) ++correct;
        }
        if (best_k == 0 || correct > best_correct) {
            best_k = k;
            best_correct = correct;
        }
    }
    if (best_k == 0) throw Error("pseudo_label", "every k in the grid exceeds the fitting set");
    return best_k;
}

std::vector<int> pseudo_label(const Dataset& labeled, std::span<const int> labels,
                              const Dataset& unlabeled, const KnnConfig& config) {
    if (labeled.schema != unlabeled.schema) throw Error("pseudo_label", "schema mismatch");
    if (unlabeled.rows() == 0) return {};
    return KnnClassifier(labeled, labels).predict_all(unlabeled, config);
}

}  // namespace sadd
