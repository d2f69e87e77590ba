#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sadd/dataset.hpp"

namespace sadd {

struct KnnConfig {
    std::size_t k = 1;
};

/// k-nearest-neighbour classifier over mixed attributes. Numeric attributes
/// are z-scored with statistics of the labeled rows (zero-variance columns
/// drop out); each categorical mismatch adds 1 to the squared distance.
class KnnClassifier {
public:
    KnnClassifier(const Dataset& labeled, std::span<const int> labels);

    /// Majority label of the k nearest labeled rows. Distance ties prefer the
    /// lower labeled-row index, vote ties the smaller class index.
    int predict(const Dataset& query, std::size_t row, const KnnConfig& config) const;
    std::vector<int> predict_all(const Dataset& query, const KnnConfig& config) const;

    /// Labeled row indices ordered by distance to the query row.
    std::vector<std::size_t> neighbours(const Dataset& query, std::size_t row) const;

    std::size_t size() const { return labels_.size(); }

private:
    double squared_distance(const Dataset& query, std::size_t row, std::size_t ref) const;

    Schema schema_;
    std::vector<std::vector<double>> scaled_;  // per numeric attribute, z-scores
    std::vector<std::vector<int>> codes_;      // per categorical attribute
    std::vector<double> mean_;
    std::vector<double> inv_sd_;               // 0 for zero-variance columns
    std::vector<int> labels_;
    std::size_t n_classes_ = 0;
};

int knn_predict(const Dataset& labeled, std::span<const int> labels, const Dataset& query,
                std::size_t row, const KnnConfig& config);

/// Odd k from 1 to 31, capped at `max_k`.
std::vector<std::size_t> default_k_grid(std::size_t max_k);

/// Validation-tuned k: the labeled rows are dealt into nine stratified parts,
/// one is held out, and the grid value with the best held-out accuracy wins
/// (ties go to the smaller k). Grid values larger than the fitting set are
/// skipped.
std::size_t select_k(const Dataset& train, std::span<const int> labels,
                     std::span<const std::size_t> grid, std::uint64_t seed);

/// One label per unlabeled row, in row order.
std::vector<int> pseudo_label(const Dataset& labeled, std::span<const int> labels,
                              const Dataset& unlabeled, const KnnConfig& config);

}  // namespace sadd
