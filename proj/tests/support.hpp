#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sadd/dataset.hpp"
#include "sadd/discretizer.hpp"
#include "sadd/nb.hpp"

namespace sadd::testing {

inline std::filesystem::path source_dir() { return SADD_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

/// All-numeric dataset from column vectors.
inline Dataset numeric_dataset(const std::vector<std::vector<double>>& columns, const std::vector<int>& labels,
                               std::size_t n_classes) {
    Dataset d;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        d.schema.push_back({"x" + std::to_string(j), AttributeKind::Numeric});
        Column c;
        c.numeric = columns[j];
        c.missing.assign(labels.size(), 0);
        d.columns.push_back(std::move(c));
    }
    for (std::size_t c = 0; c < n_classes; ++c) d.class_names.push_back("c" + std::to_string(c));
    d.labels = labels;
    return d;
}

inline DiscreteData random_discrete(std::mt19937_64& rng, std::size_t rows, std::size_t attrs, std::size_t classes,
                                    std::size_t max_arity) {
    DiscreteData d;
    d.n_rows = rows;
    d.n_classes = classes;
    for (std::size_t j = 0; j < attrs; ++j) d.arity.push_back(2 + rng() % (max_arity - 1));
    for (std::size_t r = 0; r < rows; ++r) {
        const int y = static_cast<int>(rng() % classes);
        d.labels.push_back(y);
        for (std::size_t j = 0; j < attrs; ++j) {
            // Values lean on the class so the weights have something to learn.
            const bool follow = rng() % 3 != 0;
            d.values.push_back(follow ? y % static_cast<int>(d.arity[j])
                                      : static_cast<int>(rng() % d.arity[j]));
        }
    }
    return d;
}

/// Posterior of plain naive Bayes by explicit counting and multiplication.
inline std::vector<double> brute_nb_posterior(const DiscreteData& d, std::span<const int> x) {
    std::vector<double> joint(d.n_classes);
    for (std::size_t c = 0; c < d.n_classes; ++c) {
        double nc = 0;
        for (std::size_t r = 0; r < d.n_rows; ++r) nc += d.labels[r] == static_cast<int>(c);
        double p = (nc + 1.0) / (static_cast<double>(d.n_rows) + static_cast<double>(d.n_classes));
        for (std::size_t j = 0; j < d.attributes(); ++j) {
            double n = 0;
            for (std::size_t r = 0; r < d.n_rows; ++r)
                n += d.labels[r] == static_cast<int>(c) && d.at(r, j) == x[j];
            p *= (n + 1.0) / (nc + static_cast<double>(d.arity[j]));
        }
        joint[c] = p;
    }
    double z = 0;
    for (double v : joint) z += v;
    for (double& v : joint) v /= z;
    return joint;
}

inline double entropy_of(const std::vector<int>& labels, std::size_t k) {
    if (labels.empty()) return 0.0;
    std::vector<double> n(k, 0.0);
    for (int y : labels) n[y] += 1;
    double h = 0;
    for (double c : n)
        if (c > 0) {
            const double p = c / static_cast<double>(labels.size());
            h -= p * std::log2(p);
        }
    return h;
}

struct BruteCut {
    double value;
    double gain;
};

/// Exhaustive search over distinct-value cuts {x < d} / {x >= d}.
inline std::optional<BruteCut> brute_best_cut(const std::vector<double>& values, const std::vector<int>& labels,
                                              std::size_t k) {
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::optional<BruteCut> best;
    const double h = entropy_of(labels, k);
    for (std::size_t i = 1; i < distinct.size(); ++i) {
        std::vector<int> left, right;
        for (std::size_t r = 0; r < values.size(); ++r)
            (values[r] < distinct[i] ? left : right).push_back(labels[r]);
        const double n = static_cast<double>(values.size());
        const double g = h - static_cast<double>(left.size()) / n * entropy_of(left, k) -
                         static_cast<double>(right.size()) / n * entropy_of(right, k);
        if (!best || g > best->gain + 1e-12) best = BruteCut{distinct[i], g};
    }
    return best;
}

/// Packs every trainable coordinate [W | w | a] for finite differences.
inline std::vector<double> flatten(const WeightedParams& p) {
    std::vector<double> v = p.class_weights;
    v.insert(v.end(), p.attribute_weights.begin(), p.attribute_weights.end());
    v.push_back(std::log(p.alpha / (1.0 - p.alpha)));
    return v;
}

inline WeightedParams unflatten(const WeightedParams& shape, const std::vector<double>& v) {
    WeightedParams p = shape;
    const std::size_t nw = p.class_weights.size();
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(nw), p.class_weights.begin());
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(nw), v.end() - 1, p.attribute_weights.begin());
    p.alpha = 1.0 / (1.0 + std::exp(-v.back()));
    return p;
}

inline std::vector<double> flatten(const Gradient& g) {
    std::vector<double> v = g.class_weights;
    v.insert(v.end(), g.attribute_weights.begin(), g.attribute_weights.end());
    v.push_back(g.alpha_logit);
    return v;
}

/// Max over coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
inline double max_gradient_error(const NbModel& model, const WeightedParams& p, const DiscreteData& d,
                                 double h = 1e-5) {
    const auto analytic = flatten(gradient(model, p, d));
    const auto x = flatten(p);
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto up = x, down = x;
        up[i] += h;
        down[i] -= h;
        const double numeric =
            (objective(model, unflatten(p, up), d) - objective(model, unflatten(p, down), d)) / (2 * h);
        const double scale = std::max({1e-6, std::abs(analytic[i]), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
    return worst;
}

}  // namespace sadd::testing
