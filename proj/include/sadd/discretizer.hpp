#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sadd/dataset.hpp"

namespace sadd {

/// Class histogram of a sample set.
struct ClassCounts {
    std::vector<std::size_t> counts;

    ClassCounts() = default;
    explicit ClassCounts(std::vector<std::size_t> c) : counts(std::move(c)) {}

    std::size_t total() const;
    /// Number of classes with a non-zero count.
    std::size_t present() const;
};

/// Binary split of a sample set at `value`: left holds {x < value},
/// right holds {x >= value}.
struct CutCandidate {
    double value = 0.0;
    ClassCounts left;
    ClassCounts right;
    double gain = 0.0;
};

/// Class entropy in bits. Throws on an empty set.
double class_entropy(const ClassCounts& counts);

/// Entropy reduction of a candidate split, in bits.
double information_gain(const ClassCounts& parent, const CutCandidate& cand);

/// MDL acceptance threshold for a candidate split of `parent`:
/// (log2(N-1) + log2(3^k - 2) - [k E(S) - k1 E(S1) - k2 E(S2)]) / N.
double mdlp_threshold(const ClassCounts& parent, const CutCandidate& cand);

double sigmoid(double x);

/// Threshold scaled by s(N / N0); always between half and all of `theta`.
double sadd_threshold(double theta, std::size_t n, std::size_t n0);

/// Best-gain split over every distinct observed value except the smallest.
/// Ties keep the smallest cut value. `values` must be sorted ascending.
std::optional<CutCandidate> best_cut(std::span<const double> values, std::span<const int> labels,
                                     std::size_t n_classes);

/// Recursive top-down partitioning with the MDL stop rule. Inputs need not be
/// sorted. Returns the accepted cut values in ascending order.
std::vector<double> mdlp_partition(std::span<const double> values, std::span<const int> labels,
                                   std::size_t n_classes);

/// Same recursion with the sigmoid-scaled threshold.
std::vector<double> sadd_partition(std::span<const double> values, std::span<const int> labels,
                                   std::size_t n_classes, std::size_t n0);

std::vector<double> equal_width(std::span<const double> values, std::size_t bins);
std::vector<double> equal_frequency(std::span<const double> values, std::size_t bins);

enum class Method { Mdlp, Sadd, EqualWidth, EqualFrequency };

Method parse_method(std::string_view tag);
std::string_view method_tag(Method method);
/// Whether the method consumes class labels.
bool is_supervised(Method method);

struct SchemeParams {
    std::size_t n0 = 2000;
    std::size_t bins = 10;

    bool operator==(const SchemeParams&) const = default;
};

/// Cut lists per attribute; categorical attributes carry an empty list and
/// are passed through by apply_scheme.
struct DiscretizationScheme {
    Method method = Method::Sadd;
    SchemeParams params;
    std::vector<std::string> attribute_names;
    std::vector<AttributeKind> kinds;
    std::vector<std::vector<double>> cuts;

    std::size_t attributes() const { return cuts.size(); }
    /// Interval count of a numeric attribute (cuts + 1).
    std::size_t intervals(std::size_t j) const { return cuts[j].size() + 1; }

    bool operator==(const DiscretizationScheme&) const = default;
};

DiscretizationScheme build_scheme(const Dataset& data, std::span<const int> labels, Method method,
                                  const SchemeParams& params = {});

/// Integer-coded table ready for naive Bayes. Row-major `values`.
struct DiscreteData {
    std::size_t n_rows = 0;
    std::vector<std::size_t> arity;
    std::vector<int> values;
    std::vector<int> labels;
    std::size_t n_classes = 0;

    std::size_t attributes() const { return arity.size(); }
    int at(std::size_t r, std::size_t j) const { return values[r * arity.size() + j]; }
    std::span<const int> row(std::size_t r) const {
        return {values.data() + r * arity.size(), arity.size()};
    }
    DiscreteData subset(std::span<const std::size_t> rows) const;
};

/// Interval index of x: the number of cuts <= x.
std::size_t interval_index(std::span<const double> cuts, double x);

/// Numeric cells become interval indices, categorical cells keep their level
/// code. Arity is the interval count or the level-vocabulary size.
DiscreteData apply_scheme(const DiscretizationScheme& scheme, const Dataset& data);

/// Empirical mutual information between two discrete vectors, in bits.
double mutual_information(std::span<const int> values, std::span<const int> labels);

struct CurveRow {
    std::size_t n = 0;
    double raw = 0.0;
    std::vector<double> scaled;  // one per N0, in input order
};

/// log2(N-1)/N and s(N/N0) * log2(N-1)/N for N = n_min, n_min+step, ..., <= n_max.
std::vector<CurveRow> threshold_curve(std::size_t n_min, std::size_t n_max, std::size_t step,
                                      std::span<const std::size_t> n0_list);
void write_curve_csv(const std::vector<CurveRow>& rows, std::span<const std::size_t> n0_list,
                     std::ostream& out);

std::string scheme_to_json(const DiscretizationScheme& scheme);
DiscretizationScheme scheme_from_json(std::string_view text);
void save_scheme(const DiscretizationScheme& scheme, const std::filesystem::path& path);
DiscretizationScheme load_scheme(const std::filesystem::path& path);

}  // namespace sadd
