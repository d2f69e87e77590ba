#include "sadd/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <utility>

#include "sadd/error.hpp"
#include "sadd/serialization.hpp"

namespace sadd {

namespace {

// Gains closer than this are treated as tied so the smallest cut wins even
// when two exact ties round differently.
constexpr double kGainTieTolerance = 1e-12;

void check_labels(std::span<const int> labels, std::size_t n_classes) {
    for (int label : labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= n_classes)
            throw Error("discretize", "class label out of range");
    }
}

double entropy_of(std::span<const std::size_t> counts, std::size_t total) {
    double h = 0.0;
    const double n = static_cast<double>(total);
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double split_gain(const ClassCounts& parent, double parent_entropy, const ClassCounts& left,
                  const ClassCounts& right) {
    const double n = static_cast<double>(parent.total());
    const std::size_t n1 = left.total();
    const std::size_t n2 = right.total();
    return parent_entropy - (static_cast<double>(n1) / n) * entropy_of(left.counts, n1) -
           (static_cast<double>(n2) / n) * entropy_of(right.counts, n2);
}

template <typename ThresholdScale>
std::vector<double> recursive_partition(std::span<const double> values, std::span<const int> labels,
                                        std::size_t n_classes, ThresholdScale scale) {
    if (values.size() != labels.size())
        throw Error("discretize", "values and labels differ in length");
    check_labels(labels, n_classes);

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> sorted_values(values.size());
    std::vector<int> sorted_labels(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted_values[i] = values[order[i]];
        sorted_labels[i] = labels[order[i]];
    }

    std::vector<double> cuts;
    // Explicit stack of [begin, end) ranges; deep unbalanced recursion on
    // large attributes would otherwise risk the call stack.
    std::vector<std::pair<std::size_t, std::size_t>> pending{{0, sorted_values.size()}};
    while (!pending.empty()) {
        const auto [begin, end] = pending.back();
        pending.pop_back();
        const std::size_t n = end - begin;
        if (n <= 1) continue;
        const std::span<const double> node_values(sorted_values.data() + begin, n);
        const std::span<const int> node_labels(sorted_labels.data() + begin, n);
        const auto cand = best_cut(node_values, node_labels, n_classes);
        if (!cand) continue;

        ClassCounts parent(std::vector<std::size_t>(n_classes, 0));
        for (int label : node_labels) ++parent.counts[label];
        const double threshold = scale(n) * mdlp_threshold(parent, *cand);
        if (!(cand->gain > threshold)) continue;

        cuts.push_back(cand->value);
        const std::size_t split = begin + cand->left.total();
        pending.emplace_back(split, end);
        pending.emplace_back(begin, split);
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

}  // namespace

std::size_t ClassCounts::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ClassCounts::present() const {
    return static_cast<std::size_t>(
        std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
}

double class_entropy(const ClassCounts& counts) {
    const std::size_t n = counts.total();
    if (n == 0) throw Error("discretize", "entropy of an empty set");
    return entropy_of(counts.counts, n);
}

namespace {

void check_consistent(const ClassCounts& parent, const CutCandidate& cand) {
    const std::size_t k = parent.counts.size();
    if (cand.left.counts.size() != k || cand.right.counts.size() != k)
        throw Error("discretize", "candidate class count vectors do not match the parent");
    for (std::size_t c = 0; c < k; ++c) {
        if (cand.left.counts[c] + cand.right.counts[c] != parent.counts[c])
            throw Error("discretize", "candidate counts do not sum to the parent counts");
    }
    if (cand.left.total() == 0 || cand.right.total() == 0)
        throw Error("discretize", "candidate leaves one side empty");
}

}  // namespace

double information_gain(const ClassCounts& parent, const CutCandidate& cand) {
    check_consistent(parent, cand);
    const double gain = split_gain(parent, class_entropy(parent), cand.left, cand.right);
    // Concavity guarantees gain >= 0; clamp rounding noise below zero.
    return std::max(gain, 0.0);
}

double mdlp_threshold(const ClassCounts& parent, const CutCandidate& cand) {
    const std::size_t n = parent.total();
    if (n < 2) throw Error("discretize", "threshold needs at least two samples");
    check_consistent(parent, cand);
    const double k = static_cast<double>(parent.present());
    const double k1 = static_cast<double>(cand.left.present());
    const double k2 = static_cast<double>(cand.right.present());
    const double delta = std::log2(std::pow(3.0, k) - 2.0) -
                         (k * class_entropy(parent) - k1 * class_entropy(cand.left) -
                          k2 * class_entropy(cand.right));
    const double nn = static_cast<double>(n);
    return std::log2(nn - 1.0) / nn + delta / nn;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sadd_threshold(double theta, std::size_t n, std::size_t n0) {
    if (n < 1 || n0 < 1) throw Error("discretize", "N and N0 must be positive");
    return sigmoid(static_cast<double>(n) / static_cast<double>(n0)) * theta;
}

std::optional<CutCandidate> best_cut(std::span<const double> values, std::span<const int> labels,
                                     std::size_t n_classes) {
    if (values.empty()) throw Error("discretize", "best_cut on an empty sample set");
    if (values.size() != labels.size())
        throw Error("discretize", "values and labels differ in length");
    check_labels(labels, n_classes);

    ClassCounts parent(std::vector<std::size_t>(n_classes, 0));
    for (int label : labels) ++parent.counts[label];
    const double parent_entropy = entropy_of(parent.counts, values.size());

    std::optional<CutCandidate> best;
    ClassCounts left(std::vector<std::size_t>(n_classes, 0));
    ClassCounts right = parent;
    for (std::size_t i = 1; i < values.size(); ++i) {
        ++left.counts[labels[i - 1]];
        --right.counts[labels[i - 1]];
        if (!(values[i] > values[i - 1])) {
            if (values[i] < values[i - 1]) throw Error("discretize", "best_cut input is not sorted");
            continue;
        }
        const double gain = std::max(split_gain(parent, parent_entropy, left, right), 0.0);
        if (!best || gain > best->gain + kGainTieTolerance) {
            best = CutCandidate{values[i], left, right, gain};
        }
    }
    return best;
}

std::vector<double> mdlp_partition(std::span<const double> values, std::span<const int> labels,
                                   std::size_t n_classes) {
    return recursive_partition(values, labels, n_classes, [](std::size_t) { return 1.0; });
}

std::vector<double> sadd_partition(std::span<const double> values, std::span<const int> labels,
                                   std::size_t n_classes, std::size_t n0) {
    if (n0 < 1) throw Error("discretize", "N0 must be positive");
    const double scale_base = static_cast<double>(n0);
    return recursive_partition(values, labels, n_classes, [scale_base](std::size_t n) {
        return sigmoid(static_cast<double>(n) / scale_base);
    });
}

std::vector<double> equal_width(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw Error("discretize", "bin count must be positive");
    if (values.empty()) return {};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double min = *lo;
    const double max = *hi;
    std::vector<double> cuts;
    if (!(max > min)) return cuts;
    const double width = (max - min) / static_cast<double>(bins);
    for (std::size_t i = 1; i < bins; ++i) {
        const double cut = min + width * static_cast<double>(i);
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
    return cuts;
}

std::vector<double> equal_frequency(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw Error("discretize", "bin count must be positive");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    auto midpoint = [](double a, double b) { return a + (b - a) / 2.0; };
    std::vector<double> cuts;
    if (bins >= distinct.size()) {
        for (std::size_t i = 1; i < distinct.size(); ++i)
            cuts.push_back(midpoint(distinct[i - 1], distinct[i]));
        return cuts;
    }
    const std::size_t n = sorted.size();
    for (std::size_t i = 1; i < bins; ++i) {
        const std::size_t q = (i * n + bins - 1) / bins;  // ceil(i*N/bins), 1-based
        if (q == 0 || q >= n) continue;
        const double lower = sorted[q - 1];
        const auto upper = std::upper_bound(sorted.begin(), sorted.end(), lower);
        if (upper == sorted.end()) continue;
        const double cut = midpoint(lower, *upper);
        if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
    return cuts;
}

Method parse_method(std::string_view tag) {
    if (tag == "mdlp") return Method::Mdlp;
    if (tag == "sadd") return Method::Sadd;
    if (tag == "eqw") return Method::EqualWidth;
    if (tag == "eqf") return Method::EqualFrequency;
    throw Error("config", "unknown discretization method '" + std::string(tag) + "'");
}

std::string_view method_tag(Method method) {
    switch (method) {
        case Method::Mdlp: return "mdlp";
        case Method::Sadd: return "sadd";
        case Method::EqualWidth: return "eqw";
        case Method::EqualFrequency: return "eqf";
    }
    return "?";
}

bool is_supervised(Method method) { return method == Method::Mdlp || method == Method::Sadd; }

DiscretizationScheme build_scheme(const Dataset& data, std::span<const int> labels, Method method,
                                  const SchemeParams& params) {
    if (labels.size() != data.rows())
        throw Error("discretize", "label vector does not match the row count");
    DiscretizationScheme scheme;
    scheme.method = method;
    scheme.params = params;
    scheme.cuts.resize(data.attributes());
    const std::size_t n_classes = data.class_count();
    for (std::size_t j = 0; j < data.attributes(); ++j) {
        scheme.attribute_names.push_back(data.schema[j].name);
        scheme.kinds.push_back(data.schema[j].kind);
        if (!data.is_numeric(j)) continue;

        std::vector<double> values;
        std::vector<int> column_labels;
        values.reserve(data.rows());
        for (std::size_t r = 0; r < data.rows(); ++r) {
            if (data.is_missing(r, j)) continue;
            values.push_back(data.columns[j].numeric[r]);
            column_labels.push_back(labels[r]);
        }
        if (values.empty()) continue;
        switch (method) {
            case Method::Mdlp:
                scheme.cuts[j] = mdlp_partition(values, column_labels, n_classes);
                break;
            case Method::Sadd:
                scheme.cuts[j] = sadd_partition(values, column_labels, n_classes, params.n0);
                break;
            case Method::EqualWidth:
                scheme.cuts[j] = equal_width(values, params.bins);
                break;
            case Method::EqualFrequency:
                scheme.cuts[j] = equal_frequency(values, params.bins);
                break;
        }
    }
    return scheme;
}

DiscreteData DiscreteData::subset(std::span<const std::size_t> rows) const {
    DiscreteData out;
    out.n_rows = rows.size();
    out.arity = arity;
    out.n_classes = n_classes;
    out.values.reserve(rows.size() * arity.size());
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
        const auto src = row(r);
        out.values.insert(out.values.end(), src.begin(), src.end());
        out.labels.push_back(labels.at(r));
    }
    return out;
}

std::size_t interval_index(std::span<const double> cuts, double x) {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin());
}

DiscreteData apply_scheme(const DiscretizationScheme& scheme, const Dataset& data) {
    if (scheme.attributes() != data.attributes())
        throw Error("discretize", "scheme covers " + std::to_string(scheme.attributes()) +
                                      " attributes but the data has " +
                                      std::to_string(data.attributes()));
    for (std::size_t j = 0; j < data.attributes(); ++j) {
        if (scheme.kinds[j] != data.schema[j].kind)
            throw Error("discretize", "attribute kind mismatch for '" + data.schema[j].name + "'");
    }
    DiscreteData out;
    out.n_rows = data.rows();
    out.n_classes = data.class_count();
    out.labels = data.labels;
    out.arity.resize(data.attributes());
    for (std::size_t j = 0; j < data.attributes(); ++j) {
        out.arity[j] = data.is_numeric(j) ? scheme.intervals(j)
                                          : std::max<std::size_t>(data.columns[j].levels.size(), 1);
    }
    out.values.resize(data.rows() * data.attributes());
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t j = 0; j < data.attributes(); ++j) {
            if (data.is_missing(r, j))
                throw Error("discretize", "missing value in '" + data.schema[j].name +
                                              "' must be imputed before discretization");
            const int v = data.is_numeric(j)
                              ? static_cast<int>(interval_index(scheme.cuts[j], data.columns[j].numeric[r]))
                              : data.columns[j].codes[r];
            out.values[r * data.attributes() + j] = v;
        }
    }
    return out;
}

double mutual_information(std::span<const int> values, std::span<const int> labels) {
    if (values.empty()) throw Error("discretize", "mutual information of an empty sample");
    if (values.size() != labels.size())
        throw Error("discretize", "values and labels differ in length");
    const int max_v = *std::max_element(values.begin(), values.end());
    const int max_c = *std::max_element(labels.begin(), labels.end());
    if (*std::min_element(values.begin(), values.end()) < 0 ||
        *std::min_element(labels.begin(), labels.end()) < 0)
        throw Error("discretize", "negative code in mutual information input");
    const std::size_t nv = static_cast<std::size_t>(max_v) + 1;
    const std::size_t nc = static_cast<std::size_t>(max_c) + 1;
    std::vector<std::size_t> joint(nv * nc, 0), pv(nv, 0), pc(nc, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        ++joint[static_cast<std::size_t>(values[i]) * nc + labels[i]];
        ++pv[values[i]];
        ++pc[labels[i]];
    }
    const double n = static_cast<double>(values.size());
    double mi = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t count = joint[v * nc + c];
            if (count == 0) continue;
            const double p = static_cast<double>(count) / n;
            mi += p * std::log2(static_cast<double>(count) * n /
                                (static_cast<double>(pv[v]) * static_cast<double>(pc[c])));
        }
    }
    return std::max(mi, 0.0);
}

std::vector<CurveRow> threshold_curve(std::size_t n_min, std::size_t n_max, std::size_t step,
                                      std::span<const std::size_t> n0_list) {
    if (n_min < 2) throw Error("curve", "N must be at least 2");
    if (n_max < n_min) throw Error("curve", "empty N range");
    if (step == 0) throw Error("curve", "step must be positive");
    for (std::size_t n0 : n0_list)
        if (n0 == 0) throw Error("curve", "N0 must be positive");
    std::vector<CurveRow> rows;
    for (std::size_t n = n_min; n <= n_max; n += step) {
        CurveRow row;
        row.n = n;
        const double nn = static_cast<double>(n);
        row.raw = std::log2(nn - 1.0) / nn;
        for (std::size_t n0 : n0_list) row.scaled.push_back(sadd_threshold(row.raw, n, n0));
        rows.push_back(std::move(row));
        if (n_max - n < step) break;
    }
    return rows;
}

void write_curve_csv(const std::vector<CurveRow>& rows, std::span<const std::size_t> n0_list,
                     std::ostream& out) {
    out << "N,raw";
    for (std::size_t n0 : n0_list) out << ",scaled_n0_" << n0;
    out << '\n';
    std::ostringstream line;
    line.precision(17);
    for (const auto& row : rows) {
        line.str("");
        line << row.n << ',' << row.raw;
        for (double v : row.scaled) line << ',' << v;
        out << line.str() << '\n';
    }
}

std::string scheme_to_json(const DiscretizationScheme& scheme) {
    return nlohmann::json(scheme).dump(2);
}

DiscretizationScheme scheme_from_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text).get<DiscretizationScheme>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("io", std::string("malformed scheme file: ") + e.what());
    }
}

void save_scheme(const DiscretizationScheme& scheme, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot write '" + path.string() + "'");
    out << scheme_to_json(scheme) << '\n';
    if (!out) throw Error("io", "write failed for '" + path.string() + "'");
}

DiscretizationScheme load_scheme(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return scheme_from_json(buf.str());
}

}  // namespace sadd
