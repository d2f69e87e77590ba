#include "sadd/nb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "sadd/error.hpp"

namespace sadd {

NbModel fit_nb(const DiscreteData& train) {
    if (train.n_rows == 0) throw Error("nb", "empty training set");
    if (train.n_classes == 0) throw Error("nb", "no classes");
    NbModel model;
    model.n_classes = train.n_classes;
    model.arity = train.arity;

    std::vector<std::size_t> class_count(train.n_classes, 0);
    for (int label : train.labels) {
        if (label < 0 || static_cast<std::size_t>(label) >= train.n_classes)
            throw Error("nb", "training row without a valid class");
        ++class_count[label];
    }
    const double n = static_cast<double>(train.n_rows);
    const double k = static_cast<double>(train.n_classes);
    model.priors.resize(train.n_classes);
    for (std::size_t c = 0; c < train.n_classes; ++c)
        model.priors[c] = (static_cast<double>(class_count[c]) + 1.0) / (n + k);

    model.cond.resize(train.attributes());
    model.log_cond.resize(train.attributes());
    for (std::size_t j = 0; j < train.attributes(); ++j) {
        const std::size_t arity = train.arity[j];
        if (arity == 0) throw Error("nb", "attribute with zero arity");
        std::vector<std::size_t> counts(train.n_classes * arity, 0);
        for (std::size_t r = 0; r < train.n_rows; ++r) {
            const int v = train.at(r, j);
            if (v < 0 || static_cast<std::size_t>(v) >= arity)
                throw Error("nb", "value index out of arity range");
            ++counts[train.labels[r] * arity + v];
        }
        auto& table = model.cond[j];
        table.resize(counts.size());
        for (std::size_t c = 0; c < train.n_classes; ++c) {
            const double denom = static_cast<double>(class_count[c] + arity);
            for (std::size_t v = 0; v < arity; ++v)
                table[c * arity + v] = (static_cast<double>(counts[c * arity + v]) + 1.0) / denom;
        }
        model.log_cond[j].resize(table.size());
        std::transform(table.begin(), table.end(), model.log_cond[j].begin(),
                       [](double p) { return std::log(p); });
    }
    return model;
}

WeightedParams WeightedParams::ones(std::size_t n_classes, std::size_t n_attributes, double alpha) {
    WeightedParams p;
    p.n_classes = n_classes;
    p.n_attributes = n_attributes;
    p.class_weights.assign(n_classes * n_attributes, 1.0);
    p.attribute_weights.assign(n_attributes, 1.0);
    p.alpha = alpha;
    return p;
}

void WeightedParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("nb", "alpha must lie in [0, 1]");
    if (class_weights.size() != n_classes * n_attributes || attribute_weights.size() != n_attributes)
        throw Error("nb", "weight shapes do not match");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(class_weights.begin(), class_weights.end(), finite) ||
        !std::all_of(attribute_weights.begin(), attribute_weights.end(), finite))
        throw Error("nb", "non-finite weight");
}

namespace {

void check_row(const NbModel& model, std::span<const int> x) {
    if (x.size() != model.attributes()) throw Error("nb", "row width does not match the model");
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0 || static_cast<std::size_t>(x[j]) >= model.arity[j])
            throw Error("nb", "value index out of arity range");
    }
}

void check_shapes(const NbModel& model, const WeightedParams& params) {
    if (params.n_classes != model.n_classes || params.n_attributes != model.attributes())
        throw Error("nb", "weights do not match the model");
}

// In-place softmax.
void normalise(std::vector<double>& scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double& s : scores) {
        s = std::exp(s - top);
        sum += s;
    }
    for (double& s : scores) s /= sum;
}

struct Posteriors {
    std::vector<double> dependent;    // P_D, class-specific weights
    std::vector<double> independent;  // P_I, shared weights
};

Posteriors both_posteriors(const NbModel& model, const WeightedParams& params, std::span<const int> x) {
    Posteriors out;
    out.dependent.resize(model.n_classes);
    out.independent.resize(model.n_classes);
    for (std::size_t c = 0; c < model.n_classes; ++c) {
        double sd = std::log(model.priors[c]);
        double si = sd;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double l = model.log_probability(j, x[j], c);
            sd += params.class_weight(c, j) * l;
            si += params.attribute_weights[j] * l;
        }
        out.dependent[c] = sd;
        out.independent[c] = si;
    }
    normalise(out.dependent);
    normalise(out.independent);
    return out;
}

}  // namespace

std::vector<double> weighted_log_posterior(const NbModel& model, std::span<const double> exponents,
                                           std::span<const int> x) {
    check_row(model, x);
    if (exponents.size() != model.n_classes * model.attributes())
        throw Error("nb", "exponent matrix does not match the model");
    std::vector<double> scores(model.n_classes);
    for (std::size_t c = 0; c < model.n_classes; ++c) {
        double s = std::log(model.priors[c]);
        for (std::size_t j = 0; j < x.size(); ++j)
            s += exponents[c * x.size() + j] * model.log_probability(j, x[j], c);
        scores[c] = s;
    }
    return scores;
}

std::vector<double> softmax(std::span<const double> scores) {
    std::vector<double> out(scores.begin(), scores.end());
    if (!out.empty()) normalise(out);
    return out;
}

std::vector<double> posterior_blend(const NbModel& model, const WeightedParams& params,
                                    std::span<const int> x) {
    check_shapes(model, params);
    params.validate();
    check_row(model, x);
    const auto post = both_posteriors(model, params, x);
    std::vector<double> out(model.n_classes);
    for (std::size_t c = 0; c < model.n_classes; ++c)
        out[c] = params.alpha * post.dependent[c] + (1.0 - params.alpha) * post.independent[c];
    return out;
}

double objective(const NbModel& model, const WeightedParams& params, const DiscreteData& data) {
    if (data.n_rows == 0) throw Error("nb", "objective of an empty dataset");
    double total = 0.0;
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const auto p = posterior_blend(model, params, data.row(r));
        double loss = 0.0;
        for (std::size_t c = 0; c < p.size(); ++c) {
            const double target = static_cast<int>(c) == data.labels[r] ? 1.0 : 0.0;
            loss += (p[c] - target) * (p[c] - target);
        }
        total += loss;
    }
    return total / static_cast<double>(data.n_rows);
}

namespace {

struct Evaluation {
    double value = 0.0;
    Gradient grad;
};

Evaluation evaluate(const NbModel& model, const WeightedParams& params, const DiscreteData& data) {
    check_shapes(model, params);
    if (data.n_rows == 0) throw Error("nb", "objective of an empty dataset");
    const std::size_t k = model.n_classes;
    const std::size_t m = model.attributes();
    const double alpha = params.alpha;

    Evaluation ev;
    ev.grad.class_weights.assign(k * m, 0.0);
    ev.grad.attribute_weights.assign(m, 0.0);
    std::vector<double> p(k), g(k), gd(k), gi(k);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        const auto x = data.row(r);
        check_row(model, x);
        const auto post = both_posteriors(model, params, x);
        double loss = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            p[c] = alpha * post.dependent[c] + (1.0 - alpha) * post.independent[c];
            const double target = static_cast<int>(c) == data.labels[r] ? 1.0 : 0.0;
            loss += (p[c] - target) * (p[c] - target);
            g[c] = 2.0 * (p[c] - target);
        }
        ev.value += loss;

        // Softmax Jacobian: dP_c/ds_c' = P_c (delta - P_c').
        double mean_d = 0.0, mean_i = 0.0, dalpha = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            mean_d += g[c] * post.dependent[c];
            mean_i += g[c] * post.independent[c];
            dalpha += g[c] * (post.dependent[c] - post.independent[c]);
        }
        for (std::size_t c = 0; c < k; ++c) {
            gd[c] = alpha * post.dependent[c] * (g[c] - mean_d);
            gi[c] = (1.0 - alpha) * post.independent[c] * (g[c] - mean_i);
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < m; ++j) {
                const double l = model.log_probability(j, x[j], c);
                ev.grad.class_weights[c * m + j] += gd[c] * l;
                ev.grad.attribute_weights[j] += gi[c] * l;
            }
        }
        ev.grad.alpha_logit += dalpha * alpha * (1.0 - alpha);
    }
    const double n = static_cast<double>(data.n_rows);
    ev.value /= n;
    for (double& v : ev.grad.class_weights) v /= n;
    for (double& v : ev.grad.attribute_weights) v /= n;
    ev.grad.alpha_logit /= n;
    return ev;
}

// Trainable parameters packed into one vector: [W | w | a], restricted to
// the blocks the classifier optimises.
class ParameterPacking {
public:
    ParameterPacking(std::size_t k, std::size_t m, Classifier classifier)
        : k_(k), m_(m), classifier_(classifier) {}

    std::vector<double> pack(const WeightedParams& p, double logit) const {
        std::vector<double> theta;
        if (trains_class_weights()) theta.insert(theta.end(), p.class_weights.begin(), p.class_weights.end());
        if (trains_attribute_weights())
            theta.insert(theta.end(), p.attribute_weights.begin(), p.attribute_weights.end());
        if (trains_alpha()) theta.push_back(logit);
        return theta;
    }

    WeightedParams unpack(const std::vector<double>& theta, const WeightedParams& base) const {
        WeightedParams p = base;
        std::size_t at = 0;
        if (trains_class_weights()) {
            std::copy_n(theta.begin() + at, k_ * m_, p.class_weights.begin());
            at += k_ * m_;
        }
        if (trains_attribute_weights()) {
            std::copy_n(theta.begin() + at, m_, p.attribute_weights.begin());
            at += m_;
        }
        if (trains_alpha()) p.alpha = sigmoid(theta[at]);
        return p;
    }

    std::vector<double> pack_gradient(const Gradient& g) const {
        std::vector<double> out;
        if (trains_class_weights()) out.insert(out.end(), g.class_weights.begin(), g.class_weights.end());
        if (trains_attribute_weights())
            out.insert(out.end(), g.attribute_weights.begin(), g.attribute_weights.end());
        if (trains_alpha()) out.push_back(g.alpha_logit);
        return out;
    }

private:
    bool trains_class_weights() const { return classifier_ == Classifier::Cawnb || classifier_ == Classifier::Rnb; }
    bool trains_attribute_weights() const { return classifier_ == Classifier::Wanbia || classifier_ == Classifier::Rnb; }
    bool trains_alpha() const { return classifier_ == Classifier::Rnb; }

    std::size_t k_, m_;
    Classifier classifier_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

Gradient gradient(const NbModel& model, const WeightedParams& params, const DiscreteData& data) {
    return evaluate(model, params, data).grad;
}

Classifier parse_classifier(std::string_view tag) {
    if (tag == "nb") return Classifier::Nb;
    if (tag == "wanbia") return Classifier::Wanbia;
    if (tag == "cawnb") return Classifier::Cawnb;
    if (tag == "rnb") return Classifier::Rnb;
    throw Error("config", "unknown classifier '" + std::string(tag) + "'");
}

std::string_view classifier_tag(Classifier classifier) {
    switch (classifier) {
        case Classifier::Nb: return "nb";
        case Classifier::Wanbia: return "wanbia";
        case Classifier::Cawnb: return "cawnb";
        case Classifier::Rnb: return "rnb";
    }
    return "?";
}

Optimizer parse_optimizer(std::string_view tag) {
    if (tag == "gd") return Optimizer::GradientDescent;
    if (tag == "lbfgs") return Optimizer::Lbfgs;
    throw Error("config", "unknown optimizer '" + std::string(tag) + "'");
}

std::string_view optimizer_tag(Optimizer optimizer) {
    return optimizer == Optimizer::GradientDescent ? "gd" : "lbfgs";
}

TrainResult train_weights(const NbModel& model, const DiscreteData& train, Classifier classifier,
                          const TrainOptions& options) {
    if (train.n_rows == 0) throw Error("train", "empty training set");
    if (model.n_classes < 2) throw Error("train", "weight training needs at least two classes");
    const std::size_t k = model.n_classes;
    const std::size_t m = model.attributes();

    double start_alpha = 0.5;
    if (classifier == Classifier::Wanbia) start_alpha = 0.0;
    if (classifier == Classifier::Cawnb) start_alpha = 1.0;
    const WeightedParams base = WeightedParams::ones(k, m, start_alpha);
    const ParameterPacking packing(k, m, classifier);

    TrainResult result;
    result.params = base;
    auto first = evaluate(model, base, train);
    if (!std::isfinite(first.value)) throw Error("train", "non-finite objective");
    result.objective_history.push_back(first.value);
    if (classifier == Classifier::Nb) return result;

    std::vector<double> theta = packing.pack(base, 0.0);
    std::vector<double> grad = packing.pack_gradient(first.grad);
    double value = first.value;

    constexpr double kArmijo = 1e-4;
    constexpr int kMaxHalvings = 60;
    std::deque<std::pair<std::vector<double>, std::vector<double>>> history;  // (s, y)

    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        if (std::sqrt(dot(grad, grad)) < 1e-12) break;

        std::vector<double> direction(grad.size());
        if (options.optimizer == Optimizer::Lbfgs && !history.empty()) {
            // Two-loop recursion.
            std::vector<double> q = grad;
            std::vector<double> a(history.size());
            for (std::size_t i = history.size(); i-- > 0;) {
                const auto& [s, y] = history[i];
                a[i] = dot(s, q) / dot(y, s);
                for (std::size_t t = 0; t < q.size(); ++t) q[t] -= a[i] * y[t];
            }
            const auto& [s_last, y_last] = history.back();
            const double gamma = dot(s_last, y_last) / dot(y_last, y_last);
            for (double& v : q) v *= gamma;
            for (std::size_t i = 0; i < history.size(); ++i) {
                const auto& [s, y] = history[i];
                const double b = dot(y, q) / dot(y, s);
                for (std::size_t t = 0; t < q.size(); ++t) q[t] += s[t] * (a[i] - b);
            }
            for (std::size_t t = 0; t < q.size(); ++t) direction[t] = -q[t];
            if (dot(direction, grad) >= 0.0) {
                history.clear();
                for (std::size_t t = 0; t < grad.size(); ++t) direction[t] = -grad[t];
            }
        } else {
            for (std::size_t t = 0; t < grad.size(); ++t) direction[t] = -grad[t];
        }

        const double slope = dot(grad, direction);
        double step = 1.0;
        bool accepted = false;
        std::vector<double> trial(theta.size());
        Evaluation trial_eval;
        for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
            for (std::size_t t = 0; t < theta.size(); ++t) trial[t] = theta[t] + step * direction[t];
            trial_eval = evaluate(model, packing.unpack(trial, base), train);
            if (std::isfinite(trial_eval.value) && trial_eval.value <= value + kArmijo * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;

        auto trial_grad = packing.pack_gradient(trial_eval.grad);
        std::vector<double> s(theta.size()), y(theta.size());
        for (std::size_t t = 0; t < theta.size(); ++t) {
            s[t] = trial[t] - theta[t];
            y[t] = trial_grad[t] - grad[t];
        }
        if (dot(s, y) > 1e-12) {
            history.emplace_back(std::move(s), std::move(y));
            if (history.size() > options.memory) history.pop_front();
        }

        const double improvement = value - trial_eval.value;
        theta = std::move(trial);
        grad = std::move(trial_grad);
        value = trial_eval.value;
        result.objective_history.push_back(value);
        result.iterations = iter + 1;
        if (improvement < options.tolerance) break;
    }
    result.params = packing.unpack(theta, base);
    if (!std::isfinite(value)) throw Error("train", "non-finite objective");
    return result;
}

TrainResult train_rnb(const NbModel& model, const DiscreteData& train, const TrainOptions& options) {
    return train_weights(model, train, Classifier::Rnb, options);
}

TrainResult train_wanbia(const NbModel& model, const DiscreteData& train, const TrainOptions& options) {
    return train_weights(model, train, Classifier::Wanbia, options);
}

TrainResult train_cawnb(const NbModel& model, const DiscreteData& train, const TrainOptions& options) {
    return train_weights(model, train, Classifier::Cawnb, options);
}

int argmax(std::span<const double> values) {
    if (values.empty()) throw Error("nb", "argmax of an empty vector");
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

int predict(const NbModel& model, const WeightedParams& params, std::span<const int> x) {
    return argmax(posterior_blend(model, params, x));
}

double accuracy(const NbModel& model, const WeightedParams& params, const DiscreteData& data) {
    if (data.n_rows == 0) throw Error("nb", "accuracy of an empty dataset");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < data.n_rows; ++r)
        if (predict(model, params, data.row(r)) == data.labels[r]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.n_rows);
}

}  // namespace sadd
