#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sadd/discretizer.hpp"

namespace sadd {

/// Add-one smoothed naive Bayes tables over discrete attributes.
struct NbModel {
    std::size_t n_classes = 0;
    std::vector<std::size_t> arity;
    std::vector<double> priors;
    /// cond[j][c * arity[j] + v] = P(A_j = v | c)
    std::vector<std::vector<double>> cond;
    std::vector<std::vector<double>> log_cond;

    std::size_t attributes() const { return arity.size(); }
    double probability(std::size_t j, int v, std::size_t c) const { return cond[j][c * arity[j] + v]; }
    double log_probability(std::size_t j, int v, std::size_t c) const {
        return log_cond[j][c * arity[j] + v];
    }

    bool operator==(const NbModel&) const = default;
};

/// priors (n_c + 1) / (N + |C|), conditionals (n_jvc + 1) / (n_c + arity_j).
NbModel fit_nb(const DiscreteData& train);

/// Exponents for the blended posterior: class-specific W (row-major
/// class x attribute), class-shared w, and the blend weight alpha.
struct WeightedParams {
    std::size_t n_classes = 0;
    std::size_t n_attributes = 0;
    std::vector<double> class_weights;
    std::vector<double> attribute_weights;
    double alpha = 0.5;

    static WeightedParams ones(std::size_t n_classes, std::size_t n_attributes, double alpha = 0.5);

    double class_weight(std::size_t c, std::size_t j) const { return class_weights[c * n_attributes + j]; }
    void validate() const;

    bool operator==(const WeightedParams&) const = default;
};

/// log P(c) + sum_j e[c][j] log P(x_j | c) for every class; `exponents` is
/// row-major class x attribute.
std::vector<double> weighted_log_posterior(const NbModel& model, std::span<const double> exponents,
                                           std::span<const int> x);

/// Normalises log scores; invariant under adding a constant to every score.
std::vector<double> softmax(std::span<const double> scores);

/// alpha * P_D(c | x, W) + (1 - alpha) * P_I(c | x, w).
std::vector<double> posterior_blend(const NbModel& model, const WeightedParams& params,
                                    std::span<const int> x);

/// Mean over rows of sum_c (P(c | x) - [c == y])^2.
double objective(const NbModel& model, const WeightedParams& params, const DiscreteData& data);

struct Gradient {
    std::vector<double> class_weights;
    std::vector<double> attribute_weights;
    /// Derivative with respect to a, where alpha = sigmoid(a).
    double alpha_logit = 0.0;
};

Gradient gradient(const NbModel& model, const WeightedParams& params, const DiscreteData& data);

enum class Classifier { Nb, Wanbia, Cawnb, Rnb };

Classifier parse_classifier(std::string_view tag);
std::string_view classifier_tag(Classifier classifier);

enum class Optimizer { GradientDescent, Lbfgs };

Optimizer parse_optimizer(std::string_view tag);
std::string_view optimizer_tag(Optimizer optimizer);

struct TrainOptions {
    std::size_t max_iterations = 500;
    double tolerance = 1e-6;
    Optimizer optimizer = Optimizer::Lbfgs;
    std::size_t memory = 5;  // L-BFGS correction pairs

    bool operator==(const TrainOptions&) const = default;
};

struct TrainResult {
    WeightedParams params;
    /// Objective before the first step, then after every accepted step.
    std::vector<double> objective_history;
    std::size_t iterations = 0;
};

/// Optimises the weights of `classifier` starting from all-ones exponents.
/// Nb returns the starting point; Wanbia fixes alpha = 0 and trains w;
/// Cawnb fixes alpha = 1 and trains W; Rnb trains W, w and alpha from 0.5.
/// Every accepted step satisfies the Armijo condition, so the objective
/// history never increases.
TrainResult train_weights(const NbModel& model, const DiscreteData& train, Classifier classifier,
                          const TrainOptions& options = {});

TrainResult train_rnb(const NbModel& model, const DiscreteData& train, const TrainOptions& options = {});
TrainResult train_wanbia(const NbModel& model, const DiscreteData& train, const TrainOptions& options = {});
TrainResult train_cawnb(const NbModel& model, const DiscreteData& train, const TrainOptions& options = {});

/// MAP class; ties go to the smaller class index.
int predict(const NbModel& model, const WeightedParams& params, std::span<const int> x);

int argmax(std::span<const double> values);

double accuracy(const NbModel& model, const WeightedParams& params, const DiscreteData& data);

}  // namespace sadd
