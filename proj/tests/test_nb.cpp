#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "sadd/error.hpp"
#include "sadd/nb.hpp"
#include "sadd/serialization.hpp"
#include "support.hpp"

using namespace sadd;
using doctest::Approx;

namespace {

// One binary attribute; rows (x, y) = (0,0) (0,0) (1,0) (1,1).
DiscreteData toy4() {
    DiscreteData d;
    d.n_rows = 4;
    d.arity = {2};
    d.values = {0, 0, 1, 1};
    d.labels = {0, 0, 0, 1};
    d.n_classes = 2;
    return d;
}

// Attribute 0 agrees with the class 80% of the time, attribute 1 is drawn
// independently of it.
DiscreteData signal_and_noise() {
    std::mt19937_64 rng(1);
    DiscreteData d;
    d.arity = {2, 2};
    d.n_classes = 2;
    for (int r = 0; r < 200; ++r) {
        const int y = r % 2;
        d.values.push_back(rng() % 5 == 0 ? 1 - y : y);
        d.values.push_back(static_cast<int>(rng() % 2));
        d.labels.push_back(y);
    }
    d.n_rows = d.labels.size();
    return d;
}

}  // namespace

TEST_CASE("hand-computed tables for the 4-row toy") {
    const NbModel m = fit_nb(toy4());
    CHECK(m.priors[0] == Approx(4.0 / 6.0));
    CHECK(m.priors[1] == Approx(2.0 / 6.0));
    CHECK(m.probability(0, 0, 0) == Approx(3.0 / 5.0));
    CHECK(m.probability(0, 1, 0) == Approx(2.0 / 5.0));
    CHECK(m.probability(0, 0, 1) == Approx(1.0 / 3.0));
    CHECK(m.probability(0, 1, 1) == Approx(2.0 / 3.0));
}

TEST_CASE("an unseen value gets the smoothing floor") {
    DiscreteData d = toy4();
    d.arity = {3};
    const NbModel m = fit_nb(d);
    CHECK(m.probability(0, 2, 0) == Approx(1.0 / (3.0 + 3.0)));
    CHECK(m.probability(0, 2, 1) == Approx(1.0 / (1.0 + 3.0)));
}

TEST_CASE("weighted scores with identity, zero and doubled exponents") {
    const NbModel m = fit_nb(toy4());
    const std::vector<int> x{0};
    const std::vector<double> ones{1, 1}, zeros{0, 0}, doubled{2, 2};
    const auto s1 = weighted_log_posterior(m, ones, x);
    CHECK(s1[0] == Approx(std::log(4.0 / 6.0 * 3.0 / 5.0)));
    CHECK(s1[1] == Approx(std::log(2.0 / 6.0 * 1.0 / 3.0)));
    const auto s0 = weighted_log_posterior(m, zeros, x);
    CHECK(s0[0] == Approx(std::log(m.priors[0])));
    CHECK(s0[1] == Approx(std::log(m.priors[1])));
    const auto s2 = weighted_log_posterior(m, doubled, x);
    CHECK(s2[0] - s1[0] == Approx(std::log(3.0 / 5.0)));
    CHECK(s2[1] - s1[1] == Approx(std::log(1.0 / 3.0)));
}

TEST_CASE("blend boundaries") {
    const NbModel m = fit_nb(toy4());
    const std::vector<int> x{1};
    WeightedParams p = WeightedParams::ones(2, 1, 1.0);
    p.class_weights = {2.0, 0.5};
    p.attribute_weights = {0.3};
    const auto pd = softmax(weighted_log_posterior(m, p.class_weights, x));
    const std::vector<double> shared{0.3, 0.3};
    const auto pi = softmax(weighted_log_posterior(m, shared, x));
    const auto at1 = posterior_blend(m, p, x);
    p.alpha = 0.0;
    const auto at0 = posterior_blend(m, p, x);
    for (int c = 0; c < 2; ++c) {
        CHECK(at1[c] == Approx(pd[c]).epsilon(1e-14));
        CHECK(at0[c] == Approx(pi[c]).epsilon(1e-14));
    }
    const WeightedParams id = WeightedParams::ones(2, 1, 0.37);
    // x = 1: joints 4/15 and 2/9, so P(0) = 6/11.
    CHECK(posterior_blend(m, id, x)[0] == Approx(6.0 / 11.0).epsilon(1e-14));
}

TEST_CASE("objective examples") {
    const NbModel m = fit_nb(toy4());
    const auto id = WeightedParams::ones(2, 1);
    // P(0|x=0) = 18/23, P(0|x=1) = 6/11.
    const double expected = (100.0 / 529.0 + 122.0 / 121.0) / 4.0;
    CHECK(objective(m, id, toy4()) == Approx(expected).epsilon(1e-14));

    // Uniform posteriors: zero exponents with equal priors.
    DiscreteData bal = toy4();
    bal.labels = {0, 1, 0, 1};
    const NbModel mb = fit_nb(bal);
    WeightedParams zero = WeightedParams::ones(2, 1);
    zero.class_weights = {0, 0};
    zero.attribute_weights = {0};
    CHECK(objective(mb, zero, bal) == Approx(0.5));
}

TEST_CASE("perfect posteriors give zero loss in the limit") {
    DiscreteData d;
    d.n_rows = 2;
    d.arity = {2};
    d.values = {0, 1};
    d.labels = {0, 1};
    d.n_classes = 2;
    const NbModel m = fit_nb(d);
    WeightedParams p = WeightedParams::ones(2, 1);
    p.class_weights = {80, 80};
    p.attribute_weights = {80};
    CHECK(objective(m, p, d) < 1e-12);
}

TEST_CASE("identity weights make the alpha derivative vanish") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        const auto d = testing::random_discrete(rng, 30, 3, 3, 4);
        const NbModel m = fit_nb(d);
        CHECK(gradient(m, WeightedParams::ones(3, 3, 0.5), d).alpha_logit == Approx(0.0).scale(1.0));
    }
}

TEST_CASE("argmax picks the first maximum") {
    const std::vector<double> a{0.7, 0.3}, tie{0.25, 0.5, 0.5, 0.1};
    CHECK(argmax(a) == 0);
    CHECK(argmax(tie) == 1);
}

TEST_CASE("4-row toy predictions match the brute-force joint") {
    const auto d = toy4();
    const NbModel m = fit_nb(d);
    const auto id = WeightedParams::ones(2, 1);
    for (int x = 0; x < 2; ++x) {
        const std::vector<int> row{x};
        CHECK(predict(m, id, row) == argmax(testing::brute_nb_posterior(d, row)));
        CHECK(predict(m, id, row) == 0);
    }
    CHECK(accuracy(m, id, d) == Approx(0.75));
}

TEST_CASE("tags parse back") {
    for (Classifier c : {Classifier::Nb, Classifier::Wanbia, Classifier::Cawnb, Classifier::Rnb})
        CHECK(parse_classifier(classifier_tag(c)) == c);
    CHECK(parse_optimizer("gd") == Optimizer::GradientDescent);
    CHECK(parse_optimizer("lbfgs") == Optimizer::Lbfgs);
    CHECK_THROWS_AS(parse_classifier("svm"), Error);
}

TEST_CASE("perfectly informative attribute trains to full accuracy") {
    DiscreteData d;
    d.arity = {3};
    d.n_classes = 3;
    for (int r = 0; r < 30; ++r) {
        d.values.push_back(r % 3);
        d.labels.push_back(r % 3);
    }
    d.n_rows = 30;
    const NbModel m = fit_nb(d);
    for (Classifier c : {Classifier::Nb, Classifier::Wanbia, Classifier::Cawnb, Classifier::Rnb})
        CHECK(accuracy(m, train_weights(m, d, c).params, d) == 1.0);
}

TEST_CASE("the noise attribute ends up with the smaller weight") {
    const auto d = signal_and_noise();
    const NbModel m = fit_nb(d);
    const auto trained = train_wanbia(m, d).params;

    // Grid oracle over the 2-D weight plane.
    double best = 1e300, best_signal = 0, best_noise = 0;
    for (int i = 0; i <= 60; ++i)
        for (int j = 0; j <= 60; ++j) {
            WeightedParams p = WeightedParams::ones(2, 2, 0.0);
            p.attribute_weights = {0.05 * i, 0.05 * j};
            const double f = objective(m, p, d);
            if (f < best) {
                best = f;
                best_signal = p.attribute_weights[0];
                best_noise = p.attribute_weights[1];
            }
        }
    CHECK(best_noise < best_signal);
    CHECK(std::abs(trained.attribute_weights[1]) < std::abs(trained.attribute_weights[0]));
    CHECK(trained.attribute_weights[0] == Approx(best_signal).epsilon(0.05));
    CHECK(trained.attribute_weights[1] == Approx(best_noise).scale(1.0).epsilon(0.05));
    CHECK(objective(m, trained, d) <= best + 1e-6);
}

TEST_CASE("each trainer touches only its own parameters") {
    std::mt19937_64 rng(9);
    const auto d = testing::random_discrete(rng, 40, 3, 2, 3);
    const NbModel m = fit_nb(d);
    const auto w = train_wanbia(m, d).params;
    CHECK(w.alpha == 0.0);
    CHECK(w.class_weights == std::vector<double>(6, 1.0));
    const auto c = train_cawnb(m, d).params;
    CHECK(c.alpha == 1.0);
    CHECK(c.attribute_weights == std::vector<double>(3, 1.0));
    const auto nb = train_weights(m, d, Classifier::Nb);
    CHECK(nb.params == WeightedParams::ones(2, 3, 0.5));
    CHECK(nb.iterations == 0);
    // WANBIA is RNB restricted to alpha = 0: its posterior is the shared-weight one.
    const std::vector<int> x(d.row(0).begin(), d.row(0).end());
    std::vector<double> shared;
    for (int k = 0; k < 2; ++k) shared.insert(shared.end(), w.attribute_weights.begin(), w.attribute_weights.end());
    const auto pi = softmax(weighted_log_posterior(m, shared, x));
    const auto blend = posterior_blend(m, w, x);
    for (int k = 0; k < 2; ++k) CHECK(blend[k] == Approx(pi[k]).epsilon(1e-14));
}

TEST_CASE("property: posteriors are distributions and shift invariant") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2, 3);
    for (int t = 0; t < 50; ++t) {
        const auto d = testing::random_discrete(rng, 25, 4, 3, 4);
        const NbModel m = fit_nb(d);
        WeightedParams p = WeightedParams::ones(3, 4, std::uniform_real_distribution<double>(0, 1)(rng));
        for (double& v : p.class_weights) v = u(rng);
        for (double& v : p.attribute_weights) v = u(rng);
        for (std::size_t r = 0; r < d.n_rows; ++r) {
            const auto post = posterior_blend(m, p, d.row(r));
            double s = 0;
            for (double v : post) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                s += v;
            }
            CHECK(s == Approx(1.0).epsilon(1e-12));
            auto scores = weighted_log_posterior(m, p.class_weights, d.row(r));
            const auto base = softmax(scores);
            const double shift = u(rng) * 100;
            for (double& v : scores) v += shift;
            const auto shifted = softmax(scores);
            for (std::size_t c = 0; c < 3; ++c) CHECK(shifted[c] == Approx(base[c]).epsilon(1e-12));
            CHECK(argmax(shifted) == argmax(base));
        }
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 2);
    for (int t = 0; t < 20; ++t) {
        const auto d = testing::random_discrete(rng, 10 + rng() % 30, 1 + rng() % 4, 2 + rng() % 3, 4);
        const NbModel m = fit_nb(d);
        WeightedParams p = WeightedParams::ones(d.n_classes, d.attributes(), 0.1 + 0.8 * (u(rng) + 1) / 3);
        for (double& v : p.class_weights) v = u(rng);
        for (double& v : p.attribute_weights) v = u(rng);
        CHECK(testing::max_gradient_error(m, p, d) < 1e-4);
    }
}

TEST_CASE("property: plain NB matches count-and-multiply") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto d = testing::random_discrete(rng, 5 + rng() % 45, 1 + rng() % 5, 2 + rng() % 3, 5);
        const NbModel m = fit_nb(d);
        const auto id = WeightedParams::ones(d.n_classes, d.attributes());
        for (std::size_t r = 0; r < d.n_rows; ++r) {
            const auto want = testing::brute_nb_posterior(d, d.row(r));
            const auto got = posterior_blend(m, id, d.row(r));
            for (std::size_t c = 0; c < d.n_classes; ++c) CHECK(std::abs(got[c] - want[c]) < 1e-10);
            CHECK(predict(m, id, d.row(r)) == argmax(want));
        }
    }
}

TEST_CASE("property: every trainer and optimizer never raises the objective") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 6; ++t) {
        const auto d = testing::random_discrete(rng, 60, 4, 3, 4);
        const NbModel m = fit_nb(d);
        const double base = accuracy(m, WeightedParams::ones(3, 4), d);
        for (Optimizer opt : {Optimizer::Lbfgs, Optimizer::GradientDescent}) {
            TrainOptions o;
            o.optimizer = opt;
            o.max_iterations = 100;
            for (Classifier c : {Classifier::Wanbia, Classifier::Cawnb, Classifier::Rnb}) {
                const auto r = train_weights(m, d, c, o);
                REQUIRE(!r.objective_history.empty());
                for (std::size_t i = 1; i < r.objective_history.size(); ++i)
                    CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
                CHECK(r.objective_history.back() == Approx(objective(m, r.params, d)).epsilon(1e-12));
                CHECK(accuracy(m, r.params, d) >= base - 0.005);
            }
        }
    }
}

TEST_CASE("model and weights survive a JSON round trip") {
    std::mt19937_64 rng(14);
    const auto d = testing::random_discrete(rng, 40, 3, 3, 4);
    const NbModel m = fit_nb(d);
    const auto p = train_rnb(m, d).params;
    const nlohmann::json j{{"nb", m}, {"params", p}};
    const auto text = j.dump();
    const auto back = nlohmann::json::parse(text);
    const NbModel m2 = back.at("nb").get<NbModel>();
    const WeightedParams p2 = back.at("params").get<WeightedParams>();
    CHECK(m2 == m);
    CHECK(p2 == p);
    for (std::size_t r = 0; r < d.n_rows; ++r) CHECK(posterior_blend(m2, p2, d.row(r)) == posterior_blend(m, p, d.row(r)));
}

TEST_CASE("shape errors are reported") {
    const NbModel m = fit_nb(toy4());
    const std::vector<int> bad{5};
    CHECK_THROWS_AS(posterior_blend(m, WeightedParams::ones(2, 1), bad), Error);
    CHECK_THROWS_AS(posterior_blend(m, WeightedParams::ones(3, 1), std::vector<int>{0}), Error);
    WeightedParams p = WeightedParams::ones(2, 1);
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.validate(), Error);
}
