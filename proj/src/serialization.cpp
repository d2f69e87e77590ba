#include "sadd/serialization.hpp"

#include <cmath>
#include <limits>

#include "sadd/error.hpp"

namespace sadd {

using nlohmann::json;

namespace {

// JSON has no infinities; encode them as strings.
json encode_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

double decode_real(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw Error("io", "bad real value '" + s + "'");
    }
    return j.get<double>();
}

std::string_view kind_tag(AttributeKind kind) {
    return kind == AttributeKind::Numeric ? "numeric" : "categorical";
}

AttributeKind parse_kind_tag(const std::string& tag) {
    if (tag == "numeric") return AttributeKind::Numeric;
    if (tag == "categorical") return AttributeKind::Categorical;
    throw Error("io", "unknown attribute kind '" + tag + "'");
}

}  // namespace

void to_json(json& j, const Attribute& a) { j = json{{"name", a.name}, {"kind", kind_tag(a.kind)}}; }

void from_json(const json& j, Attribute& a) {
    a.name = j.at("name").get<std::string>();
    a.kind = parse_kind_tag(j.at("kind").get<std::string>());
}

void to_json(json& j, const ImputationStats& s) { j = json{{"means", s.means}, {"modes", s.modes}}; }

void from_json(const json& j, ImputationStats& s) {
    j.at("means").get_to(s.means);
    j.at("modes").get_to(s.modes);
}

void to_json(json& j, const SchemeParams& p) { j = json{{"n0", p.n0}, {"bins", p.bins}}; }

void from_json(const json& j, SchemeParams& p) {
    p.n0 = j.value("n0", p.n0);
    p.bins = j.value("bins", p.bins);
}

void to_json(json& j, const DiscretizationScheme& s) {
    json attrs = json::array();
    for (std::size_t a = 0; a < s.attributes(); ++a) {
        attrs.push_back({{"name", s.attribute_names[a]}, {"kind", kind_tag(s.kinds[a])}, {"cuts", s.cuts[a]}});
    }
    j = json{{"format", "sadd-scheme/1"},
             {"method", method_tag(s.method)},
             {"params", s.params},
             {"attributes", attrs}};
}

void from_json(const json& j, DiscretizationScheme& s) {
    s.method = parse_method(j.at("method").get<std::string>());
    s.params = j.at("params").get<SchemeParams>();
    s.attribute_names.clear();
    s.kinds.clear();
    s.cuts.clear();
    for (const auto& a : j.at("attributes")) {
        s.attribute_names.push_back(a.at("name").get<std::string>());
        s.kinds.push_back(parse_kind_tag(a.at("kind").get<std::string>()));
        auto cuts = a.at("cuts").get<std::vector<double>>();
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            if (!(cuts[i] > cuts[i - 1])) throw Error("io", "scheme cuts must be strictly increasing");
        }
        s.cuts.push_back(std::move(cuts));
    }
}

void to_json(json& j, const NbModel& m) {
    j = json{{"n_classes", m.n_classes}, {"arity", m.arity}, {"priors", m.priors}, {"cond", m.cond}};
}

void from_json(const json& j, NbModel& m) {
    j.at("n_classes").get_to(m.n_classes);
    j.at("arity").get_to(m.arity);
    j.at("priors").get_to(m.priors);
    j.at("cond").get_to(m.cond);
    if (m.priors.size() != m.n_classes || m.cond.size() != m.arity.size())
        throw Error("io", "model tables do not match their declared shape");
    m.log_cond.resize(m.cond.size());
    for (std::size_t a = 0; a < m.cond.size(); ++a) {
        if (m.cond[a].size() != m.n_classes * m.arity[a])
            throw Error("io", "conditional table has the wrong size");
        m.log_cond[a].resize(m.cond[a].size());
        for (std::size_t i = 0; i < m.cond[a].size(); ++i) m.log_cond[a][i] = std::log(m.cond[a][i]);
    }
}

void to_json(json& j, const WeightedParams& p) {
    j = json{{"n_classes", p.n_classes},
             {"n_attributes", p.n_attributes},
             {"class_weights", p.class_weights},
             {"attribute_weights", p.attribute_weights},
             {"alpha", p.alpha}};
}

void from_json(const json& j, WeightedParams& p) {
    j.at("n_classes").get_to(p.n_classes);
    j.at("n_attributes").get_to(p.n_attributes);
    j.at("class_weights").get_to(p.class_weights);
    j.at("attribute_weights").get_to(p.attribute_weights);
    j.at("alpha").get_to(p.alpha);
    p.validate();
}

void to_json(json& j, const TrainOptions& o) {
    j = json{{"max_iterations", o.max_iterations},
             {"tolerance", o.tolerance},
             {"optimizer", optimizer_tag(o.optimizer)},
             {"memory", o.memory}};
}

void from_json(const json& j, TrainOptions& o) {
    o.max_iterations = j.value("max_iterations", o.max_iterations);
    o.tolerance = j.value("tolerance", o.tolerance);
    if (j.contains("optimizer")) o.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    o.memory = j.value("memory", o.memory);
}

void to_json(json& j, const PipelineConfig& c) {
    j = json{{"name", c.name},
             {"discretizer", method_tag(c.method)},
             {"n0", c.scheme.n0},
             {"bins", c.scheme.bins},
             {"classifier", classifier_tag(c.classifier)},
             {"pseudo_label", c.pseudo_label},
             {"transductive", c.transductive},
             {"labeled_fraction", c.labeled_fraction},
             {"k_grid", c.k_grid},
             {"train", c.train}};
}

void from_json(const json& j, PipelineConfig& c) {
    const Method method = parse_method(j.value("discretizer", std::string("sadd")));
    const Classifier classifier = parse_classifier(j.value("classifier", std::string("nb")));
    std::string name = j.value("name", std::string());
    if (name.empty()) name = std::string(method_tag(method)) + "+" + std::string(classifier_tag(classifier));
    c = make_config(std::move(name), method, classifier);
    c.scheme.n0 = j.value("n0", c.scheme.n0);
    c.scheme.bins = j.value("bins", c.scheme.bins);
    c.pseudo_label = j.value("pseudo_label", c.pseudo_label);
    c.transductive = j.value("transductive", c.transductive);
    if (j.contains("inductive")) c.transductive = !j.at("inductive").get<bool>();
    c.labeled_fraction = j.value("labeled_fraction", c.labeled_fraction);
    if (j.contains("k_grid")) j.at("k_grid").get_to(c.k_grid);
    if (j.contains("train")) c.train = j.at("train").get<TrainOptions>();
}

void to_json(json& j, const TTestResult& t) {
    j = json{{"t", encode_real(t.t)}, {"p", encode_real(t.p)}, {"significant", t.significant}};
}

void from_json(const json& j, TTestResult& t) {
    t.t = decode_real(j.at("t"));
    t.p = decode_real(j.at("p"));
    j.at("significant").get_to(t.significant);
}

void to_json(json& j, const DiagnosticsTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows)
        rows.push_back({{"attribute", r.attribute},
                        {"name", r.name},
                        {"intervals", r.intervals},
                        {"mi", r.mutual_information}});
    j = json{{"rows", rows},
             {"average_intervals", t.average_intervals},
             {"average_mi", t.average_mutual_information}};
}

void from_json(const json& j, DiagnosticsTable& t) {
    t.rows.clear();
    for (const auto& r : j.at("rows")) {
        DiagnosticsRow row;
        r.at("attribute").get_to(row.attribute);
        r.at("name").get_to(row.name);
        r.at("intervals").get_to(row.intervals);
        r.at("mi").get_to(row.mutual_information);
        t.rows.push_back(std::move(row));
    }
    j.at("average_intervals").get_to(t.average_intervals);
    j.at("average_mi").get_to(t.average_mutual_information);
}

void to_json(json& j, const FoldResult& f) {
    j = json{{"fold", f.fold},
             {"n_train", f.n_train},
             {"n_labeled", f.n_labeled},
             {"n_test", f.n_test},
             {"correct", f.correct},
             {"accuracy", f.accuracy},
             {"k", f.k},
             {"pseudo_rows", f.pseudo_rows},
             {"pseudo_labels", f.pseudo_labels},
             {"final_objective", f.final_objective},
             {"train_iterations", f.train_iterations},
             {"diagnostics", f.diagnostics}};
}

void from_json(const json& j, FoldResult& f) {
    j.at("fold").get_to(f.fold);
    j.at("n_train").get_to(f.n_train);
    j.at("n_labeled").get_to(f.n_labeled);
    j.at("n_test").get_to(f.n_test);
    j.at("correct").get_to(f.correct);
    j.at("accuracy").get_to(f.accuracy);
    j.at("k").get_to(f.k);
    j.at("pseudo_rows").get_to(f.pseudo_rows);
    j.at("pseudo_labels").get_to(f.pseudo_labels);
    j.at("final_objective").get_to(f.final_objective);
    j.at("train_iterations").get_to(f.train_iterations);
    j.at("diagnostics").get_to(f.diagnostics);
}

void to_json(json& j, const EvalReport& r) {
    j = json{{"dataset", r.dataset},
             {"config", r.config},
             {"seed", r.seed},
             {"folds", r.folds},
             {"accuracies", r.accuracies()},
             {"mean", r.mean},
             {"std", r.stddev},
             {"fold_results", r.fold_results}};
}

void from_json(const json& j, EvalReport& r) {
    j.at("dataset").get_to(r.dataset);
    j.at("config").get_to(r.config);
    j.at("seed").get_to(r.seed);
    j.at("folds").get_to(r.folds);
    j.at("fold_results").get_to(r.fold_results);
    j.at("mean").get_to(r.mean);
    j.at("std").get_to(r.stddev);
}

void to_json(json& j, const Comparison& c) {
    json tests = json::array();
    for (const auto& t : c.versus_reference) tests.push_back(t ? json(*t) : json(nullptr));
    j = json{{"dataset", c.dataset},
             {"reference", c.reference ? json(*c.reference) : json(nullptr)},
             {"runs", c.runs},
             {"versus_reference", tests}};
}

void from_json(const json& j, Comparison& c) {
    j.at("dataset").get_to(c.dataset);
    const auto& ref = j.at("reference");
    c.reference = ref.is_null() ? std::nullopt : std::optional<std::size_t>(ref.get<std::size_t>());
    j.at("runs").get_to(c.runs);
    c.versus_reference.clear();
    for (const auto& t : j.at("versus_reference"))
        c.versus_reference.push_back(t.is_null() ? std::nullopt : std::optional<TTestResult>(t.get<TTestResult>()));
}

void to_json(json& j, const BenchReport& r) {
    j = json{{"format", "sadd-results/1"},
             {"seed", r.seed},
             {"config_hash", r.config_hash},
             {"folds", r.folds},
             {"datasets", r.datasets},
             {"failures", r.failures}};
}

void from_json(const json& j, BenchReport& r) {
    j.at("seed").get_to(r.seed);
    j.at("config_hash").get_to(r.config_hash);
    j.at("folds").get_to(r.folds);
    j.at("datasets").get_to(r.datasets);
    j.at("failures").get_to(r.failures);
}

}  // namespace sadd
