#include "sadd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "sadd/error.hpp"
#include "sadd/pseudo_label.hpp"
#include "sadd/serialization.hpp"

namespace sadd {

using nlohmann::json;

namespace {

constexpr int kUsageError = 2;
constexpr std::string_view kModelFormat = "sadd-model/1";

std::string read_file(const std::filesystem::path& path, const char* stage) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(stage, "cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("io", "write failed for '" + path.string() + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    return p.is_absolute() || base.empty() ? p : base / p;
}

Dataset load_input(const std::filesystem::path& csv, const std::optional<std::filesystem::path>& schema,
                   const std::string& missing_token) {
    CsvOptions options;
    options.missing_token = missing_token;
    if (schema) options.schema_hint = load_schema(*schema);
    return load_csv(csv, options);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Model files carry everything needed to score raw rows.
struct ModelFile {
    Schema schema;
    std::vector<std::vector<std::string>> levels;
    std::vector<std::string> class_names;
    std::string class_column;
    ImputationStats imputation;
    DiscretizationScheme scheme;
    NbModel nb;
    WeightedParams params;
    Classifier classifier = Classifier::Nb;
};

json model_to_json(const ModelFile& m) {
    return json{{"format", kModelFormat},
                {"schema", m.schema},
                {"levels", m.levels},
                {"class_column", m.class_column},
                {"class_names", m.class_names},
                {"classifier", classifier_tag(m.classifier)},
                {"imputation", m.imputation},
                {"scheme", m.scheme},
                {"nb", m.nb},
                {"params", m.params}};
}

ModelFile model_from_json(const json& j) {
    if (j.value("format", std::string()) != kModelFormat) throw Error("io", "not a model file");
    ModelFile m;
    j.at("schema").get_to(m.schema);
    j.at("levels").get_to(m.levels);
    j.at("class_column").get_to(m.class_column);
    j.at("class_names").get_to(m.class_names);
    m.classifier = parse_classifier(j.at("classifier").get<std::string>());
    j.at("imputation").get_to(m.imputation);
    m.scheme = j.at("scheme").get<DiscretizationScheme>();
    m.nb = j.at("nb").get<NbModel>();
    m.params = j.at("params").get<WeightedParams>();
    if (m.levels.size() != m.schema.size() || m.scheme.attributes() != m.schema.size() ||
        m.nb.attributes() != m.schema.size() || m.nb.n_classes != m.class_names.size())
        throw Error("io", "model file parts disagree in shape");
    return m;
}

// Re-expresses categorical codes and class labels in the model's vocabularies.
// Unseen levels become missing and are imputed; unseen classes become -1.
void align_to_model(Dataset& data, const ModelFile& m) {
    for (std::size_t j = 0; j < data.attributes(); ++j) {
        if (data.schema[j].kind != m.schema[j].kind)
            throw Error("schema", "attribute '" + m.schema[j].name + "' changed kind");
        if (data.is_numeric(j)) continue;
        Column& col = data.columns[j];
        std::vector<int> remap(col.levels.size(), -1);
        for (std::size_t l = 0; l < col.levels.size(); ++l) {
            const auto it = std::find(m.levels[j].begin(), m.levels[j].end(), col.levels[l]);
            if (it != m.levels[j].end()) remap[l] = static_cast<int>(it - m.levels[j].begin());
        }
        for (std::size_t r = 0; r < col.codes.size(); ++r) {
            if (col.missing[r]) continue;
            col.codes[r] = remap[col.codes[r]];
            if (col.codes[r] < 0) col.missing[r] = 1;
        }
        col.levels = m.levels[j];
    }
    for (int& y : data.labels) {
        if (y < 0) continue;
        const auto it = std::find(m.class_names.begin(), m.class_names.end(), data.class_names[y]);
        y = it == m.class_names.end() ? -1 : static_cast<int>(it - m.class_names.begin());
    }
    data.class_names = m.class_names;
}

void print_error(std::ostream& err, const std::exception& e) { err << "error: " << e.what() << '\n'; }

}  // namespace

void RunManifest::validate() const {
    if (datasets.empty()) throw Error("config", "manifest lists no datasets");
    if (configs.empty()) throw Error("config", "manifest lists no configs");
    if (folds < 2) throw Error("config", "folds must be at least 2");
    for (const auto& c : configs) c.validate();
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::size_t k = i + 1; k < configs.size(); ++k)
            if (configs[i].name == configs[k].name)
                throw Error("config", "duplicate config name '" + configs[i].name + "'");
    for (std::size_t i = 0; i < datasets.size(); ++i)
        for (std::size_t k = i + 1; k < datasets.size(); ++k)
            if (datasets[i].name == datasets[k].name)
                throw Error("config", "duplicate dataset name '" + datasets[i].name + "'");
    if (reference &&
        std::none_of(configs.begin(), configs.end(), [&](const auto& c) { return c.name == *reference; }))
        throw Error("config", "reference '" + *reference + "' is not a config name");
}

RunManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error("config", std::string("malformed manifest: ") + e.what());
    }
    try {
        RunManifest m;
        m.seed = j.value("seed", m.seed);
        m.folds = j.value("folds", m.folds);
        m.jobs = j.value("jobs", m.jobs);
        m.missing_token = j.value("missing_token", m.missing_token);
        m.output_dir = resolve(base_dir, j.value("output_dir", m.output_dir.string()));
        if (j.contains("reference") && !j.at("reference").is_null())
            m.reference = j.at("reference").get<std::string>();
        for (const auto& d : j.value("datasets", json::array())) {
            ManifestDataset ds;
            ds.path = resolve(base_dir, d.at("path").get<std::string>());
            ds.name = d.value("name", ds.path.stem().string());
            if (d.contains("schema")) ds.schema = resolve(base_dir, d.at("schema").get<std::string>());
            m.datasets.push_back(std::move(ds));
        }
        // Shared defaults are merged under every config entry.
        const json defaults = j.value("defaults", json::object());
        for (const auto& c : j.value("configs", json::array())) {
            json merged = defaults;
            merged.update(c);
            m.configs.push_back(merged.get<PipelineConfig>());
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw Error("config", std::string("invalid manifest: ") + e.what());
    }
}

RunManifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_file(path, "config"), path.parent_path());
}

std::string config_hash(const RunManifest& m) {
    json datasets = json::array();
    for (const auto& d : m.datasets)
        datasets.push_back({{"name", d.name},
                            {"file", d.path.filename().string()},
                            {"schema", d.schema ? d.schema->filename().string() : ""}});
    const json canonical{{"seed", m.seed},
                         {"folds", m.folds},
                         {"missing_token", m.missing_token},
                         {"reference", m.reference ? json(*m.reference) : json(nullptr)},
                         {"datasets", datasets},
                         {"configs", m.configs}};
    return hex64(fnv1a(canonical.dump()));
}

BenchReport run_manifest(const RunManifest& manifest) {
    manifest.validate();
    BenchReport report;
    report.seed = manifest.seed;
    report.folds = manifest.folds;
    report.config_hash = config_hash(manifest);

    const std::size_t n_data = manifest.datasets.size();
    const std::size_t n_cfg = manifest.configs.size();
    std::vector<std::optional<Dataset>> data(n_data);
    std::vector<std::string> load_errors(n_data);
    for (std::size_t d = 0; d < n_data; ++d) {
        try {
            data[d] = load_input(manifest.datasets[d].path, manifest.datasets[d].schema, manifest.missing_token);
        } catch (const std::exception& e) {
            load_errors[d] = e.what();
        }
    }

    struct Outcome {
        std::optional<EvalReport> report;
        std::string error;
    };
    std::vector<Outcome> outcomes(n_data * n_cfg);
    auto run_one = [&](std::size_t task) {
        const std::size_t d = task / n_cfg;
        const std::size_t c = task % n_cfg;
        Outcome o;
        if (!data[d]) {
            o.error = load_errors[d];
            return o;
        }
        try {
            o.report = cross_validate(*data[d], manifest.configs[c], manifest.folds, manifest.seed, 1,
                                      manifest.datasets[d].name);
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        return o;
    };

    const std::size_t width = std::max<std::size_t>(manifest.jobs, 1);
    for (std::size_t start = 0; start < outcomes.size(); start += width) {
        const std::size_t end = std::min(outcomes.size(), start + width);
        if (width == 1) {
            outcomes[start] = run_one(start);
            continue;
        }
        std::vector<std::future<Outcome>> pending;
        for (std::size_t t = start; t < end; ++t) pending.push_back(std::async(std::launch::async, run_one, t));
        for (std::size_t t = start; t < end; ++t) outcomes[t] = pending[t - start].get();
    }

    const std::string ref_name = manifest.reference.value_or(manifest.configs.front().name);
    for (std::size_t d = 0; d < n_data; ++d) {
        std::vector<EvalReport> runs;
        std::optional<std::size_t> ref;
        for (std::size_t c = 0; c < n_cfg; ++c) {
            auto& o = outcomes[d * n_cfg + c];
            if (!o.report) {
                report.failures.push_back(manifest.datasets[d].name + " / " + manifest.configs[c].name + ": " +
                                          o.error);
                continue;
            }
            if (manifest.configs[c].name == ref_name) ref = runs.size();
            runs.push_back(std::move(*o.report));
        }
        if (!runs.empty()) report.datasets.push_back(compare_runs(manifest.datasets[d].name, std::move(runs), ref));
    }
    return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SADD discretization and attribute-weighted naive Bayes benchmark tool", "sadd"};
    app.require_subcommand(1);
    const std::vector<std::string> method_tags{"mdlp", "sadd", "eqw", "eqf"};
    const std::vector<std::string> classifier_tags{"nb", "wanbia", "cawnb", "rnb"};

    std::string input;
    std::string schema_path;
    std::string missing_token = "?";
    std::string method = "sadd";
    std::size_t n0 = SchemeParams{}.n0;
    std::size_t bins = SchemeParams{}.bins;
    std::string classifier = "nb";
    std::string output;

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("input", input, "Input CSV (last column is the class)")->required();
        sub->add_option("--schema", schema_path, "Sidecar schema file (name,kind per line)");
        sub->add_option("--missing-token", missing_token, "Token marking a missing cell");
    };
    auto add_scheme = [&](CLI::App* sub) {
        sub->add_option("--method", method, "Discretizer")->check(CLI::IsMember(method_tags));
        sub->add_option("--n0", n0, "Sigmoid scale constant for SADD")->check(CLI::PositiveNumber);
        sub->add_option("--bins", bins, "Bin count for eqw/eqf")->check(CLI::PositiveNumber);
    };

    auto* discretize = app.add_subcommand("discretize", "Derive a scheme and print its diagnostics");
    add_data(discretize);
    add_scheme(discretize);
    std::string diagnostics_path;
    discretize->add_option("-o,--output", output, "Scheme file to write (JSON)");
    discretize->add_option("--diagnostics", diagnostics_path, "Write the diagnostics table here instead of stdout");

    int folds = 10;
    std::uint64_t seed = 1;
    double labeled_fraction = 1.0;
    bool inductive = false;
    std::size_t jobs = 1;
    std::string json_path;
    auto* cv = app.add_subcommand("cv", "Stratified cross-validation of one pipeline");
    add_data(cv);
    add_scheme(cv);
    cv->add_option("--classifier", classifier, "Classifier")->check(CLI::IsMember(classifier_tags));
    cv->add_option("--folds", folds, "Fold count")->check(CLI::Range(2, 1000));
    cv->add_option("--seed", seed, "Seed for folds, splits and k selection");
    cv->add_option("--labeled-fraction", labeled_fraction, "Share of each training fold keeping its labels")
        ->check(CLI::Range(0.0, 1.0));
    cv->add_flag("--inductive", inductive, "Keep test rows out of scheme derivation");
    cv->add_option("--jobs", jobs, "Parallel folds")->check(CLI::PositiveNumber);
    cv->add_option("--json", json_path, "Also write machine-readable results here");

    std::string manifest_path;
    std::optional<std::size_t> bench_jobs;
    std::string output_dir;
    auto* bench = app.add_subcommand("bench", "Run every dataset x config of a manifest");
    bench->add_option("manifest", manifest_path, "JSON manifest")->required();
    bench->add_option("--jobs", bench_jobs, "Parallel runs (overrides the manifest)")->check(CLI::PositiveNumber);
    bench->add_option("--output-dir", output_dir, "Directory for results.json and table.txt");

    std::string model_path;
    auto* train = app.add_subcommand("train", "Fit a scheme and classifier on a CSV and save the model");
    add_data(train);
    add_scheme(train);
    train->add_option("--classifier", classifier, "Classifier")->check(CLI::IsMember(classifier_tags));
    train->add_option("-m,--model", model_path, "Model file to write")->required();

    auto* predict_cmd = app.add_subcommand("predict", "Score a CSV with a saved model");
    predict_cmd->add_option("-m,--model", model_path, "Model file")->required();
    predict_cmd->add_option("input", input, "CSV with the model's attribute columns (class column optional)")
        ->required();
    predict_cmd->add_option("--missing-token", missing_token, "Token marking a missing cell");
    predict_cmd->add_option("-o,--output", output, "Write predictions here instead of stdout");

    std::size_t n_min = 2;
    std::size_t n_max = 4000;
    std::size_t step = 1;
    std::vector<std::size_t> n0_list{100, 2000};
    auto* curve = app.add_subcommand("curve", "Tabulate the raw and sigmoid-scaled stop thresholds");
    curve->add_option("--n-min", n_min, "Smallest N");
    curve->add_option("--n-max", n_max, "Largest N");
    curve->add_option("--step", step, "Step between N values")->check(CLI::PositiveNumber);
    curve->add_option("--n0", n0_list, "N0 values")->check(CLI::PositiveNumber);
    curve->add_option("-o,--output", output, "Write the CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kUsageError;
    }

    const std::optional<std::filesystem::path> schema =
        schema_path.empty() ? std::nullopt : std::optional<std::filesystem::path>(schema_path);
    const SchemeParams params{n0, bins};

    try {
        if (*discretize) {
            const Dataset raw = load_input(input, schema, missing_token);
            const Dataset data = apply_imputation(raw, compute_imputation(raw));
            const auto scheme = build_scheme(data, data.labels, parse_method(method), params);
            const auto table = diagnostics_table(scheme, apply_scheme(scheme, data));
            if (!output.empty()) save_scheme(scheme, output);
            if (diagnostics_path.empty()) {
                write_diagnostics(table, out);
            } else {
                std::ostringstream s;
                write_diagnostics(table, s);
                write_file(diagnostics_path, s.str());
            }
            return 0;
        }
        if (*cv) {
            const Dataset data = load_input(input, schema, missing_token);
            PipelineConfig config = make_config(method + "+" + classifier, parse_method(method), parse_classifier(classifier));
            config.scheme = params;
            config.labeled_fraction = labeled_fraction;
            config.transductive = !inductive;
            const std::string name = std::filesystem::path(input).stem().string();
            BenchReport report;
            report.seed = seed;
            report.folds = folds;
            report.config_hash = hex64(fnv1a(json(config).dump()));
            report.datasets.push_back(
                compare_runs(name, {cross_validate(data, config, folds, seed, jobs, name)}, std::nullopt));
            write_table(report, out);
            if (!json_path.empty()) write_file(json_path, results_to_json(report));
            return 0;
        }
        if (*bench) {
            RunManifest manifest = load_manifest(manifest_path);
            if (bench_jobs) manifest.jobs = *bench_jobs;
            if (!output_dir.empty()) manifest.output_dir = output_dir;
            const BenchReport report = run_manifest(manifest);
            std::ostringstream table;
            write_table(report, table);
            write_file(manifest.output_dir / "results.json", results_to_json(report));
            write_file(manifest.output_dir / "table.txt", table.str());
            out << table.str();
            for (const auto& f : report.failures) err << "error: " << f << '\n';
            return report.failures.empty() ? 0 : 1;
        }
        if (*train) {
            const Dataset raw = load_input(input, schema, missing_token);
            ModelFile m;
            m.schema = raw.schema;
            for (const auto& col : raw.columns) m.levels.push_back(col.levels);
            m.class_names = raw.class_names;
            m.class_column = raw.class_column;
            m.classifier = parse_classifier(classifier);
            m.imputation = compute_imputation(raw);
            const Dataset data = apply_imputation(raw, m.imputation);
            m.scheme = build_scheme(data, data.labels, parse_method(method), params);
            const DiscreteData d = apply_scheme(m.scheme, data);
            m.nb = fit_nb(d);
            m.params = train_weights(m.nb, d, m.classifier).params;
            write_file(model_path, model_to_json(m).dump(2) + "\n");
            err << "training accuracy: " << std::fixed << std::setprecision(2)
                << 100.0 * accuracy(m.nb, m.params, d) << "%\n";
            return 0;
        }
        if (*predict_cmd) {
            json j;
            try {
                j = json::parse(read_file(model_path, "model"));
            } catch (const json::exception& e) {
                throw Error("model", std::string("malformed model file: ") + e.what());
            }
            const ModelFile m = [&]() -> ModelFile {
                try {
                    return model_from_json(j);
                } catch (const json::exception& e) {
                    throw Error("model", std::string("invalid model file: ") + e.what());
                }
            }();
            const std::string text = read_file(input, "load");
            std::istringstream probe(text);
            std::string header;
            while (std::getline(probe, header) && header.find_first_not_of(" \t\r") == std::string::npos) {}
            std::size_t fields = 0;
            {
                CsvOptions o;
                o.has_class_column = false;
                std::istringstream one(header + "\n" + header + "\n");
                fields = parse_csv(one, o).attributes();
            }
            const std::size_t m_attrs = m.schema.size();
            if (fields != m_attrs && fields != m_attrs + 1)
                throw Error("schema", "input has " + std::to_string(fields) + " columns, model expects " +
                                          std::to_string(m_attrs) + " attributes (plus an optional class column)");
            CsvOptions options;
            options.missing_token = missing_token;
            options.schema_hint = m.schema;
            options.has_class_column = fields == m_attrs + 1;
            std::istringstream body(text);
            Dataset data = [&] {
                try {
                    return parse_csv(body, options);
                } catch (const Error& e) {
                    throw Error("schema", e.what());
                }
            }();
            align_to_model(data, m);
            data = apply_imputation(data, m.imputation);
            const DiscreteData d = apply_scheme(m.scheme, data);

            std::ostringstream s;
            s << "predicted";
            for (const auto& c : m.class_names) s << ",p_" << c;
            s << '\n';
            std::size_t scored = 0;
            std::size_t correct = 0;
            char buf[64];
            for (std::size_t r = 0; r < d.n_rows; ++r) {
                const auto post = posterior_blend(m.nb, m.params, d.row(r));
                const int c = argmax(post);
                s << m.class_names[c];
                for (double p : post) {
                    std::snprintf(buf, sizeof buf, "%.17g", p);
                    s << ',' << buf;
                }
                s << '\n';
                if (data.labels[r] >= 0) {
                    ++scored;
                    if (data.labels[r] == c) ++correct;
                }
            }
            if (output.empty()) out << s.str();
            else write_file(output, s.str());
            if (scored > 0)
                err << "accuracy: " << std::fixed << std::setprecision(2)
                    << 100.0 * static_cast<double>(correct) / static_cast<double>(scored) << "% (" << correct
                    << "/" << scored << ")\n";
            return 0;
        }
        if (*curve) {
            const auto rows = threshold_curve(n_min, n_max, step, n0_list);
            std::ostringstream s;
            write_curve_csv(rows, n0_list, s);
            if (output.empty()) out << s.str();
            else write_file(output, s.str());
            return 0;
        }
    } catch (const Error& e) {
        print_error(err, e);
        return e.stage() == "config" ? kUsageError : 1;
    } catch (const std::exception& e) {
        print_error(err, e);
        return 1;
    }
    return kUsageError;
}

}  // namespace sadd
