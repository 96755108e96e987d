#include "liteshield/experiment.hpp"

#include "liteshield/csv.hpp"
#include "liteshield/error.hpp"
#include "liteshield/random.hpp"
#include "liteshield/serialize.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace liteshield {

namespace {

std::string fixed(double v, int digits);

std::string annotate(std::string_view stage, const char* what) {
    return "stage '" + std::string(stage) + "': " + what;
}

// Runs f, re-raising library errors with the stage name prefixed.
template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const FormatError& e) {
        throw FormatError(e.kind(), annotate(name, e.what()));
    } catch (const DataError& e) {
        throw DataError(annotate(name, e.what()));
    } catch (const UsageError& e) {
        throw UsageError(annotate(name, e.what()));
    }
}

void say(const LogSink& log, const std::string& message) {
    if (log) log(message);
}

struct Prepared {
    Dataset train;
    Dataset test;
    std::size_t train_rows = 0;
};

Prepared prepare(const ExperimentConfig& config, const std::vector<std::string>& drop, const LogSink& log) {
    auto [train_raw, test_raw] = stage("load", [&] {
        for (const auto* path : {&config.train, &config.test}) {
            if (!std::filesystem::exists(*path)) throw DataError("file not found: " + path->string());
        }
        if (!config.schema.empty() && !std::filesystem::exists(config.schema)) {
            throw DataError("schema file not found: " + config.schema.string());
        }
        const Schema schema = config.schema.empty() ? unsw_nb15_schema() : read_schema_file(config.schema);
        say(log, "loading " + config.train.string());
        RawTable train = load_csv(config.train, schema);
        say(log, "loading " + config.test.string());
        RawTable test = load_csv(config.test, schema);
        return std::pair{std::move(train), std::move(test)};
    });

    train_raw = stage("dedupe", [&] {
        const auto before = train_raw.row_count();
        RawTable out = deduplicate(train_raw);
        say(log, "dedupe: " + std::to_string(before) + " -> " + std::to_string(out.row_count()) + " training rows");
        return out;
    });

    const Preprocessor pre = stage("fit_preprocessor", [&] { return fit_preprocessor(train_raw); });

    Prepared out;
    stage("transform", [&] {
        out.train = transform(pre, train_raw, config.task);
        out.test = transform(pre, test_raw, config.task);
        if (!drop.empty()) {
            out.train = drop_classes(out.train, drop);
            out.test = drop_classes(out.test, drop);
        }
    });
    out.train_rows = static_cast<std::size_t>(out.train.rows());

    if (config.task == Task::multiclass) {
        out.train = stage("balance", [&] { return balance(out.train, derive_seed(config.seed, 0xba1a9ce)); });
        say(log, "balance: " + std::to_string(out.train.rows()) + " training rows");
    }
    return out;
}

FeatureSubset select_features(const ExperimentConfig& config, const Dataset& train, const LogSink& log) {
    const MiScores mi = stage("mutual_information", [&] { return mutual_information(train, config.featsel.bins); });
    const FeatureSubset start = stage("rank_by_mi", [&] { return rank_by_mi(mi, config.featsel.keep); });
    return stage("rfecv", [&] {
        RfecvOptions options;
        options.folds = config.featsel.folds;
        options.seed = derive_seed(config.seed, 0x4fec);
        options.force_size = config.featsel.force_size;
        options.wrapper.trees = config.featsel.wrapper_trees;
        options.wrapper.tree.max_depth = config.featsel.wrapper_depth;
        options.max_rows = config.featsel.max_rows;
        if (log) {
            options.on_round = [&log](int size, double score) {
                log("rfecv: " + std::to_string(size) + " features, cv weighted F1 " + fixed(score, 4));
            };
        }
        say(log, "rfecv: eliminating from " + std::to_string(start.indices.size()) + " features");
        return rfecv(train, start, options);
    });
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_probe(const std::filesystem::path& path, const Matrix& probe, const std::vector<std::string>& names) {
    write_text(path, [&](std::ostream& out) {
        out << std::setprecision(17);
        for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << csv_escape(names[j]);
        out << '\n';
        for (Eigen::Index r = 0; r < probe.rows(); ++r) {
            for (Eigen::Index c = 0; c < probe.cols(); ++c) out << (c ? "," : "") << probe(r, c);
            out << '\n';
        }
    });
}

void write_artifacts(const TaskArtifacts& artifacts, const std::filesystem::path& dir) {
    stage("output", [&] {
        std::error_code ec;
        std::filesystem::create_directories(dir / "models", ec);
        if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
        for (std::size_t i = 0; i < artifacts.models.size(); ++i) {
            const auto name = std::string(to_string(artifacts.models[i].family())) + ".lsm";
            save_model(dir / "models" / name, artifacts.models[i]);
        }
        write_feature_subset(dir / "features.txt", artifacts.report.features, artifacts.all_feature_names);
        write_probe(dir / "probe.csv", artifacts.probe, artifacts.probe_names);
        emit_report(artifacts.report, ReportFormat::markdown, dir / "report.md");
        emit_report(artifacts.report, ReportFormat::csv, dir / "report.csv");
    });
}

}  // namespace

TaskArtifacts evaluate_task(const ExperimentConfig& config, const std::vector<std::string>& drop, const LogSink& log) {
    Prepared data = prepare(config, drop, log);
    const FeatureSubset subset = select_features(config, data.train, log);

    TaskArtifacts artifacts;
    artifacts.all_feature_names = data.train.feature_names;
    const Dataset train_set = project(data.train, subset);
    const Dataset test_set = project(data.test, subset);

    EvaluationReport& report = artifacts.report;
    report.fingerprint = config.fingerprint();
    report.task = config.task;
    report.feature_names = train_set.feature_names;
    report.features = subset;
    report.class_names = train_set.class_names;
    report.train_rows = data.train_rows;
    report.test_rows = static_cast<std::size_t>(test_set.rows());

    const Dataset probe = stratified_subset(test_set, config.probe_rows, derive_seed(config.seed, 0x9b0be));
    artifacts.probe = probe.features;
    artifacts.probe_names = probe.feature_names;

    for (Family family : config.families) {
        const std::string name(to_string(family));
        TrainedModel model = stage("train:" + name, [&] {
            say(log, "training " + name + " on " + std::to_string(train_set.rows()) + " rows");
            return train(config.spec(family), train_set);
        });
        const Dataset eval = family == Family::knn
                                 ? stratified_subset(test_set, config.knn_eval_rows, derive_seed(config.seed, 0x6b6e6e))
                                 : test_set;
        ModelEvaluation evaluation;
        evaluation.family = family;
        evaluation.task = config.task;
        evaluation.eval_rows = static_cast<std::size_t>(eval.rows());
        stage("evaluate:" + name, [&] {
            const Labels predicted = model.predict(eval.features);
            const auto cm = confusion(eval.labels, predicted, eval.n_classes(), eval.class_names);
            evaluation.quality = quality(cm, config.task);
        });
        evaluation.cost = stage("profile:" + name, [&] { return profile_cost(model, probe.features, config.profile_repeats); });
        say(log, name + ": accuracy " + fixed(100.0 * evaluation.quality.accuracy, 2) + "%, size " +
                     std::to_string(evaluation.cost.model_size_bytes) + " bytes");
        report.models.push_back(std::move(evaluation));
        artifacts.models.push_back(std::move(model));
    }
    return artifacts;
}

EvaluationReport run_task(const ExperimentConfig& config, const LogSink& log) {
    TaskArtifacts artifacts = evaluate_task(config, {}, log);
    write_artifacts(artifacts, config.output_dir);
    return std::move(artifacts.report);
}

FeatureSubset run_selection(const ExperimentConfig& config, const LogSink& log) {
    Prepared data = prepare(config, {}, log);
    FeatureSubset subset = select_features(config, data.train, log);
    stage("output", [&] {
        std::error_code ec;
        std::filesystem::create_directories(config.output_dir, ec);
        if (ec) throw DataError("cannot create output directory '" + config.output_dir.string() + "'");
        write_feature_subset(config.output_dir / "features.txt", subset, data.train.feature_names);
    });
    return subset;
}

double AblationTable::accuracy(Family family, std::size_t variant) const {
    for (const auto& m : variants.at(variant).report.models) {
        if (m.family == family) return m.quality.accuracy;
    }
    throw UsageError("family " + std::string(to_string(family)) + " not in ablation table");
}

AblationTable run_ablation(const ExperimentConfig& config, const LogSink& log) {
    if (config.task != Task::multiclass) throw UsageError("ablation requires data.task = multiclass");
    AblationTable table;
    table.families = config.families;
    std::vector<TaskArtifacts> runs;
    for (const auto& variant : config.ablation) {
        say(log, "ablation variant " + variant.name);
        runs.push_back(evaluate_task(config, variant.dropped, log));
        table.variants.push_back({variant, runs.back().report});
    }
    for (std::size_t v = 0; v < runs.size(); ++v) {
        write_artifacts(runs[v], config.output_dir / variant_slug(config.ablation[v]));
    }
    stage("output", [&] {
        write_text(config.output_dir / "ablation.md", [&](std::ostream& out) { emit_ablation(table, ReportFormat::markdown, out); });
        write_text(config.output_dir / "ablation.csv", [&](std::ostream& out) { emit_ablation(table, ReportFormat::csv, out); });
    });
    return table;
}

void emit_report(const EvaluationReport& report, ReportFormat format, std::ostream& out) {
    const std::string task(to_string(report.task));
    if (format == ReportFormat::markdown) {
        out << "# Evaluation report (" << task << ")\n\n";
        out << "- config fingerprint: `" << report.fingerprint << "`\n";
        out << "- training rows (deduplicated): " << report.train_rows << "\n";
        out << "- test rows: " << report.test_rows << "\n";
        out << "- selected features (" << report.feature_names.size() << "):";
        for (std::size_t i = 0; i < report.feature_names.size(); ++i) out << (i ? ", " : " ") << report.feature_names[i];
        out << "\n\n";
        out << "| Model | Acc. | F1 | Size (MB) |\n";
        out << "|:--|--:|--:|--:|\n";
        for (const auto& m : report.models) {
            out << "| " << upper(to_string(m.family)) << " | " << fixed(100.0 * m.quality.accuracy, 2) << " | "
                << fixed(100.0 * m.quality.weighted_f1, 2) << " | "
                << fixed(static_cast<double>(m.cost.model_size_bytes) / 1e6, 4) << " |\n";
        }
        return;
    }
    out << "# fingerprint," << report.fingerprint << "\n";
    out << "family,task,metric,value\n";
    out << std::setprecision(17);
    for (const auto& m : report.models) {
        const std::string prefix = std::string(to_string(m.family)) + "," + task + ",";
        const auto& q = m.quality;
        const std::pair<const char*, double> rows[] = {
            {"accuracy", q.accuracy},
            {"precision_macro", q.macro_precision},
            {"recall_macro", q.macro_recall},
            {"f1_macro", q.macro_f1},
            {"precision_weighted", q.weighted_precision},
            {"recall_weighted", q.weighted_recall},
            {"f1_weighted", q.weighted_f1},
            {"fpr", q.fpr},
            {"specificity", q.specificity},
            {"model_size_bytes", static_cast<double>(m.cost.model_size_bytes)},
            {"accounted_memory_bytes", static_cast<double>(m.cost.accounted_memory_bytes)},
            {"latency_median_s", m.cost.latency_median_s},
            {"latency_p95_s", m.cost.latency_p95_s},
            {"eval_rows", static_cast<double>(m.eval_rows)},
        };
        for (const auto& [metric, value] : rows) out << prefix << metric << ',' << value << '\n';
    }
}

void emit_report(const EvaluationReport& report, ReportFormat format, const std::filesystem::path& path) {
    write_text(path, [&](std::ostream& out) { emit_report(report, format, out); });
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
    std::vector<ReportRow> rows;
    CsvReader reader(in);
    std::vector<std::string> fields;
    bool header = false;
    while (reader.next(fields)) {
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        if (!fields[0].empty() && fields[0].front() == '#') continue;
        if (!header) {
            if (fields != std::vector<std::string>{"family", "task", "metric", "value"}) {
                throw DataError("report csv: unexpected header");
            }
            header = true;
            continue;
        }
        if (fields.size() != 4) throw DataError("report csv: line " + std::to_string(reader.line()) + " needs 4 fields");
        ReportRow row{fields[0], fields[1], fields[2], 0.0};
        try {
            row.value = std::stod(fields[3]);
        } catch (const std::logic_error&) {
            throw DataError("report csv: bad value on line " + std::to_string(reader.line()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_ablation(const AblationTable& table, ReportFormat format, std::ostream& out) {
    if (format == ReportFormat::markdown) {
        out << "| Model |";
        for (const auto& v : table.variants) out << ' ' << v.variant.name << " |";
        out << "\n|:--|";
        for (std::size_t i = 0; i < table.variants.size(); ++i) out << "--:|";
        out << '\n';
        for (Family f : table.families) {
            out << "| " << upper(to_string(f)) << " |";
            for (std::size_t v = 0; v < table.variants.size(); ++v) out << ' ' << fixed(100.0 * table.accuracy(f, v), 2) << " |";
            out << '\n';
        }
        return;
    }
    out << "family,variant,accuracy,train_rows,test_rows\n" << std::setprecision(17);
    for (Family f : table.families) {
        for (std::size_t v = 0; v < table.variants.size(); ++v) {
            const auto& r = table.variants[v].report;
            out << to_string(f) << ',' << csv_escape(table.variants[v].variant.name) << ',' << table.accuracy(f, v) << ','
                << r.train_rows << ',' << r.test_rows << '\n';
        }
    }
}

}  // namespace liteshield
