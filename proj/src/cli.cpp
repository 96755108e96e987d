#include "liteshield/cli.hpp"

#include "liteshield/config.hpp"
#include "liteshield/csv.hpp"
#include "liteshield/error.hpp"
#include "liteshield/experiment.hpp"
#include "liteshield/serialize.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace liteshield {

namespace {

struct Invocation {
    std::string config_path;
    std::vector<std::string> overrides;
    int verbosity = 0;
};

void add_config_options(CLI::App& sub, Invocation& inv) {
    sub.add_option("-c,--config", inv.config_path, "Experiment config file")->required();
    sub.add_option("--set", inv.overrides, "Override a config key, e.g. --set featsel.force_size=20");
    sub.add_flag("-v,--verbose", inv.verbosity, "Progress messages on stderr (repeat for more)");
    sub.allow_extras();
}

// Extra `--section.key=value` flags become overrides; anything else is an unknown flag.
ExperimentConfig resolve_config(const Invocation& inv, const std::vector<std::string>& extras) {
    ConfigStore store = ConfigStore::load(inv.config_path);
    for (const auto& extra : extras) {
        if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos ||
            extra.find('.') > extra.find('=')) {
            throw UsageError("unknown argument '" + extra + "'");
        }
        store.apply_override(extra.substr(2));
    }
    for (const auto& o : inv.overrides) store.apply_override(o);
    return to_experiment_config(store);
}

Matrix read_probe_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open probe file '" + path.string() + "'");
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("probe file is empty");
    const std::size_t width = fields.size();
    std::vector<double> values;
    std::size_t rows = 0;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != width) {
            throw DataError("probe row " + std::to_string(rows + 1) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(width));
        }
        for (const auto& f : fields) {
            double v = 0.0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc{} || res.ptr != f.data() + f.size()) {
                throw DataError("probe row " + std::to_string(rows + 1) + ": cannot parse '" + f + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    Matrix probe(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < values.size(); ++i) {
        probe(static_cast<Eigen::Index>(i / width), static_cast<Eigen::Index>(i % width)) = values[i];
    }
    return probe;
}

void print_header(std::ostream& out, const std::vector<std::uint8_t>& bytes) {
    const ModelHeader h = read_header(bytes);
    out << "family=" << to_string(h.family) << '\n'
        << "classes=" << h.n_classes << '\n'
        << "features=" << h.n_features << '\n'
        << "version=" << h.version << '\n'
        << "size_bytes=" << bytes.size() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lightweight intrusion-detection pipeline: feature selection, six classifiers, cost profiling"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run one task end to end and write the report");
    auto* ablate = app.add_subcommand("ablate", "Run the multiclass attack-class ablation grid");
    auto* select = app.add_subcommand("select", "Run feature selection only and write features.txt");
    const std::array<CLI::App*, 3> pipeline{run, ablate, select};
    std::array<Invocation, 3> invocations;
    for (std::size_t i = 0; i < pipeline.size(); ++i) add_config_options(*pipeline[i], invocations[i]);

    std::string model_path, probe_path, cost_path;
    int repeats = 30;
    auto* profile = app.add_subcommand("profile", "Profile a saved model on a probe CSV");
    profile->add_option("model", model_path, "Model file (.lsm)")->required();
    profile->add_option("probe", probe_path, "Probe CSV (header row, numeric features)")->required();
    profile->add_option("--repeats", repeats, "Timed repetitions")->check(CLI::Range(3, 100000));
    profile->add_option("-o,--out", cost_path, "Cost report CSV (default: <model>.cost.csv)");

    auto* inspect = app.add_subcommand("inspect", "Print the metadata of a saved model");
    inspect->add_option("model", model_path, "Model file (.lsm)")->required();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        for (std::size_t i = 0; i < pipeline.size(); ++i) {
            CLI::App* sub = pipeline[i];
            if (!sub->parsed()) continue;
            const Invocation& inv = invocations[i];
            LogSink log;
            if (inv.verbosity > 0) log = [&err](std::string_view message) { err << message << '\n'; };
            const ExperimentConfig config = resolve_config(inv, sub->remaining());
            if (sub == run) {
                run_task(config, log);
            } else if (sub == ablate) {
                run_ablation(config, log);
            } else {
                run_selection(config, log);
            }
            err << "wrote " << config.output_dir.string() << '\n';
            return exit_ok;
        }
        if (profile->parsed()) {
            const TrainedModel model = load_model(model_path);
            const Matrix probe = read_probe_csv(probe_path);
            const CostReport cost = profile_cost(model, probe, repeats);
            if (cost_path.empty()) cost_path = model_path + ".cost.csv";
            std::ofstream file(cost_path, std::ios::trunc);
            if (!file) throw DataError("cannot write '" + cost_path + "'");
            file << std::setprecision(17) << "metric,value\n"
                 << "model_size_bytes," << cost.model_size_bytes << '\n'
                 << "accounted_memory_bytes," << cost.accounted_memory_bytes << '\n'
                 << "latency_median_s," << cost.latency_median_s << '\n'
                 << "latency_p95_s," << cost.latency_p95_s << '\n';
            err << "wrote " << cost_path << '\n';
            return exit_ok;
        }
        if (inspect->parsed()) {
            print_header(out, read_file_bytes(model_path));
            return exit_ok;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return exit_data;
    } catch (const FormatError& e) {
        err << "model file error: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    err << app.help();
    return exit_usage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace liteshield
