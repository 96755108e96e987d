#include "doctest.h"

#include "liteshield/cli.hpp"
#include "liteshield/featsel.hpp"
#include "liteshield/serialize.hpp"
#include "support/synthetic.hpp"

#include <fstream>
#include <sstream>

using namespace liteshield;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Writes the toy config as an INI file, one [section] per key prefix.
fs::path write_config(const ExperimentConfig& c, const fs::path& path) {
    std::ofstream f(path);
    std::string section;
    const ConfigStore store = to_store(c);
    for (const auto& [key, value] : store.values()) {
        const auto dot = key.rfind('.');
        if (key.substr(0, dot) != section) {
            section = key.substr(0, dot);
            f << "\n[" << section << "]\n";
        }
        f << key.substr(dot + 1) << " = " << value << '\n';
    }
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes the report and exits 0") {
    auto c = synth::toy_config("toy_cli", Task::binary);
    c.families = {Family::dt, Family::svm};
    c.output_dir = "toy_cli/out";
    fs::remove_all(c.output_dir);
    const auto cfg = write_config(c, "toy_cli/config.ini");
    const auto r = cli({"run", "--config", cfg.string()});
    CHECK(r.code == exit_ok);
    CHECK(fs::exists("toy_cli/out/report.md"));
    CHECK(fs::exists("toy_cli/out/report.csv"));
    CHECK(fs::exists("toy_cli/out/models/svm.lsm"));
}

TEST_CASE("flag overrides beat the file") {
    auto c = synth::toy_config("toy_cli", Task::binary);
    c.families = {Family::nb};
    const auto cfg = write_config(c, "toy_cli/config_nb.ini");
    fs::remove_all("toy_cli/sel_a");
    fs::remove_all("toy_cli/sel_b");
    CHECK(cli({"select", "-c", cfg.string(), "--set", "output.dir=toy_cli/sel_a", "--set", "featsel.force_size=4"}).code ==
          exit_ok);
    CHECK(cli({"select", "-c", cfg.string(), "--output.dir=toy_cli/sel_b", "--featsel.force_size=3"}).code == exit_ok);
    std::ifstream a("toy_cli/sel_a/features.txt"), b("toy_cli/sel_b/features.txt");
    CHECK(read_feature_subset(a).indices.size() == 4);
    CHECK(read_feature_subset(b).indices.size() == 3);
}

TEST_CASE("run honours verbosity and overrides") {
    auto c = synth::toy_config("toy_cli", Task::binary);
    c.families = {Family::nb};
    const auto cfg = write_config(c, "toy_cli/config_run.ini");
    fs::remove_all("toy_cli/run_set");
    const auto r = cli({"run", "-c", cfg.string(), "--set", "output.dir=toy_cli/run_set", "-v"});
    CHECK(r.code == exit_ok);
    CHECK(r.err.find("loading") != std::string::npos);
    CHECK(fs::exists("toy_cli/run_set/report.md"));
    const auto quiet = cli({"run", "-c", cfg.string(), "--set", "output.dir=toy_cli/run_set"});
    CHECK(quiet.err.find("loading") == std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(cli({}).code == exit_usage);
    const auto unknown = cli({"frobnicate"});
    CHECK(unknown.code == exit_usage);
    CHECK(unknown.err.find("run") != std::string::npos);
    auto c = synth::toy_config("toy_cli", Task::binary);
    const auto cfg = write_config(c, "toy_cli/config_u.ini");
    CHECK(cli({"run", "-c", cfg.string(), "--bogus"}).code == exit_usage);
    CHECK(cli({"run", "-c", cfg.string(), "--set", "models.rf.leaves=3"}).code == exit_usage);
    CHECK(cli({"run", "-c", cfg.string(), "--set", "models.knn.k=0"}).code == exit_usage);
    CHECK(cli({"run"}).code == exit_usage);
    CHECK(cli({"ablate", "-c", cfg.string()}).code == exit_usage);  // binary task
}

TEST_CASE("data errors exit 2") {
    auto c = synth::toy_config("toy_cli", Task::binary);
    c.train = "toy_cli/missing.csv";
    const auto cfg = write_config(c, "toy_cli/config_missing.ini");
    const auto r = cli({"run", "-c", cfg.string()});
    CHECK(r.code == exit_data);
    CHECK(r.err.find("missing.csv") != std::string::npos);
    std::ofstream("toy_cli/garbage.lsm") << "not a model";
    CHECK(cli({"inspect", "toy_cli/garbage.lsm"}).code == exit_data);
    CHECK(cli({"inspect", "toy_cli/nothing.lsm"}).code == exit_data);
}

TEST_CASE("inspect prints the header of a saved svm") {
    const auto d = synth::blobs(100, 7, 2, 3, 1.0, 2);
    save_model("toy_svm.lsm", train(ModelSpec::defaults(Family::svm), d));
    const auto r = cli({"inspect", "toy_svm.lsm"});
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("family=svm\n") != std::string::npos);
    CHECK(r.out.find("classes=2\n") != std::string::npos);
    CHECK(r.out.find("features=7\n") != std::string::npos);
    CHECK(r.out.find("size_bytes=" + std::to_string(fs::file_size("toy_svm.lsm"))) != std::string::npos);
}

TEST_CASE("profile writes a cost csv") {
    const auto d = synth::blobs(100, 3, 2, 3, 1.0, 2);
    const auto m = train(ModelSpec::defaults(Family::knn), d);
    save_model("toy_knn.lsm", m);
    std::ofstream("toy_probe.csv") << "a,b,c\n0.1,0.2,0.3\n1,2,3\n";
    const auto r = cli({"profile", "toy_knn.lsm", "toy_probe.csv", "--repeats", "3", "-o", "toy_cost.csv"});
    CHECK(r.code == exit_ok);
    std::ifstream in("toy_cost.csv");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    CHECK(text.find("model_size_bytes," + std::to_string(serialize(m).size())) != std::string::npos);
    std::ofstream("toy_probe_bad.csv") << "a,b\n1,2\n";
    CHECK(cli({"profile", "toy_knn.lsm", "toy_probe_bad.csv", "-o", "toy_cost.csv"}).code == exit_data);
}

}
