#pragma once

// Seeded synthetic datasets for tests: planted-signal classification data and
// small CSV files laid out like the UNSW-NB15 partition files.

#include "liteshield/config.hpp"
#include "liteshield/dataset.hpp"
#include "liteshield/random.hpp"

#include <filesystem>
#include <fstream>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace synth {

inline liteshield::Dataset make_dataset(liteshield::Matrix x, std::vector<int> labels, int n_classes,
                                        liteshield::Task task = liteshield::Task::multiclass) {
    liteshield::Dataset d;
    d.features = std::move(x);
    d.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Eigen::Index>(labels.size()));
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
    if (task == liteshield::Task::binary && n_classes == 2) {
        d.class_names = liteshield::binary_class_names();
    } else {
        for (int c = 0; c < n_classes; ++c) d.class_names.push_back("c" + std::to_string(c));
    }
    d.task = task;
    return d;
}

// Gaussian blobs: class c has mean `separation * c` on the first `informative`
// features; the remaining features are pure noise.
inline liteshield::Dataset blobs(int rows, int dims, int n_classes, int informative, double separation,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    liteshield::Matrix x(rows, dims);
    std::vector<int> y(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        const int c = r % n_classes;
        y[static_cast<std::size_t>(r)] = c;
        for (int j = 0; j < dims; ++j) x(r, j) = noise(rng) + (j < informative ? separation * c : 0.0);
    }
    return make_dataset(std::move(x), std::move(y), n_classes,
                        n_classes == 2 ? liteshield::Task::binary : liteshield::Task::multiclass);
}

// 5 informative + `noise` noise features; label = [x0 + x1 + x2 + x3 + x4 > 0].
// Informative columns are placed at `positions`.
inline liteshield::Dataset planted(int rows, int noise_features, const std::vector<int>& positions, std::uint64_t seed) {
    const int dims = 5 + noise_features;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    liteshield::Matrix x(rows, dims);
    std::vector<int> y(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < dims; ++j) x(r, j) = normal(rng);
        double s = 0.0;
        for (int p : positions) s += x(r, p);
        y[static_cast<std::size_t>(r)] = s > 0.0 ? 1 : 0;
    }
    return make_dataset(std::move(x), std::move(y), 2, liteshield::Task::binary);
}

inline const std::vector<std::string>& unsw_classes() {
    static const std::vector<std::string> names{"Normal", "Generic", "Exploits", "Fuzzers", "DoS",
                                                "Reconnaissance", "Analysis", "Backdoor", "Shellcode", "Worms"};
    return names;
}

// CSV with the 45-column UNSW-NB15 partition header. Class frequencies are
// skewed like the real data; a handful of columns carry class signal.
inline void write_unsw_like_csv(const std::filesystem::path& path, int rows, std::uint64_t seed,
                                bool with_duplicates = true) {
    const auto schema = liteshield::unsw_nb15_schema();
    liteshield::Rng rng(seed);
    auto normal = [](liteshield::Rng& g) {
        const double u = 1.0 - liteshield::uniform_unit(g);
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.141592653589793 * liteshield::uniform_unit(g));
    };
    auto klass = [](liteshield::Rng& g) {
        static const int weights[] = {30, 20, 15, 10, 8, 6, 4, 3, 2, 2};
        int pick = static_cast<int>(liteshield::uniform_index(g, 100));
        for (int c = 0; c < 10; ++c) {
            if (pick < weights[c]) return c;
            pick -= weights[c];
        }
        return 9;
    };
    const char* protos[] = {"tcp", "udp", "arp", "ospf", "unas"};
    const char* services[] = {"-", "http", "dns", "ftp", "smtp"};
    const char* states[] = {"FIN", "INT", "CON", "REQ"};

    std::ofstream out(path);
    for (std::size_t i = 0; i < schema.size(); ++i) out << (i ? "," : "") << schema[i].name;
    out << '\n';
    std::string previous;
    for (int r = 0; r < rows; ++r) {
        const int c = klass(rng);
        std::ostringstream line;
        for (std::size_t i = 0; i < schema.size(); ++i) {
            if (i) line << ',';
            const auto& col = schema[i];
            if (col.name == "id") {
                line << r + 1;
            } else if (col.name == "proto") {
                line << protos[(c + static_cast<int>(rng() % 2)) % 5];
            } else if (col.name == "service") {
                line << services[(c * 3 + static_cast<int>(rng() % 2)) % 5];
            } else if (col.name == "state") {
                line << states[(c + static_cast<int>(rng() % 3)) % 4];
            } else if (col.name == "attack_cat") {
                line << unsw_classes()[static_cast<std::size_t>(c)];
            } else if (col.name == "label") {
                line << (c == 0 ? 0 : 1);
            } else {
                const bool informative = (i % 4) == 1;
                const double v = normal(rng) + (informative ? 1.5 * ((c * static_cast<int>(i)) % 5) : 0.0);
                line << v;
            }
        }
        out << line.str() << '\n';
        // Exact repeats of whole rows except the dropped id column.
        if (with_duplicates && r % 25 == 0) {
            std::string dup = line.str();
            dup = std::to_string(rows + r + 1) + dup.substr(dup.find(','));
            out << dup << '\n';
        }
    }
}

// Small, fast experiment on UNSW-like files under `dir` (created on demand).
// Paths stay as given so a relative `dir` keeps the fingerprint stable.
inline liteshield::ExperimentConfig toy_config(const std::filesystem::path& dir, liteshield::Task task) {
    std::filesystem::create_directories(dir);
    if (!std::filesystem::exists(dir / "train.csv")) write_unsw_like_csv(dir / "train.csv", 600, 1);
    if (!std::filesystem::exists(dir / "test.csv")) write_unsw_like_csv(dir / "test.csv", 300, 2, false);
    liteshield::ExperimentConfig c;
    c.train = dir / "train.csv";
    c.test = dir / "test.csv";
    c.task = task;
    c.seed = 7;
    c.featsel.keep = 12;
    c.featsel.force_size = 6;
    c.featsel.folds = 3;
    c.featsel.wrapper_trees = 5;
    c.featsel.wrapper_depth = 8;
    c.featsel.max_rows = 0;
    c.rf.trees = 10;
    c.knn_eval_rows = 120;
    c.probe_rows = 40;
    c.profile_repeats = 3;
    c.lr.epochs = 10;
    c.svm.epochs = 10;
    c.output_dir = dir / "out";
    return c;
}

}  // namespace synth
