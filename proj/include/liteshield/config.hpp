#pragma once

#include "liteshield/models.hpp"
#include "liteshield/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liteshield {

struct FeatselConfig {
    int bins = 32;
    int keep = 30;
    int folds = 5;
    std::optional<int> force_size = 20;  // nullopt: take the CV-curve argmax
    int wrapper_trees = 25;
    int wrapper_depth = 16;
    std::size_t max_rows = 20000;  // wrapper subsample cap, 0 = all rows
};

struct AblationVariant {
    std::string name;                 // "Full", "-Worms", "-Worms-Shellcode"
    std::vector<std::string> dropped; // classes removed from train and test
};

struct ExperimentConfig {
    std::filesystem::path train;
    std::filesystem::path test;
    std::filesystem::path schema;  // empty: built-in UNSW-NB15 partition schema
    Task task = Task::binary;
    std::uint64_t seed = 42;

    FeatselConfig featsel;

    std::vector<Family> families{all_families.begin(), all_families.end()};
    std::size_t knn_eval_rows = 10000;  // stratified test subset for KNN, 0 = full test set
    std::size_t probe_rows = 1000;      // stratified profiling probe, 0 = full evaluation set
    int profile_repeats = 30;

    TreeParams dt;
    ForestParams rf;
    KnnParams knn;
    LinearParams lr;
    LinearParams svm;
    NbParams nb;

    std::vector<AblationVariant> ablation{{"Full", {}},
                                          {"-Worms", {"Worms"}},
                                          {"-Shellcode", {"Shellcode"}},
                                          {"-Worms-Shellcode", {"Worms", "Shellcode"}}};

    std::filesystem::path output_dir = "out";

    ModelSpec spec(Family family) const;

    // Every field as `section.key = value`, sorted by key.
    std::string canonical() const;
    // 16 hex digits of FNV-1a over canonical().
    std::string fingerprint() const;
};

// Flat `key = value` lines under `[section]` headers. Keys are addressed as
// `section.key` (e.g. `featsel.force_size`, `models.rf.trees`).
class ConfigStore {
public:
    ConfigStore();  // every known key at its default

    static ConfigStore parse(std::string_view text);
    static ConfigStore load(const std::filesystem::path& path);

    // Throws UsageError for keys outside the config schema.
    void set(const std::string& key, const std::string& value);
    // Accepts `key=value`.
    void apply_override(std::string_view assignment);

    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    static const std::vector<std::string>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

// Throws UsageError on malformed values or missing required keys.
ExperimentConfig to_experiment_config(const ConfigStore& store);
ConfigStore to_store(const ExperimentConfig& config);

std::string variant_slug(const AblationVariant& variant);

}  // namespace liteshield
