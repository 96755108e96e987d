#pragma once

#include "liteshield/config.hpp"
#include "liteshield/featsel.hpp"
#include "liteshield/metrics.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace liteshield {

using LogSink = std::function<void(std::string_view)>;

struct ModelEvaluation {
    Family family = Family::dt;
    Task task = Task::binary;
    QualityReport quality;
    CostReport cost;
    std::size_t eval_rows = 0;
};

struct EvaluationReport {
    std::string fingerprint;
    Task task = Task::binary;
    std::vector<std::string> feature_names;  // names of the selected features, in subset order
    FeatureSubset features;
    std::vector<std::string> class_names;
    std::size_t train_rows = 0;  // after deduplication, before balancing
    std::size_t test_rows = 0;
    std::vector<ModelEvaluation> models;
};

// Everything run_task produces before anything touches the filesystem.
struct TaskArtifacts {
    EvaluationReport report;
    std::vector<std::string> all_feature_names;
    std::vector<TrainedModel> models;  // parallel to report.models
    Matrix probe;                      // projected test rows used for profiling
    std::vector<std::string> probe_names;
};

// load -> dedupe(train) -> fit -> transform -> [balance] -> MI -> rank -> RFECV
// -> project -> per family train/predict/score/profile. The test split only
// ever enters transform, project and predict. Errors carry the stage name.
// `drop` lists classes removed from both splits right after transform.
TaskArtifacts evaluate_task(const ExperimentConfig& config, const std::vector<std::string>& drop = {},
                            const LogSink& log = {});

// evaluate_task followed by writing report.md, report.csv, features.txt,
// probe.csv and models/<family>.lsm under config.output_dir.
EvaluationReport run_task(const ExperimentConfig& config, const LogSink& log = {});

// Feature selection only; writes features.txt. Returns the subset.
FeatureSubset run_selection(const ExperimentConfig& config, const LogSink& log = {});

struct AblationVariantResult {
    AblationVariant variant;
    EvaluationReport report;
};

struct AblationTable {
    std::vector<Family> families;
    std::vector<AblationVariantResult> variants;

    double accuracy(Family family, std::size_t variant) const;
};

// One multiclass run per variant, dropping its classes from train and test.
// Per-variant artifacts go to output_dir/<slug>/, the table to ablation.md and ablation.csv.
AblationTable run_ablation(const ExperimentConfig& config, const LogSink& log = {});

enum class ReportFormat { csv, markdown };

void emit_report(const EvaluationReport& report, ReportFormat format, std::ostream& out);
void emit_report(const EvaluationReport& report, ReportFormat format, const std::filesystem::path& path);

struct ReportRow {
    std::string family;
    std::string task;
    std::string metric;
    double value = 0.0;
};

std::vector<ReportRow> parse_report_csv(std::istream& in);

void emit_ablation(const AblationTable& table, ReportFormat format, std::ostream& out);

}  // namespace liteshield
