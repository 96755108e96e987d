#pragma once

#include "liteshield/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace liteshield {

enum class ColumnKind { numeric, categorical, binary_label, multiclass_label, drop };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::size_t position = 0;  // index in the declaring schema
};

using Schema = std::vector<ColumnSchema>;

// Checks unique names, exactly one binary and one multiclass label column,
// and positions matching list order. Throws DataError.
void validate_schema(const Schema& schema);

std::size_t predictive_count(const Schema& schema);

// Official UNSW-NB15 training/testing partition files (45 columns: id, 42
// flow features, attack_cat, label). `id` is dropped.
Schema unsw_nb15_schema();

// Raw UNSW-NB15_{1..4}.csv layout (49 columns, headerless upstream). The
// Stime/Ltime timestamps are dropped, leaving 45 predictive columns.
Schema unsw_nb15_raw_schema();

// `name,kind` per line; blank lines and lines starting with '#' are ignored.
Schema parse_schema(std::string_view text);
Schema read_schema_file(const std::filesystem::path& path);

// A cell as seen by callers: missing, numeric or text.
using Cell = std::variant<std::monostate, double, std::string_view>;

// Column-major store of parsed rows. Only non-drop columns are kept, so
// dropped identifiers never take part in deduplication or encoding.
class RawTable {
public:
    struct Column {
        ColumnSchema schema;
        std::vector<double> numbers;        // numeric kinds; NaN marks missing
        std::vector<std::int32_t> codes;    // text kinds; -1 marks missing
        std::vector<std::string> dictionary;
        std::unordered_map<std::string, std::int32_t> lookup;

        bool is_text() const noexcept;
    };

    RawTable() = default;
    explicit RawTable(const Schema& schema);

    // Schema of the kept columns, in declaration order.
    std::vector<ColumnSchema> schema() const;
    std::size_t row_count() const noexcept { return rows_; }
    std::size_t column_count() const noexcept { return columns_.size(); }
    const Column& column(std::size_t index) const { return columns_.at(index); }
    std::optional<std::size_t> find(std::string_view name) const;

    Cell cell(std::size_t row, std::size_t col) const;

    // One cell per kept column. Text cells are parsed for numeric columns.
    void append_row(std::span<const Cell> cells);

    RawTable select_rows(std::span<const std::size_t> rows) const;

    bool rows_equal(std::size_t a, std::size_t b) const;
    std::uint64_t row_hash(std::size_t row) const;

private:
    RawTable empty_like() const;

    std::vector<Column> columns_;
    std::size_t rows_ = 0;
};

// Reads a CSV with a header row. Header and schema are matched by name in
// any order. Empty cells are missing; surrounding whitespace is trimmed.
RawTable load_csv(const std::filesystem::path& path, const Schema& schema);
RawTable load_csv(std::istream& in, const Schema& schema, std::string_view source = "<stream>");

// Removes exact duplicate rows (labels included), keeping first occurrences.
RawTable deduplicate(const RawTable& table);

struct CategoryMap {
    std::vector<std::string> categories;  // code -> category
    std::unordered_map<std::string, int> codes;

    int unseen_code() const noexcept { return static_cast<int>(categories.size()); }
    int code_of(std::string_view category) const;
};

struct FeatureState {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    CategoryMap categories;  // categorical only
    double fill = 0.0;       // median for numeric, mode code for categorical
    double mean = 0.0;
    double sd = 1.0;         // stored as max(sd, 1e-12)
};

class Preprocessor {
public:
    static constexpr double min_sd = 1e-12;

    bool fitted() const noexcept { return fitted_; }
    const std::vector<FeatureState>& features() const noexcept { return features_; }
    const std::vector<std::string>& multiclass_names() const noexcept { return class_names_; }
    const std::vector<ColumnSchema>& schema() const noexcept { return schema_; }
    std::vector<std::string> feature_names() const;

private:
    friend Preprocessor fit_preprocessor(const RawTable& table);

    bool fitted_ = false;
    std::vector<ColumnSchema> schema_;
    std::vector<FeatureState> features_;
    std::vector<std::string> class_names_;
};

struct Dataset {
    Matrix features;
    Labels labels;
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;
    Task task = Task::binary;

    Eigen::Index rows() const noexcept { return features.rows(); }
    Eigen::Index dims() const noexcept { return features.cols(); }
    int n_classes() const noexcept { return static_cast<int>(class_names.size()); }
    std::vector<std::size_t> class_counts() const;

    // Throws DataError when shapes, labels or values break the invariants.
    void validate() const;
};

inline const std::vector<std::string>& binary_class_names() {
    static const std::vector<std::string> names{"normal", "attack"};
    return names;
}

// Category codes by descending frequency then lexicographic order; medians
// and mean/sd per column; multiclass names with "Normal" first.
Preprocessor fit_preprocessor(const RawTable& table);

Dataset transform(const Preprocessor& pre, const RawTable& table, Task task);

// Random oversampling with replacement up to the majority-class count.
// Original rows come first, in order.
Dataset balance(const Dataset& data, std::uint64_t seed);

// Removes rows of the named classes and re-indexes the remaining ones densely.
Dataset drop_classes(const Dataset& data, const std::vector<std::string>& class_names);

Dataset select_rows(const Dataset& data, std::span<const Eigen::Index> rows);

// Seeded stratified subsample of at most max_rows rows, original order kept.
// Every class present keeps at least one row when max_rows allows it.
Dataset stratified_subset(const Dataset& data, std::size_t max_rows, std::uint64_t seed);

}  // namespace liteshield
