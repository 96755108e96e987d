#include "liteshield/dataset.hpp"

#include "liteshield/csv.hpp"
#include "liteshield/error.hpp"
#include "liteshield/random.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace liteshield {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool is_text_kind(ColumnKind kind) {
    return kind == ColumnKind::categorical || kind == ColumnKind::multiclass_label;
}

std::optional<double> parse_number(std::string_view text) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (begin != end && *begin == '+') ++begin;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        // Hex port numbers appear in the raw UNSW-NB15 dumps.
        std::uint64_t hex = 0;
        auto [ptr, ec] = std::from_chars(begin + 2, end, hex, 16);
        if (ec != std::errc{} || ptr != end) return std::nullopt;
        return static_cast<double>(hex);
    }
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

// Sample mean and (n-1) standard deviation, two-pass.
std::pair<double, double> mean_sd(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

std::string_view to_string(Task task) {
    return task == Task::binary ? "binary" : "multiclass";
}

Task parse_task(std::string_view text) {
    if (text == "binary") return Task::binary;
    if (text == "multiclass") return Task::multiclass;
    throw UsageError("unknown task '" + std::string(text) + "' (expected binary or multiclass)");
}

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::numeric: return "numeric";
        case ColumnKind::categorical: return "categorical";
        case ColumnKind::binary_label: return "binary_label";
        case ColumnKind::multiclass_label: return "multiclass_label";
        case ColumnKind::drop: return "drop";
    }
    return "?";
}

ColumnKind parse_column_kind(std::string_view text) {
    for (ColumnKind kind : {ColumnKind::numeric, ColumnKind::categorical, ColumnKind::binary_label,
                            ColumnKind::multiclass_label, ColumnKind::drop}) {
        if (text == to_string(kind)) return kind;
    }
    throw DataError("unknown column kind '" + std::string(text) + "'");
}

void validate_schema(const Schema& schema) {
    std::set<std::string> names;
    int binary = 0;
    int multiclass = 0;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        const auto& col = schema[i];
        if (col.name.empty()) throw DataError("schema column " + std::to_string(i) + " has an empty name");
        if (!names.insert(col.name).second) throw DataError("duplicate schema column '" + col.name + "'");
        if (col.position != i) throw DataError("schema column '" + col.name + "' has an inconsistent position");
        binary += col.kind == ColumnKind::binary_label;
        multiclass += col.kind == ColumnKind::multiclass_label;
    }
    if (binary != 1 || multiclass != 1) {
        throw DataError("schema needs exactly one binary_label and one multiclass_label column");
    }
    if (predictive_count(schema) == 0) throw DataError("schema has no predictive columns");
}

std::size_t predictive_count(const Schema& schema) {
    return static_cast<std::size_t>(std::count_if(schema.begin(), schema.end(), [](const ColumnSchema& c) {
        return c.kind == ColumnKind::numeric || c.kind == ColumnKind::categorical;
    }));
}

namespace {

Schema make_schema(std::initializer_list<std::pair<const char*, ColumnKind>> columns) {
    Schema schema;
    for (const auto& [name, kind] : columns) schema.push_back({name, kind, schema.size()});
    return schema;
}

}  // namespace

Schema unsw_nb15_schema() {
    using K = ColumnKind;
    return make_schema({
        {"id", K::drop},
        {"dur", K::numeric},
        {"proto", K::categorical},
        {"service", K::categorical},
        {"state", K::categorical},
        {"spkts", K::numeric},
        {"dpkts", K::numeric},
        {"sbytes", K::numeric},
        {"dbytes", K::numeric},
        {"rate", K::numeric},
        {"sttl", K::numeric},
        {"dttl", K::numeric},
        {"sload", K::numeric},
        {"dload", K::numeric},
        {"sloss", K::numeric},
        {"dloss", K::numeric},
        {"sinpkt", K::numeric},
        {"dinpkt", K::numeric},
        {"sjit", K::numeric},
        {"djit", K::numeric},
        {"swin", K::numeric},
        {"stcpb", K::numeric},
        {"dtcpb", K::numeric},
        {"dwin", K::numeric},
        {"tcprtt", K::numeric},
        {"synack", K::numeric},
        {"ackdat", K::numeric},
        {"smean", K::numeric},
        {"dmean", K::numeric},
        {"trans_depth", K::numeric},
        {"response_body_len", K::numeric},
        {"ct_srv_src", K::numeric},
        {"ct_state_ttl", K::numeric},
        {"ct_dst_ltm", K::numeric},
        {"ct_src_dport_ltm", K::numeric},
        {"ct_dst_sport_ltm", K::numeric},
        {"ct_dst_src_ltm", K::numeric},
        {"is_ftp_login", K::numeric},
        {"ct_ftp_cmd", K::numeric},
        {"ct_flw_http_mthd", K::numeric},
        {"ct_src_ltm", K::numeric},
        {"ct_srv_dst", K::numeric},
        {"is_sm_ips_ports", K::numeric},
        {"attack_cat", K::multiclass_label},
        {"label", K::binary_label},
    });
}

Schema unsw_nb15_raw_schema() {
    using K = ColumnKind;
    return make_schema({
        {"srcip", K::categorical},
        {"sport", K::categorical},
        {"dstip", K::categorical},
        {"dsport", K::categorical},
        {"proto", K::categorical},
        {"state", K::categorical},
        {"dur", K::numeric},
        {"sbytes", K::numeric},
        {"dbytes", K::numeric},
        {"sttl", K::numeric},
        {"dttl", K::numeric},
        {"sloss", K::numeric},
        {"dloss", K::numeric},
        {"service", K::categorical},
        {"Sload", K::numeric},
        {"Dload", K::numeric},
        {"Spkts", K::numeric},
        {"Dpkts", K::numeric},
        {"swin", K::numeric},
        {"dwin", K::numeric},
        {"stcpb", K::numeric},
        {"dtcpb", K::numeric},
        {"smeansz", K::numeric},
        {"dmeansz", K::numeric},
        {"trans_depth", K::numeric},
        {"res_bdy_len", K::numeric},
        {"Sjit", K::numeric},
        {"Djit", K::numeric},
        {"Stime", K::drop},
        {"Ltime", K::drop},
        {"Sintpkt", K::numeric},
        {"Dintpkt", K::numeric},
        {"tcprtt", K::numeric},
        {"synack", K::numeric},
        {"ackdat", K::numeric},
        {"is_sm_ips_ports", K::numeric},
        {"ct_state_ttl", K::numeric},
        {"ct_flw_http_mthd", K::numeric},
        {"is_ftp_login", K::numeric},
        {"ct_ftp_cmd", K::numeric},
        {"ct_srv_src", K::numeric},
        {"ct_srv_dst", K::numeric},
        {"ct_dst_ltm", K::numeric},
        {"ct_src_ltm", K::numeric},
        {"ct_src_dport_ltm", K::numeric},
        {"ct_dst_sport_ltm", K::numeric},
        {"ct_dst_src_ltm", K::numeric},
        {"attack_cat", K::multiclass_label},
        {"Label", K::binary_label},
    });
}

Schema parse_schema(std::string_view text) {
    Schema schema;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw DataError("schema line " + std::to_string(line_no) + ": expected 'name,kind'");
        }
        const auto name = trim(line.substr(0, comma));
        const auto kind = trim(line.substr(comma + 1));
        try {
            schema.push_back({std::string(name), parse_column_kind(kind), schema.size()});
        } catch (const DataError& e) {
            throw DataError("schema line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    validate_schema(schema);
    return schema;
}

Schema read_schema_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_schema(buffer.str());
}

bool RawTable::Column::is_text() const noexcept {
    return is_text_kind(schema.kind);
}

RawTable::RawTable(const Schema& schema) {
    for (const auto& col : schema) {
        if (col.kind == ColumnKind::drop) continue;
        Column column;
        column.schema = col;
        columns_.push_back(std::move(column));
    }
}

RawTable RawTable::empty_like() const {
    RawTable out;
    out.columns_.reserve(columns_.size());
    for (const auto& col : columns_) {
        Column c;
        c.schema = col.schema;
        c.dictionary = col.dictionary;
        c.lookup = col.lookup;
        out.columns_.push_back(std::move(c));
    }
    return out;
}

std::vector<ColumnSchema> RawTable::schema() const {
    std::vector<ColumnSchema> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.schema);
    return out;
}

std::optional<std::size_t> RawTable::find(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].schema.name == name) return i;
    }
    return std::nullopt;
}

Cell RawTable::cell(std::size_t row, std::size_t col) const {
    const Column& c = columns_.at(col);
    if (row >= rows_) throw std::out_of_range("RawTable row out of range");
    if (c.is_text()) {
        const auto code = c.codes[row];
        if (code < 0) return std::monostate{};
        return std::string_view(c.dictionary[static_cast<std::size_t>(code)]);
    }
    const double v = c.numbers[row];
    if (std::isnan(v)) return std::monostate{};
    return v;
}

void RawTable::append_row(std::span<const Cell> cells) {
    if (cells.size() != columns_.size()) {
        throw DataError("row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(columns_.size()));
    }
    // Validate every cell before mutating so a bad row leaves the table intact.
    std::vector<double> numbers(cells.size(), kMissing);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const Column& c = columns_[i];
        if (c.is_text() || std::holds_alternative<std::monostate>(cells[i])) continue;
        if (const double* v = std::get_if<double>(&cells[i])) {
            if (!std::isfinite(*v)) throw DataError("non-finite value in column '" + c.schema.name + "'");
            numbers[i] = *v;
            continue;
        }
        const auto text = trim(std::get<std::string_view>(cells[i]));
        if (text.empty()) continue;
        const auto parsed = parse_number(text);
        if (!parsed) {
            throw DataError("column '" + c.schema.name + "': cannot parse '" + std::string(text) + "' as a number");
        }
        numbers[i] = *parsed;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        Column& c = columns_[i];
        if (!c.is_text()) {
            c.numbers.push_back(numbers[i]);
            continue;
        }
        std::string text;
        if (const auto* sv = std::get_if<std::string_view>(&cells[i])) {
            text = std::string(trim(*sv));
        } else if (const double* v = std::get_if<double>(&cells[i])) {
            std::ostringstream os;
            os << *v;
            text = os.str();
        }
        if (text.empty()) {
            c.codes.push_back(-1);
            continue;
        }
        auto [it, inserted] = c.lookup.try_emplace(text, static_cast<std::int32_t>(c.dictionary.size()));
        if (inserted) c.dictionary.push_back(text);
        c.codes.push_back(it->second);
    }
    ++rows_;
}

RawTable RawTable::select_rows(std::span<const std::size_t> rows) const {
    RawTable out = empty_like();
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        const Column& src = columns_[c];
        Column& dst = out.columns_[c];
        if (src.is_text()) {
            dst.codes.reserve(rows.size());
            for (auto r : rows) dst.codes.push_back(src.codes.at(r));
        } else {
            dst.numbers.reserve(rows.size());
            for (auto r : rows) dst.numbers.push_back(src.numbers.at(r));
        }
    }
    out.rows_ = rows.size();
    return out;
}

bool RawTable::rows_equal(std::size_t a, std::size_t b) const {
    for (const auto& c : columns_) {
        if (c.is_text()) {
            if (c.codes[a] != c.codes[b]) return false;
        } else {
            const double x = c.numbers[a];
            const double y = c.numbers[b];
            if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
        }
    }
    return true;
}

std::uint64_t RawTable::row_hash(std::size_t row) const {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (const auto& c : columns_) {
        if (c.is_text()) {
            h = mix(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(c.codes[row])));
        } else {
            double v = c.numbers[row];
            if (v == 0.0) v = 0.0;  // fold -0 onto +0
            h = mix(h, std::isnan(v) ? 0x7ff8000000000000ULL : std::bit_cast<std::uint64_t>(v));
        }
    }
    return h;
}

RawTable load_csv(std::istream& in, const Schema& schema, std::string_view source) {
    validate_schema(schema);
    CsvReader reader(in);
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError(std::string(source) + ": empty file (no header row)");

    std::unordered_map<std::string, std::size_t> header_pos;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        header_pos.emplace(std::string(trim(fields[i])), i);
    }
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    std::set<std::string> schema_names;
    for (const auto& col : schema) {
        schema_names.insert(col.name);
        if (!header_pos.contains(col.name)) missing.push_back(col.name);
    }
    for (const auto& f : fields) {
        const std::string name(trim(f));
        if (!schema_names.contains(name)) extra.push_back(name);
    }
    if (!missing.empty() || !extra.empty() || header_pos.size() != fields.size()) {
        std::string msg = std::string(source) + ": header does not match schema";
        auto list = [](const std::vector<std::string>& names) {
            std::string s;
            for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
            return s;
        };
        if (!missing.empty()) msg += "; missing columns: " + list(missing);
        if (!extra.empty()) msg += "; extra columns: " + list(extra);
        if (header_pos.size() != fields.size()) msg += "; duplicate header names";
        throw DataError(msg);
    }

    RawTable table(schema);
    std::vector<std::size_t> source_index;
    for (const auto& col : table.schema()) source_index.push_back(header_pos.at(col.name));

    std::vector<Cell> cells(source_index.size());
    std::size_t row = 0;
    while (reader.next(fields)) {
        ++row;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
        if (fields.size() != header_pos.size()) {
            throw DataError(std::string(source) + ": ragged row " + std::to_string(row) + " (line " +
                            std::to_string(reader.line()) + ") has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(header_pos.size()));
        }
        for (std::size_t i = 0; i < source_index.size(); ++i) {
            cells[i] = std::string_view(fields[source_index[i]]);
        }
        try {
            table.append_row(cells);
        } catch (const DataError& e) {
            throw DataError(std::string(source) + ": row " + std::to_string(row) + " (line " +
                            std::to_string(reader.line()) + "): " + e.what());
        }
    }
    return table;
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
    return load_csv(in, schema, path.string());
}

RawTable deduplicate(const RawTable& table) {
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> seen;
    seen.reserve(table.row_count());
    std::vector<std::size_t> keep;
    keep.reserve(table.row_count());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        auto& bucket = seen[table.row_hash(r)];
        const bool duplicate = std::any_of(bucket.begin(), bucket.end(),
                                           [&](std::size_t other) { return table.rows_equal(r, other); });
        if (duplicate) continue;
        bucket.push_back(r);
        keep.push_back(r);
    }
    return table.select_rows(keep);
}

int CategoryMap::code_of(std::string_view category) const {
    const auto it = codes.find(std::string(category));
    return it == codes.end() ? unseen_code() : it->second;
}

std::vector<std::string> Preprocessor::feature_names() const {
    std::vector<std::string> names;
    names.reserve(features_.size());
    for (const auto& f : features_) names.push_back(f.name);
    return names;
}

namespace {

// "Normal" traffic has a blank attack category in the raw UNSW-NB15 dumps.
std::string_view multiclass_value(const RawTable::Column& col, std::size_t row) {
    const auto code = col.codes[row];
    if (code < 0) return "Normal";
    return col.dictionary[static_cast<std::size_t>(code)];
}

}  // namespace

Preprocessor fit_preprocessor(const RawTable& table) {
    if (table.row_count() == 0) throw DataError("cannot fit preprocessor on an empty table");
    if (table.row_count() < 2) throw DataError("cannot fit preprocessor on fewer than 2 rows");

    Preprocessor pre;
    pre.schema_ = table.schema();
    const std::size_t n = table.row_count();
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const auto& col = table.column(c);
        const auto kind = col.schema.kind;
        if (kind == ColumnKind::multiclass_label) {
            std::set<std::string> names;
            for (std::size_t r = 0; r < n; ++r) names.insert(std::string(multiclass_value(col, r)));
            if (names.erase("Normal")) pre.class_names_.push_back("Normal");
            pre.class_names_.insert(pre.class_names_.end(), names.begin(), names.end());
            continue;
        }
        if (kind == ColumnKind::binary_label) continue;

        FeatureState state;
        state.name = col.schema.name;
        state.kind = kind;
        std::vector<double> values;
        values.reserve(n);
        if (kind == ColumnKind::numeric) {
            for (double v : col.numbers) {
                if (!std::isnan(v)) values.push_back(v);
            }
            if (values.empty()) throw DataError("column '" + state.name + "' has no non-missing values");
            state.fill = median_of(values);
        } else {
            std::vector<std::size_t> counts(col.dictionary.size(), 0);
            for (auto code : col.codes) {
                if (code >= 0) ++counts[static_cast<std::size_t>(code)];
            }
            std::vector<std::size_t> order;
            for (std::size_t k = 0; k < counts.size(); ++k) {
                if (counts[k] > 0) order.push_back(k);
            }
            if (order.empty()) throw DataError("column '" + state.name + "' has no non-missing values");
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (counts[a] != counts[b]) return counts[a] > counts[b];
                return col.dictionary[a] < col.dictionary[b];
            });
            std::vector<int> remap(col.dictionary.size(), 0);
            for (std::size_t rank = 0; rank < order.size(); ++rank) {
                const auto& name = col.dictionary[order[rank]];
                state.categories.categories.push_back(name);
                state.categories.codes.emplace(name, static_cast<int>(rank));
                remap[order[rank]] = static_cast<int>(rank);
            }
            state.fill = 0.0;  // mode
            for (auto code : col.codes) {
                values.push_back(code < 0 ? state.fill : remap[static_cast<std::size_t>(code)]);
            }
        }
        const auto [mean, sd] = mean_sd(values);
        state.mean = mean;
        state.sd = std::max(sd, Preprocessor::min_sd);
        pre.features_.push_back(std::move(state));
    }
    pre.fitted_ = true;
    return pre;
}

Dataset transform(const Preprocessor& pre, const RawTable& table, Task task) {
    if (!pre.fitted()) throw UsageError("transform called with an unfitted preprocessor");
    const auto schema = table.schema();
    bool match = schema.size() == pre.schema().size();
    for (std::size_t i = 0; match && i < schema.size(); ++i) {
        match = schema[i].name == pre.schema()[i].name && schema[i].kind == pre.schema()[i].kind;
    }
    if (!match) throw DataError("table schema does not match the preprocessor's schema");

    const auto n = static_cast<Eigen::Index>(table.row_count());
    Dataset out;
    out.task = task;
    out.feature_names = pre.feature_names();
    out.features.resize(n, static_cast<Eigen::Index>(pre.features().size()));
    out.labels.resize(n);
    out.class_names = task == Task::binary ? binary_class_names() : pre.multiclass_names();

    std::unordered_map<std::string_view, int> class_index;
    for (std::size_t k = 0; k < out.class_names.size(); ++k) {
        class_index.emplace(out.class_names[k], static_cast<int>(k));
    }

    Eigen::Index feature = 0;
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        const auto& col = table.column(c);
        switch (col.schema.kind) {
            case ColumnKind::numeric: {
                const auto& st = pre.features()[static_cast<std::size_t>(feature)];
                for (Eigen::Index r = 0; r < n; ++r) {
                    double v = col.numbers[static_cast<std::size_t>(r)];
                    if (std::isnan(v)) v = st.fill;
                    out.features(r, feature) = (v - st.mean) / st.sd;
                }
                ++feature;
                break;
            }
            case ColumnKind::categorical: {
                const auto& st = pre.features()[static_cast<std::size_t>(feature)];
                std::vector<int> remap(col.dictionary.size());
                for (std::size_t k = 0; k < col.dictionary.size(); ++k) {
                    remap[k] = st.categories.code_of(col.dictionary[k]);
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const auto code = col.codes[static_cast<std::size_t>(r)];
                    const double v = code < 0 ? st.fill : remap[static_cast<std::size_t>(code)];
                    out.features(r, feature) = (v - st.mean) / st.sd;
                }
                ++feature;
                break;
            }
            case ColumnKind::binary_label:
                if (task != Task::binary) break;
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double v = col.numbers[static_cast<std::size_t>(r)];
                    if (v != 0.0 && v != 1.0) {
                        throw DataError("row " + std::to_string(r + 1) + ": binary label must be 0 or 1");
                    }
                    out.labels(r) = static_cast<int>(v);
                }
                break;
            case ColumnKind::multiclass_label:
                if (task != Task::multiclass) break;
                for (Eigen::Index r = 0; r < n; ++r) {
                    const auto name = multiclass_value(col, static_cast<std::size_t>(r));
                    const auto it = class_index.find(name);
                    if (it == class_index.end()) {
                        throw DataError("row " + std::to_string(r + 1) + ": class '" + std::string(name) +
                                        "' was not seen when fitting");
                    }
                    out.labels(r) = it->second;
                }
                break;
            case ColumnKind::drop:
                break;
        }
    }
    out.validate();
    return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts.at(static_cast<std::size_t>(labels(i)));
    return counts;
}

void Dataset::validate() const {
    if (labels.size() != features.rows()) throw DataError("label count does not match feature rows");
    if (static_cast<Eigen::Index>(feature_names.size()) != features.cols()) {
        throw DataError("feature name count does not match feature columns");
    }
    if (task == Task::binary && class_names != binary_class_names()) {
        throw DataError("binary datasets use classes [normal, attack]");
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= n_classes()) {
            throw DataError("label " + std::to_string(labels(i)) + " out of range at row " + std::to_string(i));
        }
    }
    if (!features.allFinite()) throw DataError("features contain non-finite values");
}

Dataset select_rows(const Dataset& data, std::span<const Eigen::Index> rows) {
    Dataset out;
    out.feature_names = data.feature_names;
    out.class_names = data.class_names;
    out.task = data.task;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), data.dims());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = rows[i];
        if (r < 0 || r >= data.rows()) throw std::out_of_range("select_rows index out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(r);
        out.labels(static_cast<Eigen::Index>(i)) = data.labels(r);
    }
    return out;
}

Dataset balance(const Dataset& data, std::uint64_t seed) {
    if (data.task != Task::multiclass) throw UsageError("balance applies to multiclass datasets only");
    std::vector<std::vector<Eigen::Index>> members(data.class_names.size());
    for (Eigen::Index i = 0; i < data.rows(); ++i) members.at(static_cast<std::size_t>(data.labels(i))).push_back(i);
    std::size_t majority = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (members[k].empty()) throw DataError("cannot balance: class '" + data.class_names[k] + "' has no samples");
        majority = std::max(majority, members[k].size());
    }

    std::vector<Eigen::Index> rows(static_cast<std::size_t>(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    Rng rng(seed);
    for (const auto& m : members) {
        for (std::size_t extra = m.size(); extra < majority; ++extra) {
            rows.push_back(m[static_cast<std::size_t>(uniform_index(rng, m.size()))]);
        }
    }
    return select_rows(data, rows);
}

Dataset drop_classes(const Dataset& data, const std::vector<std::string>& class_names) {
    std::vector<bool> dropped(data.class_names.size(), false);
    for (const auto& name : class_names) {
        const auto it = std::find(data.class_names.begin(), data.class_names.end(), name);
        if (it == data.class_names.end()) throw DataError("unknown class '" + name + "'");
        dropped[static_cast<std::size_t>(it - data.class_names.begin())] = true;
    }
    std::vector<int> remap(data.class_names.size(), -1);
    std::vector<std::string> kept_names;
    for (std::size_t k = 0; k < data.class_names.size(); ++k) {
        if (dropped[k]) continue;
        remap[k] = static_cast<int>(kept_names.size());
        kept_names.push_back(data.class_names[k]);
    }
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        if (!dropped[static_cast<std::size_t>(data.labels(i))]) rows.push_back(i);
    }
    Dataset out = select_rows(data, rows);
    out.class_names = std::move(kept_names);
    for (Eigen::Index i = 0; i < out.labels.size(); ++i) out.labels(i) = remap[static_cast<std::size_t>(out.labels(i))];
    return out;
}

Dataset stratified_subset(const Dataset& data, std::size_t max_rows, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(data.rows());
    if (max_rows == 0 || max_rows >= n) return data;

    std::vector<std::vector<Eigen::Index>> members(data.class_names.size());
    for (Eigen::Index i = 0; i < data.rows(); ++i) members[static_cast<std::size_t>(data.labels(i))].push_back(i);

    // Proportional allocation, at least one row per present class, with the
    // remaining budget handed out by largest remainder.
    const std::size_t k = members.size();
    std::vector<std::size_t> take(k, 0);
    std::vector<double> remainder(k, 0.0);
    std::size_t used = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) continue;
        const double exact = static_cast<double>(members[c].size()) * static_cast<double>(max_rows) / static_cast<double>(n);
        take[c] = std::max<std::size_t>(1, static_cast<std::size_t>(exact));
        take[c] = std::min(take[c], members[c].size());
        remainder[c] = exact - std::floor(exact);
        used += take[c];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; used < max_rows && i < k; ++i) {
        const auto c = order[i];
        if (take[c] < members[c].size()) {
            ++take[c];
            ++used;
        }
    }

    Rng rng(seed);
    std::vector<Eigen::Index> rows;
    for (std::size_t c = 0; c < k; ++c) {
        auto m = members[c];
        shuffle(std::span(m), rng);
        rows.insert(rows.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take[c]));
    }
    std::sort(rows.begin(), rows.end());
    return select_rows(data, rows);
}

}  // namespace liteshield
