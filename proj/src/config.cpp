#include "liteshield/config.hpp"

#include "liteshield/error.hpp"
#include "liteshield/random.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace liteshield {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    while (true) {
        const auto pos = s.find(sep);
        const auto piece = trim(s.substr(0, pos));
        if (!piece.empty()) out.emplace_back(piece);
        if (pos == std::string_view::npos) break;
        s = s.substr(pos + 1);
    }
    return out;
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const std::vector<std::pair<std::string, std::string>>& defaults() {
    static const std::vector<std::pair<std::string, std::string>> table = [] {
        const ExperimentConfig config;
        std::vector<std::pair<std::string, std::string>> rows;
        auto linear = [&](const std::string& prefix, const LinearParams& p) {
            rows.emplace_back(prefix + ".learning_rate", shortest(p.learning_rate));
            rows.emplace_back(prefix + ".epochs", std::to_string(p.epochs));
            rows.emplace_back(prefix + ".batch_size", std::to_string(p.batch_size));
            rows.emplace_back(prefix + ".l2", shortest(p.l2));
        };
        rows = {
            {"data.train", ""},
            {"data.test", ""},
            {"data.schema", ""},
            {"data.task", "binary"},
            {"data.seed", "42"},
            {"featsel.bins", std::to_string(config.featsel.bins)},
            {"featsel.keep", std::to_string(config.featsel.keep)},
            {"featsel.folds", std::to_string(config.featsel.folds)},
            {"featsel.force_size", std::to_string(*config.featsel.force_size)},
            {"featsel.wrapper_trees", std::to_string(config.featsel.wrapper_trees)},
            {"featsel.wrapper_depth", std::to_string(config.featsel.wrapper_depth)},
            {"featsel.max_rows", std::to_string(config.featsel.max_rows)},
            {"models.families", "dt,rf,knn,lr,nb,svm"},
            {"models.knn_eval_rows", std::to_string(config.knn_eval_rows)},
            {"models.probe_rows", std::to_string(config.probe_rows)},
            {"models.profile_repeats", std::to_string(config.profile_repeats)},
            {"models.dt.max_depth", std::to_string(config.dt.max_depth)},
            {"models.dt.min_samples_split", std::to_string(config.dt.min_samples_split)},
            {"models.rf.trees", std::to_string(config.rf.trees)},
            {"models.rf.max_depth", std::to_string(config.rf.max_depth)},
            {"models.rf.min_samples_split", std::to_string(config.rf.min_samples_split)},
            {"models.rf.max_features", "sqrt"},
            {"models.rf.bootstrap", "true"},
            {"models.knn.k", std::to_string(config.knn.k)},
            {"models.nb.var_smoothing", shortest(config.nb.var_smoothing)},
            {"ablation.variants", "full;Worms;Shellcode;Worms+Shellcode"},
            {"output.dir", "out"},
        };
        linear("models.lr", config.lr);
        linear("models.svm", config.svm);
        std::sort(rows.begin(), rows.end());
        return rows;
    }();
    return table;
}

template <typename T>
T parse_integer(const ConfigStore& store, const std::string& key, T min_value) {
    const std::string& text = store.get(key);
    T value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw UsageError(key + ": expected an integer, got '" + text + "'");
    }
    if (value < min_value) throw UsageError(key + ": must be >= " + std::to_string(min_value));
    return value;
}

double parse_real(const ConfigStore& store, const std::string& key) {
    const std::string& text = store.get(key);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw UsageError(key + ": expected a number, got '" + text + "'");
    }
    return value;
}

bool parse_bool(const ConfigStore& store, const std::string& key) {
    const std::string& text = store.get(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw UsageError(key + ": expected true or false, got '" + text + "'");
}

LinearParams parse_linear(const ConfigStore& store, const std::string& prefix) {
    LinearParams p;
    p.learning_rate = parse_real(store, prefix + ".learning_rate");
    p.epochs = parse_integer<int>(store, prefix + ".epochs", 1);
    p.batch_size = parse_integer<int>(store, prefix + ".batch_size", 1);
    p.l2 = parse_real(store, prefix + ".l2");
    return p;
}

std::vector<AblationVariant> parse_variants(const std::string& text) {
    std::vector<AblationVariant> out;
    for (const auto& item : split(text, ';')) {
        std::string lower = item;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "full") {
            out.push_back({"Full", {}});
            continue;
        }
        AblationVariant v;
        v.dropped = split(item, '+');
        for (const auto& c : v.dropped) v.name += "-" + c;
        out.push_back(std::move(v));
    }
    if (out.empty()) throw UsageError("ablation.variants: expected at least one variant");
    return out;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

ConfigStore::ConfigStore() {
    for (const auto& [key, value] : defaults()) values_.emplace(key, value);
}

const std::vector<std::string>& ConfigStore::known_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& [key, value] : defaults()) out.push_back(key);
        return out;
    }();
    return keys;
}

void ConfigStore::set(const std::string& key, const std::string& value) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    it->second = value;
}

void ConfigStore::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw UsageError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

const std::string& ConfigStore::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
    return it->second;
}

ConfigStore ConfigStore::parse(std::string_view text) {
    ConfigStore store;
    std::string section;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError(where + "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw UsageError(where + "expected key = value");
        const auto key = std::string(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        try {
            store.set(section.empty() ? key : section + "." + key, value);
        } catch (const UsageError& e) {
            throw UsageError(where + e.what());
        }
    }
    return store;
}

ConfigStore ConfigStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

ExperimentConfig to_experiment_config(const ConfigStore& store) {
    ExperimentConfig c;
    c.train = store.get("data.train");
    c.test = store.get("data.test");
    if (c.train.empty() || c.test.empty()) throw UsageError("data.train and data.test are required");
    c.schema = store.get("data.schema");
    c.task = parse_task(store.get("data.task"));
    c.seed = parse_integer<std::uint64_t>(store, "data.seed", 0);

    c.featsel.bins = parse_integer<int>(store, "featsel.bins", 2);
    c.featsel.keep = parse_integer<int>(store, "featsel.keep", 1);
    c.featsel.folds = parse_integer<int>(store, "featsel.folds", 2);
    const auto& force = store.get("featsel.force_size");
    if (force == "none" || force.empty()) {
        c.featsel.force_size.reset();
    } else {
        c.featsel.force_size = parse_integer<int>(store, "featsel.force_size", 1);
    }
    c.featsel.wrapper_trees = parse_integer<int>(store, "featsel.wrapper_trees", 1);
    c.featsel.wrapper_depth = parse_integer<int>(store, "featsel.wrapper_depth", 1);
    c.featsel.max_rows = parse_integer<std::size_t>(store, "featsel.max_rows", 0);

    c.families.clear();
    for (const auto& name : split(store.get("models.families"), ',')) {
        const Family f = parse_family(name);
        if (std::find(c.families.begin(), c.families.end(), f) != c.families.end()) {
            throw UsageError("models.families: '" + name + "' listed twice");
        }
        c.families.push_back(f);
    }
    if (c.families.empty()) throw UsageError("models.families: expected at least one family");
    c.knn_eval_rows = parse_integer<std::size_t>(store, "models.knn_eval_rows", 0);
    c.probe_rows = parse_integer<std::size_t>(store, "models.probe_rows", 0);
    c.profile_repeats = parse_integer<int>(store, "models.profile_repeats", 3);

    c.dt.max_depth = parse_integer<int>(store, "models.dt.max_depth", 1);
    c.dt.min_samples_split = parse_integer<int>(store, "models.dt.min_samples_split", 2);
    c.rf.trees = parse_integer<int>(store, "models.rf.trees", 1);
    c.rf.max_depth = parse_integer<int>(store, "models.rf.max_depth", 1);
    c.rf.min_samples_split = parse_integer<int>(store, "models.rf.min_samples_split", 2);
    const auto& bag = store.get("models.rf.max_features");
    if (bag == "sqrt") {
        c.rf.max_features = 0;
    } else if (bag == "all") {
        c.rf.max_features = -1;
    } else {
        c.rf.max_features = parse_integer<int>(store, "models.rf.max_features", 1);
    }
    c.rf.bootstrap = parse_bool(store, "models.rf.bootstrap");
    c.knn.k = parse_integer<int>(store, "models.knn.k", 1);
    c.lr = parse_linear(store, "models.lr");
    c.svm = parse_linear(store, "models.svm");
    c.nb.var_smoothing = parse_real(store, "models.nb.var_smoothing");

    c.ablation = parse_variants(store.get("ablation.variants"));
    c.output_dir = store.get("output.dir");
    if (c.output_dir.empty()) throw UsageError("output.dir must not be empty");

    for (Family f : c.families) (void)c.spec(f);  // range-checks hyperparameters
    return c;
}

ConfigStore to_store(const ExperimentConfig& c) {
    ConfigStore s;
    s.set("data.train", c.train.string());
    s.set("data.test", c.test.string());
    s.set("data.schema", c.schema.string());
    s.set("data.task", std::string(to_string(c.task)));
    s.set("data.seed", std::to_string(c.seed));
    s.set("featsel.bins", std::to_string(c.featsel.bins));
    s.set("featsel.keep", std::to_string(c.featsel.keep));
    s.set("featsel.folds", std::to_string(c.featsel.folds));
    s.set("featsel.force_size", c.featsel.force_size ? std::to_string(*c.featsel.force_size) : "none");
    s.set("featsel.wrapper_trees", std::to_string(c.featsel.wrapper_trees));
    s.set("featsel.wrapper_depth", std::to_string(c.featsel.wrapper_depth));
    s.set("featsel.max_rows", std::to_string(c.featsel.max_rows));
    std::string families;
    for (Family f : c.families) families += (families.empty() ? "" : ",") + std::string(to_string(f));
    s.set("models.families", families);
    s.set("models.knn_eval_rows", std::to_string(c.knn_eval_rows));
    s.set("models.probe_rows", std::to_string(c.probe_rows));
    s.set("models.profile_repeats", std::to_string(c.profile_repeats));
    s.set("models.dt.max_depth", std::to_string(c.dt.max_depth));
    s.set("models.dt.min_samples_split", std::to_string(c.dt.min_samples_split));
    s.set("models.rf.trees", std::to_string(c.rf.trees));
    s.set("models.rf.max_depth", std::to_string(c.rf.max_depth));
    s.set("models.rf.min_samples_split", std::to_string(c.rf.min_samples_split));
    s.set("models.rf.max_features",
          c.rf.max_features == 0 ? "sqrt" : (c.rf.max_features < 0 ? "all" : std::to_string(c.rf.max_features)));
    s.set("models.rf.bootstrap", c.rf.bootstrap ? "true" : "false");
    s.set("models.knn.k", std::to_string(c.knn.k));
    for (const auto& [prefix, p] : {std::pair{"models.lr", c.lr}, std::pair{"models.svm", c.svm}}) {
        s.set(std::string(prefix) + ".learning_rate", shortest(p.learning_rate));
        s.set(std::string(prefix) + ".epochs", std::to_string(p.epochs));
        s.set(std::string(prefix) + ".batch_size", std::to_string(p.batch_size));
        s.set(std::string(prefix) + ".l2", shortest(p.l2));
    }
    s.set("models.nb.var_smoothing", shortest(c.nb.var_smoothing));
    std::string variants;
    for (const auto& v : c.ablation) {
        std::string item;
        for (const auto& d : v.dropped) item += (item.empty() ? "" : "+") + d;
        variants += (variants.empty() ? "" : ";") + (item.empty() ? std::string("full") : item);
    }
    s.set("ablation.variants", variants);
    s.set("output.dir", c.output_dir.string());
    return s;
}

ModelSpec ExperimentConfig::spec(Family family) const {
    const std::uint64_t model_seed = derive_seed(seed, 0x6d6f64656c00ULL + static_cast<std::uint64_t>(family));
    switch (family) {
        case Family::dt: return ModelSpec(family, dt, model_seed);
        case Family::rf: return ModelSpec(family, rf, model_seed);
        case Family::knn: return ModelSpec(family, knn, model_seed);
        case Family::lr: return ModelSpec(family, lr, model_seed);
        case Family::svm: return ModelSpec(family, svm, model_seed);
        case Family::nb: return ModelSpec(family, nb, model_seed);
    }
    throw UsageError("unknown family");
}

std::string ExperimentConfig::canonical() const {
    std::string out;
    const ConfigStore store = to_store(*this);
    for (const auto& [key, value] : store.values()) out += key + " = " + value + "\n";
    return out;
}

std::string ExperimentConfig::fingerprint() const {
    char buf[17];
    const auto res = std::to_chars(buf, buf + 16, fnv1a(canonical()), 16);
    std::string hex(buf, res.ptr);
    return std::string(16 - hex.size(), '0') + hex;
}

std::string variant_slug(const AblationVariant& variant) {
    if (variant.dropped.empty()) return "full";
    std::string slug = "minus";
    for (const auto& d : variant.dropped) {
        slug += "_";
        for (char ch : d) slug += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
    }
    return slug;
}

}  // namespace liteshield
