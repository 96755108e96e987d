#include "liteshield/serialize.hpp"

#include "liteshield/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace liteshield {

namespace {

constexpr std::uint8_t kMagic[4] = {'L', 'S', 'H', 'D'};

class Writer {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        out_.insert(out_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            out_.push_back(static_cast<std::uint8_t>(v | 0x80));
            v >>= 7;
        }
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    template <typename Derived>
    void floats(const Eigen::DenseBase<Derived>& m) {
        // Row-major traversal regardless of storage order.
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) f32(m(r, c));
        }
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    std::size_t remaining() const noexcept { return in_.size() - pos_; }

    void need(std::size_t n) const {
        if (remaining() < n) throw FormatError(FormatError::Kind::truncated, "model payload truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<std::uint16_t>(in_[pos_++] << (8 * i));
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            const std::uint8_t b = u8();
            v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if (!(b & 0x80)) return v;
        }
        throw FormatError(FormatError::Kind::corrupt, "varint longer than 64 bits");
    }
    // Varint bounded by limit, for sizes and indices.
    std::size_t count(std::uint64_t limit) {
        const auto v = varint();
        if (v > limit) throw FormatError(FormatError::Kind::corrupt, "count out of range in model payload");
        return static_cast<std::size_t>(v);
    }
    MatrixF floats(Eigen::Index rows, Eigen::Index cols) {
        need(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 4);
        MatrixF m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f32();
        }
        return m;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_tree(Writer& w, const DecisionTree& tree) {
    const auto k = static_cast<std::size_t>(tree.n_classes());
    w.varint(tree.nodes().size());
    for (const auto& node : tree.nodes()) {
        w.varint(static_cast<std::uint64_t>(node.feature + 1));
        if (node.feature >= 0) {
            w.f32(node.threshold);
            w.varint(static_cast<std::uint64_t>(node.left));
            w.varint(static_cast<std::uint64_t>(node.right));
        } else {
            const auto* counts = tree.leaf_counts().data() + static_cast<std::size_t>(node.leaf) * k;
            for (std::size_t c = 0; c < k; ++c) w.varint(counts[c]);
        }
    }
}

DecisionTree read_tree(Reader& r, int n_classes, int n_features) {
    const auto k = static_cast<std::size_t>(n_classes);
    // Every node takes at least one byte.
    const std::size_t count = r.count(r.remaining());
    if (count == 0) throw FormatError(FormatError::Kind::corrupt, "tree has no nodes");
    std::vector<DecisionTree::Node> nodes(count);
    std::vector<std::uint32_t> leaf_counts;
    for (auto& node : nodes) {
        node.feature = static_cast<std::int32_t>(r.count(static_cast<std::uint64_t>(n_features))) - 1;
        if (node.feature >= 0) {
            node.threshold = r.f32();
            node.left = static_cast<std::int32_t>(r.count(count));
            node.right = static_cast<std::int32_t>(r.count(count));
        } else {
            node.leaf = static_cast<std::int32_t>(leaf_counts.size() / k);
            for (std::size_t c = 0; c < k; ++c) {
                leaf_counts.push_back(static_cast<std::uint32_t>(r.count(std::numeric_limits<std::uint32_t>::max())));
            }
        }
    }
    return DecisionTree(n_classes, std::move(nodes), std::move(leaf_counts));
}

ModelHeader parse_header(Reader& r) {
    std::uint8_t magic[4];
    const std::size_t have = std::min<std::size_t>(r.remaining(), 4);
    for (std::size_t i = 0; i < have; ++i) magic[i] = r.u8();
    if (std::memcmp(magic, kMagic, have) != 0) {
        throw FormatError(FormatError::Kind::bad_magic, "not a model file (missing LSHD magic)");
    }
    if (have < 4) throw FormatError(FormatError::Kind::truncated, "model file truncated inside the header");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError(FormatError::Kind::bad_magic, "not a model file (missing LSHD magic)");
    }
    ModelHeader h;
    h.version = r.u16();
    if (h.version != model_format_version) {
        throw FormatError(FormatError::Kind::unsupported_version,
                          "unsupported model format version " + std::to_string(h.version));
    }
    const auto family = r.u8();
    if (family > static_cast<std::uint8_t>(Family::svm)) {
        throw FormatError(FormatError::Kind::corrupt, "unknown model family tag " + std::to_string(family));
    }
    h.family = static_cast<Family>(family);
    h.n_classes = r.u32();
    h.n_features = r.u32();
    if (h.n_classes < 2 || h.n_features < 1 || h.n_classes > (1u << 20) || h.n_features > (1u << 24)) {
        throw FormatError(FormatError::Kind::corrupt, "implausible model dimensions");
    }
    return h;
}

}  // namespace

std::vector<std::uint8_t> serialize(const TrainedModel& model) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u16(model_format_version);
    w.u8(static_cast<std::uint8_t>(model.family()));
    w.u32(static_cast<std::uint32_t>(model.n_classes()));
    w.u32(static_cast<std::uint32_t>(model.n_features()));
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                write_tree(w, p);
            } else if constexpr (std::is_same_v<T, RandomForest>) {
                w.varint(p.trees().size());
                for (std::size_t t = 0; t < p.trees().size(); ++t) {
                    w.varint(p.seeds()[t]);
                    write_tree(w, p.trees()[t]);
                }
            } else if constexpr (std::is_same_v<T, NearestNeighbors>) {
                w.varint(static_cast<std::uint64_t>(p.k));
                w.varint(static_cast<std::uint64_t>(p.points.rows()));
                w.floats(p.points);
                for (Eigen::Index i = 0; i < p.labels.size(); ++i) w.varint(static_cast<std::uint64_t>(p.labels(i)));
            } else if constexpr (std::is_same_v<T, LinearOvr>) {
                w.floats(p.weights);
                w.floats(p.bias);
            } else {
                w.floats(p.prior);
                w.floats(p.mean);
                w.floats(p.variance);
            }
        },
        model.payload());
    return w.take();
}

ModelHeader read_header(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    return parse_header(r);
}

TrainedModel deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const ModelHeader h = parse_header(r);
    const auto k = static_cast<int>(h.n_classes);
    const auto d = static_cast<int>(h.n_features);
    try {
        auto finish = [&](ModelPayload payload) {
            if (r.remaining() != 0) throw FormatError(FormatError::Kind::corrupt, "trailing bytes after model payload");
            return TrainedModel(h.family, k, d, std::move(payload));
        };
        switch (h.family) {
            case Family::dt:
                return finish(read_tree(r, k, d));
            case Family::rf: {
                const std::size_t count = r.count(r.remaining());
                if (count == 0) throw FormatError(FormatError::Kind::corrupt, "forest has no trees");
                std::vector<DecisionTree> trees;
                std::vector<std::uint64_t> seeds;
                for (std::size_t t = 0; t < count; ++t) {
                    seeds.push_back(r.varint());
                    trees.push_back(read_tree(r, k, d));
                }
                return finish(RandomForest(std::move(trees), std::move(seeds)));
            }
            case Family::knn: {
                NearestNeighbors m;
                m.k = static_cast<int>(r.count(std::numeric_limits<int>::max()));
                const auto rows = static_cast<Eigen::Index>(r.count(r.remaining()));
                m.points = r.floats(rows, d);
                m.labels.resize(rows);
                for (Eigen::Index i = 0; i < rows; ++i) m.labels(i) = static_cast<int>(r.count(h.n_classes - 1));
                return finish(std::move(m));
            }
            case Family::lr:
            case Family::svm: {
                LinearOvr m;
                m.weights = r.floats(k, d);
                m.bias = r.floats(k, 1).col(0);
                return finish(std::move(m));
            }
            case Family::nb: {
                GaussianNb m;
                m.prior = r.floats(k, 1).col(0);
                m.mean = r.floats(k, d);
                m.variance = r.floats(k, d);
                return finish(std::move(m));
            }
        }
    } catch (const FormatError&) {
        throw;
    } catch (const DataError& e) {
        throw FormatError(FormatError::Kind::corrupt, std::string("corrupt model payload: ") + e.what());
    }
    throw FormatError(FormatError::Kind::corrupt, "unknown model family");
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    const auto bytes = serialize(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing model file '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize(bytes);
}

}  // namespace liteshield
