#include "doctest.h"

#include "liteshield/error.hpp"
#include "liteshield/serialize.hpp"
#include "support/synthetic.hpp"

#include <filesystem>
#include <random>

using namespace liteshield;

namespace {

ModelSpec small_spec(Family f) {
    return f == Family::rf ? ModelSpec(Family::rf, ForestParams{10}, 7) : ModelSpec::defaults(f, 7);
}

FormatError::Kind kind_of(std::span<const std::uint8_t> bytes) {
    try {
        deserialize(bytes);
    } catch (const FormatError& e) {
        return e.kind();
    }
    FAIL("expected FormatError");
    return FormatError::Kind::corrupt;
}

}  // namespace

TEST_SUITE("serialize") {

TEST_CASE("round trip preserves predictions for every family") {
    const auto d = synth::blobs(300, 6, 3, 3, 1.0, 5);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 3.0);
    const Matrix q = Matrix::NullaryExpr(1000, 6, [&] { return n(rng); });
    for (Family f : all_families) {
        CAPTURE(to_string(f));
        const auto m = train(small_spec(f), d);
        const auto bytes = serialize(m);
        const auto back = deserialize(bytes);
        CHECK(back.family() == f);
        CHECK(predict(back, q) == predict(m, q));
        CHECK(serialize(back) == bytes);
        const auto h = read_header(bytes);
        CHECK(h.version == model_format_version);
        CHECK(h.n_features == 6);
        CHECK(h.n_classes == 3);
    }
}

TEST_CASE("identical training gives identical bytes") {
    const auto d = synth::blobs(200, 4, 2, 2, 1.0, 6);
    for (Family f : all_families) CHECK(serialize(train(small_spec(f), d)) == serialize(train(small_spec(f), d)));
}

TEST_CASE("header starts with the magic and little-endian version") {
    const auto bytes = serialize(train(small_spec(Family::nb), synth::blobs(50, 2, 2, 1, 1.0, 1)));
    REQUIRE(bytes.size() > 15);
    CHECK(bytes[0] == 'L');
    CHECK(bytes[1] == 'S');
    CHECK(bytes[2] == 'H');
    CHECK(bytes[3] == 'D');
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == static_cast<std::uint8_t>(Family::nb));
}

TEST_CASE("decoding failures are distinguished") {
    const auto good = serialize(train(small_spec(Family::dt), synth::blobs(60, 3, 2, 1, 1.0, 2)));
    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(kind_of(bad_magic) == FormatError::Kind::bad_magic);
    auto version = good;
    version[4] = 2;
    CHECK(kind_of(version) == FormatError::Kind::unsupported_version);
    const std::vector<std::uint8_t> cut(good.begin(), good.end() - 1);
    CHECK(kind_of(cut) == FormatError::Kind::truncated);
    const std::vector<std::uint8_t> tiny(good.begin(), good.begin() + 3);
    CHECK(kind_of(tiny) == FormatError::Kind::truncated);
    auto extra = good;
    extra.push_back(0);
    CHECK(kind_of(extra) == FormatError::Kind::corrupt);
    auto family = good;
    family[6] = 9;
    CHECK(kind_of(family) == FormatError::Kind::corrupt);
}

TEST_CASE("every one-byte truncation is rejected for every family") {
    const auto d = synth::blobs(40, 3, 2, 2, 1.0, 3);
    for (Family f : all_families) {
        const auto bytes = serialize(train(small_spec(f), d));
        for (std::size_t n = 0; n < bytes.size(); n += 1 + bytes.size() / 64) {
            CHECK_THROWS_AS(deserialize(std::span<const std::uint8_t>(bytes.data(), n)), FormatError);
        }
    }
}

TEST_CASE("binary linear svm on twenty features stays under a kilobyte") {
    const auto d = synth::blobs(200, 20, 2, 5, 1.0, 4);
    const auto bytes = serialize(train(ModelSpec::defaults(Family::svm), d));
    CHECK(bytes.size() < 1024);
    CHECK(bytes.size() >= 2 * 21 * 4);
}

TEST_CASE("knn size grows linearly with training rows") {
    const double a = static_cast<double>(serialize(train(small_spec(Family::knn), synth::blobs(500, 5, 2, 2, 1.0, 1))).size());
    const double b = static_cast<double>(serialize(train(small_spec(Family::knn), synth::blobs(1000, 5, 2, 2, 1.0, 1))).size());
    CHECK(b / a == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("model files round trip through disk") {
    const auto path = std::filesystem::temp_directory_path() / "liteshield_model_test.lsm";
    const auto m = train(small_spec(Family::rf), synth::blobs(80, 3, 2, 2, 1.0, 1));
    save_model(path, m);
    CHECK(read_file_bytes(path) == serialize(m));
    CHECK(serialize(load_model(path)) == serialize(m));
    std::filesystem::remove(path);
    CHECK_THROWS(load_model(path));
}

}
