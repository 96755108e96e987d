#include "doctest.h"

#include "liteshield/error.hpp"
#include "liteshield/featsel.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace liteshield;

namespace {

Dataset toy4() {
    Matrix x(4, 2);
    x << 0, 0,
         0, 1,
         1, 2,
         1, 3;
    return synth::make_dataset(x, {0, 1, 1, 1}, 2, Task::binary);
}

}  // namespace

TEST_SUITE("featsel") {

TEST_CASE("quantile bins give equal values equal bins") {
    Eigen::VectorXd v(6);
    v << 3, 1, 3, 2, 1, 5;
    const auto b = quantile_bins(v, 32);
    CHECK(b[0] == b[2]);
    CHECK(b[1] == b[4]);
    CHECK(b[1] < b[3]);
    CHECK(b[3] < b[0]);
    CHECK(b[0] < b[5]);
    Eigen::VectorXd many = Eigen::VectorXd::LinSpaced(1000, 0, 1);
    const auto mb = quantile_bins(many, 32);
    CHECK(std::set<int>(mb.begin(), mb.end()).size() == 32);
}

TEST_CASE("feature identical to a balanced binary label carries one bit") {
    Matrix x(1000, 1);
    std::vector<int> y;
    for (int i = 0; i < 1000; ++i) {
        y.push_back(i % 2);
        x(i, 0) = i % 2;
    }
    const auto s = mutual_information(synth::make_dataset(x, y, 2, Task::binary));
    CHECK(std::abs(s.scores[0] - 1.0) < 1e-9);
}

TEST_CASE("shuffled feature carries almost no information") {
    const int n = 10000;
    std::mt19937_64 rng(11);
    Matrix x(n, 1);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % 2;
    std::vector<int> perm(y);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int i = 0; i < n; ++i) x(i, 0) = perm[static_cast<std::size_t>(i)] + noise(rng);
    const auto s = mutual_information(synth::make_dataset(x, y, 2, Task::binary));
    CHECK(s.scores[0] <= 0.05);
    CHECK(s.scores[0] >= 0.0);
}

TEST_CASE("four-row toy set matches the hand-enumerated joint histogram") {
    const auto s = mutual_information(toy4());
    // feature 0: x in {0,1}; joint (x,y) counts: (0,0)=1 (0,1)=1 (1,0)=0 (1,1)=2
    CHECK(std::abs(s.scores[0] - oracle::mi_from_joint({{1, 1}, {0, 2}})) < 1e-9);
    CHECK(std::abs(s.scores[0] - 0.31127812445913283) < 1e-12);
    // feature 1: four distinct values, one row per bin
    CHECK(std::abs(s.scores[1] - oracle::mi_from_joint({{1, 0}, {0, 1}, {0, 1}, {0, 1}})) < 1e-9);
}

TEST_CASE("discrete MI agrees with the entropy-difference oracle on random tables") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int kx = 2 + static_cast<int>(rng() % 6), ky = 2 + static_cast<int>(rng() % 4);
        std::vector<int> f, l;
        std::vector<std::vector<double>> joint(static_cast<std::size_t>(kx), std::vector<double>(static_cast<std::size_t>(ky), 0));
        for (int i = 0; i < 200; ++i) {
            const int a = static_cast<int>(rng() % static_cast<unsigned>(kx));
            const int b = static_cast<int>(rng() % static_cast<unsigned>(ky));
            f.push_back(a);
            l.push_back(b);
            ++joint[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        CHECK(std::abs(discrete_mutual_information(f, l) - oracle::mi_from_joint(joint)) < 1e-9);
    }
}

TEST_CASE("MI is invariant under class relabelling and never negative") {
    const auto d = synth::blobs(600, 5, 3, 2, 1.0, 21);
    auto relabelled = d;
    for (Eigen::Index i = 0; i < d.rows(); ++i) relabelled.labels(i) = (d.labels(i) + 1) % 3;
    const auto a = mutual_information(d);
    const auto b = mutual_information(relabelled);
    for (std::size_t j = 0; j < a.scores.size(); ++j) {
        CHECK(a.scores[j] >= 0.0);
        CHECK(std::abs(a.scores[j] - b.scores[j]) < 1e-12);
    }
}

TEST_CASE("a duplicated feature scores like the original") {
    const auto d = synth::blobs(500, 3, 2, 1, 1.0, 4);
    auto dup = d;
    dup.features.conservativeResize(Eigen::NoChange, 4);
    dup.features.col(3) = d.features.col(0);
    dup.feature_names.push_back("copy");
    const auto s = mutual_information(dup);
    CHECK(std::abs(s.scores[3] - s.scores[0]) < 1e-12);
}

TEST_CASE("MI on an empty dataset fails") {
    CHECK_THROWS_AS(mutual_information(synth::make_dataset(Matrix(0, 2), {}, 2)), DataError);
}

TEST_CASE("rank_by_mi orders by score with index tie-break") {
    CHECK(rank_by_mi(MiScores{{0.1, 0.9, 0.5}}, 2).indices == std::vector<int>{1, 2});
    CHECK(rank_by_mi(MiScores{{0.3, 0.3, 0.3, 0.3}}, 3).indices == std::vector<int>{0, 1, 2});
    auto all = rank_by_mi(MiScores{{0.2, 0.7, 0.1, 0.4}}, 4).indices;
    CHECK(all == std::vector<int>{1, 3, 0, 2});
    CHECK_THROWS(rank_by_mi(MiScores{{0.1, 0.2}}, 3));
    CHECK_THROWS(rank_by_mi(MiScores{{0.1, 0.2}}, 0));
}

TEST_CASE("rfecv keeps the planted informative features") {
    const std::vector<int> informative{3, 8, 14, 21, 27};
    const auto d = synth::planted(600, 25, informative, 5);
    FeatureSubset start;
    for (int j = 0; j < 30; ++j) start.indices.push_back(j);
    RfecvOptions opt;
    opt.folds = 3;
    opt.seed = 17;
    opt.wrapper.trees = 10;
    opt.force_size = 8;
    const auto out = rfecv(d, start, opt);
    CHECK(out.indices.size() == 8);
    for (int j : informative) CHECK(std::find(out.indices.begin(), out.indices.end(), j) != out.indices.end());
    REQUIRE(out.cv_curve.size() == 30);
    for (std::size_t i = 0; i < out.cv_curve.size(); ++i) CHECK(out.cv_curve[i].first == 30 - static_cast<int>(i));
}

TEST_CASE("rfecv force_size edge cases and determinism") {
    const auto d = synth::blobs(120, 6, 2, 2, 2.0, 8);
    FeatureSubset start;
    start.indices = {5, 1, 3, 0};
    RfecvOptions opt;
    opt.folds = 2;
    opt.seed = 1;
    opt.wrapper.trees = 5;
    opt.force_size = 4;
    const auto same = rfecv(d, start, opt);
    CHECK(std::set<int>(same.indices.begin(), same.indices.end()) == std::set<int>{0, 1, 3, 5});
    opt.force_size = 2;
    const auto a = rfecv(d, start, opt);
    const auto b = rfecv(d, start, opt);
    CHECK(a.indices.size() == 2);
    CHECK(a.indices == b.indices);
    CHECK(a.cv_curve == b.cv_curve);
    for (int j : a.indices) CHECK(std::find(start.indices.begin(), start.indices.end(), j) != start.indices.end());
    opt.force_size = 5;
    CHECK_THROWS(rfecv(d, start, opt));
    opt.force_size.reset();
    const auto best = rfecv(d, start, opt);
    CHECK(!best.indices.empty());
}

TEST_CASE("rfecv with force_size 20 on thirty features returns twenty") {
    const auto d = synth::blobs(150, 30, 2, 4, 1.0, 2);
    FeatureSubset start;
    for (int j = 0; j < 30; ++j) start.indices.push_back(j);
    RfecvOptions opt;
    opt.folds = 2;
    opt.wrapper.trees = 3;
    opt.force_size = 20;
    CHECK(rfecv(d, start, opt).indices.size() == 20);
}

TEST_CASE("rfecv refuses impossible stratification") {
    Matrix x(5, 2);
    x.setRandom();
    const auto d = synth::make_dataset(x, {0, 0, 0, 0, 1}, 2, Task::binary);
    FeatureSubset start;
    start.indices = {0, 1};
    RfecvOptions opt;
    opt.folds = 3;
    CHECK_THROWS_AS(rfecv(d, start, opt), DataError);
}

TEST_CASE("project selects and orders columns") {
    const auto d = synth::blobs(10, 3, 2, 1, 1.0, 1);
    FeatureSubset all;
    all.indices = {0, 1, 2};
    CHECK(project(d, all).features == d.features);
    FeatureSubset sub;
    sub.indices = {2, 0};
    const auto p = project(d, sub);
    CHECK(p.features.col(0) == d.features.col(2));
    CHECK(p.features.col(1) == d.features.col(0));
    CHECK(p.feature_names == std::vector<std::string>{"f2", "f0"});
    CHECK(p.labels == d.labels);
    sub.indices = {3};
    CHECK_THROWS(project(d, sub));
}

TEST_CASE("feature subset sidecar round trip") {
    FeatureSubset s;
    s.indices = {4, 1};
    s.mi_scores = {0.75, 0.125};
    s.cv_curve = {{3, 0.5}, {2, 0.625}, {1, 0.25}};
    s.forced_size = 2;
    const std::vector<std::string> names{"a", "b", "c", "d", "e"};
    std::stringstream io;
    write_feature_subset(io, s, names);
    std::vector<std::string> read_names;
    const auto back = read_feature_subset(io, &read_names);
    CHECK(back.indices == s.indices);
    CHECK(back.mi_scores == s.mi_scores);
    CHECK(back.cv_curve == s.cv_curve);
    CHECK(back.forced_size == s.forced_size);
    CHECK(read_names == std::vector<std::string>{"e", "b"});
}

}
