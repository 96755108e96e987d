#include "doctest.h"

#include "liteshield/dataset.hpp"
#include "liteshield/error.hpp"
#include "support/synthetic.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace liteshield;

namespace {

Schema small_schema() {
    return parse_schema("dur,numeric\nproto,categorical\nattack_cat,multiclass_label\nlabel,binary_label\n");
}

RawTable table_from(const std::string& csv) {
    std::istringstream in(csv);
    return load_csv(in, small_schema());
}

double sample_sd(std::vector<double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("built-in schemas have the expected predictive widths") {
    const auto partition = unsw_nb15_schema();
    CHECK(partition.size() == 45);
    CHECK(predictive_count(partition) == 42);
    const auto raw = unsw_nb15_raw_schema();
    CHECK(raw.size() == 49);
    CHECK(predictive_count(raw) == 45);
    CHECK_NOTHROW(validate_schema(partition));
    CHECK_NOTHROW(validate_schema(raw));
}

TEST_CASE("schema validation rejects duplicates and missing labels") {
    CHECK_THROWS_AS(parse_schema("a,numeric\na,numeric\ny,binary_label\nz,multiclass_label\n"), DataError);
    CHECK_THROWS_AS(parse_schema("a,numeric\ny,binary_label\n"), DataError);
    CHECK_THROWS_AS(parse_schema("a,bogus\n"), DataError);
}

TEST_CASE("load_csv reads a small table") {
    const auto t = table_from("dur,proto,attack_cat,label\n0.5,tcp,Normal,0\n1.5,udp,DoS,1\n,tcp,Normal,0\n");
    REQUIRE(t.row_count() == 3);
    REQUIRE(t.column_count() == 4);
    CHECK(std::get<double>(t.cell(0, 0)) == 0.5);
    CHECK(std::get<std::string_view>(t.cell(1, 1)) == "udp");
    CHECK(std::holds_alternative<std::monostate>(t.cell(2, 0)));
}

TEST_CASE("load_csv matches header columns by name in any order") {
    const auto t = table_from("label,attack_cat,proto,dur\n1,DoS,udp,2.0\n");
    const auto dur = t.find("dur");
    REQUIRE(dur);
    CHECK(std::get<double>(t.cell(0, *dur)) == 2.0);
}

TEST_CASE("load_csv reports a missing column by name") {
    try {
        table_from("dur,attack_cat,label\n1,Normal,0\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("proto") != std::string::npos);
    }
}

TEST_CASE("load_csv reports ragged rows with the row number") {
    try {
        table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n2,udp,DoS\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
}

TEST_CASE("load_csv rejects non-numeric text in numeric columns") {
    CHECK_THROWS_AS(table_from("dur,proto,attack_cat,label\nabc,tcp,Normal,0\n"), DataError);
    CHECK_THROWS_AS(table_from("dur,proto,attack_cat,label\ninf,tcp,Normal,0\n"), DataError);
}

TEST_CASE("load_csv on a missing file raises DataError") {
    CHECK_THROWS_AS(load_csv(std::filesystem::path("/nonexistent/file.csv"), small_schema()), DataError);
}

TEST_CASE("deduplicate keeps first occurrences") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n2,udp,DoS,1\n1,tcp,Normal,0\n");
    const auto d = deduplicate(t);
    REQUIRE(d.row_count() == 2);
    CHECK(std::get<double>(d.cell(0, 0)) == 1.0);
    CHECK(std::get<double>(d.cell(1, 0)) == 2.0);
    CHECK(deduplicate(d).row_count() == 2);
}

TEST_CASE("deduplicate treats rows differing only in the label as distinct") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n1,tcp,DoS,1\n");
    CHECK(deduplicate(t).row_count() == 2);
}

TEST_CASE("deduplicate collapses a table repeated twice") {
    std::ostringstream csv;
    csv << "dur,proto,attack_cat,label\n";
    for (int rep = 0; rep < 2; ++rep) {
        for (int i = 0; i < 1000; ++i) csv << i << ',' << (i % 2 ? "udp" : "tcp") << ",Normal,0\n";
    }
    const auto t = table_from(csv.str());
    CHECK(t.row_count() == 2000);
    CHECK(deduplicate(t).row_count() == 1000);
}

TEST_CASE("deduplicate ignores dropped identifier columns") {
    const auto schema = parse_schema("id,drop\nx,numeric\nattack_cat,multiclass_label\nlabel,binary_label\n");
    std::istringstream in("id,x,attack_cat,label\n1,5,Normal,0\n2,5,Normal,0\n");
    CHECK(deduplicate(load_csv(in, schema)).row_count() == 1);
}

TEST_CASE("categorical codes follow frequency then lexical order") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,udp,Normal,0\n2,tcp,Normal,0\n3,tcp,DoS,1\n4,arp,DoS,1\n");
    const auto pre = fit_preprocessor(t);
    const auto& proto = pre.features()[1].categories;
    CHECK(proto.code_of("tcp") == 0);
    CHECK(proto.code_of("arp") == 1);
    CHECK(proto.code_of("udp") == 2);
    CHECK(proto.code_of("icmp") == proto.unseen_code());
    CHECK(proto.unseen_code() == 3);
}

TEST_CASE("two-category column gets codes 0 and 1") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n2,udp,DoS,1\n3,tcp,DoS,1\n");
    const auto pre = fit_preprocessor(t);
    CHECK(pre.features()[1].categories.code_of("tcp") == 0);
    CHECK(pre.features()[1].categories.code_of("udp") == 1);
}

TEST_CASE("median imputation and sample standard deviation") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n2,tcp,Normal,0\n3,tcp,DoS,1\n,tcp,DoS,1\n");
    const auto pre = fit_preprocessor(t);
    const auto& dur = pre.features()[0];
    CHECK(dur.fill == doctest::Approx(2.0));
    CHECK(dur.mean == doctest::Approx(2.0));
    CHECK(dur.sd == doctest::Approx(sample_sd({1, 2, 3})));
    const auto d = transform(pre, t, Task::binary);
    CHECK(d.features(3, 0) == doctest::Approx(0.0));
}

TEST_CASE("constant column transforms to zeros") {
    const auto t = table_from("dur,proto,attack_cat,label\n7,tcp,Normal,0\n7,udp,DoS,1\n7,tcp,DoS,1\n");
    const auto pre = fit_preprocessor(t);
    const auto d = transform(pre, t, Task::binary);
    for (Eigen::Index r = 0; r < d.rows(); ++r) CHECK(d.features(r, 0) == 0.0);
}

TEST_CASE("all-missing column is rejected by name") {
    try {
        fit_preprocessor(table_from("dur,proto,attack_cat,label\n,tcp,Normal,0\n,udp,DoS,1\n"));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("dur") != std::string::npos);
    }
}

TEST_CASE("fit on an empty table fails") {
    CHECK_THROWS_AS(fit_preprocessor(table_from("dur,proto,attack_cat,label\n")), DataError);
}

TEST_CASE("transformed training columns have zero mean and unit sample sd") {
    const auto dir = std::filesystem::temp_directory_path() / "liteshield_ds_test";
    std::filesystem::create_directories(dir);
    synth::write_unsw_like_csv(dir / "train.csv", 400, 7);
    const auto t = load_csv(dir / "train.csv", unsw_nb15_schema());
    const auto pre = fit_preprocessor(t);
    const auto d = transform(pre, t, Task::multiclass);
    CHECK(d.dims() == 42);
    for (Eigen::Index j = 0; j < d.dims(); ++j) {
        const auto col = d.features.col(j);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(d.rows() - 1);
        CHECK(std::abs(mean) < 1e-9);
        if (var > 0) CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
    CHECK(d.class_names.front() == "Normal");
    std::filesystem::remove_all(dir);
}

TEST_CASE("unseen category maps to the reserved code") {
    const auto train = table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n2,udp,DoS,1\n3,tcp,DoS,1\n");
    const auto test = table_from("dur,proto,attack_cat,label\n1,icmp,Normal,0\n");
    const auto pre = fit_preprocessor(train);
    const auto d = transform(pre, test, Task::binary);
    const auto& st = pre.features()[1];
    CHECK(d.features(0, 1) == doctest::Approx((st.categories.unseen_code() - st.mean) / st.sd));
}

TEST_CASE("transform with an unfitted preprocessor fails") {
    CHECK_THROWS_AS(transform(Preprocessor{}, table_from("dur,proto,attack_cat,label\n1,tcp,Normal,0\n"), Task::binary),
                    UsageError);
}

TEST_CASE("multiclass labels put Normal first and map blanks to Normal") {
    const auto t = table_from("dur,proto,attack_cat,label\n1,tcp,Worms,1\n2,udp,,0\n3,tcp,DoS,1\n");
    const auto pre = fit_preprocessor(t);
    CHECK(pre.multiclass_names() == std::vector<std::string>{"Normal", "DoS", "Worms"});
    const auto d = transform(pre, t, Task::multiclass);
    CHECK(d.labels(0) == 2);
    CHECK(d.labels(1) == 0);
    CHECK(d.labels(2) == 1);
}

TEST_CASE("balance oversamples minority classes to the majority count") {
    Matrix x(12, 1);
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) {
        x(i, 0) = i;
        y.push_back(i < 10 ? 0 : 1);
    }
    const auto d = synth::make_dataset(x, y, 2);
    const auto b = balance(d, 3);
    CHECK(b.class_counts() == std::vector<std::size_t>{10, 10});
    CHECK(b.features.topRows(12) == d.features);
    const auto again = balance(d, 3);
    CHECK(again.features == b.features);
    CHECK(again.labels == b.labels);
    for (Eigen::Index r = 12; r < b.rows(); ++r) {
        CHECK(b.labels(r) == 1);
        CHECK(b.features(r, 0) >= 10);
    }
}

TEST_CASE("balance of an already balanced set is the identity") {
    const auto d = synth::blobs(30, 2, 3, 1, 1.0, 5);
    const auto b = balance(d, 1);
    CHECK(b.features == d.features);
    CHECK(b.labels == d.labels);
}

TEST_CASE("drop_classes re-indexes the remaining classes") {
    const auto d = synth::blobs(30, 2, 3, 1, 1.0, 5);
    const auto out = drop_classes(d, {"c1"});
    CHECK(out.class_names == std::vector<std::string>{"c0", "c2"});
    CHECK(out.rows() == 20);
    CHECK(out.labels.maxCoeff() == 1);
    CHECK_THROWS_AS(drop_classes(d, {"nope"}), DataError);
}

TEST_CASE("stratified_subset keeps every class and the original order") {
    const auto d = synth::blobs(1000, 2, 4, 1, 1.0, 5);
    const auto s = stratified_subset(d, 101, 9);
    CHECK(s.rows() == 101);
    std::set<int> seen(s.labels.data(), s.labels.data() + s.labels.size());
    CHECK(seen.size() == 4);
    const auto all = stratified_subset(d, 0, 9);
    CHECK(all.rows() == 1000);
}

}
