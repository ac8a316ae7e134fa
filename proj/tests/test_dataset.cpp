#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "camel/dataset.hpp"
#include "camel/error.hpp"

using namespace camel;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/camel_test_") + name;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("csv loads a simple matrix") {
    const auto p = temp_path("simple.csv");
    write_file(p, "1,2\n3,4\n5,6\n");
    const Matrix m = load_csv(p);
    CHECK(m.rows == 3);
    CHECK(m.cols == 2);
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(2, 1) == 6.0);
}

TEST_CASE("csv header flag skips the first line") {
    const auto p = temp_path("header.csv");
    write_file(p, "a,b\n1,2\n3,4\n");
    const Matrix m = load_csv(p, true);
    CHECK(m.rows == 2);
    CHECK_THROWS_AS(load_csv(p, false), ParseError);
}

TEST_CASE("csv rejects NaN naming the row") {
    const auto p = temp_path("nan.csv");
    write_file(p, "1,2\n3,NaN\n");
    try {
        load_csv(p);
        FAIL("expected error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("csv rejects ragged rows") {
    const auto p = temp_path("ragged.csv");
    write_file(p, "1,2\n3\n");
    CHECK_THROWS_AS(load_csv(p), ParseError);
}

TEST_CASE("binary f32 round trip with header") {
    Matrix m(4, 2);
    for (std::size_t i = 0; i < 8; ++i) m.data[i] = double(i) * 0.5;
    const auto p = temp_path("round.cmb");
    save_binary_f32(p, m);
    const Matrix r = load_binary_f32(p);
    REQUIRE(r.rows == 4);
    REQUIRE(r.cols == 2);
    for (std::size_t i = 0; i < 8; ++i) CHECK(r.data[i] == doctest::Approx(m.data[i]));
}

TEST_CASE("binary loader rejects foreign files") {
    const auto p = temp_path("junk.bin");
    write_file(p, "not a matrix at all");
    CHECK_THROWS_AS(load_binary_f32(p), ParseError);
}

TEST_CASE("preprocess centers and scales to unit matrix-wide std") {
    Matrix x(2, 1);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 2.0;
    auto [y, t] = preprocess(x);
    CHECK(y.at(0, 0) == doctest::Approx(-1.0));
    CHECK(y.at(1, 0) == doctest::Approx(1.0));
    CHECK(t.scale == doctest::Approx(1.0));
}

TEST_CASE("preprocess is idempotent") {
    Matrix x(5, 3);
    std::uint64_t s = 9;
    for (auto& v : x.data) v = double((s = s * 6364136223846793005ull + 1) >> 40) / 1e6;
    auto [y1, t1] = preprocess(x);
    auto [y2, t2] = preprocess(y1);
    for (std::size_t i = 0; i < y1.data.size(); ++i)
        CHECK(std::abs(y1.data[i] - y2.data[i]) < 1e-10);
}

TEST_CASE("preprocess rejects constant matrices") {
    Matrix x(2, 2, 1.0);
    CHECK_THROWS_AS(preprocess(x), DataError);
}

TEST_CASE("transform inversion restores raw coordinates") {
    Matrix x(6, 2);
    std::uint64_t s = 3;
    for (auto& v : x.data) v = double((s = s * 2862933555777941757ull + 3) >> 40) / 1e5;
    auto [y, t] = preprocess(x);
    const Matrix back = invert_transform(y, t);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        CHECK(back.data[i] == doctest::Approx(x.data[i]).epsilon(1e-12));
}

TEST_CASE("one-hot encoding of two classes") {
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    lv.raw = {0, 1};
    lv.class_names = {"a", "b"};
    Matrix x(2, 2);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 1.0;
    const auto enc = encode_labels(lv, x, 0.3, 100, 7);
    REQUIRE(enc.matrix.cols == 2);
    CHECK(enc.matrix.at(0, 0) == 1.0);
    CHECK(enc.matrix.at(0, 1) == 0.0);
    CHECK(enc.matrix.at(1, 0) == 0.0);
    CHECK(enc.matrix.at(1, 1) == 1.0);
}

TEST_CASE("label weight zero gives zero scale") {
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    lv.raw = {0, 1, 0};
    lv.class_names = {"a", "b"};
    Matrix x(3, 1);
    x.at(1, 0) = 1.0;
    x.at(2, 0) = 2.0;
    CHECK(encode_labels(lv, x, 0.0, 100, 7).scale == 0.0);
}

TEST_CASE("label scale matches the hand-evaluated ratio on a 3-point set") {
    // numeric labels [0,1,2]; features chosen so every pair distance is known:
    // feature points 0, 4, 8 on a line -> pair distances {4, 8, 4}, mean 16/3;
    // label pair distances {1, 2, 1}, mean 4/3; ratio = 4. w = 0.5 -> w/(1-w) = 1.
    LabelVector lv;
    lv.kind = LabelKind::numerical;
    lv.raw = {0, 1, 2};
    Matrix x(3, 1);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 4.0;
    x.at(2, 0) = 8.0;
    const auto enc = encode_labels(lv, x, 0.5, 5000, 11);
    CHECK(enc.scale == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("label scale is linear in w/(1-w)") {
    LabelVector lv;
    lv.kind = LabelKind::numerical;
    lv.raw = {0, 1, 2, 5};
    Matrix x(4, 2);
    std::uint64_t s = 17;
    for (auto& v : x.data) v = double((s = s * 6364136223846793005ull + 1) >> 40) / 1e6;
    // w = 1/2 -> w/(1-w) = 1 ; w = 2/3 -> w/(1-w) = 2 (same seed, same pairs)
    const auto a = encode_labels(lv, x, 0.5, 500, 3);
    const auto b = encode_labels(lv, x, 2.0 / 3.0, 500, 3);
    CHECK(b.scale == doctest::Approx(2.0 * a.scale).epsilon(1e-12));
}

TEST_CASE("w_label = 1 is rejected at the encoding layer") {
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    lv.raw = {0, 1};
    lv.class_names = {"a", "b"};
    Matrix x(2, 1);
    x.at(1, 0) = 1.0;
    CHECK_THROWS_AS(encode_labels(lv, x, 1.0, 100, 7), UsageError);
}

TEST_CASE("uniform labels yield zero scale") {
    LabelVector lv;
    lv.kind = LabelKind::categorical;
    lv.raw = {0, 0, 0};
    lv.class_names = {"a"};
    Matrix x(3, 1);
    x.at(1, 0) = 1.0;
    x.at(2, 0) = 5.0;
    CHECK(encode_labels(lv, x, 0.5, 100, 7).scale == 0.0);
}

TEST_CASE("swiss roll: determinism, label range, radii") {
    auto [x1, l1] = gen_swiss_roll(1000, 0.0, 42);
    auto [x2, l2] = gen_swiss_roll(1000, 0.0, 42);
    CHECK(x1.data == x2.data);
    CHECK(l1.raw == l2.raw);
    for (std::size_t i = 0; i < x1.rows; ++i) {
        const double r = std::hypot(x1.at(i, 0), x1.at(i, 2));
        CHECK(r >= kSwissRollTMin - 1e-9);
        CHECK(r <= kSwissRollTMax + 1e-9);
        CHECK(r == doctest::Approx(l1.raw[i]).epsilon(1e-12));  // radius equals the roll parameter
        CHECK(x1.at(i, 1) >= 0.0);
        CHECK(x1.at(i, 1) <= 21.0);
    }
}

TEST_CASE("swiss roll n=1 is a single finite point") {
    auto [x, l] = gen_swiss_roll(1, 0.0, 5);
    CHECK(x.rows == 1);
    CHECK(x.all_finite());
}

TEST_CASE("different seeds give different rolls") {
    auto [x1, l1] = gen_swiss_roll(50, 0.0, 1);
    auto [x2, l2] = gen_swiss_roll(50, 0.0, 2);
    CHECK(x1.data != x2.data);
}

TEST_CASE("idx round trip through the exporter format") {
    // build a tiny IDX image file by hand: magic 0x803, 2 images of 2x2
    const auto p = temp_path("imgs.idx");
    std::ofstream out(p, std::ios::binary);
    const unsigned char header[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const unsigned char pix[] = {0, 1, 2, 3, 10, 11, 12, 13};
    out.write(reinterpret_cast<const char*>(pix), sizeof pix);
    out.close();
    const Matrix m = load_idx_images(p);
    REQUIRE(m.rows == 2);
    REQUIRE(m.cols == 4);
    CHECK(m.at(0, 0) == 0.0);
    CHECK(m.at(1, 3) == 13.0);
}

TEST_CASE("labels csv: categorical with missing entries") {
    const auto p = temp_path("labels.csv");
    write_file(p, "cat\n\ndog\ncat\n");
    const LabelVector lv = load_labels_csv(p);
    CHECK(lv.kind == LabelKind::categorical);
    REQUIRE(lv.raw.size() == 4);
    CHECK(lv.n_labeled() == 3);
    CHECK_FALSE(lv.has(1));
    CHECK(lv.class_names.size() == 2);
}

TEST_CASE("labels csv: numeric autodetect") {
    const auto p = temp_path("numlabels.csv");
    write_file(p, "0.5\n1.5\n2.5\n");
    const LabelVector lv = load_labels_csv(p);
    CHECK(lv.kind == LabelKind::numerical);
    CHECK(lv.raw[2] == 2.5);
}
