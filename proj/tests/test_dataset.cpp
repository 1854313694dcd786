#include "doctest.h"

#include <cmath>
#include <set>

#include "hummit/binio.hpp"
#include "hummit/dataset.hpp"
#include "hummit/error.hpp"
#include "hummit/rng.hpp"
#include "testsupport.hpp"

using namespace hummit;

namespace {

// catalog + contours for n synthetic queries over `songs` classes
struct Fixture {
    corpus::Catalog catalog;
    std::vector<dataset::QueryContours> contours;
};

Fixture make_fixture(int songs, int queries, double seconds = 8.0, double fps = 100.0) {
    Fixture fx;
    Rng rng(5);
    for (int s = 0; s < songs; ++s)
        fx.catalog.songs.push_back({"song" + std::to_string(s), "song" + std::to_string(s), {}});
    for (int q = 0; q < queries; ++q) {
        corpus::QueryEntry e;
        e.query_id = "q" + std::to_string(q);
        e.song_id = "song" + std::to_string(q % songs);
        fx.catalog.queries.push_back(e);
        dataset::QueryContours qc;
        qc.query_id = e.query_id;
        qc.song_id = e.song_id;
        qc.frame_rate = fps;
        const auto n = static_cast<std::size_t>(seconds * fps);
        for (std::size_t i = 0; i < n; ++i) qc.raw.push_back(rng.uniform(50.0, 80.0));
        qc.denoised = qc.raw;
        for (auto& v : qc.denoised) v = std::round(v);
        fx.contours.push_back(std::move(qc));
    }
    return fx;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("frame_query window arithmetic") {
    dataset::DatasetConfig cfg; // 5 s window, 2 s hop, 100 fps
    SUBCASE("8 s contour gives two windows") {
        std::vector<double> v(800, 1.0);
        auto frames = dataset::frame_query(v, cfg);
        REQUIRE(frames.size() == 2);
        CHECK(frames[0].size() == 500);
        CHECK(frames[1].size() == 500);
    }
    SUBCASE("exact fit gives one window") {
        std::vector<double> v(500, 1.0);
        CHECK(dataset::frame_query(v, cfg).size() == 1);
    }
    SUBCASE("short contour pads with the last value") {
        std::vector<double> v(300, 2.0);
        v.back() = 7.0;
        auto frames = dataset::frame_query(v, cfg);
        REQUIRE(frames.size() == 1);
        REQUIRE(frames[0].size() == 500);
        CHECK(frames[0][299] == 7.0);
        for (std::size_t i = 300; i < 500; ++i) CHECK(frames[0][i] == 7.0);
    }
    SUBCASE("counts match floor((len-W)/H)+1") {
        Rng rng(9);
        for (int trial = 0; trial < 50; ++trial) {
            const auto len = 500 + rng.below(2000);
            std::vector<double> v(len, 0.0);
            auto frames = dataset::frame_query(v, cfg);
            CHECK(frames.size() == (len - 500) / 200 + 1);
        }
    }
    SUBCASE("empty contour rejected") {
        CHECK_THROWS_WITH_AS(dataset::frame_query(std::vector<double>{}, cfg),
                             doctest::Contains("EmptyContour"), Error);
    }
}

TEST_CASE("normalize_frame") {
    auto out = dataset::normalize_frame(std::vector<double>{60, 62, 64});
    REQUIRE(out.size() == 3);
    CHECK(out[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(2.0).epsilon(1e-12));

    SUBCASE("transposition invariance") {
        Rng rng(3);
        std::vector<double> x(100), y(100);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(50.0, 80.0);
            y[i] = x[i] + 7.0;
        }
        auto nx = dataset::normalize_frame(x);
        auto ny = dataset::normalize_frame(y);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::fabs(nx[i] - ny[i]) <= 1e-9);
    }
    SUBCASE("constant frame zeroes out, mean below 1e-9") {
        auto z = dataset::normalize_frame(std::vector<double>(64, 61.7));
        double mean = 0.0;
        for (double v : z) mean += v;
        CHECK(std::fabs(mean / 64.0) <= 1e-9);
        for (double v : z) CHECK(std::fabs(v) <= 1e-9);
    }
}

TEST_CASE("build_dataset split and augmentation") {
    auto fx = make_fixture(4, 100);
    dataset::DatasetConfig cfg;
    cfg.seed = 11;

    auto plain = dataset::build_dataset(fx.catalog, fx.contours, cfg);
    CHECK(plain.n_classes == 4);
    CHECK(plain.frame_len == 500);

    SUBCASE("25 validation queries out of 100") {
        std::set<std::string> val_queries, train_queries;
        for (const auto& f : plain.frames)
            (f.split == dataset::Split::validation ? val_queries : train_queries)
                .insert(f.source_query);
        CHECK(val_queries.size() == 25);
        CHECK(train_queries.size() == 75);
        // no query on both sides
        for (const auto& q : val_queries) CHECK(train_queries.count(q) == 0);
    }

    SUBCASE("augmentation doubles training frames only") {
        auto cfg_aug = cfg;
        cfg_aug.augment_with_denoised = true;
        auto aug = dataset::build_dataset(fx.catalog, fx.contours, cfg_aug);
        std::size_t train_plain = 0, val_plain = 0, train_aug = 0, val_aug = 0, denoised_val = 0;
        for (const auto& f : plain.frames)
            (f.split == dataset::Split::train ? train_plain : val_plain) += 1;
        for (const auto& f : aug.frames) {
            (f.split == dataset::Split::train ? train_aug : val_aug) += 1;
            if (f.split == dataset::Split::validation && f.variant == dataset::Variant::denoised)
                ++denoised_val;
        }
        CHECK(train_aug == 2 * train_plain);
        CHECK(val_aug == val_plain);
        CHECK(denoised_val == 0);
        // augmentation does not move any query across the split
        std::set<std::pair<std::string, int>> plain_sides, aug_sides;
        for (const auto& f : plain.frames)
            plain_sides.insert({f.source_query, static_cast<int>(f.split)});
        for (const auto& f : aug.frames)
            aug_sides.insert({f.source_query, static_cast<int>(f.split)});
        CHECK(plain_sides == aug_sides);
    }

    SUBCASE("labels round-trip to catalog songs") {
        for (const auto& f : plain.frames) {
            REQUIRE(f.label < plain.n_classes);
            CHECK(plain.class_names[f.label].rfind("song", 0) == 0);
        }
    }

    SUBCASE("same seed is byte-identical, different seed is not") {
        testsupport::TempDir dir;
        auto again = dataset::build_dataset(fx.catalog, fx.contours, cfg);
        dataset::save_dataset(dir.path / "a.bin", plain);
        dataset::save_dataset(dir.path / "b.bin", again);
        auto a = binio::read_file(dir.path / "a.bin");
        auto b = binio::read_file(dir.path / "b.bin");
        CHECK(a == b);

        auto cfg2 = cfg;
        cfg2.seed = 12;
        auto other = dataset::build_dataset(fx.catalog, fx.contours, cfg2);
        dataset::save_dataset(dir.path / "c.bin", other);
        CHECK(binio::read_file(dir.path / "c.bin") != a);
    }
}

TEST_CASE("build_dataset error paths") {
    auto fx = make_fixture(4, 8);
    dataset::DatasetConfig cfg;
    SUBCASE("missing contour") {
        fx.contours.pop_back();
        CHECK_THROWS_WITH_AS(dataset::build_dataset(fx.catalog, fx.contours, cfg),
                             doctest::Contains("MissingContour"), Error);
    }
    SUBCASE("missing denoised signal when augmenting") {
        cfg.augment_with_denoised = true;
        for (auto& qc : fx.contours) qc.denoised.clear();
        // only training queries need the denoised twin, so this must throw
        CHECK_THROWS_WITH_AS(dataset::build_dataset(fx.catalog, fx.contours, cfg),
                             doctest::Contains("MissingContour"), Error);
    }
    SUBCASE("single class") {
        auto one = make_fixture(1, 8);
        CHECK_THROWS_WITH_AS(dataset::build_dataset(one.catalog, one.contours, cfg),
                             doctest::Contains("SingleClassDataset"), Error);
    }
}

TEST_CASE("cache round trip") {
    auto fx = make_fixture(3, 12);
    dataset::DatasetConfig cfg;
    cfg.seed = 2;
    cfg.augment_with_denoised = true;
    auto ds = dataset::build_dataset(fx.catalog, fx.contours, cfg);

    testsupport::TempDir dir;
    dataset::save_dataset(dir.path / "ds.bin", ds);
    auto back = dataset::load_dataset(dir.path / "ds.bin");
    CHECK(back.n_classes == ds.n_classes);
    CHECK(back.class_names == ds.class_names);
    CHECK(back.frame_len == ds.frame_len);
    REQUIRE(back.frames.size() == ds.frames.size());
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        CHECK(back.frames[i].label == ds.frames[i].label);
        CHECK(back.frames[i].variant == ds.frames[i].variant);
        CHECK(back.frames[i].split == ds.frames[i].split);
        CHECK(back.frames[i].values == ds.frames[i].values);
    }

    SUBCASE("corrupt magic rejected") {
        auto bytes = binio::read_file(dir.path / "ds.bin");
        bytes[0] = 'X';
        binio::write_file_atomic(dir.path / "bad.bin", bytes);
        CHECK_THROWS_WITH_AS(dataset::load_dataset(dir.path / "bad.bin"),
                             doctest::Contains("MalformedDataset"), Error);
    }
    SUBCASE("truncation rejected") {
        auto bytes = binio::read_file(dir.path / "ds.bin");
        bytes.resize(bytes.size() / 2);
        binio::write_file_atomic(dir.path / "cut.bin", bytes);
        CHECK_THROWS_WITH_AS(dataset::load_dataset(dir.path / "cut.bin"),
                             doctest::Contains("MalformedDataset"), Error);
    }
}

TEST_CASE("resample_steps") {
    std::vector<double> v{1, 1, 2, 2, 3, 3, 4, 4};
    auto half = dataset::resample_steps(v, 100.0, 50.0);
    CHECK(half == std::vector<double>{1, 2, 3, 4});
    auto same = dataset::resample_steps(v, 100.0, 100.0);
    CHECK(same == v);
}

} // TEST_SUITE
