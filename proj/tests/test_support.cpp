#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "invsrc/config.hpp"
#include "invsrc/rng.hpp"
#include "invsrc/source.hpp"

using namespace invsrc;

TEST_CASE("config files parse scalars, comments, and dotted keys") {
    std::stringstream text(
        "# run setup\n"
        "example.divisions = 16\n"
        "alpha.noiseless = 1e-3  # trailing comment\n"
        "sigma = \"smooth\"\n"
        "example2.morozov = false\n"
        "\n"
        "seed = 42\n");
    const Config config = Config::parse(text);

    CHECK(config.has("example.divisions"));
    CHECK_FALSE(config.has("missing"));
    CHECK(config.get_int("example.divisions", 0) == 16);
    CHECK(config.get_double("alpha.noiseless", 0.0) == 1e-3);
    CHECK(config.get_string("sigma", "") == "smooth");
    CHECK(config.get_bool("example2.morozov", true) == false);
    CHECK(config.get_u64("seed", 0) == 42);
    CHECK(config.entries().size() == 5);
}

TEST_CASE("missing keys fall back") {
    const Config config;
    CHECK(config.get_int("a", 7) == 7);
    CHECK(config.get_double("b", 2.5) == 2.5);
    CHECK(config.get_string("c", "x") == "x");
    CHECK(config.get_bool("d", true));
    CHECK(config.get_list("e").empty());
    CHECK(config.get_pairs("f").empty());
}

TEST_CASE("lists and coordinate pairs split on commas and semicolons") {
    Config config;
    config.set("levels", "0, 0.01, 0.05");
    const auto levels = config.get_list("levels");
    REQUIRE(levels.size() == 3);
    CHECK(levels[0] == 0.0);
    CHECK(levels[1] == 0.01);
    CHECK(levels[2] == 0.05);

    config.set("positions", "-0.5, 0; 0, 0.5; 0.5, 0");
    const auto positions = config.get_pairs("positions");
    REQUIRE(positions.size() == 3);
    CHECK(positions[0].first == -0.5);
    CHECK(positions[0].second == 0.0);
    CHECK(positions[2].first == 0.5);
}

TEST_CASE("malformed values raise errors naming the key") {
    Config config;
    config.set("alpha", "abc");
    config.set("count", "2.5");
    config.set("flag", "maybe");
    config.set("points", "1, 2, 3");
    CHECK_THROWS_AS(config.get_double("alpha", 0.0), std::runtime_error);
    CHECK_THROWS_AS(config.get_int("count", 0), std::runtime_error);
    CHECK_THROWS_AS(config.get_bool("flag", false), std::runtime_error);
    CHECK_THROWS_AS(config.get_pairs("points"), std::runtime_error);

    try {
        config.get_double("alpha", 0.0);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("alpha") != std::string::npos);
    }
}

TEST_CASE("lines without an equals sign are rejected with a line number") {
    std::stringstream text("a = 1\nnot a key value line\n");
    try {
        Config::parse(text);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("later assignments override earlier ones") {
    std::stringstream text("k = 1\nk = 2\n");
    const Config config = Config::parse(text);
    CHECK(config.get_int("k", 0) == 2);
}

TEST_CASE("random streams are deterministic per seed") {
    Xoshiro256 a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    bool differs = false;
    Xoshiro256 a2(123);
    for (int i = 0; i < 100; ++i) {
        if (a2.next_u64() != c.next_u64()) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("the first words of the seeded stream are pinned") {
    Xoshiro256 rng(42);
    CHECK(rng.next_u64() == 15021278609987233951ULL);
    CHECK(rng.next_u64() == 5881210131331364753ULL);
    CHECK(rng.next_u64() == 18149643915985481100ULL);
}

TEST_CASE("uniform draws stay in the half-open unit interval") {
    Xoshiro256 rng(7);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = rng.next_uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / 20000.0 - 0.5) < 0.01);
}

TEST_CASE("normal draws have standard moments") {
    Xoshiro256 rng(11);
    const int count = 50000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < count; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / count;
    const double variance = sum_sq / count - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(variance - 1.0) < 0.03);
}

TEST_CASE("source configurations validate their invariants") {
    SourceConfig good;
    good.n = 5;
    good.support = {1, 3};
    good.values = (Vec(2) << 1.0, -2.0).finished();
    good.validate();
    CHECK(good.sparsity() == 2);

    const Vec dense = good.dense();
    CHECK(dense.size() == 5);
    CHECK(dense(1) == 1.0);
    CHECK(dense(3) == -2.0);
    CHECK(dense(0) == 0.0);

    const Vec signs = good.signs();
    CHECK(signs(0) == 1.0);
    CHECK(signs(1) == -1.0);

    SourceConfig duplicate = good;
    duplicate.support = {1, 1};
    CHECK_THROWS_AS(duplicate.validate(), std::invalid_argument);

    SourceConfig out_of_range = good;
    out_of_range.support = {1, 7};
    CHECK_THROWS_AS(out_of_range.validate(), std::invalid_argument);

    SourceConfig zero_value = good;
    zero_value.values(0) = 0.0;
    CHECK_THROWS_AS(zero_value.validate(), std::invalid_argument);

    SourceConfig mismatched = good;
    mismatched.support = {1};
    CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);
}

TEST_CASE("dense vectors round-trip through from_dense") {
    Vec x = Vec::Zero(6);
    x(2) = 0.5;
    x(4) = -1.0;
    x(5) = 1e-14;
    const SourceConfig source = SourceConfig::from_dense(x, 1e-12);
    REQUIRE(source.sparsity() == 2);
    CHECK(source.support[0] == 2);
    CHECK(source.support[1] == 4);
    CHECK(source.values(0) == 0.5);
    CHECK(source.values(1) == -1.0);
    CHECK((source.dense() - x).cwiseAbs().maxCoeff() <= 1e-14);
}
