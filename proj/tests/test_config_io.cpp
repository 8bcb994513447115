#include "fsi/config.hpp"
#include "fsi/io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

using namespace fsi;
using namespace testing_support;

TEST_CASE("config schema") {
    try {
        parse_config(R"({"grid.n": 64})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.key == "forcing.period_T");
        CHECK(std::string(e.what()).find("forcing.period_T") != std::string::npos);
    }
    try {
        parse_config(R"({"forcing.period_T": 6.0, "grid.nn": 64})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.key == "grid.nn");
    }
    try {
        parse_config(R"({"forcing.period_T": "six"})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.key == "forcing.period_T");
    }
    CHECK_THROWS_AS(parse_config(R"({"forcing.period_T": 6.0, "physics.stiffness_A": [[1,0,0],[0,-1,0],[0,0,1]]})"),
                    ConfigError);
    CHECK_NOTHROW(parse_config(R"({"forcing.period_T": 6.0, "physics.stiffness_A": [[1,0,0],[0,-1,0],[0,0,1]]})", false));
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
}

TEST_CASE("defaults and resolution") {
    ExperimentConfig c = parse_config(R"({"forcing.period_T": 6.283185307179586})");
    CHECK(c.grid_n == 96);
    CHECK(c.physics.lambda == 50.0);
    std::string resolved = resolved_config_text(c);
    for (const auto& k : config_keys()) CHECK(resolved.find("\"" + k + "\"") != std::string::npos);
    ExperimentConfig again = parse_config(resolved);
    CHECK(resolved_config_text(again) == resolved);
    CHECK(config_hash(again) == config_hash(c));
    ExperimentConfig other = config_with_overrides(resolved, {"grid.n=64"});
    CHECK(other.grid_n == 64);
    CHECK(config_hash(other) != config_hash(c));

    ExperimentConfig d = parse_config(R"({"forcing.period_T": 1, "body.shape": "disk", "body.a": 0.5,
                                          "body.com_offset": [0, 0]})");
    CHECK(d.body.shape.is_disk());
    CHECK(d.body.shape.b == 0.5);
}

TEST_CASE("overrides") {
    std::string t = small_config_text();
    apply_override(t, "experiment=verify");
    apply_override(t, "physics.b_tilde=[1, 0]");
    ExperimentConfig c = parse_config(t);
    CHECK(c.experiment == "verify");
    CHECK(c.physics.b_tilde == Vec2(1, 0));
    CHECK_THROWS_AS(apply_override(t, "nope=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(t, "grid.n"), ConfigError);
}

TEST_CASE("number formatting round trips") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t b = bits(rng);
        double x;
        std::memcpy(&x, &b, sizeof x);
        if (!std::isfinite(x)) continue;
        double y = std::strtod(format_double(x).c_str(), nullptr);
        CHECK(std::memcmp(&x, &y, sizeof x) == 0);
    }
    CHECK(csv_row({1.5, -2}) == "1.5,-2\n");
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("checkpoints") {
    auto s = small_solver(sine_forcing(0.5));
    SystemState st = s->zero_state();
    for (int k = 0; k < 5; ++k) s->step(st);
    st.s.theta = 0.125;
    auto dir = std::filesystem::temp_directory_path() / "fsi_unit_ckpt";
    std::filesystem::create_directories(dir);
    auto path = dir / "a.chk";
    write_checkpoint(path, s->grid(), st);
    SystemState r = read_checkpoint(path, s->grid());
    CHECK(r.u == st.u);
    CHECK(r.p == st.p);
    CHECK(r.s.xi == st.s.xi);
    CHECK(r.s.theta == st.s.theta);
    CHECK(r.time == st.time);

    std::string bytes = read_file(path);
    CHECK(bytes.substr(0, 4) == "FSIP");
    CHECK(bytes.size() == 4 + 4 + 4 + 8 + 8 + 8 * (s->grid().nfaces() + s->grid().ncells() + 6));
    write_file_atomic(dir / "cut.chk", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(dir / "cut.chk", s->grid()), InvalidInput);
    write_file_atomic(dir / "bad.chk", "XXXX" + bytes.substr(4));
    CHECK_THROWS_AS(read_checkpoint(dir / "bad.chk", s->grid()), InvalidInput);
    CHECK_THROWS_AS(read_checkpoint(path, make_grid(3.2, 64, 1)), InvalidInput);
    std::filesystem::remove_all(dir);
}
