#include "config.hpp"

#include "igbm/error.hpp"

#include "doctest.h"

#include <string>

using namespace igbm::app;

TEST_CASE("defaults survive a serialize and parse round trip") {
    const RunConfig c;
    const auto text = serialize_config(c);
    CHECK(parse_config(text) == c);
    CHECK(serialize_config(parse_config(text)) == text);
}

TEST_CASE("edited values round trip bit for bit") {
    RunConfig c;
    c.seed = 18446744073709551615ull;
    c.model.coupling.mean_degree = 12.5;
    c.model.sigma0 = 0.1 + 0.2;  // not exactly representable in short form
    c.simulate.schedule.clamp_u0 = -1.0 / 3.0;
    c.meanfield.kappa0_list = {0.125, 1e-7, 3.0};
    c.returns.regime = "long";
    const auto back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(back.model.sigma0 == c.model.sigma0);
    REQUIRE(back.simulate.schedule.clamp_u0.has_value());
    CHECK(*back.simulate.schedule.clamp_u0 == -1.0 / 3.0);
    CHECK(back.seed == c.seed);
}

TEST_CASE("partial files fall back to defaults") {
    const auto c = parse_config("[model]\nJ0 = 0.8\n\n[run]\nseed = 9\n");
    CHECK(c.model.coupling.J0 == 0.8);
    CHECK(c.seed == 9);
    CHECK(c.model.sigma == RunConfig{}.model.sigma);
}

TEST_CASE("unknown or malformed entries are config errors") {
    CHECK_THROWS_AS(parse_config("[model]\nJ00 = 1\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[modle]\nJ0 = 1\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("J0 = 1\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nJ0 = abc\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nN = 2.5\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nseed = -1\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nsigma = -0.1\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[returns]\nregime = sideways\n"), igbm::ConfigError);
    CHECK_THROWS_AS(parse_config("[model\nJ0 = 1\n"), igbm::ConfigError);
}

TEST_CASE("single values set by path") {
    RunConfig c;
    set_config_value(c, "meanfield.mode", "phase_scan");
    set_config_value(c, "returns.tau", "2.5");
    set_config_value(c, "model.mean_degree", "");
    CHECK(c.meanfield.mode == "phase_scan");
    CHECK(c.returns.tau == 2.5);
    CHECK_FALSE(c.model.coupling.mean_degree.has_value());
    CHECK_THROWS_AS(set_config_value(c, "returns.nope", "1"), igbm::ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "meanfield.mode", "guess"), igbm::ConfigError);
}

TEST_CASE("entries list every key once in file order") {
    const auto entries = config_entries(RunConfig{});
    REQUIRE_FALSE(entries.empty());
    CHECK(entries.front().first == "run.seed");
    CHECK(entries.back().first == "pricing.points");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (std::size_t j = i + 1; j < entries.size(); ++j) CHECK(entries[i].first != entries[j].first);
    }
}
