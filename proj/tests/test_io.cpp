#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "json.hpp"

#include "dephasim/io.hpp"

using namespace dephasim;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

json minimal_modes_config() {
    return json::parse(R"({
        "central": {"c_up": [0.6, 0.0], "c_down": [0.0, 0.8]},
        "modes": [
            {"omega0": 0.9, "omega": 0.2, "big_omega": 1.1,
             "alpha": [0.8, 0.0], "beta": [0.0, 0.6], "lambda": [0.5, -0.25]}
        ],
        "phonons": {"kind": "coherent"},
        "time": {"start": 0.0, "end": 5.0, "points": 11}
    })");
}

}  // namespace

TEST_CASE("parse explicit modes config", "[io]") {
    const RunConfig rc = parse_run_config(minimal_modes_config());
    REQUIRE(rc.modes.has_value());
    REQUIRE(rc.modes->size() == 1);
    CHECK(rc.central->c_up == Complex(0.6, 0.0));
    CHECK((*rc.modes)[0].lambda == Complex(0.5, -0.25));
    CHECK((*rc.modes)[0].big_omega == 1.1);
    CHECK(rc.phonons.kind == PhononKind::Coherent);
    CHECK(rc.grid.points == 11);
    CHECK(rc.grid.t_end == 5.0);

    const BathConfig bath = materialize(rc);
    CHECK(bath.modes.size() == 1);
    CHECK(bath.central.c_down == Complex(0.0, 0.8));
}

TEST_CASE("parse ensemble config", "[io]") {
    const json j = json::parse(R"({
        "ensemble": {"n_modes": 7, "omega_range": [0.05, 0.2],
                     "lambda_radius": 0.5,
                     "spin_init": {"kind": "gibbs_thermal",
                                   "epsilon_range": [0.0, 1.0],
                                   "temperature": 2.0},
                     "seed": 99},
        "phonons": {"kind": "thermal", "temperature": 1.5},
        "time": {"start": 0.0, "end": 2.0, "points": 5}
    })");
    const RunConfig rc = parse_run_config(j);
    REQUIRE(rc.ensemble.has_value());
    CHECK(rc.ensemble->n_modes == 7);
    CHECK(rc.ensemble->spin_init == SpinInit::GibbsThermal);
    CHECK(rc.ensemble->seed == 99);
    CHECK(rc.phonons.kind == PhononKind::Thermal);
    CHECK(rc.phonons.temperature == 1.5);

    const BathConfig a = materialize(rc);
    const BathConfig b = materialize(rc);
    CHECK(a.modes.size() == 7);
    CHECK(a.modes[3].lambda == b.modes[3].lambda);
    const BathConfig c = materialize(rc, 1234);
    CHECK(a.modes[0].lambda != c.modes[0].lambda);
}

TEST_CASE("schema violations name the offending field", "[io]") {
    SECTION("modes and ensemble are mutually exclusive") {
        json j = minimal_modes_config();
        j["ensemble"] = {{"n_modes", 2}};
        CHECK_THROWS_MATCHES(parse_run_config(j), SchemaError,
                             Catch::Matchers::MessageMatches(ContainsSubstring(
                                 "exactly one of")));
    }

    SECTION("central required with modes") {
        json j = minimal_modes_config();
        j.erase("central");
        CHECK_THROWS_MATCHES(
            parse_run_config(j), SchemaError,
            Catch::Matchers::MessageMatches(ContainsSubstring("central")));
    }

    SECTION("complex values must be pairs") {
        json j = minimal_modes_config();
        j["modes"][0]["alpha"] = 0.8;
        CHECK_THROWS_MATCHES(parse_run_config(j), SchemaError,
                             Catch::Matchers::MessageMatches(
                                 ContainsSubstring("/modes/0/alpha")));
    }

    SECTION("missing mode field") {
        json j = minimal_modes_config();
        j["modes"][0].erase("big_omega");
        CHECK_THROWS_MATCHES(parse_run_config(j), SchemaError,
                             Catch::Matchers::MessageMatches(
                                 ContainsSubstring("big_omega")));
    }

    SECTION("unknown keys are rejected") {
        json j = minimal_modes_config();
        j["modes"][0]["omega2"] = 1.0;
        CHECK_THROWS_MATCHES(
            parse_run_config(j), SchemaError,
            Catch::Matchers::MessageMatches(ContainsSubstring("omega2")));
    }

    SECTION("phonon kind is constrained") {
        json j = minimal_modes_config();
        j["phonons"]["kind"] = "squeezed";
        CHECK_THROWS_AS(parse_run_config(j), SchemaError);
        j["phonons"] = {{"kind", "coherent"}, {"temperature", 2.0}};
        CHECK_THROWS_MATCHES(parse_run_config(j), SchemaError,
                             Catch::Matchers::MessageMatches(
                                 ContainsSubstring("temperature")));
    }

    SECTION("grid points must be positive") {
        json j = minimal_modes_config();
        j["time"]["points"] = 0;
        CHECK_THROWS_MATCHES(
            parse_run_config(j), SchemaError,
            Catch::Matchers::MessageMatches(ContainsSubstring("/time/points")));
    }
}

TEST_CASE("parse errors carry a line number", "[io]") {
    const std::string path = "/tmp/dephasim_bad_config.json";
    {
        std::ofstream out(path);
        out << "{\n  \"central\": {\n  broken\n}\n";
    }
    try {
        load_run_config(path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK_THAT(e.what(), ContainsSubstring(":3:"));
    }
    CHECK_THROWS_AS(load_run_config("/tmp/definitely_missing_config.json"),
                    SchemaError);
}

TEST_CASE("csv formatting", "[io]") {
    CHECK(format_sci(1.0) == "1.0000000000000000e+00");
    CHECK(format_sci(0.0) == "0.0000000000000000e+00");
    CHECK(format_sci(-0.0) == "0.0000000000000000e+00");
    CHECK(format_sci(0.1) == "1.0000000000000001e-01");
    CHECK(format_sci(-2.5e-13) == "-2.4999999999999999e-13");

    DecoherenceSeries series;
    series.grid = {0.0, 1.0, 2};
    series.values = {Complex(1.0, 0.0), Complex(0.25, -0.5)};
    std::ostringstream out;
    write_series_csv(out, series);
    CHECK(out.str() ==
          "t,re_r,im_r,abs_r\n"
          "0.0000000000000000e+00,1.0000000000000000e+00,"
          "0.0000000000000000e+00,1.0000000000000000e+00\n"
          "1.0000000000000000e+00,2.5000000000000000e-01,"
          "-5.0000000000000000e-01,5.5901699437494745e-01\n");
}
