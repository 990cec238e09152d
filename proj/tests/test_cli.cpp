#include <doctest.h>

#include "chaoslab/config.hpp"

using namespace chaoslab;
using nlohmann::json;

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "oracle-rates"})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"experiment": "nope", "seed": 1})")), ConfigError);
    CHECK_THROWS_AS(parse_config(json::parse(R"([1, 2])")), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
    const auto cfg = parse_config(json::parse(R"({"experiment": "chaos-mc", "seed": 7})"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.output_path == "chaos-mc.csv");
}

TEST_CASE("model parsing")
{
    const auto m = parse_model(json::parse(R"({"family": "linear_mean_field", "A": -1, "B": [[0.5]]})"), 1);
    const auto* lin = std::get_if<LinearMeanField>(&m);
    REQUIRE(lin);
    CHECK(lin->A(0, 0) == -1.0);
    CHECK(lin->B(0, 0) == 0.5);
    CHECK(lin->b0[0] == 0.0);
    CHECK_THROWS_AS(parse_model(json::parse(R"({"family": "unknown"})"), 1), ConfigError);
    CHECK_THROWS_AS(parse_model(json::parse(R"({"family": "linear_mean_field", "A": [[1, 2]], "B": 0})"), 2),
                    ConfigError);
    const auto lg = parse_model(
        json::parse(R"({"family": "langevin_gradient", "U": {"kind": "quadratic_well"}, "W": {"kind": "logcosh", "scale": 0.5}})"),
        1);
    CHECK(std::holds_alternative<LangevinGradient>(lg));
}

TEST_CASE("oracle-rates needs the linear family")
{
    auto cfg = parse_config(json::parse(R"({"experiment": "oracle-rates", "seed": 1,
        "model": {"family": "mean_nonlinearity", "A": -1, "g": {"kind": "tanh"}}})"));
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("degenerate oracle sweep")
{
    auto cfg = parse_config(json::parse(R"({"experiment": "oracle-rates", "seed": 1,
        "model": {"family": "linear_mean_field", "A": -1, "B": 0},
        "sim": {"init": {"mean": 0, "cov": 0.25}},
        "grids": {"n_grid": [8, 16], "k_grid": [1, 2], "t_grid": [0.5, 1]}})"));
    const auto out = run_experiment(cfg);
    bool notice = false;
    for (const auto& v : out.verdicts)
        if (v.message.find("degenerate") != std::string::npos) notice = true;
    CHECK(notice);
    CHECK(out.all_pass());
}

TEST_CASE("table paths and the output directory override")
{
    auto cfg = parse_config(json::parse(R"({"experiment": "chaos-mc", "seed": 1, "output_path": "out/run.csv"})"));
    CHECK(table_path(cfg, "", "") == std::filesystem::path("out/run.csv"));
    CHECK(table_path(cfg, "_weak_mean", "") == std::filesystem::path("out/run_weak_mean.csv"));
    CHECK(table_path(cfg, "_remainder", "/tmp/x") == std::filesystem::path("/tmp/x/run_remainder.csv"));
}

TEST_CASE("reruns are byte-identical")
{
    const auto j = json::parse(R"({"experiment": "hierarchy-certify", "seed": 3,
        "grids": {"n_grid": [16]}, "params": {"a_grid": [1], "c_grid": [0], "p_grid": [2],
        "moment_n": 32, "moment_t": [0.5]}})");
    const auto a = run_experiment(parse_config(j)), b = run_experiment(parse_config(j));
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) CHECK(a.tables[i].csv == b.tables[i].csv);
    CHECK(a.tables[0].csv.rfind("n,a,c,p,R,k,f_T,lemma_rhs,ratio\n", 0) == 0);
}
