#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "normnet/sweep.hpp"
#include "normnet/toml_lite.hpp"

using namespace normnet;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("toml-lite parses tables, arrays, and scalars") {
    const std::string text = R"(
# sweep over k
kind = "construct-sweep"
seed = 42

[construct]
construction = "square"
k = [1, 2, 4]
label = "demo # not a comment"
ratio = 1.5
flag = true

[construct.nested]
deep = -3
)";
    json j = parse_toml_lite(text);
    CHECK(j["kind"] == "construct-sweep");
    CHECK(j["seed"] == 42);
    CHECK(j["construct"]["construction"] == "square");
    CHECK(j["construct"]["k"] == json({1, 2, 4}));
    CHECK(j["construct"]["label"] == "demo # not a comment");
    CHECK(j["construct"]["ratio"] == 1.5);
    CHECK(j["construct"]["flag"] == true);
    CHECK(j["construct"]["nested"]["deep"] == -3);
    CHECK_THROWS(parse_toml_lite("key value_without_equals"));
}

TEST_CASE("validation catches the documented misconfigurations") {
    json good = {{"kind", "construct-sweep"},
                 {"seed", 1},
                 {"construct", {{"construction", "square"}, {"k", {1, 2}}}}};
    CHECK(validate(ExperimentConfig::from_json(good, "out")).empty());

    json empty_grid = good;
    empty_grid["construct"]["k"] = json::array();
    auto diags = validate(ExperimentConfig::from_json(empty_grid, "out"));
    REQUIRE(!diags.empty());
    CHECK(diags.front().field == "construct.k");

    json both = {{"kind", "regress-sweep"},
                 {"seed", 1},
                 {"regress",
                  {{"n", {100}}, {"seeds", {1}}, {"d", 2}, {"planted", true}, {"K", 1.0},
                   {"lambda", 0.1}}}};
    diags = validate(ExperimentConfig::from_json(both, "out"));
    REQUIRE(!diags.empty());
    CHECK(diags.front().message.find("exactly one") != std::string::npos);

    json regime = {{"kind", "probe-sweep"},
                   {"seed", 1},
                   {"probe",
                    {{"probe", "bounds"}, {"d", {2}}, {"alpha", {1.0}}, {"K", {1.0}},
                     {"L", {1}}}}};
    diags = validate(ExperimentConfig::from_json(regime, "out"));
    REQUIRE(!diags.empty());
    CHECK(diags.front().message.find("d > 2*alpha") != std::string::npos);

    json unknown_kind = {{"kind", "mystery"}, {"seed", 1}};
    CHECK(!validate(ExperimentConfig::from_json(unknown_kind, "out")).empty());
}

TEST_CASE("construct sweep writes rows within bounds and reruns byte-identically") {
    json cfg = {{"kind", "construct-sweep"},
                {"seed", 7},
                {"construct", {{"construction", "square"}, {"k", {1, 2, 4, 8}}}}};

    auto dir_a = fresh_dir("normnet_sweep_a");
    auto dir_b = fresh_dir("normnet_sweep_b");
    RunManifest first = run(ExperimentConfig::from_json(cfg, dir_a.string()));
    RunManifest second = run(ExperimentConfig::from_json(cfg, dir_b.string()));
    CHECK(first.points_failed == 0);
    CHECK(first.points_total == 4);

    std::string csv_a = slurp(dir_a / "results.csv");
    std::string csv_b = slurp(dir_b / "results.csv");
    CHECK(csv_a == csv_b);
    CHECK(csv_a.rfind("k,kappa,sup_error,bound\n", 0) == 0);

    std::istringstream lines(csv_a);
    std::string line;
    std::getline(lines, line);  // header
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');  // k
        std::getline(cells, cell, ',');
        double kap = std::stod(cell);
        std::getline(cells, cell, ',');
        double sup = std::stod(cell);
        std::getline(cells, cell, ',');
        double bound = std::stod(cell);
        CHECK(std::abs(kap - 3.0) < 1e-9);
        CHECK(sup <= bound);
    }
    CHECK(rows == 4);

    // manifests agree except for the wall-clock entry
    json ma = json::parse(slurp(dir_a / "manifest.json"));
    json mb = json::parse(slurp(dir_b / "manifest.json"));
    ma.erase("wall_clock_ms");
    mb.erase("wall_clock_ms");
    CHECK(ma == mb);

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("invalid configs fail before side effects") {
    json cfg = {{"kind", "construct-sweep"},
                {"seed", 7},
                {"construct", {{"construction", "square"}, {"k", json::array()}}}};
    auto dir = fresh_dir("normnet_sweep_invalid");
    CHECK_THROWS_AS(run(ExperimentConfig::from_json(cfg, dir.string())), std::invalid_argument);
    CHECK(!std::filesystem::exists(dir));
}

TEST_CASE("probe sweep emits the documented columns") {
    json cfg = {{"kind", "probe-sweep"},
                {"seed", 5},
                {"probe",
                 {{"probe", "packing"}, {"m", {8, 12}}}}};
    auto dir = fresh_dir("normnet_probe_sweep");
    RunManifest manifest = run(ExperimentConfig::from_json(cfg, dir.string()));
    CHECK(manifest.points_failed == 0);
    std::string csv = slurp(dir / "results.csv");
    CHECK(csv.rfind("m,count,cardinality_bound,min_hamming,verified\n", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("point failures are recorded without aborting the sweep") {
    json cfg = {{"kind", "construct-sweep"},
                {"seed", 7},
                {"construct",
                 {{"construction", "taylor"}, {"k", {1, 64}}, {"N", {1}}, {"d", 2},
                  {"target", "prod"}, {"weight_cap", 40000}}}};
    auto dir = fresh_dir("normnet_sweep_partial");
    RunManifest manifest = run(ExperimentConfig::from_json(cfg, dir.string()));
    CHECK(manifest.points_total == 2);
    CHECK(manifest.points_failed == 1);
    CHECK(manifest.point_status[0] == "ok");
    CHECK(manifest.point_status[1].find("weight count") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("thread cap does not change sweep outputs") {
    json cfg = {{"kind", "probe-sweep"},
                {"seed", 11},
                {"probe",
                 {{"probe", "rademacher"}, {"n", {20, 50}}, {"d", {2, 3}}, {"K", {1.0}},
                  {"L", {2}}, {"trials", 500}}}};
    auto dir_seq = fresh_dir("normnet_threads_seq");
    auto dir_par = fresh_dir("normnet_threads_par");
    run(ExperimentConfig::from_json(cfg, dir_seq.string()));
    setenv("NORMNET_THREADS", "4", 1);
    run(ExperimentConfig::from_json(cfg, dir_par.string()));
    unsetenv("NORMNET_THREADS");
    CHECK(slurp(dir_seq / "results.csv") == slurp(dir_par / "results.csv"));
    std::filesystem::remove_all(dir_seq);
    std::filesystem::remove_all(dir_par);
}

TEST_CASE("format_double emits shortest round-trip decimals") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
}
