#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hallq/error.hpp"
#include "hallq/runner.hpp"

using namespace hq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hallq_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("resolve applies defaults, user values and overrides in order") {
    const json c = resolve_config({{"L", 4}, {"model", {{"recipe", "xy_flux_boson"}}}}, {"L=5", "numeric.points=[[0,1]]"});
    CHECK(c["L"] == 5);
    CHECK(c["model"]["recipe"] == "xy_flux_boson");
    CHECK(c["numeric"]["points"] == json::parse("[[0,1]]"));
    CHECK(c["filter"]["delta"] == "gamma/2");
    CHECK(config_hash(c).size() == 16);
    CHECK(config_hash(c) == config_hash(resolve_config(c)));
    CHECK(config_hash(c) != config_hash(resolve_config(c, {"seed=8"})));
}

TEST_CASE("resolve rejects bad configs") {
    CHECK_THROWS_AS(resolve_config({{"bogus", 1}}), Error);
    CHECK_THROWS_AS(resolve_config({}, {"numeric.grid_n=abc"}), Error);
    CHECK_THROWS_AS(resolve_config({}, {"L=2"}), Error);
    CHECK_THROWS_AS(resolve_config({}, {"experiment=dance"}), Error);
    CHECK_THROWS_AS(resolve_config({}, {"noequals"}), Error);
    CHECK_THROWS_AS(resolve_config({}, {"numeric.r_list=[0.1,-1]"}), Error);
    CHECK_THROWS_AS(resolve_config({{"model", {{"params", {{"m", "x"}}}}}}), Error);
}

TEST_CASE("reruns produce byte-identical payloads") {
    const fs::path dir = fresh_dir("rerun");
    const json c = resolve_config({}, {"experiment=spectrum", "model.recipe=xy_flux_boson", "Q=2"});
    const RunOutput a = run_experiment(c, dir.string());
    const std::string first = slurp(dir / ("spectrum_" + config_hash(c) + ".json"));
    const RunOutput b = run_experiment(c, dir.string());
    CHECK(a.exit_code == 0);
    CHECK(a.record["payload"].dump() == b.record["payload"].dump());
    CHECK(json::parse(first)["payload"].dump() == b.record["payload"].dump());
    CHECK(a.record["schema_version"] == kRecordSchemaVersion);
}

TEST_CASE("conductance record agrees with the oracle") {
    const json c = resolve_config({}, {"experiment=conductance", "numeric.points=[[0,0],[1.0,2.0]]"});
    const RunOutput r = run_experiment(c, fresh_dir("cond").string());
    CHECK(r.exit_code == 0);
    CHECK(r.record["payload"]["summary"]["verdict"] == "pass");
}

TEST_CASE("numerical failures exit with 3 and still write a record") {
    const fs::path dir = fresh_dir("gapless");
    const json c = resolve_config({}, {"experiment=quantize", "model.params.m=-2"});
    const RunOutput r = run_experiment(c, dir.string());
    CHECK(r.exit_code == 3);
    CHECK(r.record["status"] == "numerical_failure");
    CHECK(fs::exists(dir / ("quantize_" + config_hash(c) + ".json")));
}

TEST_CASE("report orders records by hash and counts attention rows") {
    const fs::path dir = fresh_dir("report");
    std::vector<std::string> hashes;
    for (const char* recipe : {"trivial_product", "xy_flux_boson", "qwz_fermion"}) {
        const json c = resolve_config({}, {"experiment=spectrum", std::string("model.recipe=") + recipe});
        run_experiment(c, dir.string());
        hashes.push_back(config_hash(c));
    }
    run_experiment(resolve_config({}, {"experiment=spectrum", "model.params.m=-2"}), dir.string());
    const ReportOutput r = report(dir.string());
    CHECK(r.rows == 4);
    CHECK(r.attention == 1);
    std::sort(hashes.begin(), hashes.end());
    std::size_t last = 0;
    for (const auto& h : hashes) {
        const std::size_t at = r.table.find(h);
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    CHECK(fs::exists(dir / "report.txt"));
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(r.table.find("attention: 1") != std::string::npos);
}
