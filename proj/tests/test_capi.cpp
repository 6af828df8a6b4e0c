#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "hallq/hallq.h"

TEST_CASE("version and error channel") {
    CHECK(std::strlen(hq_version()) > 0);
    hq_model* m = nullptr;
    CHECK(hq_model_create(nullptr, 3, nullptr, -1, nullptr, &m) == HQ_ERR_ARGUMENT);
    CHECK(hq_model_create("no_such_model", 3, nullptr, -1, nullptr, &m) == HQ_ERR_CONFIG);
    CHECK(m == nullptr);
    CHECK(std::string(hq_last_error()).find("no_such_model") != std::string::npos);
    CHECK(hq_model_create("qwz_fermion", 3, "{\"m\": \"x\"}", -1, nullptr, &m) == HQ_ERR_CONFIG);
}

TEST_CASE("model handle life cycle") {
    hq_model* m = nullptr;
    REQUIRE(hq_model_create("xy_flux_boson", 3, nullptr, 2, "auto", &m) == HQ_OK);
    int dim = 0;
    CHECK(hq_model_dim(m, &dim) == HQ_OK);
    CHECK(dim == 36);
    int pass = 0;
    char* rep = nullptr;
    CHECK(hq_model_validate(m, &pass, &rep) == HQ_OK);
    CHECK(pass == 1);
    CHECK(std::string(rep).find("\"pass\":true") != std::string::npos);
    hq_string_free(rep);
    double e0 = 0, gap = 0, g = 0;
    CHECK(hq_model_ground(m, 0, 0, &e0, &gap) == HQ_OK);
    CHECK(gap == doctest::Approx(0.95057).epsilon(1e-4));
    CHECK(hq_model_curvature(m, 0.2, 0.3, &g) == HQ_OK);
    CHECK(std::isfinite(g));
    CHECK(hq_model_chern(m, 1, 1, &g) == HQ_ERR_ARGUMENT);
    hq_model_free(m);
}

TEST_CASE("Chern number through the C interface") {
    hq_model* m = nullptr;
    REQUIRE(hq_model_create("qwz_fermion", 3, "{\"m\": 1.0}", -1, nullptr, &m) == HQ_OK);
    double c = 0;
    CHECK(hq_model_chern(m, 6, 1, &c) == HQ_OK);
    CHECK(c == doctest::Approx(-1.0).epsilon(1e-9));
    hq_model_free(m);
}

TEST_CASE("config and run") {
    char* defaults = nullptr;
    REQUIRE(hq_config_defaults(&defaults) == HQ_OK);
    hq_string_free(defaults);
    const char* ov[] = {"experiment=validate", "model.recipe=trivial_product"};
    char* resolved = nullptr;
    REQUIRE(hq_config_resolve(nullptr, ov, 2, &resolved) == HQ_OK);
    char* hash = nullptr;
    CHECK(hq_config_hash(resolved, &hash) == HQ_OK);
    CHECK(std::strlen(hash) == 16);
    char* record = nullptr;
    int code = -1;
    CHECK(hq_run(resolved, "capi_results", 1, &record, &code) == HQ_OK);
    CHECK(code == 0);
    CHECK(std::string(record).find(hash) != std::string::npos);
    int attention = -1;
    CHECK(hq_report("capi_results", nullptr, &attention) == HQ_OK);
    CHECK(attention == 0);
    hq_string_free(record);
    hq_string_free(hash);
    hq_string_free(resolved);
    const char* bad[] = {"nope=1"};
    CHECK(hq_config_resolve("{}", bad, 1, &resolved) == HQ_ERR_CONFIG);
}
