#include "hallq/hallq.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "hallq/conductance.hpp"
#include "hallq/error.hpp"
#include "hallq/models.hpp"
#include "hallq/runner.hpp"

struct hq_model {
    std::shared_ptr<hq::ModelSystem> sys;
};

namespace {

thread_local std::string g_last_error;

hq_status fail(hq_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <class F>
hq_status guarded(F&& f) {
    try {
        f();
        return HQ_OK;
    } catch (const hq::Error& e) {
        return fail(e.kind() == hq::ErrorKind::Config ? HQ_ERR_CONFIG : HQ_ERR_NUMERICAL, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(HQ_ERR_CONFIG, std::string("json: ") + e.what());
    } catch (const std::exception& e) {
        return fail(HQ_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(HQ_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

hq::Backend backend_of(const char* b) { return b ? hq::backend_from_string(b) : hq::Backend::Auto; }

}  // namespace

extern "C" {

const char* hq_version(void) { return hq::kSoftwareVersion; }

const char* hq_last_error(void) { return g_last_error.c_str(); }

void hq_string_free(char* s) { std::free(s); }

hq_status hq_model_create(const char* recipe, int L, const char* params_json, int Q, const char* backend,
                          hq_model** out) {
    if (!recipe || !out) return fail(HQ_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        hq::ModelRecipe r;
        r.name = recipe;
        if (params_json && *params_json) {
            const auto j = nlohmann::json::parse(params_json);
            if (!j.is_object()) hq::config_error("params must be a JSON object");
            for (auto it = j.begin(); it != j.end(); ++it) r.params[it.key()] = it.value().get<double>();
        }
        if (Q >= 0) r.Q = Q;
        auto m = std::make_unique<hq_model>();
        m->sys = hq::ModelSystem::create(hq::make_model(r, L), backend_of(backend));
        *out = m.release();
    });
}

hq_status hq_model_from_json(const char* model_json, const char* backend, hq_model** out) {
    if (!model_json || !out) return fail(HQ_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto m = std::make_unique<hq_model>();
        m->sys = hq::ModelSystem::create(hq::model_from_json(nlohmann::json::parse(model_json)), backend_of(backend));
        *out = m.release();
    });
}

void hq_model_free(hq_model* m) { delete m; }

hq_status hq_model_dim(const hq_model* m, int* dim) {
    if (!m || !dim) return fail(HQ_ERR_ARGUMENT, "null argument");
    *dim = m->sys->dim();
    return HQ_OK;
}

hq_status hq_model_validate(const hq_model* m, int* pass, char** report_json) {
    if (!m || !pass) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const hq::ValidationReport v = hq::validate_model(m->sys->spec());
        *pass = v.pass ? 1 : 0;
        if (report_json) {
            const nlohmann::json j = {{"pass", v.pass}, {"failures", v.failures}, {"warnings", v.warnings},
                                      {"J", v.J},       {"R", v.R},               {"k_max", v.k_max}};
            *report_json = dup(j.dump());
        }
    });
}

hq_status hq_model_ground(const hq_model* m, double theta_x, double theta_y, double* E0, double* gap) {
    if (!m || !E0 || !gap) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const hq::GroundData g = hq::ground_data(*m->sys, {theta_x, 0, theta_y, 0});
        *E0 = g.E0;
        *gap = g.gap;
    });
}

hq_status hq_model_curvature(const hq_model* m, double theta_x, double theta_y, double* g) {
    if (!m || !g) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] { *g = hq::kubo_curvature(*m->sys, theta_x, theta_y).g; });
}

hq_status hq_model_chern(const hq_model* m, int grid_n, int workers, double* chern) {
    if (!m || !chern) return fail(HQ_ERR_ARGUMENT, "null argument");
    if (grid_n < 2 || workers < 1) return fail(HQ_ERR_ARGUMENT, "grid_n must be >= 2 and workers >= 1");
    return guarded([&] {
        hq::ChernOptions co;
        co.workers = workers;
        *chern = hq::chern_number(*m->sys, grid_n, co).chern;
    });
}

hq_status hq_config_defaults(char** json_out) {
    if (!json_out) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] { *json_out = dup(hq::default_config().dump(2)); });
}

hq_status hq_config_resolve(const char* config_json, const char* const* overrides, int n_overrides,
                            char** resolved_out) {
    if (!resolved_out || n_overrides < 0 || (n_overrides > 0 && !overrides))
        return fail(HQ_ERR_ARGUMENT, "bad argument");
    return guarded([&] {
        nlohmann::json user = nlohmann::json::object();
        if (config_json && *config_json) user = nlohmann::json::parse(config_json);
        std::vector<std::string> ov;
        for (int i = 0; i < n_overrides; ++i) {
            if (!overrides[i]) hq::config_error("null override");
            ov.emplace_back(overrides[i]);
        }
        *resolved_out = dup(hq::resolve_config(user, ov).dump(2));
    });
}

hq_status hq_config_hash(const char* resolved_json, char** hash_out) {
    if (!resolved_json || !hash_out) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] { *hash_out = dup(hq::config_hash(hq::resolve_config(nlohmann::json::parse(resolved_json)))); });
}

hq_status hq_run(const char* resolved_json, const char* out_dir, int workers, char** record_json_out, int* exit_code) {
    if (!resolved_json || !exit_code) return fail(HQ_ERR_ARGUMENT, "null argument");
    if (workers < 1) return fail(HQ_ERR_ARGUMENT, "workers must be at least 1");
    return guarded([&] {
        const nlohmann::json cfg = hq::resolve_config(nlohmann::json::parse(resolved_json));
        const hq::RunOutput r = hq::run_experiment(cfg, out_dir ? out_dir : "", workers);
        *exit_code = r.exit_code;
        if (!r.message.empty()) g_last_error = r.message;
        if (record_json_out) *record_json_out = dup(r.record.dump(2));
    });
}

hq_status hq_report(const char* dir, char** table_out, int* attention) {
    if (!dir) return fail(HQ_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const hq::ReportOutput r = hq::report(dir);
        if (table_out) *table_out = dup(r.table);
        if (attention) *attention = r.attention;
    });
}

}  // extern "C"
