#include "hallq/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "hallq/conductance.hpp"
#include "hallq/diagnostics.hpp"
#include "hallq/error.hpp"
#include "hallq/models.hpp"
#include "hallq/parallel.hpp"

namespace hq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<std::string> kExperiments = {"validate", "spectrum",     "conductance", "chern",
                                               "loop-phase", "stokes", "lemma-checks", "quantize"};

const std::vector<std::string> kChecks = {"partial_trace", "energy",      "big_loop",
                                          "twisting",      "translation", "loop_localization"};

// ---- config ----

void merge_into(json& dst, const json& def, const json& src, const std::string& path) {
    if (!src.is_object()) config_error("config section '" + path + "' must be an object");
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!def.contains(it.key())) config_error("unknown config key '" + key + "'");
        const json& d = def[it.key()];
        const json& v = it.value();
        if (key == "model.params") {
            if (!v.is_object()) config_error("model.params must be an object of numbers");
            for (auto p = v.begin(); p != v.end(); ++p)
                if (!p.value().is_number()) config_error("model.params." + p.key() + " must be a number");
            dst[it.key()] = v;
        } else if (key == "filter.delta") {
            if (!(v.is_number() || (v.is_string() && v.get<std::string>() == "gamma/2")))
                config_error("filter.delta must be a number or \"gamma/2\"");
            dst[it.key()] = v;
        } else if (d.is_object()) {
            merge_into(dst[it.key()], d, v, key);
        } else if (d.is_null()) {
            if (!(v.is_null() || v.is_number_integer())) config_error("'" + key + "' must be an integer or null");
            dst[it.key()] = v;
        } else if (d.is_number_integer()) {
            if (!v.is_number_integer()) config_error("'" + key + "' must be an integer");
            dst[it.key()] = v;
        } else if (d.is_number()) {
            if (!v.is_number()) config_error("'" + key + "' must be a number");
            dst[it.key()] = v.get<double>();
        } else if (d.is_string()) {
            if (!v.is_string()) config_error("'" + key + "' must be a string");
            dst[it.key()] = v;
        } else if (d.is_boolean()) {
            if (!v.is_boolean()) config_error("'" + key + "' must be a boolean");
            dst[it.key()] = v;
        } else if (d.is_array()) {
            if (!v.is_array()) config_error("'" + key + "' must be an array");
            dst[it.key()] = v;
        }
    }
}

void check_positive(const json& c, const std::string& section, const std::string& key) {
    if (!(c[section][key].get<double>() > 0)) config_error(section + "." + key + " must be positive");
}

std::vector<std::pair<double, double>> pairs(const json& a, const std::string& name) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            config_error(name + " entries must be [theta_x, theta_y] pairs");
        out.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return out;
}

std::vector<double> numbers(const json& a, const std::string& name) {
    std::vector<double> out;
    for (const auto& v : a) {
        if (!v.is_number()) config_error(name + " entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<int> integers(const json& a, const std::string& name) {
    std::vector<int> out;
    for (const auto& v : a) {
        if (!v.is_number_integer()) config_error(name + " entries must be integers");
        out.push_back(v.get<int>());
    }
    return out;
}

void validate_config(const json& c) {
    const std::string e = c["experiment"];
    if (std::find(kExperiments.begin(), kExperiments.end(), e) == kExperiments.end())
        config_error("unknown experiment '" + e + "'");
    if (c["L"].get<int>() < 3) config_error("L must be at least 3");
    backend_from_string(c["backend"]);
    filter_kind_from_string(c["filter"]["kind"]);
    if (c["filter"]["delta"].is_number() && !(c["filter"]["delta"].get<double>() > 0))
        config_error("filter.delta must be positive");
    for (const char* k : {"integrator_tol", "spectral_tol", "perturbation", "translation_r", "loop_r"})
        check_positive(c, "numeric", k);
    const json& n = c["numeric"];
    if (n["grid_n"].get<int>() < 2) config_error("numeric.grid_n must be at least 2");
    if (n["levels"].get<int>() < 1) config_error("numeric.levels must be positive");
    if (!n["N"].is_null() && n["N"].get<int>() < 1) config_error("numeric.N must be positive");
    if (!n["M"].is_null() && n["M"].get<int>() < 0) config_error("numeric.M must be non-negative");
    for (double r : numbers(n["r_list"], "numeric.r_list"))
        if (!(r > 0)) config_error("numeric.r_list entries must be positive");
    pairs(n["points"], "numeric.points");
    pairs(n["basepoints"], "numeric.basepoints");
    if (n["loop_theta"].size() != 2) config_error("numeric.loop_theta must be [theta_x, theta_y]");
    numbers(n["loop_theta"], "numeric.loop_theta");
    for (int L : integers(n["L_list"], "numeric.L_list"))
        if (L < 3) config_error("numeric.L_list entries must be at least 3");
    for (const auto& ch : n["checks"]) {
        if (!ch.is_string() || std::find(kChecks.begin(), kChecks.end(), ch.get<std::string>()) == kChecks.end())
            config_error("unknown lemma check " + ch.dump());
    }
    if (n["twisting"]["L"].get<int>() < 3) config_error("numeric.twisting.L must be at least 3");
    if (n["twisting"]["theta"].size() != 2) config_error("numeric.twisting.theta must be [theta_x, theta_y]");
    if (c["output"]["directory"].get<std::string>().empty()) config_error("output.directory must not be empty");
}

json parse_override_value(const std::string& s) {
    try {
        return json::parse(s);
    } catch (const json::parse_error&) {
        return json(s);
    }
}

// ---- model construction ----

struct Built {
    ModelSpec spec;
    std::optional<ModelRecipe> recipe;
    std::shared_ptr<ModelSystem> sys;
};

ModelRecipe recipe_of(const json& c, std::optional<int> Q) {
    ModelRecipe r;
    r.name = c["model"]["recipe"];
    for (auto it = c["model"]["params"].begin(); it != c["model"]["params"].end(); ++it)
        r.params[it.key()] = it.value().get<double>();
    r.Q = Q;
    return r;
}

std::optional<int> config_Q(const json& c) {
    if (c["Q"].is_null()) return std::nullopt;
    return c["Q"].get<int>();
}

Built build(const json& c, std::optional<Backend> backend = std::nullopt, std::optional<int> L = std::nullopt,
            std::optional<std::optional<int>> Q = std::nullopt) {
    Built b;
    const std::string file = c["model"]["file"];
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) config_error("cannot read model file '" + file + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            config_error("model file '" + file + "': " + e.what());
        }
        b.spec = model_from_json(j);
        if (Q && *Q) b.spec.Q = **Q;
        else if (!c["Q"].is_null()) b.spec.Q = c["Q"].get<int>();
    } else {
        b.recipe = recipe_of(c, Q ? *Q : config_Q(c));
        b.spec = make_model(*b.recipe, L.value_or(c["L"].get<int>()));
    }
    b.sys = ModelSystem::create(b.spec, backend.value_or(backend_from_string(c["backend"])));
    return b;
}

bool oracle_applicable(const Built& b) {
    if (!b.recipe) return false;
    if (b.recipe->name == "qwz_fermion") return true;
    if (b.recipe->name == "qwz_interacting") {
        auto it = b.recipe->params.find("V");
        return it != b.recipe->params.end() && it->second == 0.0;
    }
    return false;
}

SpectralOptions spectral_options(const json& c) {
    SpectralOptions o;
    o.tol = c["numeric"]["spectral_tol"];
    o.seed = c["seed"].get<unsigned>();
    return o;
}

IntegratorOptions integrator_options(const json& c) {
    IntegratorOptions o;
    o.tol = c["numeric"]["integrator_tol"];
    return o;
}

double resolve_delta(const json& c, double gap) {
    if (c["filter"]["delta"].is_number()) return c["filter"]["delta"].get<double>();
    return gap / 2;
}

SpectralFilter make_filter(const json& c, double gap) {
    return SpectralFilter(resolve_delta(c, gap), filter_kind_from_string(c["filter"]["kind"]));
}

GroundData gapped_ground(const FluxSystem& sys, const SpectralOptions& opt) {
    GroundData g = ground_data(sys, {}, opt);
    if (g.degenerate)
        numerical_error("gap collapse: groundstate degenerate at zero flux (gap " + std::to_string(g.gap) + ")");
    return g;
}

json cjson(cd z) { return json::array({z.real(), z.imag()}); }

json stats_json(const IntegratorStats& s) {
    return {{"steps", s.steps},
            {"rejected", s.rejected},
            {"rhs_evals", s.rhs_evals},
            {"max_error_estimate", s.max_error_estimate},
            {"max_defect", s.max_defect},
            {"reorthogonalizations", s.reorthogonalizations},
            {"min_gap", std::isfinite(s.min_gap) ? json(s.min_gap) : json(nullptr)}};
}

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json lemma_json(const LemmaCheckResult& r) {
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = finite(v);
    json inputs = json::object();
    for (const auto& [k, v] : r.inputs) inputs[k] = v;
    return {{"lemma", to_string(r.lemma)},
            {"check", r.check},
            {"inputs", inputs},
            {"measured", finite(r.measured)},
            {"paper_bound_form", r.bound_form},
            {"pass", r.pass ? json(*r.pass) : json(nullptr)},
            {"verdict", r.verdict},
            {"values", values},
            {"notes", r.notes},
            {"status", "ok"}};
}

json summary(const Built& b, const std::string& metric, double value, const std::string& verdict) {
    return {{"model", b.recipe ? b.recipe->name : b.spec.name},
            {"L", b.spec.lattice.L()},
            {"metric", metric},
            {"value", finite(value)},
            {"verdict", verdict}};
}

// ---- CSV ----

struct Csv {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_csv(const fs::path& path, const Csv& c) {
    std::ofstream out(path);
    if (!out) config_error("cannot write " + path.string());
    for (std::size_t i = 0; i < c.header.size(); ++i) out << (i ? "," : "") << c.header[i];
    out << "\n";
    for (const auto& r : c.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt(r[i]);
        out << "\n";
    }
}

// ---- experiments ----

struct Outcome {
    json payload;
    std::vector<Csv> curves;
    int exit_code = 0;
};

Outcome run_validate(const json& c) {
    Outcome o;
    Built b;
    const std::string file = c["model"]["file"];
    if (!file.empty()) {
        b = build(c, Backend::ManyBody);
    } else {
        b.recipe = recipe_of(c, config_Q(c));
        b.spec = make_model(*b.recipe, c["L"].get<int>());
    }
    const ValidationReport v = validate_model(b.spec);
    o.payload = {{"pass", v.pass},
                 {"failures", v.failures},
                 {"warnings", v.warnings},
                 {"J", v.J},
                 {"max_site_strength", v.max_site_strength},
                 {"R", v.R},
                 {"max_diameter", v.max_diameter},
                 {"max_body", v.max_body},
                 {"k_max", v.k_max},
                 {"site_q_max", v.site_q_max},
                 {"Q_max", b.spec.Q_max()},
                 {"hermiticity_residual", v.hermiticity_residual},
                 {"charge_residual", v.charge_residual},
                 {"parity_residual", v.parity_residual},
                 {"sector_Q", b.spec.Q},
                 {"sector_dimension", sector_dimension(b.spec.site_space, b.spec.lattice.size(), b.spec.Q)}};
    o.payload["summary"] = summary(b, "violations", double(v.failures.size()), v.pass ? "pass" : "fail");
    o.exit_code = v.pass ? 0 : 2;
    return o;
}

Outcome run_spectrum(const json& c) {
    Outcome o;
    const Built b = build(c);
    const SpectralOptions opt = spectral_options(c);
    const GroundData g = ground_data(*b.sys, {}, opt);
    const int levels = c["numeric"]["levels"];
    std::vector<double> lv;
    if (b.sys->dim() <= opt.dense_cap) {
        const EigenPairs ep = eig_dense(b.sys->dense_h({}));
        for (int i = 0; i < std::min<int>(levels, ep.e.size()); ++i) lv.push_back(ep.e(i) + b.sys->energy_offset());
    } else {
        const LanczosResult lr = lanczos_lowest(b.sys->h({}), std::min(levels, b.sys->dim()), opt);
        for (int i = 0; i < lr.values.size(); ++i) lv.push_back(lr.values(i));
    }
    o.payload = {{"backend", b.sys->kind()},
                 {"dim", b.sys->dim()},
                 {"occupied", b.sys->occupied()},
                 {"E0", g.E0},
                 {"gap", g.gap},
                 {"degenerate", g.degenerate},
                 {"iterative", g.iterative},
                 {"residual", g.residual},
                 {b.sys->occupied() > 1 ? "single_particle_levels" : "levels", lv}};
    o.payload["summary"] = summary(b, "gap", g.gap, g.degenerate ? "fail" : "info");
    return o;
}

Outcome run_conductance(const json& c) {
    Outcome o;
    const Built b = build(c);
    const SpectralOptions opt = spectral_options(c);
    const bool oracle = oracle_applicable(b);
    Csv curve{"curvature", {"theta_x", "theta_y", "g", "sigma_tilde", "gap"}, {}};
    if (oracle) curve.header.push_back("oracle_g");
    json rows = json::array();
    double worst = 0.0;
    for (const auto& [tx, ty] : pairs(c["numeric"]["points"], "numeric.points")) {
        const CurvatureSample s = kubo_curvature(*b.sys, tx, ty, opt);
        json row = {{"theta_x", tx}, {"theta_y", ty}, {"g", s.g}, {"sigma_tilde", 2 * kPi * s.g}, {"gap", s.gap},
                    {"iterative", s.iterative}};
        std::vector<double> cr{tx, ty, s.g, 2 * kPi * s.g, s.gap};
        if (oracle) {
            const double og = oracle_curvature(*b.recipe, b.spec.lattice.L(), tx, ty);
            row["oracle_g"] = og;
            row["oracle_difference"] = std::abs(og - s.g);
            worst = std::max(worst, std::abs(og - s.g));
            cr.push_back(og);
        }
        rows.push_back(row);
        curve.rows.push_back(cr);
    }
    o.payload = {{"backend", b.sys->kind()}, {"points", rows}};
    const double sigma = rows.empty() ? 0.0 : rows[0]["sigma_tilde"].get<double>();
    if (oracle) {
        o.payload["oracle_max_difference"] = worst;
        o.payload["summary"] = summary(b, "max |g - g_oracle|", worst, worst <= 1e-7 ? "pass" : "fail");
    } else {
        o.payload["summary"] = summary(b, "sigma_tilde", sigma, "info");
    }
    o.curves.push_back(curve);
    return o;
}

Outcome run_chern(const json& c, int workers) {
    Outcome o;
    const Built b = build(c);
    ChernOptions co;
    co.perturbation = c["numeric"]["perturbation"];
    co.with_curvature = c["numeric"]["with_curvature"];
    co.workers = workers;
    const int n = c["numeric"]["grid_n"];
    const ChernResult r = chern_number(*b.sys, n, co, spectral_options(c));
    o.payload = {{"backend", b.sys->kind()},
                 {"grid_n", n},
                 {"chern", r.chern},
                 {"integer", r.integer},
                 {"integrality", r.integrality},
                 {"min_gap", r.gaps.minCoeff()},
                 {"perturbed", r.perturbed}};
    if (r.curvature_integral) o.payload["curvature_integral"] = *r.curvature_integral;
    bool ok = r.integrality <= 1e-9;
    if (oracle_applicable(b)) {
        const OracleChern oc = oracle_chern(*b.recipe, b.spec.lattice.L(), n);
        o.payload["oracle_chern"] = oc.chern;
        o.payload["oracle_integer"] = oc.integer;
        o.payload["oracle_match"] = oc.integer == r.integer;
        ok = ok && oc.integer == r.integer;
    }
    Csv grid{"grid", {"i", "j", "theta_x", "theta_y", "plaquette_flux", "gap"}, {}};
    if (co.with_curvature) grid.header.push_back("curvature");
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            std::vector<double> row{double(i), double(j), 2 * kPi * i / n, 2 * kPi * j / n, r.plaquettes(j, i),
                                    r.gaps(j, i)};
            if (co.with_curvature) row.push_back(r.curvature(j, i));
            grid.rows.push_back(row);
        }
    o.curves.push_back(grid);
    o.payload["summary"] = summary(b, "chern", r.chern, ok ? "pass" : "fail");
    return o;
}

Outcome run_loop_phase(const json& c) {
    Outcome o;
    const Built b = build(c);
    const SpectralOptions opt = spectral_options(c);
    const GroundData g = gapped_ground(*b.sys, opt);
    const SpectralFilter f = make_filter(c, g.gap);
    const double g00 = kubo_curvature(*b.sys, 0, 0, opt).g;
    const double L = b.spec.lattice.L();
    const double dbound = b.spec.Q_max() * b.spec.J * L;
    const double rbound = 1.0 / (16 * b.spec.Q_max() * (b.spec.J / g.gap) * L);
    FluxEvolver ev(b.sys, f, integrator_options(c));
    const LoopPhaseResult r =
        loop_phase_conductance(ev, numbers(c["numeric"]["r_list"], "numeric.r_list"), g00, g.psi0, dbound, rbound);
    json rows = json::array();
    Csv curve{"loop_phase", {"r", "phi", "phi_over_r2", "deviation", "modulus", "min_gap"}, {}};
    bool modulus_ok = true;
    for (const auto& row : r.rows) {
        rows.push_back({{"r", row.r},
                        {"phi", row.phi},
                        {"phi_over_r2", row.phi_over_r2},
                        {"deviation", row.deviation},
                        {"modulus", row.modulus},
                        {"min_gap", finite(row.min_gap)}});
        curve.rows.push_back({row.r, row.phi, row.phi_over_r2, row.deviation, row.modulus, row.min_gap});
        modulus_ok = modulus_ok && std::abs(row.modulus - 1.0) <= 1e-6;
    }
    bool ratios_ok = !r.ratios.empty();
    for (double q : r.ratios) ratios_ok = ratios_ok && q <= 0.75;
    json gb = json::array();
    for (const auto& x : r.gap_bounds)
        gb.push_back({{"bound", x.bound}, {"measured_min", x.measured_min}, {"vacuous", x.vacuous}, {"holds", x.holds}});
    o.payload = {{"backend", b.sys->kind()}, {"g00", g00},      {"Delta", f.delta()},          {"gamma", g.gap},
                 {"rows", rows},              {"ratios", r.ratios}, {"radius_bound", rbound},
                 {"gap_bounds", gb},          {"modulus_ok", modulus_ok}, {"ratios_ok", ratios_ok},
                 {"stats", stats_json(ev.stats())}};
    o.curves.push_back(curve);
    const double last = r.rows.empty() ? 0.0 : r.rows.back().deviation;
    o.payload["summary"] = summary(b, "deviation at smallest r", last, ratios_ok && modulus_ok ? "pass" : "fail");
    return o;
}

Outcome run_stokes(const json& c) {
    Outcome o;
    const Built b = build(c);
    const GroundData g = gapped_ground(*b.sys, spectral_options(c));
    const SpectralFilter f = make_filter(c, g.gap);
    const int N = c["numeric"]["N"].is_null() ? 4 : c["numeric"]["N"].get<int>();
    const bool full = c["numeric"]["full_unitary"];
    FluxEvolver ev(b.sys, f, integrator_options(c));
    const StokesTable t = stokes_product(ev, N, full, g.psi0);
    const OverlapBound ob = overlap_table_bound(t);
    json p = json::array();
    Csv curve{"stokes", {"k", "re", "im", "abs"}, {}};
    for (std::size_t k = 0; k < t.p.size(); ++k) {
        p.push_back(cjson(t.p[k]));
        curve.rows.push_back({double(k + 1), t.p[k].real(), t.p[k].imag(), std::abs(t.p[k])});
    }
    o.payload = {{"backend", b.sys->kind()},
                 {"N", N},
                 {"r", t.r},
                 {"Delta", f.delta()},
                 {"full_unitary", full},
                 {"p", p},
                 {"delta", t.delta},
                 {"product_overlap", cjson(t.product_overlap)},
                 {"big_loop_overlap", cjson(t.big_loop_overlap)},
                 {"product_residual", finite(t.product_residual)},
                 {"overlap_bound",
                  {{"left", ob.left}, {"right", finite(ob.right)}, {"holds", ob.holds}, {"unit_modulus_ok", ob.unit_modulus_ok}}},
                 {"stats", stats_json(t.stats)}};
    o.curves.push_back(curve);
    if (full) {
        const bool ok = t.product_residual <= N * N * 1e-7;
        o.payload["summary"] = summary(b, "||V_loop - prod U_k||", t.product_residual, ok ? "pass" : "fail");
    } else {
        const double d = std::abs(t.product_overlap - t.big_loop_overlap);
        o.payload["summary"] = summary(b, "|p_prod - p_big|", d, d <= N * N * 1e-7 ? "pass" : "fail");
    }
    return o;
}

Outcome run_quantize(const json& c) {
    Outcome o;
    const Built b = build(c);
    QuantizationOptions q;
    if (c["filter"]["delta"].is_number()) q.delta = c["filter"]["delta"].get<double>();
    q.filter = filter_kind_from_string(c["filter"]["kind"]);
    if (!c["numeric"]["N"].is_null()) q.N = c["numeric"]["N"].get<int>();
    q.integrator = integrator_options(c);
    const QuantizationReport r = quantization_report(b.sys, q);
    o.payload = {{"backend", b.sys->kind()},
                 {"sigma_tilde", r.sigma_tilde},
                 {"nearest_integer", r.nearest_integer},
                 {"distance", r.distance},
                 {"B1", r.B1},
                 {"B2", r.B2},
                 {"B3", r.B3},
                 {"lhs", r.lhs},
                 {"triangle_holds", r.triangle_holds},
                 {"trig_applicable", r.trig_applicable},
                 {"trig_holds", r.trig_holds},
                 {"r", r.r_used},
                 {"N", r.N_used},
                 {"Delta", r.Delta_used},
                 {"gamma", r.gamma},
                 {"envelope", r.envelope},
                 {"envelope_M", r.envelope_M},
                 {"small_loop", cjson(r.small_loop)},
                 {"big_loop", cjson(r.big_loop)},
                 {"stats", stats_json(r.stats)}};
    const bool ok = r.distance <= 0.05 && r.triangle_holds;
    o.payload["summary"] = summary(b, "|sigma_tilde - n|", r.distance, ok ? "pass" : "fail");
    return o;
}

Outcome run_lemma_checks(const json& c, int workers) {
    Outcome o;
    const json& n = c["numeric"];
    const SpectralOptions sopt = spectral_options(c);
    DiagnosticsOptions dopt;
    dopt.integrator = integrator_options(c);
    dopt.seed = c["seed"].get<unsigned>();
    const Built b = build(c);

    std::vector<std::string> names;
    for (const auto& ch : n["checks"]) names.push_back(ch);
    std::vector<json> results(names.size());

    auto many_body = [&]() {
        Built mb = build(c, Backend::ManyBody);
        if (mb.sys->dim() > kDefaultDenseCap) config_error("sector dimension above the dense cap");
        return mb;
    };
    auto run_one = [&](int i) -> json {
        const std::string& name = names[i];
        if (name == "partial_trace") {
            const Built mb = many_body();
            const GroundData g = gapped_ground(*mb.sys, sopt);
            auto [a, bb] = partial_trace_check(mb.sys, n["theta"].get<double>(), make_filter(c, g.gap), dopt);
            return json::array({lemma_json(a), lemma_json(bb)});
        }
        if (name == "energy") {
            const Built mb = many_body();
            const GroundData g = gapped_ground(*mb.sys, sopt);
            return json::array({lemma_json(energy_estimate_check(mb.sys, n["theta"].get<double>(), make_filter(c, g.gap), dopt))});
        }
        if (name == "big_loop") {
            const GroundData g = gapped_ground(*b.sys, sopt);
            json out = json::array({lemma_json(big_loop_check(b.sys, make_filter(c, g.gap), dopt))});
            const std::vector<int> Ls = integers(n["L_list"], "numeric.L_list");
            if (!Ls.empty()) {
                std::vector<double> vals;
                for (int L : Ls) {
                    const Built bl = build(c, std::nullopt, L);
                    const GroundData gl = gapped_ground(*bl.sys, sopt);
                    vals.push_back(big_loop_check(bl.sys, make_filter(c, gl.gap), dopt).measured);
                }
                out.push_back(lemma_json(size_trend(LemmaId::BigLoop, "B2", Ls, vals)));
            }
            return out;
        }
        if (name == "twisting") {
            const json& t = n["twisting"];
            const Built tw = build(c, Backend::ManyBody, t["L"].get<int>(), std::optional<int>(t["Q"].get<int>()));
            if (tw.sys->dim() > kDefaultDenseCap) config_error("twisting sector above the dense cap");
            const GroundData g = gapped_ground(*tw.sys, sopt);
            const LocalTerm A = random_omega0_operator(tw.spec, dopt.seed);
            const std::optional<int> M = n["M"].is_null() ? std::nullopt : std::optional<int>(n["M"].get<int>());
            return json::array({lemma_json(twisting_check(tw.sys, A, t["theta"][0].get<double>(),
                                                          t["theta"][1].get<double>(), make_filter(c, g.gap), M, dopt))});
        }
        if (name == "translation") {
            const GroundData g = gapped_ground(*b.sys, sopt);
            return json::array({lemma_json(translation_check(b.sys, pairs(n["basepoints"], "numeric.basepoints"),
                                                             n["translation_r"].get<double>(), make_filter(c, g.gap), dopt))});
        }
        // loop_localization
        const Built mb = many_body();
        const GroundData g = gapped_ground(*mb.sys, sopt);
        const std::optional<int> M = n["M"].is_null() ? std::nullopt : std::optional<int>(n["M"].get<int>());
        return json::array({lemma_json(loop_localization_check(mb.sys, n["loop_theta"][0].get<double>(),
                                                               n["loop_theta"][1].get<double>(),
                                                               n["loop_r"].get<double>(), M, make_filter(c, g.gap), dopt))});
    };
    parallel_for(static_cast<int>(names.size()), workers, [&](int i) {
        try {
            results[i] = run_one(i);
        } catch (const Error& e) {
            const bool cfg = e.kind() == ErrorKind::Config;
            results[i] = json::array({{{"lemma", names[i]},
                                       {"status", cfg ? "skipped" : "failed"},
                                       {"reason", e.what()}}});
        }
    });
    json checks = json::array();
    int passed = 0, failed = 0, numerical = 0;
    for (const auto& r : results)
        for (const auto& x : r) {
            checks.push_back(x);
            if (x["status"] == "failed") ++numerical;
            if (x.contains("pass") && x["pass"].is_boolean()) (x["pass"].get<bool>() ? passed : failed)++;
        }
    o.payload = {{"backend", b.sys->kind()}, {"checks", checks}, {"passed", passed}, {"failed", failed},
                 {"numerical_failures", numerical}};
    o.payload["summary"] = summary(b, "failed checks", double(failed + numerical), failed + numerical ? "fail" : "pass");
    if (numerical) o.exit_code = 3;
    return o;
}

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p);
    if (!out) config_error("cannot write " + p.string());
    out << s;
}

}  // namespace

std::vector<std::string> experiment_names() { return kExperiments; }

json default_config() {
    const double pi = kPi;
    return {
        {"experiment", "validate"},
        {"model", {{"recipe", "qwz_fermion"}, {"params", json::object()}, {"file", ""}}},
        {"L", 3},
        {"Q", nullptr},
        {"backend", "auto"},
        {"filter", {{"delta", "gamma/2"}, {"kind", "spline"}}},
        {"numeric",
         {{"integrator_tol", 1e-9},
          {"spectral_tol", 1e-10},
          {"levels", 6},
          {"points", json::array({json::array({0.0, 0.0})})},
          {"grid_n", 8},
          {"with_curvature", false},
          {"perturbation", 1e-3},
          {"r_list", json::array({0.2, 0.1, 0.05})},
          {"N", nullptr},
          {"full_unitary", false},
          {"M", nullptr},
          {"theta", 2 * pi},
          {"basepoints", json::array({json::array({pi, 0.0}), json::array({0.0, pi}), json::array({pi, pi}),
                                      json::array({pi / 2, pi / 2})})},
          {"translation_r", 0.1},
          {"loop_theta", json::array({1.0, 0.5})},
          {"loop_r", 0.2},
          {"L_list", json::array()},
          {"twisting", {{"L", 8}, {"Q", 1}, {"theta", json::array({1.0, 0.5})}}},
          {"checks", kChecks}}},
        {"output", {{"directory", "results"}}},
        {"seed", 7}};
}

json resolve_config(const json& user, const std::vector<std::string>& overrides) {
    json u = user.is_null() ? json::object() : user;
    if (!u.is_object()) config_error("config must be a JSON object");
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) config_error("override '" + o + "' is not key=value");
        const std::string key = o.substr(0, eq);
        json* at = &u;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty()) config_error("override key '" + key + "' has an empty component");
            if (dot == std::string::npos) {
                (*at)[part] = parse_override_value(o.substr(eq + 1));
                break;
            }
            if (!at->contains(part) || !(*at)[part].is_object()) (*at)[part] = json::object();
            at = &(*at)[part];
            start = dot + 1;
        }
    }
    const json def = default_config();
    json out = def;
    merge_into(out, def, u, "");
    validate_config(out);
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const json& resolved) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(resolved.dump());
    return os.str();
}

RunOutput run_experiment(const json& resolved, const std::string& out_dir, int workers) {
    RunOutput out;
    const std::string exp = resolved["experiment"];
    const std::string hash = config_hash(resolved);
    const fs::path dir = out_dir.empty() ? fs::path(resolved["output"]["directory"].get<std::string>()) : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) config_error("cannot create output directory '" + dir.string() + "'");

    const std::string started = iso_now();
    Outcome oc;
    std::string status = "ok";
    try {
        if (exp == "validate") oc = run_validate(resolved);
        else if (exp == "spectrum") oc = run_spectrum(resolved);
        else if (exp == "conductance") oc = run_conductance(resolved);
        else if (exp == "chern") oc = run_chern(resolved, workers);
        else if (exp == "loop-phase") oc = run_loop_phase(resolved);
        else if (exp == "stokes") oc = run_stokes(resolved);
        else if (exp == "quantize") oc = run_quantize(resolved);
        else oc = run_lemma_checks(resolved, workers);
        if (oc.exit_code == 2) status = "validation_failure";
        if (oc.exit_code == 3) status = "numerical_failure";
    } catch (const Error& e) {
        oc.exit_code = static_cast<int>(e.kind());
        status = e.kind() == ErrorKind::Config ? "config_failure" : "numerical_failure";
        out.message = e.what();
        oc.payload = {{"error", e.what()}};
        oc.payload["summary"] = {{"model", resolved["model"]["recipe"]},
                                 {"L", resolved["L"]},
                                 {"metric", "error"},
                                 {"value", nullptr},
                                 {"verdict", "error"}};
        oc.curves.clear();
    }
    out.exit_code = oc.exit_code;
    out.record = {{"schema_version", kRecordSchemaVersion},
                  {"software_version", kSoftwareVersion},
                  {"experiment", exp},
                  {"config_hash", hash},
                  {"config", resolved},
                  {"status", status},
                  {"timestamps", {{"started", started}, {"finished", iso_now()}}},
                  {"payload", oc.payload}};
    const std::string stem = exp + "_" + hash;
    for (const auto& c : oc.curves) {
        const fs::path p = dir / (stem + "_" + c.name + ".csv");
        write_csv(p, c);
        out.files.push_back(p.string());
        out.record["curves"].push_back(p.filename().string());
    }
    if (exp == "lemma-checks" && oc.payload.contains("checks")) {
        std::ofstream ledger(dir / "lemma_ledger.jsonl", std::ios::app);
        if (!ledger) config_error("cannot append to the lemma ledger");
        for (const auto& ch : oc.payload["checks"]) ledger << json{{"config_hash", hash}, {"check", ch}}.dump() << "\n";
        out.files.push_back((dir / "lemma_ledger.jsonl").string());
    }
    const fs::path rp = dir / (stem + ".json");
    write_text(rp, out.record.dump(2) + "\n");
    out.files.insert(out.files.begin(), rp.string());
    return out;
}

ReportOutput report(const std::string& dir_name) {
    ReportOutput rep;
    const fs::path dir(dir_name);
    if (!fs::is_directory(dir)) config_error("'" + dir_name + "' is not a directory");
    struct Row {
        std::string hash, experiment, model, L, metric, value, verdict;
    };
    std::vector<Row> rows;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        try {
            std::ifstream in(p);
            const json r = json::parse(in);
            if (!r.is_object() || !r.contains("config_hash") || !r.contains("payload") ||
                !r["payload"].contains("summary"))
                throw std::runtime_error("not a result record");
            const json& s = r["payload"]["summary"];
            Row row;
            row.hash = r["config_hash"];
            row.experiment = r["experiment"];
            row.model = s["model"].is_string() ? s["model"].get<std::string>() : s["model"].dump();
            row.L = s["L"].dump();
            row.metric = s["metric"];
            row.value = s["value"].is_number() ? fmt(s["value"].get<double>()) : s["value"].dump();
            row.verdict = s["verdict"];
            rows.push_back(row);
        } catch (const std::exception& e) {
            rep.warnings.push_back("skipped " + p.filename().string() + ": " + e.what());
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.hash, a.experiment) < std::tie(b.hash, b.experiment);
    });
    const std::vector<std::string> head = {"config_hash", "experiment", "model", "L", "metric", "value", "verdict"};
    auto cells = [](const Row& r) {
        return std::vector<std::string>{r.hash, r.experiment, r.model, r.L, r.metric, r.value, r.verdict};
    };
    std::vector<std::size_t> width(head.size());
    for (std::size_t i = 0; i < head.size(); ++i) width[i] = head[i].size();
    for (const auto& r : rows) {
        const auto c = cells(r);
        for (std::size_t i = 0; i < c.size(); ++i) width[i] = std::max(width[i], c[i].size());
    }
    std::ostringstream t, csv;
    auto line = [&](const std::vector<std::string>& c) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            t << std::left << std::setw(static_cast<int>(width[i])) << c[i] << (i + 1 < c.size() ? "  " : "");
            csv << (i ? "," : "") << c[i];
        }
        t << "\n";
        csv << "\n";
    };
    line(head);
    for (const auto& r : rows) {
        line(cells(r));
        if (r.verdict == "fail" || r.verdict == "error") ++rep.attention;
    }
    for (const auto& w : rep.warnings) t << "warning: " << w << "\n";
    t << "records: " << rows.size() << "  attention: " << rep.attention << "\n";
    rep.rows = static_cast<int>(rows.size());
    rep.table = t.str();
    rep.csv = csv.str();
    write_text(dir / "report.txt", rep.table);
    write_text(dir / "report.csv", rep.csv);
    rep.files = {(dir / "report.txt").string(), (dir / "report.csv").string()};
    return rep;
}

}  // namespace hq
