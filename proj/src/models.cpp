#include "hallq/models.hpp"

#include <cmath>
#include <numbers>

#include "hallq/error.hpp"

namespace hq {

namespace {

using Eigen::Matrix2cd;

constexpr double kPi = std::numbers::pi;

std::map<std::string, double> merged(const ModelRecipe& r) {
    auto p = recipe_defaults(r.name);
    for (const auto& [k, v] : r.params) {
        if (!p.count(k)) config_error("model '" + r.name + "' has no parameter '" + k + "'");
        p[k] = v;
    }
    return p;
}

void check_size(int L) {
    if (L < 3) config_error("L must exceed 2R = 2");
}

LocalTerm onsite(const SiteSpace& ss, int site, const Eigen::MatrixXcd& m, const std::string& tag) {
    return make_local_term(ss, {site}, m, tag);
}

// -t (e^{i a} b_j^dag b_i + h.c.)
LocalTerm boson_hop(const SiteSpace& ss, int i, int j, double t, double a) {
    LocalSpace ls(ss, 2);
    const Eigen::MatrixXcd bi = ls.lower(0), bj = ls.lower(1);
    Eigen::MatrixXcd m = -t * std::polar(1.0, a) * bj.adjoint() * bi;
    m += m.adjoint().eval();
    return make_local_term(ss, {i, j}, m, "hop");
}

Matrix2cd pauli(int k) {
    Matrix2cd s;
    if (k == 0) s << 0, 1, 1, 0;
    if (k == 1) s << 0, cd(0, -1), cd(0, 1), 0;
    if (k == 2) s << 1, 0, 0, -1;
    return s;
}

Matrix2cd qwz_T(int dir) { return (pauli(2) - cd(0, 1) * pauli(dir)) / 2.0; }

// t (c_j^dag T c_i + h.c.) for orbital spinors on sites i -> j
LocalTerm fermion_hop(const SiteSpace& ss, int i, int j, const Matrix2cd& T, double t) {
    LocalSpace ls(ss, 2);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ls.dim(), ls.dim());
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            if (std::abs(T(a, b)) > 0) m += t * T(a, b) * ls.create(1, a) * ls.annihilate(0, b);
    m += m.adjoint().eval();
    return make_local_term(ss, {i, j}, m, "hop");
}

ModelSpec trivial_product(const std::map<std::string, double>& p, int L, std::optional<int> Q) {
    ModelSpec s;
    s.name = "trivial_product";
    s.lattice = TorusLattice(L);
    s.site_space = SiteSpace::hardcore_boson();
    s.R = 1;
    s.k_max = 1;
    s.q_max = 1;
    s.Q = Q.value_or(s.lattice.size() / 2);
    LocalSpace ls(s.site_space, 1);
    for (int i = 0; i < s.lattice.size(); ++i) {
        const double mu = p.at("mu0") + p.at("delta") * i;
        s.terms.push_back(onsite(s.site_space, i, mu * ls.site_charge(0), "mu"));
        s.J = std::max(s.J, std::abs(mu));
    }
    return s;
}

ModelSpec xy_flux_boson(const std::map<std::string, double>& p, int L, std::optional<int> Q) {
    ModelSpec s;
    s.name = "xy_flux_boson";
    const auto& lat = s.lattice = TorusLattice(L);
    s.site_space = SiteSpace::hardcore_boson();
    s.R = 1;
    s.k_max = 2;
    s.q_max = 1;
    s.Q = Q.value_or(2);
    const double t = p.at("t"), stag = p.at("stagger");
    const double alpha = 2 * kPi * p.at("p") / (L * L);
    LocalSpace ls(s.site_space, 1);
    for (int y = 1; y <= L; ++y)
        for (int x = 1; x <= L; ++x) {
            const int i = lat.index({x, y});
            const double ax = x == L ? -alpha * L * y : 0.0;
            s.terms.push_back(boson_hop(s.site_space, i, lat.index(lat.wrap(x + 1, y)), t, ax));
            s.terms.push_back(boson_hop(s.site_space, i, lat.index(lat.wrap(x, y + 1)), t, alpha * x));
            if (stag != 0.0)
                s.terms.push_back(onsite(s.site_space, i, ((x + y) % 2 ? -stag : stag) * ls.site_charge(0), "stagger"));
        }
    s.J = 4 * std::abs(t) + std::abs(stag);
    return s;
}

ModelSpec qwz(const std::map<std::string, double>& p, int L, std::optional<int> Q, bool interacting) {
    ModelSpec s;
    s.name = interacting ? "qwz_interacting" : "qwz_fermion";
    const auto& lat = s.lattice = TorusLattice(L);
    s.site_space = SiteSpace::fermions(2);
    s.R = 1;
    s.k_max = 2;
    s.q_max = 2;
    s.Q = Q.value_or(L * L);
    const double t = p.at("t"), m = p.at("m");
    const double V = interacting ? p.at("V") : 0.0;
    LocalSpace l1(s.site_space, 1);
    LocalSpace l2(s.site_space, 2);
    const Eigen::MatrixXcd nn = l2.site_charge(0) * l2.site_charge(1);
    for (int y = 1; y <= L; ++y)
        for (int x = 1; x <= L; ++x) {
            const int i = lat.index({x, y});
            s.terms.push_back(onsite(s.site_space, i, m * (l1.number(0, 0) - l1.number(0, 1)), "mass"));
            const int jx = lat.index(lat.wrap(x + 1, y)), jy = lat.index(lat.wrap(x, y + 1));
            s.terms.push_back(fermion_hop(s.site_space, i, jx, qwz_T(0), t));
            s.terms.push_back(fermion_hop(s.site_space, i, jy, qwz_T(1), t));
            if (interacting && V != 0.0) {
                s.terms.push_back(make_local_term(s.site_space, {i, jx}, V * nn, "density"));
                s.terms.push_back(make_local_term(s.site_space, {i, jy}, V * nn, "density"));
            }
        }
    s.J = 4 * std::abs(t) + std::abs(m) + 16 * std::abs(V);
    return s;
}

bool quadratic_qwz(const ModelRecipe& r) {
    if (r.name == "qwz_fermion") return true;
    return r.name == "qwz_interacting" && merged(r).at("V") == 0.0;
}

// Lowest L^2 orbitals of the twisted Bloch matrix.
Eigen::MatrixXcd occupied_orbitals(const ModelRecipe& r, int L, double tx, double ty) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(qwz_bloch_matrix(r, L, tx, ty));
    return es.eigenvectors().leftCols(L * L);
}

cd det_overlap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a.adjoint() * b).determinant(); }

double plaquette_flux(const ModelRecipe& r, int L, double tx, double ty, double h) {
    const auto u00 = occupied_orbitals(r, L, tx - h / 2, ty - h / 2);
    const auto u10 = occupied_orbitals(r, L, tx + h / 2, ty - h / 2);
    const auto u11 = occupied_orbitals(r, L, tx + h / 2, ty + h / 2);
    const auto u01 = occupied_orbitals(r, L, tx - h / 2, ty + h / 2);
    const cd loop = det_overlap(u00, u10) * det_overlap(u10, u11) * det_overlap(u11, u01) * det_overlap(u01, u00);
    return -std::arg(loop);
}

}  // namespace

std::vector<std::string> model_names() { return {"trivial_product", "xy_flux_boson", "qwz_fermion", "qwz_interacting"}; }

std::map<std::string, double> recipe_defaults(const std::string& name) {
    if (name == "trivial_product") return {{"mu0", 1.0}, {"delta", 0.1}};
    if (name == "xy_flux_boson") return {{"t", 1.0}, {"p", 1.0}, {"stagger", 0.5}};
    if (name == "qwz_fermion") return {{"t", 1.0}, {"m", 1.0}};
    if (name == "qwz_interacting") return {{"t", 1.0}, {"m", 1.0}, {"V", 0.1}};
    config_error("unknown model '" + name + "'");
}

ModelSpec make_model(const ModelRecipe& recipe, int L) {
    const auto p = merged(recipe);
    check_size(L);
    ModelSpec s;
    if (recipe.name == "trivial_product") s = trivial_product(p, L, recipe.Q);
    else if (recipe.name == "xy_flux_boson") s = xy_flux_boson(p, L, recipe.Q);
    else if (recipe.name == "qwz_fermion") s = qwz(p, L, recipe.Q, false);
    else s = qwz(p, L, recipe.Q, true);
    s.params = p;
    return s;
}

ModelSpec make_chain(int n, double t, double stagger, std::optional<int> Q) {
    if (n < 3) config_error("chain needs at least 3 sites");
    ModelSpec s;
    s.name = "chain";
    s.lattice = TorusLattice(n, 1);
    s.site_space = SiteSpace::hardcore_boson();
    s.R = 1;
    s.k_max = 2;
    s.q_max = 1;
    s.Q = Q.value_or(n / 2);
    LocalSpace ls(s.site_space, 1);
    for (int x = 0; x < n; ++x) {
        s.terms.push_back(boson_hop(s.site_space, x, (x + 1) % n, t, 0.0));
        s.terms.push_back(onsite(s.site_space, x, (x % 2 ? -stagger : stagger) * ls.site_charge(0), "stagger"));
    }
    s.J = 2 * std::abs(t) + std::abs(stagger);
    s.params = {{"t", t}, {"stagger", stagger}};
    return s;
}

ModelSpec model_from_json(const nlohmann::json& j) {
    try {
        ModelSpec s;
        s.name = j.value("name", "custom");
        const auto& lat = j.at("lattice");
        s.lattice = TorusLattice(lat.at("Lx").get<int>(), lat.at("Ly").get<int>());
        const auto& site = j.at("site");
        s.site_space.boson_charges = site.value("boson_charges", std::vector<int>{0});
        s.site_space.fermion_modes = site.value("fermion_modes", 0);
        s.R = j.at("R").get<int>();
        s.k_max = j.at("k_max").get<int>();
        s.q_max = j.at("q_max").get<int>();
        s.J = j.at("J").get<double>();
        s.Q = j.at("Q").get<int>();
        for (const auto& t : j.at("terms")) {
            std::vector<int> support;
            for (const auto& xy : t.at("support")) {
                const Site st{xy.at(0).get<int>(), xy.at(1).get<int>()};
                if (!s.lattice.contains(st)) config_error("term support site off the lattice");
                support.push_back(s.lattice.index(st));
            }
            int d = 1;
            for (std::size_t k = 0; k < support.size(); ++k) d *= s.site_space.dim();
            const auto& entries = t.at("matrix");
            if (static_cast<int>(entries.size()) != d * d) config_error("term matrix has the wrong size");
            Eigen::MatrixXcd m(d, d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const auto& e = entries.at(a * d + b);
                    m(a, b) = e.is_array() ? cd(e.at(0).get<double>(), e.at(1).get<double>()) : cd(e.get<double>(), 0);
                }
            s.terms.push_back(make_local_term(s.site_space, support, m, t.value("tag", "")));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        config_error(std::string("model file: ") + e.what());
    }
}

nlohmann::json model_to_json(const ModelSpec& s) {
    nlohmann::json j;
    j["name"] = s.name;
    j["lattice"] = {{"Lx", s.lattice.Lx()}, {"Ly", s.lattice.Ly()}};
    j["site"] = {{"boson_charges", s.site_space.boson_charges}, {"fermion_modes", s.site_space.fermion_modes}};
    j["R"] = s.R;
    j["k_max"] = s.k_max;
    j["q_max"] = s.q_max;
    j["J"] = s.J;
    j["Q"] = s.Q;
    j["terms"] = nlohmann::json::array();
    for (const auto& t : s.terms) {
        nlohmann::json jt;
        jt["tag"] = t.tag;
        jt["support"] = nlohmann::json::array();
        for (int i : t.support) {
            const Site st = s.lattice.site(i);
            jt["support"].push_back({st.x, st.y});
        }
        jt["matrix"] = nlohmann::json::array();
        for (int a = 0; a < t.matrix.rows(); ++a)
            for (int b = 0; b < t.matrix.cols(); ++b) jt["matrix"].push_back({t.matrix(a, b).real(), t.matrix(a, b).imag()});
        j["terms"].push_back(jt);
    }
    return j;
}

Eigen::MatrixXcd qwz_bloch_matrix(const ModelRecipe& recipe, int L, double theta_x, double theta_y) {
    if (!quadratic_qwz(recipe)) config_error("free-fermion oracle needs a quadratic QWZ recipe");
    check_size(L);
    const auto p = merged(recipe);
    const double t = p.at("t"), m = p.at("m");
    const TorusLattice lat(L);
    const int n = 2 * lat.size();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    const Matrix2cd Tx = qwz_T(0), Ty = qwz_T(1);
    auto bond = [&](int i, int j, const Matrix2cd& T, cd phase) {
        h.block(2 * j, 2 * i, 2, 2) += t * phase * T;
        h.block(2 * i, 2 * j, 2, 2) += t * std::conj(phase) * T.adjoint();
    };
    for (int y = 1; y <= L; ++y)
        for (int x = 1; x <= L; ++x) {
            const int i = lat.index({x, y});
            h(2 * i, 2 * i) += m;
            h(2 * i + 1, 2 * i + 1) -= m;
            bond(i, lat.index(lat.wrap(x + 1, y)), Tx, x == L ? std::polar(1.0, theta_x) : cd(1.0));
            bond(i, lat.index(lat.wrap(x, y + 1)), Ty, y == L ? std::polar(1.0, theta_y) : cd(1.0));
        }
    return h;
}

double oracle_curvature(const ModelRecipe& recipe, int L, double theta_x, double theta_y) {
    const double h = 2e-3;
    const double g1 = plaquette_flux(recipe, L, theta_x, theta_y, h) / (h * h);
    const double g2 = plaquette_flux(recipe, L, theta_x, theta_y, 2 * h) / (4 * h * h);
    return (4 * g1 - g2) / 3;
}

OracleChern oracle_chern(const ModelRecipe& recipe, int L, int grid_n) {
    if (grid_n < 2) config_error("grid_n must be at least 2");
    std::vector<Eigen::MatrixXcd> u(grid_n * grid_n);
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i)
            u[j * grid_n + i] = occupied_orbitals(recipe, L, 2 * kPi * i / grid_n, 2 * kPi * j / grid_n);
    OracleChern out;
    out.plaquettes.resize(grid_n, grid_n);
    double total = 0.0;
    for (int j = 0; j < grid_n; ++j)
        for (int i = 0; i < grid_n; ++i) {
            const auto& a = u[j * grid_n + i];
            const auto& b = u[j * grid_n + (i + 1) % grid_n];
            const auto& c = u[((j + 1) % grid_n) * grid_n + (i + 1) % grid_n];
            const auto& d = u[((j + 1) % grid_n) * grid_n + i];
            const double f = -std::arg(det_overlap(a, b) * det_overlap(b, c) * det_overlap(c, d) * det_overlap(d, a));
            out.plaquettes(j, i) = f;
            total += f;
        }
    out.chern = total / (2 * kPi);
    out.integer = std::lround(out.chern);
    return out;
}

}  // namespace hq
