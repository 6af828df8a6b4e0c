#include <doctest.h>

#include <random>

#include "hallq/error.hpp"
#include "hallq/models.hpp"

using namespace hq;

namespace {

const std::vector<std::pair<std::string, int>> kZoo{
    {"trivial_product", 4}, {"xy_flux_boson", 2}, {"qwz_fermion", 2}, {"qwz_interacting", 2}};

Eigen::MatrixXcd random_hermitian(int d, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = cd(g(rng), g(rng));
    return (m + m.adjoint()) / 2.0;
}

}  // namespace

TEST_CASE("zoo models validate") {
    for (const auto& [name, Q] : kZoo) {
        const ValidationReport v = validate_model(make_model({name, {}, Q}, 4));
        CHECK_MESSAGE(v.pass, name);
        CHECK(v.hermiticity_residual < 1e-12);
    }
}

TEST_CASE("zero flux gives the untwisted sum of terms") {
    for (const auto& [name, Q] : kZoo) {
        const ModelSpec s = make_model({name, {}, Q}, 3);
        const SectorBasis b = build_sector_basis(s.lattice, s.site_space, s.Q);
        SpMat h(b.dim(), b.dim());
        for (const auto& t : s.terms) h += embed_local_operator(t, b);
        CHECK(Eigen::MatrixXcd(assemble_twisted(s, b, {}).matrix - h).norm() < 1e-12);
    }
}

TEST_CASE("analytic flux derivative matches central differences") {
    const ModelSpec s = make_model({"xy_flux_boson", {}, 2}, 4);
    const SectorBasis b = build_sector_basis(s.lattice, s.site_space, s.Q);
    const FluxAngles f{0.4, 0.9, 1.7, 2.5};
    const double h = 1e-4;
    for (FluxAxis a : {FluxAxis::ThetaX, FluxAxis::PhiX, FluxAxis::ThetaY, FluxAxis::PhiY}) {
        FluxAngles p = f, m = f;
        double* pp = a == FluxAxis::ThetaX ? &p.theta_x : a == FluxAxis::PhiX ? &p.phi_x : a == FluxAxis::ThetaY ? &p.theta_y : &p.phi_y;
        double* mm = a == FluxAxis::ThetaX ? &m.theta_x : a == FluxAxis::PhiX ? &m.phi_x : a == FluxAxis::ThetaY ? &m.theta_y : &m.phi_y;
        *pp += h;
        *mm -= h;
        const Eigen::MatrixXcd fd =
            Eigen::MatrixXcd(assemble_twisted(s, b, p).matrix - assemble_twisted(s, b, m).matrix) / (2 * h);
        const Eigen::MatrixXcd an(flux_derivative(s, b, f, a));
        CHECK_MESSAGE(op_norm(fd - an) < 1e-6, to_string(a));
        CHECK(op_norm(an) > 0.1);
    }
}

TEST_CASE("twist and anti-twist is a charge rotation") {
    const ModelSpec s = make_model({"xy_flux_boson", {}, 2}, 4);
    const SectorBasis b = build_sector_basis(s.lattice, s.site_space, s.Q);
    const Eigen::MatrixXcd h0(assemble_twisted(s, b, {}).matrix);
    const Eigen::VectorXd qx = charge_operator(named_region(s.lattice, {RegionLabel::XHalf}), b);
    const double th = 1.1;
    const Eigen::MatrixXcd ht(assemble_twisted(s, b, {th, -th, 0, 0}).matrix);
    const double plus = op_norm(ht - twist_conjugate(h0, qx, th));
    const double minus = op_norm(ht - twist_conjugate(h0, qx, -th));
    CHECK(std::min(plus, minus) < 1e-12);
}

TEST_CASE("twist_conjugate agrees with the matrix exponential") {
    std::mt19937 rng(3);
    const Eigen::MatrixXcd a = random_hermitian(5, rng);
    const Eigen::VectorXd q = (Eigen::VectorXd(5) << 0, 1, 1, 2, 3).finished();
    const double th = 0.83;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(5, 5);
    for (int i = 0; i < 5; ++i) u(i, i) = std::polar(1.0, th * q(i));
    CHECK((twist_conjugate(a, q, th) - u * a * u.adjoint()).norm() < 1e-14);
}

TEST_CASE("symmetrization equals the twist average") {
    std::mt19937 rng(11);
    for (const SiteSpace& ss : {SiteSpace::hardcore_boson(), SiteSpace::fermions(2)}) {
        const int d = ss.dim() * ss.dim();
        const LocalTerm t{{0, 1}, random_hermitian(d, rng), "random"};
        const LocalTerm exact = symmetrize_interaction(t, ss);
        // charges differ by at most 2 q_max, so 16 points average exactly
        CHECK((symmetrize_by_quadrature(t, ss, 16).matrix - exact.matrix).norm() < 1e-12);
        CHECK((symmetrize_interaction(exact, ss).matrix - exact.matrix).norm() == 0.0);
        CHECK(op_norm(exact.matrix) <= op_norm(t.matrix) + 1e-12);
    }
    const LocalTerm bad{{0}, (Eigen::MatrixXcd(2, 2) << 0, 1, 0, 0).finished(), "non-Hermitian"};
    CHECK_THROWS_AS(symmetrize_interaction(bad, SiteSpace::hardcore_boson()), Error);
}

TEST_CASE("bulk terms do not see the flux") {
    const ModelSpec s = make_model({"xy_flux_boson", {}, 2}, 6);
    const std::vector<TermRule> rules = term_rules(s);
    int bulk = 0;
    for (std::size_t i = 0; i < s.terms.size(); ++i) {
        if (rules[i].cx != 3 || rules[i].cy != 3) continue;
        ++bulk;
        const Eigen::MatrixXcd t0 = twisted_term(s, s.terms[i], {});
        CHECK((twisted_term(s, s.terms[i], {1.0, 2.0, 3.0, 4.0}) - t0).norm() == 0.0);
    }
    CHECK(bulk > 0);
}
