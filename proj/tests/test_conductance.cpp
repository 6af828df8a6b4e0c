#include <doctest.h>

#include <cmath>

#include "hallq/conductance.hpp"
#include "hallq/error.hpp"
#include "hallq/models.hpp"

using namespace hq;

TEST_CASE("dense and conjugate-gradient curvature agree") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 4));
    SpectralOptions it;
    it.dense_cap = 10;
    const CurvatureSample a = kubo_curvature(*sys, 0.4, 1.1);
    const CurvatureSample b = kubo_curvature(*sys, 0.4, 1.1, it);
    CHECK_FALSE(a.iterative);
    CHECK(b.iterative);
    CHECK(std::abs(a.g - b.g) < 1e-9);
}

TEST_CASE("Kubo curvature matches finite differences of the groundstate") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const double g = kubo_curvature(*sys, 0.3, 0.8).g;
    CHECK(std::abs(curvature_finite_difference(*sys, 0.3, 0.8, 1e-3) - g) < 1e-5);
}

TEST_CASE("Slater curvature matches the free-fermion oracle") {
    const ModelRecipe rec{"qwz_fermion", {}, {}};
    auto sys = ModelSystem::create(make_model(rec, 3));
    CHECK(sys->occupied() == 9);
    for (auto [tx, ty] : {std::pair{0.0, 0.0}, std::pair{1.7, 4.2}}) {
        CHECK(std::abs(kubo_curvature(*sys, tx, ty).g - oracle_curvature(rec, 3, tx, ty)) < 1e-7);
    }
}

TEST_CASE("Chern number on the Slater backend") {
    for (double m : {1.0, 3.0}) {
        const ModelRecipe rec{"qwz_fermion", {{"m", m}}, {}};
        auto sys = ModelSystem::create(make_model(rec, 3));
        ChernOptions co;
        co.with_curvature = true;
        const ChernResult c = chern_number(*sys, 6, co);
        CHECK(c.integrality < 1e-9);
        CHECK(c.integer == oracle_chern(rec, 3, 6).integer);
        CHECK(c.integer == (m == 1.0 ? -1 : 0));
        REQUIRE(c.curvature_integral);
        // plaquette sum and curvature integral differ by discretization only
        CHECK(std::abs(*c.curvature_integral - c.chern) < 0.2);
    }
}

TEST_CASE("Chern number on the many-body backend for bosons is an integer") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const ChernResult c = chern_number(*sys, 6);
    CHECK(c.integrality < 1e-9);
}

TEST_CASE("gapless model raises a numerical error") {
    auto sys = ModelSystem::create(make_model({"qwz_fermion", {{"m", -2.0}}, {}}, 3));
    CHECK_THROWS_AS(kubo_curvature(*sys, 0, 0), Error);
}

TEST_CASE("loop phase approaches the curvature") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const GroundData g = ground_data(*sys, {});
    const double g00 = kubo_curvature(*sys, 0, 0).g;
    FluxEvolver ev(sys, SpectralFilter(g.gap / 2));
    const LoopPhaseResult r = loop_phase_conductance(ev, {0.2, 0.1}, g00, g.psi0, 10.0, 0.01);
    REQUIRE(r.rows.size() == 2);
    CHECK(std::abs(r.rows[1].phi_over_r2 - g00) < 1e-3);
    CHECK(r.ratios[0] < 0.5);
}
