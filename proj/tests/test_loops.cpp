#include <doctest.h>

#include "hallq/loops.hpp"
#include "hallq/models.hpp"

using namespace hq;

namespace {

std::shared_ptr<ModelSystem> xy3() { return ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3)); }

}  // namespace

TEST_CASE("composition law for flux evolution") {
    auto sys = xy3();
    const GroundData g = ground_data(*sys, {});
    IntegratorOptions io;
    io.tol = 1e-11;
    FluxEvolver ev(sys, SpectralFilter(g.gap / 2), io);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sys->dim(), sys->dim());
    const State whole = ev.U_X(0.2, 0.5, 0.7, id);
    const State split = ev.U_X(0.5, 0.5, 0.4, ev.U_X(0.2, 0.5, 0.3, id));
    CHECK((whole - split).norm() < 1e-8);
    CHECK((whole.adjoint() * whole - id).norm() < 1e-9);
    CHECK((ev.U_X(0.2, 0.5, 0.7, whole, true) - id).norm() < 1e-8);
}

TEST_CASE("constant Hamiltonian leaves the state unchanged") {
    const Eigen::MatrixXcd h = (Eigen::MatrixXcd(2, 2) << 1, 0.5, 0.5, -1).finished();
    auto sys = std::make_shared<FunctionSystem>(
        2, [=](double) { return h; }, [](double) -> Eigen::MatrixXcd { return Eigen::MatrixXcd::Zero(2, 2); });
    FluxEvolver ev(sys, SpectralFilter(0.5));
    const State psi0 = ground_data(*sys, {}).psi0;
    const LoopEvolution r = evolve_flux(ev, FluxAxis::ThetaX, {}, 2.0, psi0);
    CHECK((r.final_state - psi0).norm() < 1e-14);
}

TEST_CASE("quasi-adiabatic state follows the groundstate while gapped") {
    auto sys = xy3();
    const GroundData g0 = ground_data(*sys, {});
    IntegratorOptions io;
    io.tol = 1e-11;
    FluxEvolver ev(sys, SpectralFilter(g0.gap / 2), io);
    const LoopEvolution r = evolve_flux(ev, FluxAxis::ThetaX, {}, 1.2, g0.psi0);
    const GroundData g1 = ground_data(*sys, {1.2, 0, 0, 0});
    CHECK(std::abs(overlap(g1.psi0, r.final_state)) > 1 - 1e-9);
}

TEST_CASE("loops on an untwisted model are trivial") {
    auto sys = ModelSystem::create(make_model({"trivial_product", {}, 2}, 3));
    const GroundData g = ground_data(*sys, {});
    FluxEvolver ev(sys, SpectralFilter(g.gap / 2));
    const LoopEvolution r = loop_state(ev, 1.0, 2.0, 0.5, g.psi0);
    CHECK(std::abs(r.overlap - 1.0) < 1e-12);
}

TEST_CASE("Stokes table on a small sector") {
    auto sys = xy3();
    const GroundData g = ground_data(*sys, {});
    IntegratorOptions io;
    io.tol = 1e-10;
    FluxEvolver ev(sys, SpectralFilter(g.gap / 2), io);
    const StokesTable t = stokes_product(ev, 2, false, g.psi0);
    REQUIRE(t.p.size() == 4);
    CHECK(std::abs(t.product_overlap - t.big_loop_overlap) < 1e-6);
    const OverlapBound b = overlap_table_bound(t);
    CHECK(b.holds);
    CHECK(b.unit_modulus_ok);
}
