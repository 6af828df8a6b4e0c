#include <doctest.h>

#include <cmath>
#include <random>

#include "hallq/models.hpp"
#include "hallq/spectral.hpp"

using namespace hq;

TEST_CASE("Lanczos agrees with dense diagonalization") {
    const int n = 400;
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    std::vector<Eigen::Triplet<cd>> trip;
    for (int i = 0; i < n; ++i) {
        trip.emplace_back(i, i, cd(4.0 * g(rng), 0.0));
        for (int k = 0; k < 3; ++k) {
            const int j = std::uniform_int_distribution<int>(0, n - 1)(rng);
            if (j == i) continue;
            const cd v(g(rng), g(rng));
            trip.emplace_back(i, j, v);
            trip.emplace_back(j, i, std::conj(v));
        }
    }
    SpMat h(n, n);
    h.setFromTriplets(trip.begin(), trip.end());
    SpectralOptions opt;
    opt.tol = 1e-10;
    const LanczosResult r = lanczos_lowest(h, 2, opt);
    const Eigen::VectorXd e = eig_dense(Eigen::MatrixXcd(h)).e;
    CHECK(r.converged);
    CHECK(std::abs(r.values(0) - e(0)) < 1e-9);
    CHECK(std::abs(r.values(1) - e(1)) < 1e-8);
}

TEST_CASE("dense and iterative groundstates coincide") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 4));
    SpectralOptions it;
    it.dense_cap = 10;
    const GroundData a = ground_data(*sys, {0.3, 0, 0.2, 0});
    const GroundData b = ground_data(*sys, {0.3, 0, 0.2, 0}, it);
    CHECK(b.iterative);
    CHECK(std::abs(a.E0 - b.E0) < 1e-9);
    CHECK(std::abs(a.gap - b.gap) < 1e-8);
    CHECK(std::abs(std::abs(overlap(a.psi0, b.psi0)) - 1.0) < 1e-9);
}

TEST_CASE("fix_gauge makes the first large component real positive") {
    State s(3, 1);
    s << cd(1e-12, 0), cd(0, -0.6), cd(0.8, 0);
    fix_gauge(s);
    CHECK(std::abs(s(1, 0).imag()) < 1e-15);
    CHECK(s(1, 0).real() > 0);
}

TEST_CASE("Slater overlap is the determinant of orbital overlaps") {
    std::mt19937 rng(9);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(6, 3).householderQr().householderQ() * Eigen::MatrixXcd::Identity(6, 3);
    const Eigen::MatrixXcd b = Eigen::MatrixXcd::Random(6, 3).householderQr().householderQ() * Eigen::MatrixXcd::Identity(6, 3);
    CHECK(std::abs(overlap(a, b) - (a.adjoint() * b).determinant()) < 1e-13);
}

TEST_CASE("Berry phase of a spin in a precessing field is half the solid angle") {
    const double alpha = 0.9;
    const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, cd(0, -1), cd(0, 1), 0).finished();
    const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    FunctionSystem sys(
        2,
        [&](double t) -> Eigen::MatrixXcd {
            return -(std::sin(alpha) * (std::cos(t) * sx + std::sin(t) * sy) + std::cos(alpha) * sz);
        },
        [&](double t) -> Eigen::MatrixXcd { return -std::sin(alpha) * (-std::sin(t) * sx + std::cos(t) * sy); });
    FluxPath path;
    for (int k = 0; k <= 4; ++k) path.waypoints.push_back({k * M_PI / 2, 0, 0, 0});
    const TransportResult r = parallel_transport(sys, path, 200, 0.1);
    const cd expected = std::polar(1.0, -M_PI * (1 - std::cos(alpha)));
    CHECK(std::abs(r.closing_overlap - expected) < 1e-6);
}

TEST_CASE("gap lower bound holds along a path") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const ModelSpec& s = sys->spec();
    FluxPath path;
    path.waypoints = {{0, 0, 0, 0}, {0.3, 0, 0, 0}, {0.3, 0, 0.3, 0}};
    const GapBound b = gap_lower_bound(*sys, path, 8, s.Q_max() * s.J * 3);
    CHECK(b.holds);
    CHECK(b.measured_min >= b.bound);
    FluxPath zero;
    zero.waypoints = {{}};
    CHECK(gap_lower_bound(*sys, zero, 4, 1.0).bound == doctest::Approx(b.gap0));
}
