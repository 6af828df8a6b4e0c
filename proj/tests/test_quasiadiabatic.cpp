#include <doctest.h>

#include <cmath>
#include <random>

#include "hallq/models.hpp"
#include "hallq/quasiadiabatic.hpp"

using namespace hq;

TEST_CASE("sine integral reference values") {
    CHECK(sine_integral(1.0) == doctest::Approx(0.946083070367183).epsilon(1e-13));
    CHECK(sine_integral(10.0) == doctest::Approx(1.658347594218874).epsilon(1e-12));
    CHECK(sine_integral(-2.0) == doctest::Approx(-1.605412976802695).epsilon(1e-13));
}

TEST_CASE("filter equals i/lambda beyond Delta") {
    const SpectralFilter s(0.5, FilterKind::Spline), g(0.5, FilterKind::Gaussian);
    for (double l : {0.5, 0.7, 2.0, -3.0}) {
        CHECK(std::abs(s.hat(l) - cd(0, 1 / l)) < 1e-15);
        CHECK(std::abs(g.hat(l) - cd(0, 1 / l)) <= 1e-8 + 1e-15);
    }
    CHECK(std::abs(s.hat(0.25) - cd(0, 2 * 0.25 / 0.25 - std::pow(0.25, 3) / 0.0625)) < 1e-15);
    CHECK(s.hat(-0.3) == -s.hat(0.3));
}

TEST_CASE("gaussian filter transform matches a direct quadrature of its kernel") {
    const SpectralFilter f(0.8, FilterKind::Gaussian);
    // hat(l) = 2 i int_0^inf W(t) sin(l t) dt, Simpson on a fine grid
    const double T = 8.0 / f.sigma();
    const int n = 200000;
    const double h = T / n;
    for (double l : {0.1, 0.6, 1.5}) {
        double sum = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = k * h;
            const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
            sum += w * f.time_kernel(t) * std::sin(l * t);
        }
        CHECK(std::abs(cd(0, 2 * sum * h / 3) - f.hat(l)) < 1e-7);
    }
}

TEST_CASE("spline K constant") {
    CHECK(measure_spline_K() == doctest::Approx(kSplineK).epsilon(1e-6));
    CHECK(SpectralFilter(0.4).K() == doctest::Approx(kSplineK));
}

TEST_CASE("eigenbasis generator agrees with time quadrature") {
    std::mt19937 rng(2);
    const Eigen::MatrixXcd r = Eigen::MatrixXcd::Random(8, 8);
    const Eigen::MatrixXcd H = (r + r.adjoint()) / 2.0;
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(8, 8);
    const Eigen::MatrixXcd A = (a + a.adjoint()) / 2.0;
    const SpectralFilter f(0.3, FilterKind::Gaussian);
    const Eigen::MatrixXcd d1 = qa_generator(H, A, f), d2 = qa_generator_time_quadrature(H, A, f);
    CHECK((d1 - d2).norm() < 1e-8 * d1.norm());
    CHECK((d1 - d1.adjoint()).norm() < 1e-12);
}

TEST_CASE("generator yields the adiabatic derivative of the groundstate projector") {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const Eigen::MatrixXcd H = sys->dense_h({}), A = sys->dense_dh({}, FluxAxis::ThetaX);
    const EigenPairs ep = eig_dense(H);
    const SpectralFilter f((ep.e(1) - ep.e(0)) / 2);
    const Eigen::MatrixXcd D = qa_generator(ep, A, f);
    const Eigen::MatrixXcd P = ep.V.col(0) * ep.V.col(0).adjoint();
    // dP from first-order perturbation theory
    Eigen::MatrixXcd dpsi = Eigen::MatrixXcd::Zero(H.rows(), 1);
    for (int n = 1; n < H.rows(); ++n)
        dpsi += ep.V.col(n) * (ep.V.col(n).adjoint() * A * ep.V.col(0)) / (ep.e(0) - ep.e(n));
    const Eigen::MatrixXcd dP = dpsi * ep.V.col(0).adjoint() + ep.V.col(0) * dpsi.adjoint();
    const cd i(0, 1);
    CHECK((i * (D * P - P * D) - dP).norm() < 1e-10);
}

TEST_CASE("truncation error vanishes once the fattening covers the lattice") {
    auto sys = ModelSystem::create(make_chain());
    const double gap = ground_data(*sys, {}).gap;
    const TruncationScan s = truncation_error_scan(*sys, SpectralFilter(gap / 2), {1, 2, 3, 6});
    CHECK(s.monotone);
    CHECK(s.error.back() < 1e-12);
    CHECK(s.error.front() > 1e-3);
}
