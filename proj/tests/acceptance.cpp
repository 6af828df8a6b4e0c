// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by number ("acceptance 2 7").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hallq/conductance.hpp"
#include "hallq/diagnostics.hpp"
#include "hallq/error.hpp"
#include "hallq/models.hpp"

using namespace hq;

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

// Criterion 1: quasi-adiabatic state tracks the groundstate along a gapped path.
Outcome adiabatic_exactness() {
    auto sys = ModelSystem::create(make_model({"qwz_fermion", {}, {}}, 3));
    const GroundData g0 = ground_data(*sys, {});
    const SpectralFilter f(g0.gap / 2, FilterKind::Spline);
    IntegratorOptions io;
    io.tol = 1e-10;
    FluxEvolver ev(sys, f, io);

    State phi = g0.psi0;
    double worst = 0.0, min_gap = g0.gap;
    FluxAngles at;
    const double step = M_PI / 4;
    for (int axis = 0; axis < 2; ++axis)
        for (int k = 0; k < 8; ++k) {
            FluxLeg leg;
            leg.start = at;
            leg.dir = axis == 0 ? FluxAngles{1, 0, 0, 0} : FluxAngles{0, 0, 1, 0};
            leg.length = step;
            phi = ev.apply(leg, phi);
            (axis == 0 ? at.theta_x : at.theta_y) += step;
            const GroundData g = ground_data(*sys, at);
            min_gap = std::min(min_gap, g.gap);
            worst = std::max(worst, 1.0 - std::abs(overlap(g.psi0, phi)));
        }
    min_gap = std::min(min_gap, ev.stats().min_gap);
    const bool gapped = min_gap >= f.delta();
    return {gapped && worst <= 1e-7, "backend " + sys->kind() + ", 16 checkpoints, max 1-fidelity " + sci(worst) +
                                         ", min gap " + fmt("%.4f", min_gap) + " vs Delta " + fmt("%.4f", f.delta())};
}

// Criterion 2: product of the N^2 small-loop unitaries equals the big loop.
Outcome stokes_identity() {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const GroundData g = ground_data(*sys, {});
    IntegratorOptions io;
    io.tol = 1e-10;
    FluxEvolver ev(sys, SpectralFilter(g.gap / 2), io);
    const int N = 4;
    const StokesTable t = stokes_product(ev, N, true, g.psi0);
    const double tol = N * N * 1e-7;
    return {t.product_residual <= tol, "xy_flux_boson L=3 dim " + std::to_string(sys->dim()) + ", residual " +
                                           sci(t.product_residual) + " <= " + sci(tol)};
}

// Criterion 3: phi(r)/r^2 approaches the Kubo curvature as r halves.
Outcome small_loop_phase() {
    auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, 3));
    const GroundData g = ground_data(*sys, {});
    const SpectralFilter f(g.gap / 2);
    const double g00 = kubo_curvature(*sys, 0, 0).g;
    const ModelSpec& s = sys->spec();
    const double L = s.lattice.L();
    FluxEvolver ev(sys, f);
    const LoopPhaseResult r = loop_phase_conductance(ev, {0.2, 0.1, 0.05}, g00, g.psi0, s.Q_max() * s.J * L,
                                                     1.0 / (16 * s.Q_max() * (s.J / g.gap) * L));
    bool ok = r.ratios.size() == 2;
    std::ostringstream d;
    d << "g00 " << sci(g00) << ", deviations";
    for (const auto& row : r.rows) {
        d << " " << sci(row.deviation);
        ok = ok && std::abs(row.modulus - 1.0) <= 1e-6;
    }
    d << ", ratios";
    for (double q : r.ratios) {
        d << " " << fmt("%.3f", q);
        ok = ok && q <= 0.75;
    }
    double mod = 0.0;
    for (const auto& row : r.rows) mod = std::max(mod, std::abs(row.modulus - 1.0));
    d << ", max |modulus-1| " << sci(mod);
    return {ok, d.str()};
}

// Criterion 4: many-body Chern number against the free-fermion oracle.
Outcome chern_agreement() {
    const ModelRecipe rec{"qwz_fermion", {}, {}};
    auto sys = ModelSystem::create(make_model(rec, 3), Backend::ManyBody);
    const ChernResult c = chern_number(*sys, 8);
    const OracleChern oc = oracle_chern(rec, 3, 8);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double tx = u(rng), ty = u(rng);
        const double g = kubo_curvature(*sys, tx, ty).g;
        worst = std::max(worst, std::abs(g - oracle_curvature(rec, 3, tx, ty)));
    }
    const bool ok = c.integrality <= 1e-9 && c.integer == oc.integer && worst <= 1e-7;
    return {ok, "dim " + std::to_string(sys->dim()) + ", C " + fmt("%.12f", c.chern) + " (oracle " +
                    std::to_string(oc.integer) + "), |C-round| " + sci(c.integrality) + ", max curvature error " +
                    sci(worst)};
}

// Criterion 5: big loop returns to the groundstate; coupled-model trend in L.
Outcome big_loop_trend() {
    std::ostringstream d;
    bool ok = true;
    d << "trivial B2";
    for (int L : {3, 4, 5}) {
        auto sys = ModelSystem::create(make_model({"trivial_product", {}, 2}, L));
        const GroundData g = ground_data(*sys, {});
        const double b2 = big_loop_check(sys, SpectralFilter(g.gap / 2)).measured;
        d << " " << sci(b2);
        ok = ok && b2 <= 1e-8;
    }
    std::vector<int> Ls{3, 4, 5};
    std::vector<double> b2s;
    for (int L : Ls) {
        auto sys = ModelSystem::create(make_model({"xy_flux_boson", {}, 2}, L));
        const GroundData g = ground_data(*sys, {});
        b2s.push_back(big_loop_check(sys, SpectralFilter(g.gap)).measured);
    }
    d << "; xy_flux_boson B2 (Delta = gamma)";
    for (double b : b2s) d << " " << sci(b);
    const bool trend = b2s[1] <= b2s[0] && b2s[2] <= b2s[1];
    d << (trend ? " non-increasing" : " increasing somewhere");
    return {ok && trend, d.str()};
}

// Criterion 6: truncated generator error on the 12-site chain.
Outcome truncation_decay() {
    auto sys = ModelSystem::create(make_chain());
    const GroundData g = ground_data(*sys, {});
    const TruncationScan s = truncation_error_scan(*sys, SpectralFilter(g.gap / 2), {2, 3, 4, 5});
    bool strict = true;
    for (std::size_t i = 1; i < s.error.size(); ++i) strict = strict && s.error[i] < s.error[i - 1];
    const bool tenfold = s.error.back() <= 0.1 * s.error.front();
    std::ostringstream d;
    d << "errors";
    for (double e : s.error) d << " " << sci(e);
    return {strict && tenfold, d.str()};
}

// Criterion 7: exact identities on every zoo model.
Outcome algebraic_identities() {
    const std::vector<std::pair<std::string, int>> zoo{
        {"trivial_product", 4}, {"xy_flux_boson", 2}, {"qwz_fermion", 2}, {"qwz_interacting", 2}};
    const std::vector<std::pair<double, double>> angles{{0.7, 0.0}, {1.3, 2.1}, {kTwoPi - 0.4, 4.0}};
    double spec_err = 0.0, bound_excess = -1e300, fd_excess = -1e300, idem = 0.0, growth = -1e300;
    double min_ratio = 1e300, fd_max = 0.0;
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;

    for (const auto& [name, Q] : zoo) {
        auto sys = ModelSystem::create(make_model({name, {}, Q}, 3), Backend::ManyBody);
        const ModelSpec& s = sys->spec();
        const Eigen::VectorXd e0 = eig_dense(sys->dense_h({})).e;
        for (const auto& [a, b] : angles) {
            const Eigen::VectorXd e = eig_dense(sys->dense_h({a, -a, b, -b})).e;
            spec_err = std::max(spec_err, (e - e0).cwiseAbs().maxCoeff());
            const double dn = op_norm(sys->dense_dh({a, 0, b, 0}, FluxAxis::ThetaX));
            bound_excess = std::max(bound_excess, dn - s.Q_max() * s.J * s.lattice.L());
        }

        // central differences along theta_x against the analytic derivative
        double third = 0.0;
        for (const auto& grp : sys->family().groups())
            if (grp.cx == 1 && grp.dqx != 0)
                third += std::pow(std::abs(grp.dqx), 3) * op_norm(Eigen::MatrixXcd(grp.M));
        auto fd_error = [&](double h, const FluxAngles& f) {
            FluxAngles p = f, m = f;
            p.theta_x += h;
            m.theta_x -= h;
            const Eigen::MatrixXcd fd = (sys->dense_h(p) - sys->dense_h(m)) / (2 * h);
            return op_norm(fd - sys->dense_dh(f, FluxAxis::ThetaX));
        };
        for (const auto& [a, b] : angles) {
            const FluxAngles f{a, 0, b, 0};
            const double h = 1e-4, err = fd_error(h, f);
            fd_max = std::max(fd_max, err);
            fd_excess = std::max(fd_excess, err - (h * h / 6) * third - 1e-10);
            if (third > 0) {
                const double e1 = fd_error(0.02, f), e2 = fd_error(0.01, f);
                if (e2 > 1e-13) min_ratio = std::min(min_ratio, e1 / e2);
            }
        }

        // random Hermitian two-site terms
        for (int k = 0; k < 4; ++k) {
            const int d = s.site_space.dim() * s.site_space.dim();
            Eigen::MatrixXcd m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = cd(gauss(rng), gauss(rng));
            m = (m + m.adjoint()).eval() / 2.0;
            const LocalTerm t{{0, 1}, m, "random"};
            const LocalTerm once = symmetrize_interaction(t, s.site_space);
            const LocalTerm twice = symmetrize_interaction(once, s.site_space);
            idem = std::max(idem, (twice.matrix - once.matrix).cwiseAbs().maxCoeff());
            growth = std::max(growth, op_norm(once.matrix) - op_norm(m));
        }
    }
    const bool ok = spec_err <= 1e-10 && bound_excess <= 1e-10 && fd_excess <= 0 && min_ratio >= 3.5 &&
                    idem <= 1e-10 && growth <= 1e-10;
    std::ostringstream d;
    d << "4 models: spectrum " << sci(spec_err) << ", max(||dH|| - Q_max J L) " << sci(bound_excess)
      << ", fd error at h=1e-4 " << sci(fd_max)
      << " (excess over h^2 bound " << sci(fd_excess) << ")" << ", min h-halving ratio " << fmt("%.3f", min_ratio)
      << ", idempotence " << sci(idem) << ", norm growth " << sci(growth);
    return {ok, d.str()};
}

// Criterion 8: end-to-end quantization on the 3x3 Chern insulator.
Outcome quantization() {
    auto sys = ModelSystem::create(make_model({"qwz_fermion", {}, {}}, 3));
    const QuantizationReport r = quantization_report(sys);
    std::ostringstream d;
    d << "sigma " << fmt("%.4f", r.sigma_tilde) << " (nearest " << r.nearest_integer << ", distance "
      << fmt("%.4f", r.distance) << "), N " << r.N_used << ", lhs " << fmt("%.4f", r.lhs) << " vs B1+B2+B3 "
      << fmt("%.4f", r.B1 + r.B2 + r.B3) << (r.triangle_holds ? " holds" : " violated");
    return {r.distance <= 0.05 && r.triangle_holds, d.str()};
}

// Criterion 9: loop overlaps are independent of the basepoint.
Outcome translation_uniformity() {
    auto sys = ModelSystem::create(make_model({"qwz_fermion", {}, {}}, 6));
    const GroundData g = ground_data(*sys, {});
    const SpectralFilter f(g.gap / 2);
    const std::vector<std::pair<double, double>> bp{{M_PI, 0}, {0, M_PI}, {M_PI, M_PI}, {M_PI / 2, M_PI / 2}};
    const LemmaCheckResult c = translation_check(sys, bp, 0.1, f);
    const TranslationScan s = translation_scan(sys, bp, {0.1, 0.0316, 0.01}, f);
    std::ostringstream d;
    d << "L=6, max difference at r=0.1 " << sci(c.measured) << ", scan";
    for (double m : s.max_difference) d << " " << sci(m);
    d << ", slope " << fmt("%.4f", s.fit.slope);
    return {c.measured <= 1e-3 && s.fit.slope >= 2.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"adiabatic simulation exactness", adiabatic_exactness},
        {"Stokes product identity", stokes_identity},
        {"small-loop phase vs Kubo", small_loop_phase},
        {"Chern integrality and oracle agreement", chern_agreement},
        {"big-loop triviality trend", big_loop_trend},
        {"truncation decay", truncation_decay},
        {"exact algebraic identities", algebraic_identities},
        {"end-to-end quantization", quantization},
        {"translation uniformity", translation_uniformity}};

    std::set<int> pick;
    for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!pick.empty() && !pick.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
