#include "hallq/conductance.hpp"

#include <cmath>
#include <numbers>

#include "hallq/error.hpp"
#include "hallq/parallel.hpp"

namespace hq {

namespace {

constexpr double kPi = std::numbers::pi;

// Solves P (H - E0) P u = P b on the complement of psi.
Eigen::VectorXcd projected_cg(const SpMat& H, double E0, const Eigen::VectorXcd& psi, const Eigen::VectorXcd& b,
                              double tol, int max_iter) {
    auto project = [&](Eigen::VectorXcd v) {
        v -= psi * psi.dot(v);
        return v;
    };
    auto op = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXcd w = H * v - E0 * v;
        return project(std::move(w));
    };
    const Eigen::VectorXcd rhs = project(b);
    const double bn = rhs.norm();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(b.size());
    if (bn == 0.0) return x;
    Eigen::VectorXcd r = rhs, p = r;
    double rr = r.squaredNorm();
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXcd Ap = op(p);
        const double alpha = rr / p.dot(Ap).real();
        x += alpha * p;
        r -= alpha * Ap;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= tol * bn) return project(x);
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    numerical_error("conjugate gradient did not converge in the curvature solve");
}

}  // namespace

CurvatureSample kubo_curvature(const FluxSystem& sys, double tx, double ty, const SpectralOptions& opt,
                               const State* warm) {
    CurvatureSample out;
    out.theta_x = tx;
    out.theta_y = ty;
    const FluxAngles f{tx, 0, ty, 0};
    if (sys.dim() <= opt.dense_cap) {
        const EigenPairs ep = eig_dense(sys.dense_h(f));
        const int N = sys.occupied();
        const int n = static_cast<int>(ep.e.size());
        if (N >= n) {
            out.gap = std::numeric_limits<double>::infinity();
            return out;
        }
        out.gap = ep.e(N) - ep.e(N - 1);
        if (out.gap < opt.degeneracy_tol) numerical_error("degenerate groundstate in the curvature evaluation");
        const Eigen::MatrixXcd Ax = ep.V.adjoint() * sys.dense_dh(f, FluxAxis::ThetaX) * ep.V;
        const Eigen::MatrixXcd Ay = ep.V.adjoint() * sys.dense_dh(f, FluxAxis::ThetaY) * ep.V;
        double s = 0.0;
        for (int i = 0; i < N; ++i)
            for (int a = N; a < n; ++a) {
                const double de = ep.e(a) - ep.e(i);
                s += (Ay(i, a) * Ax(a, i)).imag() / (de * de);
            }
        out.g = 2.0 * s;
        return out;
    }
    if (sys.occupied() != 1) config_error("iterative curvature needs a many-body system");
    const GroundData g = ground_data(sys, f, opt, warm);
    out.gap = g.gap;
    out.iterative = true;
    if (g.degenerate) numerical_error("degenerate groundstate in the curvature evaluation");
    const SpMat H = sys.h(f);
    const Eigen::VectorXcd psi = g.psi0.col(0);
    const Eigen::VectorXcd bx = sys.dh(f, FluxAxis::ThetaX) * psi;
    const Eigen::VectorXcd by = sys.dh(f, FluxAxis::ThetaY) * psi;
    const double E0 = g.E0 - sys.energy_offset();
    const Eigen::VectorXcd ux = projected_cg(H, E0, psi, bx, 1e-13, 5000);
    const Eigen::VectorXcd uy = projected_cg(H, E0, psi, by, 1e-13, 5000);
    out.g = 2.0 * uy.dot(ux).imag();
    return out;
}

double curvature_finite_difference(const FluxSystem& sys, double tx, double ty, double h, const SpectralOptions& opt) {
    if (sys.occupied() != 1) config_error("finite-difference curvature needs a many-body system");
    auto psi = [&](double x, double y) { return ground_data(sys, {x, 0, y, 0}, opt).psi0.col(0).eval(); };
    const Eigen::VectorXcd dx = (psi(tx + h, ty) - psi(tx - h, ty)) / 2.0;
    const Eigen::VectorXcd dy = (psi(tx, ty + h) - psi(tx, ty - h)) / 2.0;
    return 2.0 * dy.dot(dx).imag() / (h * h);
}

LoopPhaseResult loop_phase_conductance(FluxEvolver& ev, const std::vector<double>& r_list, double g00,
                                       const State& psi0, double derivative_bound, double radius_bound) {
    LoopPhaseResult out;
    out.g00 = g00;
    out.radius_bound = radius_bound;
    for (double r : r_list) {
        // Lambda(r): the square loop from the origin
        FluxPath path{{{0, 0, 0, 0}, {r, 0, 0, 0}, {r, 0, r, 0}, {0, 0, r, 0}, {0, 0, 0, 0}}};
        out.gap_bounds.push_back(gap_lower_bound(ev.system(), path, 8, derivative_bound));
        const LoopEvolution le = loop_state(ev, 0, 0, r, psi0);
        LoopPhaseRow row;
        row.r = r;
        row.phi = std::arg(le.overlap);
        row.phi_over_r2 = row.phi / (r * r);
        row.deviation = std::abs(row.phi_over_r2 - g00);
        row.modulus = std::abs(le.overlap);
        row.min_gap = le.stats.min_gap;
        out.rows.push_back(row);
    }
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        out.ratios.push_back(out.rows[i - 1].deviation > 0 ? out.rows[i].deviation / out.rows[i - 1].deviation : 0.0);
    return out;
}

ChernResult chern_number(const FluxSystem& sys, int grid_n, const ChernOptions& copt, const SpectralOptions& opt) {
    if (grid_n < 2) config_error("grid_n must be at least 2");
    ChernResult out;
    out.grid_n = grid_n;
    const int n = grid_n;
    std::vector<State> psi(n * n);
    out.gaps.resize(n, n);
    if (copt.with_curvature) out.curvature.resize(n, n);
    std::vector<std::string> notes(n);
    // rows in parallel, warm starts along each row
    parallel_for(n, copt.workers, [&](int j) {
        State warm;
        for (int i = 0; i < n; ++i) {
            double tx = 2 * kPi * i / n, ty = 2 * kPi * j / n;
            GroundData g = ground_data(sys, {tx, 0, ty, 0}, opt, warm.size() ? &warm : nullptr);
            if (g.degenerate) {
                notes[j] += "degenerate at (" + std::to_string(tx) + ", " + std::to_string(ty) + "), perturbed by " +
                            std::to_string(copt.perturbation) + ";";
                tx += copt.perturbation;
                ty += copt.perturbation;
                g = ground_data(sys, {tx, 0, ty, 0}, opt, warm.size() ? &warm : nullptr);
                if (g.degenerate)
                    numerical_error("groundstate degenerate at grid point (" + std::to_string(tx) + ", " +
                                    std::to_string(ty) + ") even after perturbation");
            }
            out.gaps(j, i) = g.gap;
            warm = g.psi0;
            psi[j * n + i] = std::move(g.psi0);
            if (copt.with_curvature) out.curvature(j, i) = kubo_curvature(sys, tx, ty, opt, &warm).g;
        }
    });
    for (const auto& s : notes)
        if (!s.empty()) out.perturbed.push_back(s);
    out.plaquettes.resize(n, n);
    double total = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const State& a = psi[j * n + i];
            const State& b = psi[j * n + (i + 1) % n];
            const State& c = psi[((j + 1) % n) * n + (i + 1) % n];
            const State& d = psi[((j + 1) % n) * n + i];
            const double f = -std::arg(overlap(a, b) * overlap(b, c) * overlap(c, d) * overlap(d, a));
            out.plaquettes(j, i) = f;
            total += f;
        }
    out.chern = total / (2 * kPi);
    out.integer = std::lround(out.chern);
    out.integrality = std::abs(out.chern - out.integer);
    if (copt.with_curvature) {
        const double cell = 2 * kPi / n;
        out.curvature_integral = out.curvature.sum() * cell * cell / (2 * kPi);
    }
    return out;
}

int default_loop_count(const ModelSystem& sys, const SpectralFilter& f, double* envelope, int* Mout) {
    const ModelSpec& spec = sys.spec();
    const double L = spec.lattice.L();
    const int M = static_cast<int>(std::lround(L / 48.0));
    const TruncationScan scan = truncation_error_scan(sys, f, {M});
    const double g = scan.A_norm > 0 ? scan.error.front() / scan.A_norm : 0.0;
    if (envelope) *envelope = g;
    if (Mout) *Mout = M;
    const double qjl = spec.Q_max() * spec.J * L;
    const double lnL = std::log(L);
    const double den = std::sqrt(qjl * lnL * lnL) * std::sqrt(g);
    if (!(den > 0)) return 16;
    const double N = std::floor(spec.Q_max() * (spec.J / f.delta()) * L / den);
    return static_cast<int>(std::clamp(N, 1.0, 16.0));
}

QuantizationReport quantization_report(const std::shared_ptr<const ModelSystem>& sys, const QuantizationOptions& q) {
    QuantizationReport rep;
    rep.model_id = sys->spec().name;
    rep.L = sys->spec().lattice.L();
    const GroundData g0 = ground_data(*sys, {});
    if (g0.degenerate) numerical_error("gapless origin: degenerate groundstate at zero flux");
    rep.gamma = g0.gap;
    rep.Delta_used = q.delta.value_or(g0.gap / 2);
    const SpectralFilter filter(rep.Delta_used, q.filter);

    const CurvatureSample k = kubo_curvature(*sys, 0, 0);
    rep.sigma_tilde = 2 * kPi * k.g;
    rep.nearest_integer = std::lround(rep.sigma_tilde);
    rep.distance = std::abs(rep.sigma_tilde - rep.nearest_integer);

    rep.N_used = q.N ? *q.N : default_loop_count(*sys, filter, &rep.envelope, &rep.envelope_M);
    if (rep.N_used < 1) config_error("loop count N must be positive");
    rep.r_used = 2 * kPi / rep.N_used;

    FluxEvolver ev(sys, filter, q.integrator);
    const LoopEvolution small = loop_state(ev, 0, 0, rep.r_used, g0.psi0);
    rep.stats.merge(small.stats);
    const LoopEvolution big = loop_state(ev, 0, 0, 2 * kPi, g0.psi0);
    rep.stats.merge(big.stats);
    rep.small_loop = small.overlap;
    rep.big_loop = big.overlap;

    const cd target = std::polar(1.0, 2 * kPi * rep.sigma_tilde);
    const cd power = std::pow(small.overlap, rep.N_used * rep.N_used);
    rep.B1 = std::abs(power - target);
    rep.B2 = std::abs(1.0 - big.overlap);
    rep.B3 = std::abs(big.overlap - power);
    rep.lhs = std::abs(1.0 - target);
    rep.triangle_holds = rep.lhs <= rep.B1 + rep.B2 + rep.B3 + 1e-9;
    rep.trig_applicable = rep.lhs <= 1.0;
    rep.trig_holds = !rep.trig_applicable || rep.distance <= std::sqrt(2.0) / (2 * kPi) * rep.lhs + 1e-12;
    return rep;
}

}  // namespace hq
