#include "hallq/loops.hpp"

#include <cmath>
#include <numbers>

#include "hallq/error.hpp"

namespace hq {

namespace {

constexpr double kPi = std::numbers::pi;

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

FluxAngles at(const FluxLeg& leg, double s) {
    return {leg.start.theta_x + s * leg.dir.theta_x, leg.start.phi_x + s * leg.dir.phi_x,
            leg.start.theta_y + s * leg.dir.theta_y, leg.start.phi_y + s * leg.dir.phi_y};
}

double defect(const State& phi) {
    const Eigen::MatrixXcd g = phi.adjoint() * phi;
    return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void polar(State& phi) {
    if (phi.cols() == 1) {
        phi /= phi.norm();
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi.adjoint() * phi);
    phi = phi * es.operatorInverseSqrt();
}

const FluxAngles kDirX{1, 0, 0, 0};
const FluxAngles kDirY{0, 0, 1, 0};

}  // namespace

void IntegratorStats::merge(const IntegratorStats& o) {
    steps += o.steps;
    rejected += o.rejected;
    rhs_evals += o.rhs_evals;
    max_error_estimate = std::max(max_error_estimate, o.max_error_estimate);
    max_defect = std::max(max_defect, o.max_defect);
    reorthogonalizations += o.reorthogonalizations;
    min_gap = std::min(min_gap, o.min_gap);
}

FluxEvolver::FluxEvolver(std::shared_ptr<const FluxSystem> hamiltonian, SpectralFilter filter, IntegratorOptions opt,
                         std::shared_ptr<const FluxSystem> derivative)
    : h_(std::move(hamiltonian)), a_(derivative ? std::move(derivative) : h_), filter_(filter), opt_(opt) {
    if (!h_) config_error("evolver needs a system");
    if (h_->dim() != a_->dim() || h_->occupied() != a_->occupied())
        config_error("generator Hamiltonian and derivative act on different spaces");
    if (h_->dim() > kDefaultDenseCap) config_error("flux evolution needs a dense-sized system");
    if (!(opt_.tol > 0)) config_error("integrator tolerance must be positive");
}

Eigen::MatrixXcd FluxEvolver::generator(const FluxAngles& f, const FluxAngles& dir) {
    const EigenPairs ep = eig_dense(h_->dense_h(f));
    const int N = h_->occupied();
    if (N < ep.e.size()) stats_.min_gap = std::min(stats_.min_gap, ep.e(N) - ep.e(N - 1));
    return qa_generator(ep, Eigen::MatrixXcd(a_->directional_dh(f, dir)), filter_);
}

State FluxEvolver::rhs(const FluxLeg& leg, double s, const State& phi) {
    ++stats_.rhs_evals;
    // same as generator() * phi, without forming D in the site basis
    const FluxAngles f = at(leg, s);
    const EigenPairs ep = eig_dense(h_->dense_h(f));
    const int N = h_->occupied();
    const int n = static_cast<int>(ep.e.size());
    if (N < n) stats_.min_gap = std::min(stats_.min_gap, ep.e(N) - ep.e(N - 1));
    Eigen::MatrixXcd De = ep.V.adjoint() * (a_->directional_dh(f, leg.dir) * ep.V);
    for (int k = 0; k < n; ++k)
        for (int m = 0; m < n; ++m) De(m, k) *= filter_.hat(ep.e(m) - ep.e(k));
    return cd(0.0, 1.0) * (ep.V * (De * (ep.V.adjoint() * phi)));
}

State FluxEvolver::apply(const FluxLeg& leg, const State& in, bool adjoint) {
    if (in.rows() != h_->dim()) config_error("state dimension does not match the system");
    State y = in;
    if (leg.length == 0.0) return y;
    // U^dag: integrate the same equation from s = length back to 0
    const double s0 = adjoint ? leg.length : 0.0;
    const double s1 = adjoint ? 0.0 : leg.length;
    const double sign = s1 > s0 ? 1.0 : -1.0;
    double s = s0;
    double h = std::min(opt_.h_init, std::abs(s1 - s0));
    State k1 = rhs(leg, s, y);
    long steps = 0;
    while (sign * (s1 - s) > 1e-15) {
        if (++steps > opt_.max_steps) numerical_error("integrator exceeded the step limit");
        h = std::min(h, std::abs(s1 - s));
        const double hs = sign * h;
        const State k2 = rhs(leg, s + c2 * hs, y + hs * (a21 * k1));
        const State k3 = rhs(leg, s + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
        const State k4 = rhs(leg, s + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = rhs(leg, s + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = rhs(leg, s + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        State y5 = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs(leg, s + hs, y5);
        const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = err.cwiseAbs().maxCoeff() / opt_.tol;
        if (en <= 1.0) {
            s += hs;
            y = std::move(y5);
            k1 = k7;
            ++stats_.steps;
            stats_.max_error_estimate = std::max(stats_.max_error_estimate, en);
            const double d = defect(y);
            stats_.max_defect = std::max(stats_.max_defect, d);
            if (d > 100 * opt_.tol) numerical_error("unitarity defect above 100 tol");
            if (d > opt_.tol / 10) {
                polar(y);
                ++stats_.reorthogonalizations;
                k1 = rhs(leg, s, y);
            }
        } else {
            ++stats_.rejected;
        }
        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= fac;
        if (h < opt_.h_min && sign * (s1 - s) > opt_.h_min) numerical_error("integrator step size underflow");
    }
    return y;
}

State FluxEvolver::U_X(double tx, double ty, double r, const State& in, bool adjoint) {
    return apply({{tx, 0, ty, 0}, kDirX, r}, in, adjoint);
}

State FluxEvolver::U_Y(double tx, double ty, double r, const State& in, bool adjoint) {
    return apply({{tx, 0, ty, 0}, kDirY, r}, in, adjoint);
}

State FluxEvolver::V(double tx, double ty, double px, double py, const State& in, bool adjoint) {
    if (!adjoint) return U_X(tx, py, px - tx, U_Y(tx, ty, py - ty, in));
    return U_Y(tx, ty, py - ty, U_X(tx, py, px - tx, in, true), true);
}

State FluxEvolver::W(double tx, double ty, double px, double py, const State& in, bool adjoint) {
    if (!adjoint) return U_Y(px, ty, py - ty, U_X(tx, ty, px - tx, in));
    return U_X(tx, ty, px - tx, U_Y(px, ty, py - ty, in, true), true);
}

State FluxEvolver::loop(double tx, double ty, double r, const State& in) {
    return V(tx, ty, tx + r, ty + r, W(tx, ty, tx + r, ty + r, in), true);
}

LoopEvolution evolve_flux(FluxEvolver& ev, FluxAxis axis, const FluxAngles& start, double length, const State& in) {
    if (axis != FluxAxis::ThetaX && axis != FluxAxis::ThetaY) config_error("evolve_flux moves theta_x or theta_y");
    ev.reset_stats();
    LoopEvolution out;
    out.final_state = ev.apply({start, axis == FluxAxis::ThetaX ? kDirX : kDirY, length}, in);
    out.stats = ev.stats();
    out.norm_defect = defect(out.final_state);
    return out;
}

LoopEvolution loop_state(FluxEvolver& ev, double tx, double ty, double r, const State& psi0) {
    if (!(r > 0)) config_error("loop side r must be positive");
    ev.reset_stats();
    LoopEvolution out;
    State s = psi0;
    const bool moved = tx != 0.0 || ty != 0.0;
    if (moved) s = ev.V(0, 0, tx, ty, s);
    s = ev.loop(tx, ty, r, s);
    if (moved) s = ev.V(0, 0, tx, ty, s, true);
    out.final_state = s;
    out.overlap = overlap(psi0, s);
    out.stats = ev.stats();
    out.norm_defect = defect(s);
    return out;
}

StokesTable stokes_product(FluxEvolver& ev, int N, bool full_unitary, const State& psi0) {
    if (N < 1) config_error("Stokes decomposition needs N >= 1");
    const int d = ev.system().dim();
    if (full_unitary && ev.system().occupied() != 1) config_error("full-unitary mode needs the many-body backend");
    StokesTable t;
    t.N = N;
    t.r = 2 * kPi / N;
    t.full_unitary = full_unitary;
    ev.reset_stats();
    const State start = full_unitary ? State(Eigen::MatrixXcd::Identity(d, d)) : psi0;
    std::vector<State> U(N * N);  // U_k applied to `start`, index k - 1
    std::vector<Eigen::MatrixXcd> factors;
    for (int n = 0; n < N; ++n)
        for (int m = 0; m < N; ++m) {
            const double tx = m * t.r, ty = n * t.r;
            State s = start;
            const bool moved = m != 0 || n != 0;
            if (moved) s = ev.V(0, 0, tx, ty, s);
            s = ev.loop(tx, ty, t.r, s);
            if (moved) s = ev.V(0, 0, tx, ty, s, true);
            U[(N - m) + n * N - 1] = s;
        }
    t.p.resize(N * N);
    for (int k = 0; k < N * N; ++k) t.p[k] = full_unitary ? psi0.col(0).dot(U[k] * psi0.col(0)) : overlap(psi0, U[k]);
    for (int k = 0; k < N * N; ++k) t.delta = std::max(t.delta, std::abs(t.p[k] - t.p[N - 1]));

    const State big = ev.loop(0, 0, 2 * kPi, start);
    if (full_unitary) {
        Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(d, d);
        for (int k = 0; k < N * N; ++k) prod = U[k] * prod;
        t.product_residual = Eigen::JacobiSVD<Eigen::MatrixXcd>(big - prod).singularValues()(0);
        t.product_overlap = psi0.col(0).dot(prod * psi0.col(0));
        t.big_loop_overlap = psi0.col(0).dot(big * psi0.col(0));
    } else {
        // sequential application of the factors to Psi0
        State s = psi0;
        for (int n = 0; n < N; ++n)
            for (int m = N - 1; m >= 0; --m) {
                const double tx = m * t.r, ty = n * t.r;
                const bool moved = m != 0 || n != 0;
                if (moved) s = ev.V(0, 0, tx, ty, s);
                s = ev.loop(tx, ty, t.r, s);
                if (moved) s = ev.V(0, 0, tx, ty, s, true);
            }
        t.product_overlap = overlap(psi0, s);
        t.big_loop_overlap = overlap(psi0, big);
    }
    t.stats = ev.stats();
    return t;
}

OverlapBound overlap_table_bound(const StokesTable& t) {
    OverlapBound b;
    const int n2 = t.N * t.N;
    const cd pN = t.p.at(t.N - 1);
    b.left = std::abs(t.product_overlap - std::pow(pN, n2));
    const double r2 = t.r * t.r;
    b.right = 4 * kPi * kPi * (std::sqrt(2 * t.delta / (r2 * r2)) + std::exp(4 * kPi * kPi * t.delta / r2) * t.delta / r2);
    b.slack = b.right - b.left;
    b.holds = b.left <= b.right + 1e-12;
    for (const cd& p : t.p)
        if (std::abs(p) > 1 + 1e-10) b.unit_modulus_ok = false;
    return b;
}

}  // namespace hq
