#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "hallq/quasiadiabatic.hpp"

namespace hq {

struct IntegratorOptions {
    double tol = 1e-9;  // 1e-8 is the usual choice for full unitaries
    double h_init = 0.05;
    double h_min = 1e-12;
    long max_steps = 2000000;
};

struct IntegratorStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;
    double max_error_estimate = 0.0;  // largest accepted local error, in units of tol
    double max_defect = 0.0;          // largest unitarity defect before correction
    long reorthogonalizations = 0;
    double min_gap = std::numeric_limits<double>::infinity();

    void merge(const IntegratorStats& o);
};

// Straight segment start + s * dir, s from 0 to length (length may be negative).
struct FluxLeg {
    FluxAngles start;
    FluxAngles dir;
    double length = 0.0;
};

// Integrates d/ds Phi = i D(s) Phi with D = S(H(f(s)), d_dir H(f(s))).
// The Hamiltonian for the filter comes from `hamiltonian`, the derivative
// from `derivative` (the same system unless a truncated or restricted
// generator is wanted). Phi is a state or, in full-unitary mode, a unitary.
class FluxEvolver {
public:
    FluxEvolver(std::shared_ptr<const FluxSystem> hamiltonian, SpectralFilter filter, IntegratorOptions opt = {},
                std::shared_ptr<const FluxSystem> derivative = nullptr);

    const FluxSystem& system() const { return *h_; }
    const SpectralFilter& filter() const { return filter_; }
    const IntegratorOptions& options() const { return opt_; }
    const IntegratorStats& stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }

    Eigen::MatrixXcd generator(const FluxAngles& f, const FluxAngles& dir);

    // U(leg) Phi, or U(leg)^dag Phi when adjoint is set.
    State apply(const FluxLeg& leg, const State& in, bool adjoint = false);

    // U_X(tx, ty, r): twist theta_x from tx to tx + r at fixed theta_y = ty.
    State U_X(double tx, double ty, double r, const State& in, bool adjoint = false);
    State U_Y(double tx, double ty, double r, const State& in, bool adjoint = false);
    // V: along theta_y first, then theta_x. W: theta_x first, then theta_y.
    State V(double tx, double ty, double px, double py, const State& in, bool adjoint = false);
    State W(double tx, double ty, double px, double py, const State& in, bool adjoint = false);
    // Counter-clockwise square of side r at (tx, ty): V^dag W.
    State loop(double tx, double ty, double r, const State& in);

private:
    std::shared_ptr<const FluxSystem> h_;
    std::shared_ptr<const FluxSystem> a_;
    SpectralFilter filter_;
    IntegratorOptions opt_;
    IntegratorStats stats_;

    State rhs(const FluxLeg& leg, double s, const State& phi);
};

struct LoopEvolution {
    State final_state;
    cd overlap{1.0, 0.0};  // with the groundstate at the origin
    IntegratorStats stats;
    double norm_defect = 0.0;
};

LoopEvolution evolve_flux(FluxEvolver& ev, FluxAxis axis, const FluxAngles& start, double length, const State& in);

// Psi_loop(tx, ty, r) = V(0 -> t)^dag V_loop(t, r) V(0 -> t) Psi0.
LoopEvolution loop_state(FluxEvolver& ev, double tx, double ty, double r, const State& psi0);

struct StokesTable {
    int N = 1;
    double r = 0.0;
    std::vector<cd> p;          // p_k = <Psi0|U_k Psi0>, k = 1..N^2
    double delta = 0.0;         // sup_k |p_k - p_N|
    cd product_overlap;         // <Psi0|U_{N^2} ... U_1 Psi0>
    cd big_loop_overlap;        // <Psi0|V_loop(0, 0, 2 pi) Psi0>
    double product_residual = std::numeric_limits<double>::quiet_NaN();  // full-unitary mode only
    bool full_unitary = false;
    IntegratorStats stats;
};

// Index k = (N - m) + n N, 0 <= m, n < N, for the loop at (m r, n r).
// U_k = V(0 -> (m r, n r))^dag V_loop(m r, n r, r) V(0 -> (m r, n r)).
StokesTable stokes_product(FluxEvolver& ev, int N, bool full_unitary, const State& psi0);

struct OverlapBound {
    double left = 0.0;   // |p_[1, N^2] - p_N^(N^2)|
    double right = 0.0;  // 4 pi^2 (sqrt(2 delta r^-4) + exp(4 pi^2 delta r^-2) delta r^-2)
    double slack = 0.0;
    bool holds = true;
    bool unit_modulus_ok = true;  // |p_k| <= 1 + 1e-10
};

OverlapBound overlap_table_bound(const StokesTable& t);

}  // namespace hq
