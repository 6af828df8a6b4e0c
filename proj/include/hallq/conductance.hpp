#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hallq/loops.hpp"

namespace hq {

struct CurvatureSample {
    double theta_x = 0.0;
    double theta_y = 0.0;
    double g = 0.0;
    double gap = 0.0;
    bool iterative = false;
};

// g = 2 Im sum_n <0|dyH|n><n|dxH|0> / (E_n - E_0)^2, as an eigenbasis sum when
// the system is dense-sized and through two conjugate-gradient solves of
// (H - E0) u = (1 - P0) dH Psi0 otherwise.
CurvatureSample kubo_curvature(const FluxSystem& sys, double tx, double ty, const SpectralOptions& opt = {},
                               const State* warm = nullptr);

// 2 Im <D_y Psi|D_x Psi> / h^2 with central differences of gauge-fixed
// groundstates (many-body systems only).
double curvature_finite_difference(const FluxSystem& sys, double tx, double ty, double h,
                                   const SpectralOptions& opt = {});

struct LoopPhaseRow {
    double r = 0.0;
    double phi = 0.0;        // arg <Psi0|Psi_loop(r)>
    double phi_over_r2 = 0.0;
    double deviation = 0.0;  // |phi / r^2 - g(0,0)|
    double modulus = 0.0;    // |<Psi0|Psi_loop(r)>|
    double min_gap = 0.0;    // smallest gap met by the integrator
};

struct LoopPhaseResult {
    double g00 = 0.0;
    std::vector<LoopPhaseRow> rows;
    std::vector<double> ratios;  // deviation(r_{i+1}) / deviation(r_i)
    double radius_bound = 0.0;   // (16 Q_max (J / gamma) L)^-1, reported only
    std::vector<GapBound> gap_bounds;
};

LoopPhaseResult loop_phase_conductance(FluxEvolver& ev, const std::vector<double>& r_list, double g00,
                                       const State& psi0, double derivative_bound, double radius_bound);

struct ChernOptions {
    double perturbation = 1e-3;  // flux offset for degenerate grid points
    bool with_curvature = false;
    int workers = 1;
};

struct ChernResult {
    int grid_n = 0;
    double chern = 0.0;
    long integer = 0;
    double integrality = 0.0;    // |C - round(C)|
    Eigen::MatrixXd plaquettes;  // Berry flux, row = theta_y index
    Eigen::MatrixXd gaps;        // at grid points
    Eigen::MatrixXd curvature;   // kubo values at grid points when requested
    std::optional<double> curvature_integral;  // (1 / 2 pi) trapezoid of g
    std::vector<std::string> perturbed;
};

ChernResult chern_number(const FluxSystem& sys, int grid_n, const ChernOptions& copt = {},
                         const SpectralOptions& opt = {});

struct QuantizationOptions {
    std::optional<double> delta;  // filter threshold; gamma / 2 when empty
    FilterKind filter = FilterKind::Spline;
    std::optional<int> N;         // r = 2 pi / N; measured default when empty
    IntegratorOptions integrator;
};

struct QuantizationReport {
    double sigma_tilde = 0.0;
    long nearest_integer = 0;
    double distance = 0.0;
    double B1 = 0.0, B2 = 0.0, B3 = 0.0;
    double lhs = 0.0;            // |1 - exp(2 pi i sigma_tilde)|
    bool triangle_holds = true;  // lhs <= B1 + B2 + B3 + 1e-9
    bool trig_applicable = false;  // lhs <= 1, where the distance bound is valid
    bool trig_holds = true;
    double r_used = 0.0;
    int N_used = 0;
    double Delta_used = 0.0;
    double gamma = 0.0;
    double envelope = 0.0;       // measured truncation envelope used for the default r
    int envelope_M = 0;
    cd small_loop{1.0, 0.0};
    cd big_loop{1.0, 0.0};
    std::string model_id;
    int L = 0;
    IntegratorStats stats;
};

// Desk-scale choice of N = 2 pi / r: floor(Q_max (J / Delta) L /
// (sqrt(Q_max J L ln^2 L) sqrt(g(M)))), clamped to [1, 16], with g(M) the
// measured truncation error ||S - S^(M)|| / ||A|| at M = round(L / 48).
int default_loop_count(const ModelSystem& sys, const SpectralFilter& f, double* envelope = nullptr, int* M = nullptr);

QuantizationReport quantization_report(const std::shared_ptr<const ModelSystem>& sys, const QuantizationOptions& q = {});

}  // namespace hq
