#pragma once

#include <string>
#include <vector>

#include "hallq/spectral.hpp"

namespace hq {

enum class FilterKind { Spline, Gaussian };

std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);

// Delta * ||W||_1 for the spline filter; W_Delta(t) = W_1(Delta t), so the
// product is Delta-independent. Measured once with measure_spline_K.
constexpr double kSplineK = 1.801287;

// Odd filter with hat(l) = int W(t) e^{i l t} dt.
//   spline:   i / l for |l| >= Delta, i (2 l / Delta^2 - l^3 / Delta^4) inside
//   gaussian: i (1 - exp(-l^2 / 2 sigma^2)) / l, sigma = Delta / eps_cal,
//             eps_cal = sqrt(2 ln(1e8 / Delta)) so |hat - i/l| <= 1e-8 beyond Delta
class SpectralFilter {
public:
    explicit SpectralFilter(double delta, FilterKind kind = FilterKind::Spline);

    double delta() const { return delta_; }
    FilterKind kind() const { return kind_; }
    double eps_cal() const { return eps_cal_; }
    double sigma() const { return delta_ / eps_cal_; }

    cd hat(double lambda) const;
    double time_kernel(double t) const;
    // sup |hat| <= K / Delta and ||S(H, A)|| <= (K / Delta) ||A||
    double K() const;

private:
    double delta_;
    FilterKind kind_;
    double eps_cal_ = 0.0;
};

double sine_integral(double x);

// Quadrature of 2 int_0^T |W_1(t)| dt; the tail beyond T is O(1/T).
double measure_spline_K(double T = 2000.0, int cells_per_unit = 40);

struct QAGenerator {
    Eigen::MatrixXcd D;
    int M = -1;       // truncation radius, -1 when untruncated
    SiteSet support;  // Z(M) for truncated generators
};

// S(H, A) in the eigenbasis of H: D_mn = hat(E_m - E_n) A_mn.
Eigen::MatrixXcd qa_generator(const EigenPairs& eh, const Eigen::MatrixXcd& A, const SpectralFilter& f);
Eigen::MatrixXcd qa_generator(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& A, const SpectralFilter& f);

// Cross-check: Gauss-Legendre quadrature of int W(t) e^{iHt} A e^{-iHt} dt
// (gaussian kind only, propagators from the matrix exponential).
Eigen::MatrixXcd qa_generator_time_quadrature(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& A,
                                              const SpectralFilter& f, int nodes_per_panel = 16);

// Union of the supports of the terms that carry the theta_x (or theta_y) twist.
SiteSet twist_support(const ModelSpec& spec, FluxAxis axis);

// Terms whose support lies inside Z.
TermFilter terms_inside(const SiteSet& Z);

// S(H_{Z(M)}, A) with Z(M) the M-fattening of `support`. M beyond the
// lattice extent falls back to the full Hamiltonian (warning recorded).
QAGenerator qa_generator_truncated(const ModelSystem& sys, const Eigen::MatrixXcd& A, const SiteSet& support,
                                   int M, const FluxAngles& flux, const SpectralFilter& f,
                                   std::vector<std::string>* warnings = nullptr);

struct TruncationScan {
    std::vector<int> M;
    std::vector<double> error;  // ||S - S^(M)||
    double A_norm = 0.0;
    bool monotone = true;       // non-increasing within 1e-10
    // log(error / ||A||) ~ intercept + slope * M over the nonzero errors
    double envelope_slope = 0.0;
    double envelope_intercept = 0.0;
    double fit_residual = 0.0;
    std::vector<std::string> warnings;
};

TruncationScan truncation_error_scan(const ModelSystem& sys, const SpectralFilter& f, const std::vector<int>& M_list,
                                     FluxAxis axis = FluxAxis::ThetaX, const FluxAngles& flux = {});

double hermitian_norm(const Eigen::MatrixXcd& m);

}  // namespace hq
