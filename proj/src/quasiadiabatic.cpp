#include "hallq/quasiadiabatic.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/MatrixFunctions>

#include "hallq/error.hpp"

namespace hq {

namespace {

constexpr double kPi = std::numbers::pi;

// 16-point Gauss-Legendre on [-1, 1]
constexpr double kGLx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
                            0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr double kGLw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
                            0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int k = 0; k < 8; ++k) s += kGLw[k] * (f(c - h * kGLx[k]) + f(c + h * kGLx[k]));
    return s * h;
}

// int_0^1 (2 l - l^3) sin(l t) dl
double inner_spline(double t) {
    if (std::abs(t) < 0.05) {
        const double t2 = t * t;
        return t * (7.0 / 15.0) - t * t2 * (9.0 / 35.0) / 6.0 + t * t2 * t2 * (11.0 / 63.0) / 120.0;
    }
    const double c = std::cos(t), s = std::sin(t), t2 = t * t;
    return (-t2 * t * c - t2 * s - 6 * t * c + 6 * s) / (t2 * t2);
}

double spline_w1(double t) {
    // W_1(t) for t > 0
    return (inner_spline(t) + kPi / 2 - sine_integral(t)) / kPi;
}

}  // namespace

std::string to_string(FilterKind k) { return k == FilterKind::Spline ? "spline" : "gaussian"; }

FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "spline") return FilterKind::Spline;
    if (s == "gaussian") return FilterKind::Gaussian;
    config_error("unknown filter kind '" + s + "'");
}

SpectralFilter::SpectralFilter(double delta, FilterKind kind) : delta_(delta), kind_(kind) {
    if (!(delta > 0.0)) config_error("filter threshold Delta must be positive");
    if (kind == FilterKind::Gaussian) {
        if (delta >= 1e8) config_error("gaussian filter needs Delta < 1e8");
        eps_cal_ = std::sqrt(2.0 * std::log(1e8 / delta));
    }
}

cd SpectralFilter::hat(double l) const {
    if (l == 0.0) return {0.0, 0.0};
    if (kind_ == FilterKind::Spline) {
        if (std::abs(l) >= delta_) return {0.0, 1.0 / l};
        const double d2 = delta_ * delta_;
        return {0.0, 2.0 * l / d2 - l * l * l / (d2 * d2)};
    }
    const double s = sigma();
    return {0.0, -std::expm1(-l * l / (2 * s * s)) / l};
}

double SpectralFilter::time_kernel(double t) const {
    if (t == 0.0) return 0.0;
    const double sg = t > 0 ? 1.0 : -1.0;
    if (kind_ == FilterKind::Gaussian) return 0.5 * sg * std::erfc(sigma() * std::abs(t) / std::sqrt(2.0));
    return sg * spline_w1(delta_ * std::abs(t));
}

double SpectralFilter::K() const {
    if (kind_ == FilterKind::Gaussian) return eps_cal_ * std::sqrt(2.0 / kPi);
    return kSplineK;
}

double sine_integral(double x) {
    if (x < 0) return -sine_integral(-x);
    if (x <= 4.0) {
        double term = x, sum = x;
        for (int n = 1; n < 40; ++n) {
            term *= -x * x / ((2.0 * n) * (2.0 * n + 1.0));
            const double add = term / (2.0 * n + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18) break;
        }
        return sum;
    }
    // Si(x) = Si(4) + int_4^x sin(t)/t dt, panels of width <= 1
    double s = sine_integral(4.0);
    const int panels = static_cast<int>(std::ceil(x - 4.0));
    const double h = (x - 4.0) / panels;
    for (int p = 0; p < panels; ++p)
        s += gauss16([](double t) { return std::sin(t) / t; }, 4.0 + p * h, 4.0 + (p + 1) * h);
    return s;
}

double measure_spline_K(double T, int cells_per_unit) {
    // Si accumulated cell by cell so the cost stays linear in T
    const int cells = static_cast<int>(std::ceil(T * cells_per_unit));
    const double h = T / cells;
    double si_left = 0.0, total = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double a = c * h, b = a + h, mid = 0.5 * (a + b), half = 0.5 * h;
        double cell = 0.0;
        for (int k = 0; k < 8; ++k)
            for (double sg : {-1.0, 1.0}) {
                const double t = mid + sg * half * kGLx[k];
                const double si = si_left + gauss16([](double u) { return u == 0 ? 1.0 : std::sin(u) / u; }, a, t);
                cell += kGLw[k] * std::abs((inner_spline(t) + kPi / 2 - si) / kPi);
            }
        total += cell * half;
        si_left += gauss16([](double u) { return u == 0 ? 1.0 : std::sin(u) / u; }, a, b);
    }
    return 2.0 * total;
}

Eigen::MatrixXcd qa_generator(const EigenPairs& eh, const Eigen::MatrixXcd& A, const SpectralFilter& f) {
    const Eigen::MatrixXcd Ae = eh.V.adjoint() * A * eh.V;
    const int n = static_cast<int>(eh.e.size());
    Eigen::MatrixXcd De(n, n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) De(m, k) = f.hat(eh.e(m) - eh.e(k)) * Ae(m, k);
    return eh.V * De * eh.V.adjoint();
}

Eigen::MatrixXcd qa_generator(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& A, const SpectralFilter& f) {
    return qa_generator(eig_dense(H), A, f);
}

Eigen::MatrixXcd qa_generator_time_quadrature(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& A,
                                              const SpectralFilter& f, int nodes_per_panel) {
    if (f.kind() != FilterKind::Gaussian) config_error("time quadrature needs the gaussian filter");
    if (nodes_per_panel != 16) config_error("time quadrature uses 16 nodes per panel");
    // erfc(x) < 1e-17 for x > 5.9
    const double T = 5.9 * std::sqrt(2.0) / f.sigma();
    const double spread = hermitian_norm(H) * 2.0 + f.delta();
    const int panels = std::max(4, static_cast<int>(std::ceil(T * spread / 2.0)));
    const double h = T / panels;
    const cd I(0.0, 1.0);
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(A.rows(), A.cols());
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h, half = 0.5 * h;
        for (int k = 0; k < 8; ++k)
            for (double sg : {-1.0, 1.0}) {
                const double t = mid + sg * half * kGLx[k];
                const Eigen::MatrixXcd U = (I * t * H).exp();
                const Eigen::MatrixXcd tau = U * A * U.adjoint();
                // W odd: W(t) tau_t + W(-t) tau_{-t} = W(t) (tau_t - tau_{-t})
                D += (kGLw[k] * half * f.time_kernel(t)) * (tau - U.adjoint() * A * U);
            }
    }
    return D;
}

double hermitian_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

SiteSet twist_support(const ModelSpec& spec, FluxAxis axis) {
    SiteSet out(spec.lattice, RegionLabel::Custom);
    for (const auto& t : spec.terms) {
        const TermRule r = twist_rule(spec.lattice, t.support, spec.R);
        const int cls = (axis == FluxAxis::ThetaX || axis == FluxAxis::PhiX) ? r.cx : r.cy;
        const int want = (axis == FluxAxis::ThetaX || axis == FluxAxis::ThetaY) ? 1 : 2;
        if (cls == want)
            for (int s : t.support) out.insert(s);
    }
    return out;
}

TermFilter terms_inside(const SiteSet& Z) {
    return [Z](const LocalTerm& t) {
        for (int s : t.support)
            if (!Z.contains(s)) return false;
        return true;
    };
}

QAGenerator qa_generator_truncated(const ModelSystem& sys, const Eigen::MatrixXcd& A, const SiteSet& support, int M,
                                   const FluxAngles& flux, const SpectralFilter& f, std::vector<std::string>* warnings) {
    const auto& lat = sys.spec().lattice;
    QAGenerator out;
    out.M = M;
    if (M > std::max(lat.Lx(), lat.Ly())) {
        if (warnings) warnings->push_back("M = " + std::to_string(M) + " exceeds the lattice extent; using the full Hamiltonian");
        out.support = SiteSet(lat, RegionLabel::Fattening).complement();
        out.D = qa_generator(sys.dense_h(flux), A, f);
        return out;
    }
    out.support = fattening(support, M);
    const auto local = sys.restricted(terms_inside(out.support));
    out.D = qa_generator(local->dense_h(flux), A, f);
    return out;
}

TruncationScan truncation_error_scan(const ModelSystem& sys, const SpectralFilter& f, const std::vector<int>& M_list,
                                     FluxAxis axis, const FluxAngles& flux) {
    if (sys.dim() > kDefaultDenseCap) config_error("truncation scan needs a dense-sized sector");
    TruncationScan out;
    const Eigen::MatrixXcd A = sys.dense_dh(flux, axis);
    out.A_norm = hermitian_norm(A);
    const Eigen::MatrixXcd S = qa_generator(sys.dense_h(flux), A, f);
    const SiteSet supp = twist_support(sys.spec(), axis);
    for (int M : M_list) {
        const QAGenerator g = qa_generator_truncated(sys, A, supp, M, flux, f, &out.warnings);
        out.M.push_back(M);
        out.error.push_back(hermitian_norm(S - g.D));
    }
    for (std::size_t i = 1; i < out.error.size(); ++i)
        if (out.error[i] > out.error[i - 1] + 1e-10) out.monotone = false;

    // least squares on log(error / ||A||) for errors above the noise floor
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < out.error.size(); ++i)
        if (out.error[i] > 1e-12 && out.A_norm > 0) pts.emplace_back(out.M[i], std::log(out.error[i] / out.A_norm));
    if (pts.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(pts.size());
        const double den = n * sxx - sx * sx;
        if (den > 0) {
            out.envelope_slope = (n * sxy - sx * sy) / den;
            out.envelope_intercept = (sy - out.envelope_slope * sx) / n;
            double r2 = 0;
            for (auto [x, y] : pts) r2 += std::pow(y - out.envelope_intercept - out.envelope_slope * x, 2);
            out.fit_residual = std::sqrt(r2 / n);
        }
    }
    return out;
}

}  // namespace hq
