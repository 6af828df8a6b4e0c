#include "hallq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hallq/error.hpp"

namespace hq {

SpMat FluxSystem::directional_dh(const FluxAngles& f, const FluxAngles& dir) const {
    SpMat out(dim(), dim());
    const std::pair<FluxAxis, double> parts[] = {{FluxAxis::ThetaX, dir.theta_x},
                                                 {FluxAxis::PhiX, dir.phi_x},
                                                 {FluxAxis::ThetaY, dir.theta_y},
                                                 {FluxAxis::PhiY, dir.phi_y}};
    for (const auto& [axis, w] : parts)
        if (w != 0.0) out += w * dh(f, axis);
    return out;
}

std::string to_string(Backend b) {
    switch (b) {
        case Backend::Auto: return "auto";
        case Backend::ManyBody: return "many_body";
        case Backend::Quadratic: return "quadratic";
    }
    return "auto";
}

Backend backend_from_string(const std::string& s) {
    if (s == "auto") return Backend::Auto;
    if (s == "many_body" || s == "many-body") return Backend::ManyBody;
    if (s == "quadratic" || s == "slater") return Backend::Quadratic;
    config_error("unknown backend '" + s + "'");
}

std::shared_ptr<ModelSystem> ModelSystem::create(const ModelSpec& spec, Backend backend, int sector_cap) {
    std::shared_ptr<ModelSystem> sys(new ModelSystem);
    sys->spec_ = spec;
    if (backend == Backend::Auto) {
        backend = Backend::ManyBody;
        const auto& ss = spec.site_space;
        if (ss.fermion_modes > 0 && ss.boson_charges.size() == 1 &&
            sector_dimension(ss, spec.lattice.size(), spec.Q) > kDefaultDenseCap &&
            quadratic_residual(spec) <= 1e-10)
            backend = Backend::Quadratic;
    }
    sys->backend_ = backend;
    if (backend == Backend::Quadratic) {
        if (spec.Q < 1) config_error("single-particle backend needs at least one particle");
        QuadraticModel qm = extract_quadratic(spec);
        sys->family_ = std::move(qm.family);
        sys->occupied_ = qm.particles;
        sys->offset_ = qm.constant;
    } else {
        sys->basis_ = std::make_shared<SectorBasis>(build_sector_basis(spec.lattice, spec.site_space, spec.Q, sector_cap));
        sys->family_ = build_sector_family(spec, *sys->basis_);
    }
    return sys;
}

std::shared_ptr<ModelSystem> ModelSystem::restricted(const TermFilter& keep) const {
    std::shared_ptr<ModelSystem> sys(new ModelSystem(*this));
    if (backend_ == Backend::Quadratic) {
        QuadraticModel qm = extract_quadratic(spec_, keep);
        sys->family_ = std::move(qm.family);
        sys->offset_ = qm.constant;
    } else {
        sys->family_ = build_sector_family(spec_, *basis_, keep);
    }
    return sys;
}

SpMat FunctionSystem::dh(const FluxAngles& f, FluxAxis a) const {
    if (a != FluxAxis::ThetaX) return SpMat(dim_, dim_);
    return dh_(f.theta_x).sparseView();
}

EigenPairs eig_dense(const Eigen::MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success) numerical_error("dense eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

LanczosResult lanczos_lowest(const SpMat& H, int nev, const SpectralOptions& opt, const Eigen::VectorXcd* start) {
    const int n = static_cast<int>(H.rows());
    LanczosResult res;
    if (n <= std::max(opt.krylov_dim, 2 * nev + 2)) {
        EigenPairs ep = eig_dense(Eigen::MatrixXcd(H));
        const int k = std::min(nev, n);
        res.values = ep.e.head(k);
        res.vectors = ep.V.leftCols(k);
        res.residuals = Eigen::VectorXd::Zero(k);
        res.converged = true;
        return res;
    }
    const int m = std::min(opt.krylov_dim, n);
    const int keep = std::min(m - 2, std::max(nev + 16, m / 2));
    Eigen::MatrixXcd V(n, m), HV(n, m), T = Eigen::MatrixXcd::Zero(m, m);

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> nd;
    auto random_vector = [&] {
        Eigen::VectorXcd v(n);
        for (int i = 0; i < n; ++i) v(i) = cd(nd(rng), nd(rng));
        return v;
    };
    Eigen::VectorXcd v = (start && start->size() == n && start->norm() > 0) ? *start : random_vector();

    int j = 0;
    for (int restart = 0; restart < opt.max_restarts; ++restart) {
        while (j < m) {
            for (int pass = 0; pass < 2 && j > 0; ++pass)
                v -= V.leftCols(j) * (V.leftCols(j).adjoint() * v);
            double nv = v.norm();
            if (nv < 1e-12) {
                // invariant subspace reached; continue with a fresh direction
                v = random_vector();
                for (int pass = 0; pass < 2 && j > 0; ++pass)
                    v -= V.leftCols(j) * (V.leftCols(j).adjoint() * v);
                nv = v.norm();
            }
            V.col(j) = v / nv;
            HV.col(j) = H * V.col(j);
            ++res.matvecs;
            T.col(j).head(j + 1).noalias() = V.leftCols(j + 1).adjoint() * HV.col(j);
            T.row(j).head(j) = T.col(j).head(j).adjoint();
            T(j, j) = T(j, j).real();
            v = HV.col(j);
            ++j;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
        const Eigen::MatrixXcd Y = es.eigenvectors().leftCols(keep);
        const Eigen::MatrixXcd X = V * Y;
        const Eigen::MatrixXcd HX = HV * Y;
        res.values = es.eigenvalues().head(nev);
        res.residuals.resize(nev);
        bool ok = true;
        for (int i = 0; i < nev; ++i) {
            res.residuals(i) = (HX.col(i) - es.eigenvalues()(i) * X.col(i)).norm();
            // excited Ritz values are accurate to O(residual^2 / separation)
            const double want = i == 0 ? opt.tol : std::sqrt(opt.tol);
            if (res.residuals(i) > want * std::max(1.0, std::abs(es.eigenvalues()(i)))) ok = false;
        }
        if (ok) {
            res.vectors = X.leftCols(nev);
            res.converged = true;
            return res;
        }
        // continuation: residual direction of the full old basis
        v = HV.col(m - 1);
        for (int pass = 0; pass < 2; ++pass) v -= V * (V.adjoint() * v);
        V.leftCols(keep) = X;
        HV.leftCols(keep) = HX;
        T.setZero();
        for (int i = 0; i < keep; ++i) T(i, i) = es.eigenvalues()(i);
        j = keep;
    }
    numerical_error("Lanczos did not converge");
}

void fix_gauge(State& s) {
    if (s.cols() == 1) {
        for (int i = 0; i < s.rows(); ++i) {
            if (std::abs(s(i, 0)) > 1e-8) {
                s *= std::conj(s(i, 0)) / std::abs(s(i, 0));
                return;
            }
        }
        return;
    }
    const int N = static_cast<int>(s.cols());
    std::vector<int> rows;
    Eigen::MatrixXcd basis(N, N);
    for (int r = 0; r < s.rows() && static_cast<int>(rows.size()) < N; ++r) {
        Eigen::VectorXcd v = s.row(r).transpose();
        const int k = static_cast<int>(rows.size());
        for (int pass = 0; pass < 2 && k > 0; ++pass)
            v -= basis.leftCols(k) * (basis.leftCols(k).adjoint() * v);
        const double nv = v.norm();
        if (nv > 1e-8) {
            basis.col(k) = v / nv;
            rows.push_back(r);
        }
    }
    if (static_cast<int>(rows.size()) < N) return;
    Eigen::MatrixXcd minor(N, N);
    for (int i = 0; i < N; ++i) minor.row(i) = s.row(rows[i]);
    const cd d = minor.determinant();
    if (std::abs(d) > 0.0) s.col(0) *= std::conj(d) / std::abs(d);
}

cd overlap(const State& a, const State& b) {
    if (a.cols() == 1) return a.col(0).dot(b.col(0));
    return (a.adjoint() * b).determinant();
}

namespace {

GroundData from_pairs(const EigenPairs& ep, int N, double offset) {
    GroundData g;
    const int n = static_cast<int>(ep.e.size());
    if (N < 1 || N > n) config_error("occupied count outside the spectrum");
    g.E0 = ep.e.head(N).sum() + offset;
    g.gap = N < n ? ep.e(N) - ep.e(N - 1) : std::numeric_limits<double>::infinity();
    g.psi0 = ep.V.leftCols(N);
    return g;
}

double eigen_residual(const SpMat& H, const State& psi) {
    const Eigen::MatrixXcd Hp = H * psi;
    return (Hp - psi * (psi.adjoint() * Hp)).norm();
}

}  // namespace

GroundData ground_data(const Eigen::MatrixXcd& H, const SpectralOptions& opt) {
    GroundData g = from_pairs(eig_dense(H), 1, 0.0);
    g.degenerate = g.gap < opt.degeneracy_tol;
    fix_gauge(g.psi0);
    const Eigen::MatrixXcd Hp = H * g.psi0;
    g.residual = (Hp - g.psi0 * (g.psi0.adjoint() * Hp)).norm();
    return g;
}

GroundData ground_data(const FluxSystem& sys, const FluxAngles& f, const SpectralOptions& opt, const State* warm) {
    const SpMat H = sys.h(f);
    const int N = sys.occupied();
    GroundData g;
    if (sys.dim() <= opt.dense_cap) {
        g = from_pairs(eig_dense(Eigen::MatrixXcd(H)), N, sys.energy_offset());
    } else {
        if (N != 1) config_error("iterative eigensolver supports many-body states only");
        Eigen::VectorXcd start;
        if (warm && warm->rows() == sys.dim()) start = warm->col(0);
        const LanczosResult lr = lanczos_lowest(H, 2, opt, start.size() ? &start : nullptr);
        g.E0 = lr.values(0) + sys.energy_offset();
        g.gap = lr.values(1) - lr.values(0);
        g.psi0 = lr.vectors.col(0);
        g.iterative = true;
    }
    g.degenerate = g.gap < opt.degeneracy_tol;
    fix_gauge(g.psi0);
    g.residual = eigen_residual(H, g.psi0);
    return g;
}

namespace {

FluxAngles lerp(const FluxAngles& a, const FluxAngles& b, double s) {
    return {a.theta_x + s * (b.theta_x - a.theta_x), a.phi_x + s * (b.phi_x - a.phi_x),
            a.theta_y + s * (b.theta_y - a.theta_y), a.phi_y + s * (b.phi_y - a.phi_y)};
}

FluxAngles diff(const FluxAngles& a, const FluxAngles& b) {
    return {b.theta_x - a.theta_x, b.phi_x - a.phi_x, b.theta_y - a.theta_y, b.phi_y - a.phi_y};
}

double l1(const FluxAngles& d) {
    return std::abs(d.theta_x) + std::abs(d.phi_x) + std::abs(d.theta_y) + std::abs(d.phi_y);
}

void orthonormalize(State& s) {
    if (s.cols() == 1) {
        s /= s.norm();
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.adjoint() * s);
    s = s * es.operatorInverseSqrt();
}

struct TransportStage {
    State dpsi;
    double gap = 0.0;
    double dh_norm = 0.0;
};

TransportStage transport_rhs(const FluxSystem& sys, const FluxAngles& f, const FluxAngles& dir, const State& psi) {
    const int N = sys.occupied();
    const EigenPairs ep = eig_dense(sys.dense_h(f));
    const Eigen::MatrixXcd D = Eigen::MatrixXcd(sys.directional_dh(f, dir));
    const Eigen::MatrixXcd A = ep.V.adjoint() * D * ep.V;
    const int n = static_cast<int>(ep.e.size());
    TransportStage st;
    st.gap = N < n ? ep.e(N) - ep.e(N - 1) : std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
    for (int a = N; a < n; ++a)
        for (int b = 0; b < N; ++b) G(a, b) = -A(a, b) / (ep.e(a) - ep.e(b));
    st.dpsi = ep.V * (G * (ep.V.adjoint() * psi));
    st.dh_norm = A.cwiseAbs().sum() > 0 ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(A, Eigen::EigenvaluesOnly)
                                              .eigenvalues()
                                              .cwiseAbs()
                                              .maxCoeff()
                                        : 0.0;
    return st;
}

}  // namespace

TransportResult parallel_transport(const FluxSystem& sys, const FluxPath& path, int steps_per_segment,
                                   double gap_floor) {
    if (path.waypoints.size() < 2) config_error("transport path needs at least two waypoints");
    if (steps_per_segment < 1) config_error("steps per segment must be positive");
    if (sys.dim() > kDefaultDenseCap) config_error("parallel transport needs a dense-sized system");
    TransportResult out;
    out.min_gap = std::numeric_limits<double>::infinity();
    GroundData g0 = ground_data(sys, path.waypoints.front());
    State psi = g0.psi0;
    out.states.push_back(psi);
    const double h = 1.0 / steps_per_segment;
    for (std::size_t seg = 0; seg + 1 < path.waypoints.size(); ++seg) {
        const FluxAngles& a = path.waypoints[seg];
        const FluxAngles& b = path.waypoints[seg + 1];
        const FluxAngles dir = diff(a, b);
        for (int k = 0; k < steps_per_segment; ++k) {
            const double s = k * h;
            const TransportStage k1 = transport_rhs(sys, lerp(a, b, s), dir, psi);
            if (k1.gap < gap_floor) numerical_error("gap closed along the transport path");
            out.min_gap = std::min(out.min_gap, k1.gap);
            out.max_connection = std::max(out.max_connection, (psi.adjoint() * k1.dpsi).cwiseAbs().maxCoeff());
            if (k1.dh_norm > 0) {
                const double dn = Eigen::JacobiSVD<Eigen::MatrixXcd>(k1.dpsi).singularValues()(0);
                out.max_derivative_ratio = std::max(out.max_derivative_ratio, dn * k1.gap / k1.dh_norm);
            }
            const TransportStage k2 = transport_rhs(sys, lerp(a, b, s + h / 2), dir, psi + h / 2 * k1.dpsi);
            const TransportStage k3 = transport_rhs(sys, lerp(a, b, s + h / 2), dir, psi + h / 2 * k2.dpsi);
            const TransportStage k4 = transport_rhs(sys, lerp(a, b, s + h), dir, psi + h * k3.dpsi);
            psi += h / 6 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi);
            orthonormalize(psi);
            ++out.steps;
        }
        out.states.push_back(psi);
    }
    out.closing_overlap = overlap(g0.psi0, psi);
    out.berry_phase = std::arg(out.closing_overlap);
    GroundData g1 = ground_data(sys, path.waypoints.back());
    out.end_overlap = overlap(g1.psi0, psi);
    return out;
}

GapBound gap_lower_bound(const FluxSystem& sys, const FluxPath& path, int samples_per_segment,
                         double derivative_bound, const SpectralOptions& opt) {
    if (path.waypoints.empty()) config_error("empty flux path");
    GapBound out;
    const FluxAngles& origin = path.waypoints.front();
    State warm;
    auto sample = [&](const FluxAngles& f) {
        GroundData g = ground_data(sys, f, opt, warm.size() ? &warm : nullptr);
        warm = g.psi0;
        out.measured_min = std::min(out.measured_min, g.gap);
        out.extent = std::max(out.extent, l1(diff(origin, f)));
    };
    GroundData g0 = ground_data(sys, origin, opt);
    out.gap0 = g0.gap;
    out.measured_min = g0.gap;
    warm = g0.psi0;
    for (std::size_t seg = 0; seg + 1 < path.waypoints.size(); ++seg)
        for (int k = 1; k <= samples_per_segment; ++k)
            sample(lerp(path.waypoints[seg], path.waypoints[seg + 1], double(k) / samples_per_segment));
    out.bound = out.gap0 - 2.0 * out.extent * derivative_bound;
    out.vacuous = out.bound <= 0.0;
    out.holds = out.measured_min >= out.bound - 1e-12;
    return out;
}

}  // namespace hq
