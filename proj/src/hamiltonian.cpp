#include "hallq/hamiltonian.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <tuple>

#include "hallq/error.hpp"

namespace hq {

std::string to_string(FluxAxis a) {
    switch (a) {
        case FluxAxis::ThetaX: return "theta_x";
        case FluxAxis::PhiX: return "phi_x";
        case FluxAxis::ThetaY: return "theta_y";
        case FluxAxis::PhiY: return "phi_y";
    }
    return "?";
}

TermRule twist_rule(const TorusLattice& lat, const std::vector<int>& support, int R) {
    bool x1 = false, x2 = false, y1 = false, y2 = false;
    for (int idx : support) {
        const Site s = lat.site(idx);
        x1 = x1 || lat.column_distance(s.x, 1) < R;
        x2 = x2 || lat.column_distance(s.x, lat.half_x() + 1) < R;
        y1 = y1 || lat.row_distance(s.y, 1) < R;
        y2 = y2 || lat.row_distance(s.y, lat.half_y() + 1) < R;
    }
    TermRule r;
    r.cx = x1 ? 1 : (x2 ? 2 : 3);
    r.cy = y1 ? 1 : (y2 ? 2 : 3);
    r.ambiguous_x = lat.Lx() > 1 && x1 && x2;
    r.ambiguous_y = lat.Ly() > 1 && y1 && y2;
    return r;
}

double op_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

namespace {

Eigen::VectorXd local_charges(const SiteSpace& ss, int nsites) {
    LocalSpace ls(ss, nsites);
    Eigen::VectorXd q(ls.dim());
    for (int i = 0; i < ls.dim(); ++i) q(i) = ls.charge(i);
    return q;
}

// Charge of the support sites lying in the half-plane mask.
Eigen::VectorXd local_region_charges(const SiteSpace& ss, const std::vector<int>& support, const SiteSet& region,
                                     bool inside) {
    const int n = static_cast<int>(support.size());
    LocalSpace ls(ss, n);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(ls.dim());
    for (int i = 0; i < ls.dim(); ++i)
        for (int k = 0; k < n; ++k)
            if (region.contains(support[k]) == inside) q(i) += ss.charge(ls.level(i, k));
    return q;
}

Eigen::MatrixXcd commutator_with_diag(const Eigen::VectorXd& q, const Eigen::MatrixXcd& m) {
    Eigen::MatrixXcd out(m.rows(), m.cols());
    for (int a = 0; a < m.rows(); ++a)
        for (int b = 0; b < m.cols(); ++b) out(a, b) = (q(a) - q(b)) * m(a, b);
    return out;
}

double angle_for(int cls, double twist, double virt) {
    if (cls == 1) return twist;
    if (cls == 2) return -virt;
    return 0.0;
}

}  // namespace

LocalTerm symmetrize_interaction(const LocalTerm& term, const SiteSpace& ss) {
    if ((term.matrix - term.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        config_error("symmetrize_interaction needs a Hermitian term");
    const Eigen::VectorXd q = local_charges(ss, static_cast<int>(term.support.size()));
    LocalTerm out = term;
    for (int a = 0; a < q.size(); ++a)
        for (int b = 0; b < q.size(); ++b)
            if (q(a) != q(b)) out.matrix(a, b) = 0.0;
    return out;
}

LocalTerm symmetrize_by_quadrature(const LocalTerm& term, const SiteSpace& ss, int points) {
    const Eigen::VectorXd q = local_charges(ss, static_cast<int>(term.support.size()));
    LocalTerm out = term;
    out.matrix.setZero();
    for (int k = 0; k < points; ++k) {
        const double th = 2.0 * M_PI * k / points;
        out.matrix += twist_conjugate(term.matrix, q, th);
    }
    out.matrix /= static_cast<double>(points);
    return out;
}

ValidationReport validate_model(const ModelSpec& spec, double tol) {
    ValidationReport rep;
    const auto& lat = spec.lattice;
    rep.J = spec.J;
    rep.R = spec.R;
    rep.k_max = spec.k_max;
    rep.site_q_max = spec.site_space.q_max();

    if (lat.Lx() <= 2 * spec.R || (lat.Ly() != 1 && lat.Ly() <= 2 * spec.R))
        rep.failures.push_back("lattice too small: need L > 2R");
    if (rep.site_q_max > spec.q_max) rep.failures.push_back("site charge exceeds q_max");

    std::vector<double> strength(lat.size(), 0.0);
    const SiteSpace& ss = spec.site_space;
    int ambiguous = 0;
    for (const auto& t : spec.terms) {
        for (int s : t.support)
            if (s < 0 || s >= lat.size()) {
                rep.failures.push_back("term '" + t.tag + "' has support off the lattice");
                rep.pass = false;
                return rep;
            }
        const double nrm = op_norm(t.matrix);
        for (int s : t.support) strength[s] += nrm;
        rep.max_diameter = std::max(rep.max_diameter, SiteSet(lat, t.support).diameter());
        rep.max_body = std::max(rep.max_body, static_cast<int>(t.support.size()));
        rep.hermiticity_residual = std::max(rep.hermiticity_residual, op_norm(t.matrix - t.matrix.adjoint()));
        const Eigen::VectorXd q = local_charges(ss, static_cast<int>(t.support.size()));
        rep.charge_residual = std::max(rep.charge_residual, op_norm(commutator_with_diag(q, t.matrix)));
        if (ss.fermion_modes > 0) {
            LocalSpace ls(ss, static_cast<int>(t.support.size()));
            for (int a = 0; a < ls.dim(); ++a)
                for (int b = 0; b < ls.dim(); ++b)
                    if (ls.fermion_parity(a) != ls.fermion_parity(b))
                        rep.parity_residual = std::max(rep.parity_residual, std::abs(t.matrix(a, b)));
        }
        const TermRule r = twist_rule(lat, t.support, spec.R);
        if (r.ambiguous_x || r.ambiguous_y) ++ambiguous;
    }
    for (double s : strength) rep.max_site_strength = std::max(rep.max_site_strength, s);

    if (rep.max_site_strength > spec.J + tol)
        rep.failures.push_back("strength " + std::to_string(rep.max_site_strength) + " exceeds J");
    if (rep.max_diameter > spec.R) rep.failures.push_back("term diameter exceeds R (range)");
    if (rep.max_body > spec.k_max) rep.failures.push_back("term body count exceeds k_max");
    if (rep.hermiticity_residual > tol) rep.failures.push_back("non-Hermitian term");
    if (rep.charge_residual > tol) rep.failures.push_back("term does not commute with support charge (charge)");
    if (rep.parity_residual > tol) rep.failures.push_back("odd fermion parity term");
    if (ambiguous > 0)
        rep.warnings.push_back(std::to_string(ambiguous) +
                               " terms touch both twist lines (L <= 4R); the line at 1 takes precedence");
    rep.pass = rep.failures.empty();
    return rep;
}

SpMat TwistedFamily::hamiltonian(const FluxAngles& f) const {
    SpMat H(dim_, dim_);
    for (const auto& g : groups_) {
        const double a = g.dqx * angle_for(g.cx, f.theta_x, f.phi_x) + g.dqy * angle_for(g.cy, f.theta_y, f.phi_y);
        H += std::polar(1.0, a) * g.M;
    }
    return H;
}

SpMat TwistedFamily::derivative(const FluxAngles& f, FluxAxis axis) const { return derivative(f, axis, 1); }

SpMat TwistedFamily::derivative(const FluxAngles& f, FluxAxis axis, int order) const {
    SpMat D(dim_, dim_);
    for (const auto& g : groups_) {
        cd factor;
        switch (axis) {
            case FluxAxis::ThetaX:
                if (g.cx != 1 || g.dqx == 0) continue;
                factor = cd(0.0, g.dqx);
                break;
            case FluxAxis::PhiX:
                if (g.cx != 2 || g.dqx == 0) continue;
                factor = cd(0.0, -g.dqx);
                break;
            case FluxAxis::ThetaY:
                if (g.cy != 1 || g.dqy == 0) continue;
                factor = cd(0.0, g.dqy);
                break;
            case FluxAxis::PhiY:
                if (g.cy != 2 || g.dqy == 0) continue;
                factor = cd(0.0, -g.dqy);
                break;
        }
        const double a = g.dqx * angle_for(g.cx, f.theta_x, f.phi_x) + g.dqy * angle_for(g.cy, f.theta_y, f.phi_y);
        D += (std::pow(factor, order) * std::polar(1.0, a)) * g.M;
    }
    return D;
}

bool TwistedFamily::depends_on(FluxAxis axis) const {
    for (const auto& g : groups_) {
        if (axis == FluxAxis::ThetaX && g.cx == 1 && g.dqx != 0) return true;
        if (axis == FluxAxis::PhiX && g.cx == 2 && g.dqx != 0) return true;
        if (axis == FluxAxis::ThetaY && g.cy == 1 && g.dqy != 0) return true;
        if (axis == FluxAxis::PhiY && g.cy == 2 && g.dqy != 0) return true;
    }
    return false;
}

std::vector<TermRule> term_rules(const ModelSpec& spec) {
    std::vector<TermRule> out;
    out.reserve(spec.terms.size());
    for (const auto& t : spec.terms) out.push_back(twist_rule(spec.lattice, t.support, spec.R));
    return out;
}

TwistedFamily build_sector_family(const ModelSpec& spec, const SectorBasis& basis, const TermFilter& keep) {
    const auto& lat = spec.lattice;
    const Eigen::VectorXd qx = charge_operator(named_region(lat, {RegionLabel::XHalf}), basis);
    const Eigen::VectorXd qy = charge_operator(named_region(lat, {RegionLabel::YHalf}), basis);
    std::map<std::tuple<int, int, int, int>, std::vector<Triplet>> buckets;
    for (const auto& t : spec.terms) {
        if (keep && !keep(t)) continue;
        const TermRule r = twist_rule(lat, t.support, spec.R);
        const SpMat M = embed_local_operator(t, basis);
        for (int k = 0; k < M.outerSize(); ++k)
            for (SpMat::InnerIterator it(M, k); it; ++it) {
                const int row = static_cast<int>(it.row()), col = static_cast<int>(it.col());
                const int dqx = r.cx == 3 ? 0 : static_cast<int>(std::lround(qx(row) - qx(col)));
                const int dqy = r.cy == 3 ? 0 : static_cast<int>(std::lround(qy(row) - qy(col)));
                const int cx = dqx == 0 ? 3 : r.cx;
                const int cy = dqy == 0 ? 3 : r.cy;
                buckets[{cx, cy, dqx, dqy}].emplace_back(row, col, it.value());
            }
    }
    std::vector<TwistGroup> groups;
    for (auto& [key, trip] : buckets) {
        TwistGroup g;
        std::tie(g.cx, g.cy, g.dqx, g.dqy) = key;
        g.M = SpMat(basis.dim(), basis.dim());
        g.M.setFromTriplets(trip.begin(), trip.end());
        g.M.prune(cd(0.0, 0.0), 0.0);
        groups.push_back(std::move(g));
    }
    return TwistedFamily(basis.dim(), std::move(groups));
}

TwistedHamiltonian assemble_twisted(const ModelSpec& spec, const SectorBasis& basis, const FluxAngles& flux) {
    TwistedHamiltonian out;
    out.flux = flux;
    out.matrix = build_sector_family(spec, basis).hamiltonian(flux);
    out.term_map = term_rules(spec);
    return out;
}

SpMat flux_derivative(const ModelSpec& spec, const SectorBasis& basis, const FluxAngles& flux, FluxAxis axis) {
    return build_sector_family(spec, basis).derivative(flux, axis);
}

Eigen::MatrixXcd twist_conjugate(const Eigen::MatrixXcd& op, const Eigen::VectorXd& charges, double theta) {
    Eigen::MatrixXcd out(op.rows(), op.cols());
    for (int a = 0; a < op.rows(); ++a)
        for (int b = 0; b < op.cols(); ++b) out(a, b) = std::polar(1.0, theta * (charges(a) - charges(b))) * op(a, b);
    return out;
}

SpMat twist_conjugate(const SpMat& op, const Eigen::VectorXd& charges, double theta) {
    SpMat out = op;
    for (int k = 0; k < out.outerSize(); ++k)
        for (SpMat::InnerIterator it(out, k); it; ++it)
            it.valueRef() *= std::polar(1.0, theta * (charges(it.row()) - charges(it.col())));
    return out;
}

Eigen::MatrixXcd twisted_term(const ModelSpec& spec, const LocalTerm& term, const FluxAngles& flux) {
    const auto& lat = spec.lattice;
    const TermRule r = twist_rule(lat, term.support, spec.R);
    const auto qx = local_region_charges(spec.site_space, term.support, named_region(lat, {RegionLabel::XHalf}), true);
    const auto qy = local_region_charges(spec.site_space, term.support, named_region(lat, {RegionLabel::YHalf}), true);
    Eigen::MatrixXcd m = twist_conjugate(term.matrix, qy, angle_for(r.cy, flux.theta_y, flux.phi_y));
    return twist_conjugate(m, qx, angle_for(r.cx, flux.theta_x, flux.phi_x));
}

Eigen::MatrixXcd term_derivative_inside(const ModelSpec& spec, const LocalTerm& term) {
    const auto qx = local_region_charges(spec.site_space, term.support,
                                         named_region(spec.lattice, {RegionLabel::XHalf}), true);
    return cd(0.0, 1.0) * commutator_with_diag(qx, term.matrix);
}

Eigen::MatrixXcd term_derivative_outside(const ModelSpec& spec, const LocalTerm& term) {
    const auto qx = local_region_charges(spec.site_space, term.support,
                                         named_region(spec.lattice, {RegionLabel::XHalf}), false);
    return cd(0.0, -1.0) * commutator_with_diag(qx, term.matrix);
}

}  // namespace hq
