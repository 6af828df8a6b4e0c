#include "hallq/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hallq/error.hpp"

namespace hq {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

const ModelSystem& many_body(const std::shared_ptr<const ModelSystem>& sys, const char* what) {
    if (!sys) config_error(std::string(what) + " needs a system");
    if (sys->backend() != Backend::ManyBody || !sys->basis())
        config_error(std::string(what) + " needs the many-body backend");
    if (sys->dim() > kDefaultDenseCap) config_error(std::string(what) + " needs a dense-sized sector");
    return *sys;
}

double comm_with_diagonal(const Eigen::MatrixXcd& B, const Eigen::VectorXd& q) {
    Eigen::MatrixXcd C(B.rows(), B.cols());
    for (int j = 0; j < B.cols(); ++j)
        for (int i = 0; i < B.rows(); ++i) C(i, j) = B(i, j) * (q(j) - q(i));
    return op_norm(C);
}

// b^dag_0 b_1 + h.c. (bosons) or sum_o c^dag_{0,o} c_{1,o} + h.c. on two sites
Eigen::MatrixXcd two_site_hop(const SiteSpace& ss) {
    LocalSpace ls(ss, 2);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(ls.dim(), ls.dim());
    if (ss.fermion_modes > 0) {
        for (int o = 0; o < ss.fermion_modes; ++o) h += ls.create(0, o) * ls.annihilate(1, o);
    }
    if (ss.boson_charges.size() > 1) h += ls.lower(0).adjoint() * ls.lower(1);
    return h + h.adjoint().eval();
}

State ground_state(const FluxSystem& sys) {
    const GroundData g = ground_data(sys, {});
    if (g.degenerate) numerical_error("degenerate groundstate at zero flux");
    return g.psi0;
}

}  // namespace

std::string to_string(LemmaId id) {
    switch (id) {
        case LemmaId::PartialTrace: return "partial_trace";
        case LemmaId::Energy: return "energy";
        case LemmaId::BigLoop: return "big_loop";
        case LemmaId::Twisting: return "twisting";
        case LemmaId::Translation: return "translation";
        case LemmaId::LoopLocalization: return "loop_localization";
    }
    return "unknown";
}

TrendFit loglog_trend(const std::vector<double>& x, const std::vector<double>& y, double floor) {
    TrendFit t;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[i - 1]) t.monotone_decreasing = false;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
        if (y[i] > floor && x[i] > 0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    t.points = static_cast<int>(lx.size());
    if (t.points < 2) return t;
    const double n = t.points;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < t.points; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0) return t;
    t.slope = (n * sxy - sx * sy) / den;
    t.intercept = (sy - t.slope * sx) / n;
    double rr = 0;
    for (int i = 0; i < t.points; ++i) {
        const double e = ly[i] - (t.intercept + t.slope * lx[i]);
        rr += e * e;
    }
    t.residual = std::sqrt(rr / n);
    return t;
}

ReducedIndex reduced_index(const SectorBasis& basis, const SiteSet& keep) {
    const SiteSpace& ss = basis.site_space();
    const int n = basis.lattice().size();
    const std::uint64_t d = ss.dim();
    const int dim = basis.dim();
    ReducedIndex idx;
    idx.row.resize(dim);
    idx.column.resize(dim);
    idx.sign.resize(dim);
    std::vector<std::uint64_t> kc(dim), tc(dim);
    for (int i = 0; i < dim; ++i) {
        std::uint64_t k = 0, t = 0, kr = 1, tr = 1;
        int traced_fermions = 0, parity = 0;
        for (int s = 0; s < n; ++s) {
            const int lv = basis.level(i, s);
            const int nf = ss.fermion_count(lv);
            if (keep.contains(s)) {
                k += kr * lv;
                kr *= d;
                parity += traced_fermions * nf;
            } else {
                t += tr * lv;
                tr *= d;
                traced_fermions += nf;
            }
        }
        kc[i] = k;
        tc[i] = t;
        idx.sign[i] = (parity & 1) ? -1 : 1;
    }
    idx.keep_codes = kc;
    std::sort(idx.keep_codes.begin(), idx.keep_codes.end());
    idx.keep_codes.erase(std::unique(idx.keep_codes.begin(), idx.keep_codes.end()), idx.keep_codes.end());
    std::vector<std::uint64_t> traced = tc;
    std::sort(traced.begin(), traced.end());
    traced.erase(std::unique(traced.begin(), traced.end()), traced.end());
    idx.traced = static_cast<int>(traced.size());
    for (int i = 0; i < dim; ++i) {
        idx.row[i] = static_cast<int>(std::lower_bound(idx.keep_codes.begin(), idx.keep_codes.end(), kc[i]) -
                                      idx.keep_codes.begin());
        idx.column[i] = static_cast<int>(std::lower_bound(traced.begin(), traced.end(), tc[i]) - traced.begin());
    }
    return idx;
}

Eigen::MatrixXcd reduced_density_matrix(const ReducedIndex& idx, const Eigen::VectorXcd& psi) {
    if (psi.size() != static_cast<Eigen::Index>(idx.row.size())) config_error("state does not match the index");
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(idx.keep_codes.size(), idx.traced);
    for (int i = 0; i < psi.size(); ++i) M(idx.row[i], idx.column[i]) = double(idx.sign[i]) * psi(i);
    return M * M.adjoint();
}

Eigen::VectorXd reduced_charges(const SectorBasis& basis, const ReducedIndex& idx, const SiteSet& keep,
                                const SiteSet& region) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(idx.keep_codes.size());
    std::vector<bool> seen(idx.keep_codes.size(), false);
    const int n = basis.lattice().size();
    for (int i = 0; i < basis.dim(); ++i) {
        const int a = idx.row[i];
        if (seen[a]) continue;
        seen[a] = true;
        for (int s = 0; s < n; ++s)
            if (keep.contains(s) && region.contains(s)) q(a) += basis.site_space().charge(basis.level(i, s));
    }
    return q;
}

double trace_norm(const Eigen::MatrixXcd& h) {
    if (h.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

std::pair<LemmaCheckResult, LemmaCheckResult> partial_trace_check(const std::shared_ptr<const ModelSystem>& sys,
                                                                  double theta, const SpectralFilter& f,
                                                                  const DiagnosticsOptions& opt) {
    const ModelSystem& m = many_body(sys, "partial trace check");
    const auto& lat = m.spec().lattice;
    const SectorBasis& basis = *m.basis();
    const SiteSet omega_x = named_region(lat, {RegionLabel::OmegaX, m.spec().R});
    const SiteSet omega_xc = thickened_complement(omega_x, m.spec().R);
    const SiteSet xhalf = named_region(lat, {RegionLabel::XHalf, m.spec().R});

    const State psi0 = ground_state(m);
    FluxEvolver ev(sys, f, opt.integrator);
    const ReducedIndex near_idx = reduced_index(basis, omega_xc);
    const ReducedIndex far_idx = reduced_index(basis, omega_x);
    const Eigen::VectorXd qx = reduced_charges(basis, far_idx, omega_x, xhalf);
    const Eigen::MatrixXcd rho0_near = reduced_density_matrix(near_idx, psi0.col(0));
    const Eigen::MatrixXcd rho0_far = reduced_density_matrix(far_idx, psi0.col(0));

    LemmaCheckResult near, far;
    near.lemma = far.lemma = LemmaId::PartialTrace;
    near.check = "near_twist";
    far.check = "far_from_twist";
    near.inputs = far.inputs = {{"theta", theta}, {"L", double(lat.L())}, {"Delta", f.delta()}};
    near.bound_form = "||Tr_{not Omega_X^c}(rho_X(theta) - rho_X(0))||_1 <= 2 |theta| Q_max J L g(L/4 - R)";
    far.bound_form = "||Tr_{not Omega_X}(rho_X(theta) - R_X(theta, rho_X(0)))||_1 <= 6 |theta| Q_max J L g(L/4 - R)";
    near.values["kept_sites"] = omega_xc.count();
    far.values["kept_sites"] = omega_x.count();

    // growth with theta at theta/4, theta/2, theta
    State psi = psi0;
    double at = 0.0;
    for (double frac : {0.25, 0.5, 1.0}) {
        const double t = frac * theta;
        psi = ev.U_X(at, 0, t - at, psi);
        at = t;
        const double a = trace_norm(reduced_density_matrix(near_idx, psi.col(0)) - rho0_near);
        const Eigen::MatrixXcd rot = twist_conjugate(rho0_far, qx, t);
        const double b = trace_norm(reduced_density_matrix(far_idx, psi.col(0)) - rot);
        near.values["norm_at_" + std::to_string(frac).substr(0, 4)] = a;
        far.values["norm_at_" + std::to_string(frac).substr(0, 4)] = b;
        near.measured = a;
        far.measured = b;
    }
    for (auto* r : {&near, &far}) {
        r->pass = r->measured <= 2.0 + 1e-10;
        r->verdict = r->measured <= 2.0 + 1e-10 ? "within the trivial bound 2" : "exceeds the trivial bound 2";
        r->values["min_gap"] = ev.stats().min_gap;
    }
    if (omega_xc.count() == lat.size()) near.notes.push_back("Omega_X^c is the whole lattice at this L; nothing is traced");
    return {near, far};
}

LemmaCheckResult energy_estimate_check(const std::shared_ptr<const ModelSystem>& sys, double theta,
                                       const SpectralFilter& f, const DiagnosticsOptions& opt) {
    const ModelSystem& m = many_body(sys, "energy estimate check");
    const GroundData g0 = ground_data(m, {});
    if (g0.degenerate) numerical_error("degenerate groundstate at zero flux");
    FluxEvolver ev(sys, f, opt.integrator);
    const State psi = ev.U_X(0, 0, theta, g0.psi0);
    const FluxAngles at{theta, 0, 0, 0};
    const double e = (psi.col(0).adjoint() * (m.h(at) * psi.col(0)))(0).real();
    const GroundData gt = ground_data(m, at);

    LemmaCheckResult r;
    r.lemma = LemmaId::Energy;
    r.check = "energy_X";
    r.inputs = {{"theta", theta}, {"L", double(m.spec().lattice.L())}, {"Delta", f.delta()}};
    r.bound_form = "|<Psi_X(theta)|H(theta,0,0,0)|Psi_X(theta)> - E_0| <= 8 |theta| Q_max J^2 L^3 g(L/4 - R)";
    r.measured = std::abs(e - g0.E0);
    const double weight = std::max(0.0, 1.0 - std::norm(overlap(gt.psi0, psi)));
    const double markov = gt.gap > 0 ? (e - gt.E0) / gt.gap : std::numeric_limits<double>::infinity();
    r.values = {{"E0", g0.E0},           {"E0_theta", gt.E0},           {"gap_theta", gt.gap},
                {"excitation_weight", weight}, {"markov_bound", markov}, {"min_gap", ev.stats().min_gap}};
    if (gt.degenerate) {
        r.notes.push_back("H(theta) groundstate degenerate; Markov step not applicable");
    } else {
        r.pass = weight <= markov + 1e-10;
        r.verdict = *r.pass ? "excitation weight within (E - E0(theta)) / gamma(theta)" : "Markov step violated";
    }
    return r;
}

LemmaCheckResult big_loop_check(const std::shared_ptr<const FluxSystem>& sys, const SpectralFilter& f,
                                const DiagnosticsOptions& opt) {
    const State psi0 = ground_state(*sys);
    FluxEvolver ev(sys, f, opt.integrator);
    const LoopEvolution big = loop_state(ev, 0, 0, kTwoPi, psi0);
    const State side = ev.U_X(0, 0, kTwoPi, psi0);
    LemmaCheckResult r;
    r.lemma = LemmaId::BigLoop;
    r.check = "B2";
    r.inputs = {{"Delta", f.delta()}, {"tol", opt.integrator.tol}};
    r.bound_form = "|<Psi0|Psi_loop(2 pi)> - 1| decreasing in L";
    r.measured = std::abs(big.overlap - 1.0);
    r.values = {{"side_x_return", std::abs(overlap(psi0, side))},
                {"overlap_re", big.overlap.real()},
                {"overlap_im", big.overlap.imag()},
                {"min_gap", std::min(big.stats.min_gap, ev.stats().min_gap)},
                {"steps", double(ev.stats().steps)}};
    r.verdict = "single size; see the size trend";
    return r;
}

LemmaCheckResult size_trend(LemmaId lemma, const std::string& check, const std::vector<int>& L,
                            const std::vector<double>& values) {
    LemmaCheckResult r;
    r.lemma = lemma;
    r.check = check + "_trend";
    r.bound_form = "non-increasing in L";
    std::vector<double> x(L.begin(), L.end());
    const TrendFit t = loglog_trend(x, values);
    for (std::size_t i = 0; i < L.size(); ++i) r.values["L" + std::to_string(L[i])] = values[i];
    r.values["slope"] = t.slope;
    r.values["fit_residual"] = t.residual;
    r.measured = values.empty() ? 0.0 : values.back();
    if (L.size() < 3) {
        r.verdict = "fewer than three sizes; no trend asserted";
        return r;
    }
    r.pass = t.monotone_decreasing;
    r.verdict = t.monotone_decreasing ? "non-increasing" : "not monotone";
    return r;
}

LocalTerm random_omega0_operator(const ModelSpec& spec, unsigned seed) {
    const TorusLattice& lat = spec.lattice;
    const SiteSet omega0 = named_region(lat, {RegionLabel::Omega0, spec.R});
    const int s = lat.index({1, 1});
    if (!omega0.contains(s)) config_error("Omega_0 does not contain the origin site");
    const SiteSpace& ss = spec.site_space;
    const int d = ss.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            if (ss.charge(i) != ss.charge(j)) continue;
            if (i == j) {
                A(i, i) = nd(rng);
            } else {
                A(i, j) = cd(nd(rng), nd(rng));
                A(j, i) = std::conj(A(i, j));
            }
        }
    const double n = op_norm(A);
    if (n > 0) A /= n;
    return make_local_term(ss, {s}, A, "random_omega0");
}

LemmaCheckResult twisting_check(const std::shared_ptr<const ModelSystem>& sys, const LocalTerm& A, double theta_x,
                                double theta_y, const SpectralFilter& f, std::optional<int> M,
                                const DiagnosticsOptions& opt) {
    const ModelSystem& m = many_body(sys, "twisting check");
    const ModelSpec& spec = m.spec();
    const TorusLattice& lat = spec.lattice;
    const int R = spec.R;
    const SiteSet omega = named_region(lat, {RegionLabel::Omega, R});
    const SiteSet omega0 = named_region(lat, {RegionLabel::Omega0, R});
    for (int s : A.support)
        if (!omega0.contains(s)) config_error("operator support leaves Omega_0");
    const int Mr = M.value_or(static_cast<int>(std::ceil(lat.L() / 24.0)));

    // support of d_theta_x H_Omega: X-1 terms inside Omega
    SiteSet dsupp(lat, RegionLabel::Custom);
    const auto inside = terms_inside(omega);
    for (const auto& t : spec.terms)
        if (inside(t) && twist_rule(lat, t.support, R).cx == 1 && op_norm(term_derivative_inside(spec, t)) > 0)
            for (int s : t.support) dsupp.insert(s);
    if (dsupp.empty()) config_error("no theta_x-twisted terms inside Omega");
    const SiteSet F = fattening(dsupp, Mr);
    auto h_loc = sys->restricted(terms_inside(F));
    auto a_omega = sys->restricted(inside);

    const Eigen::MatrixXcd Aop(embed_local_operator(A, *m.basis()));
    const State I = Eigen::MatrixXcd::Identity(m.dim(), m.dim());
    FluxEvolver full(sys, f, opt.integrator);
    FluxEvolver loc(h_loc, f, opt.integrator, a_omega);
    const State Ux = full.U_X(0, theta_y, theta_x, I);
    const State Uo = loc.U_X(0, theta_y, theta_x, I);
    const Eigen::MatrixXcd Bx = Ux.adjoint() * Aop * Ux;
    const Eigen::MatrixXcd Bo = Uo.adjoint() * Aop * Uo;

    const SiteSet box = named_region(lat, {RegionLabel::OmegaX, R}).intersect(named_region(lat, {RegionLabel::OmegaY, R}));
    const SiteSet outside = box.complement();
    double comm = 0.0;
    for (int s : outside.members()) {
        SiteSet one(lat, std::vector<int>{s});
        comm = std::max(comm, comm_with_diagonal(Bo, charge_operator(one, *m.basis())));
    }
    const Eigen::MatrixXcd hop = two_site_hop(spec.site_space);
    for (int s : outside.members())
        for (int t : outside.members())
            if (s < t && lat.distance(s, t) == 1) {
                const Eigen::MatrixXcd O(embed_local_operator(make_local_term(spec.site_space, {s, t}, hop), *m.basis()));
                comm = std::max(comm, op_norm(Bo * O - O * Bo));
            }

    LemmaCheckResult r;
    r.lemma = LemmaId::Twisting;
    r.check = "twisting";
    r.inputs = {{"theta_x", theta_x}, {"theta_y", theta_y}, {"M", double(Mr)}, {"L", double(lat.L())},
                {"Delta", f.delta()}};
    r.bound_form = "||U_X^dag A U_X - U_Omega^dag A U_Omega|| <= C |theta_x| ||A|| Q_max J L ln^2 L g(L/24)";
    r.measured = op_norm(Bx - Bo);
    const double a_norm = op_norm(Aop);
    r.values = {{"A_norm", a_norm},
                {"support_commutator", comm},
                {"fattened_sites", double(F.count())},
                {"box_sites", double(box.count())},
                {"min_gap", full.stats().min_gap}};
    if (!F.subset_of(box)) r.notes.push_back("fattened generator support leaves Omega_X cap Omega_Y at this L");
    r.pass = comm <= 1e-10 && r.measured <= 2 * a_norm + 1e-10;
    r.verdict = comm <= 1e-10 ? "support contained in Omega_X cap Omega_Y" : "support leaks outside Omega_X cap Omega_Y";
    return r;
}

namespace {

double max_translation_difference(FluxEvolver& ev, const State& psi0,
                                  const std::vector<std::pair<double, double>>& basepoints, double r) {
    const cd base = loop_state(ev, 0, 0, r, psi0).overlap;
    double out = 0.0;
    for (const auto& [bx, by] : basepoints) out = std::max(out, std::abs(loop_state(ev, bx, by, r, psi0).overlap - base));
    return out;
}

}  // namespace

LemmaCheckResult translation_check(const std::shared_ptr<const FluxSystem>& sys,
                                   const std::vector<std::pair<double, double>>& basepoints, double r,
                                   const SpectralFilter& f, const DiagnosticsOptions& opt) {
    if (basepoints.empty()) config_error("translation check needs basepoints");
    const State psi0 = ground_state(*sys);
    FluxEvolver ev(sys, f, opt.integrator);
    const double a = max_translation_difference(ev, psi0, basepoints, r);
    const double b = max_translation_difference(ev, psi0, basepoints, r / 2);
    LemmaCheckResult res;
    res.lemma = LemmaId::Translation;
    res.check = "translation";
    res.inputs = {{"r", r}, {"basepoints", double(basepoints.size())}, {"Delta", f.delta()}};
    res.bound_form = "max_b |<Psi0|Psi_loop(b, r)> - <Psi0|Psi_loop(r)>| <= C r^5 + floor";
    res.measured = a;
    const double ratio = b > 0 ? a / b : std::numeric_limits<double>::infinity();
    res.values = {{"max_at_r", a}, {"max_at_half_r", b}, {"halving_ratio", ratio},
                  {"min_gap", ev.stats().min_gap}};
    res.pass = ratio >= 8.0;
    if (a < 1e-9)
        res.notes.push_back("differences at the integration noise floor");
    else if (ratio < 6.0)
        res.notes.push_back("low-order regime: the flux dependence of the curvature dominates the r^5 term");
    res.verdict = *res.pass ? "halving r reduces the maximum by at least 8x" : "halving r reduces the maximum by less than 8x";
    return res;
}

TranslationScan translation_scan(const std::shared_ptr<const FluxSystem>& sys,
                                 const std::vector<std::pair<double, double>>& basepoints,
                                 const std::vector<double>& r_list, const SpectralFilter& f,
                                 const DiagnosticsOptions& opt) {
    if (basepoints.empty()) config_error("translation scan needs basepoints");
    const State psi0 = ground_state(*sys);
    FluxEvolver ev(sys, f, opt.integrator);
    TranslationScan out;
    for (double r : r_list) {
        out.r.push_back(r);
        out.max_difference.push_back(max_translation_difference(ev, psi0, basepoints, r));
    }
    out.fit = loglog_trend(out.r, out.max_difference);
    return out;
}

LemmaCheckResult loop_localization_check(const std::shared_ptr<const ModelSystem>& sys, double theta_x,
                                         double theta_y, double r, std::optional<int> M, const SpectralFilter& f,
                                         const DiagnosticsOptions& opt) {
    const ModelSystem& m = many_body(sys, "loop localization check");
    const ModelSpec& spec = m.spec();
    const TorusLattice& lat = spec.lattice;
    LemmaCheckResult res;
    std::shared_ptr<const FluxSystem> h = sys;
    if (M) {
        if (*M > std::max(lat.Lx(), lat.Ly())) {
            res.notes.push_back("M exceeds the lattice extent; using the full Hamiltonian");
        } else {
            const SiteSet supp = twist_support(spec, FluxAxis::ThetaX).unite(twist_support(spec, FluxAxis::ThetaY));
            h = sys->restricted(terms_inside(fattening(supp, *M)));
        }
    }
    FluxEvolver ev(h, f, opt.integrator, sys);
    const State I = Eigen::MatrixXcd::Identity(m.dim(), m.dim());
    const State V0 = ev.loop(0, 0, r, I);
    const State Vh = ev.loop(0, 0, r / 2, I);
    const State Vt = ev.loop(theta_x, theta_y, r, I);
    const Eigen::VectorXd qx = charge_operator(named_region(lat, {RegionLabel::XHalf, spec.R}), *m.basis());
    const Eigen::VectorXd qy = charge_operator(named_region(lat, {RegionLabel::YHalf, spec.R}), *m.basis());
    const Eigen::MatrixXcd rot = twist_conjugate(twist_conjugate(Eigen::MatrixXcd(V0), qx, theta_x), qy, theta_y);

    res.lemma = LemmaId::LoopLocalization;
    res.check = "loop_localization";
    res.inputs = {{"theta_x", theta_x}, {"theta_y", theta_y}, {"r", r}, {"Delta", f.delta()}};
    if (M) res.inputs["M"] = *M;
    res.bound_form = "||V_loop(0,0,r) - 1|| = O(r^2); V_loop(tx,ty,r) ~ R_Y(ty, R_X(tx, V_loop(0,0,r)))";
    const double w = op_norm(V0 - I);
    const double wh = op_norm(Vh - I);
    res.measured = op_norm(Vt - rot);
    res.values = {{"loop_minus_identity", w},
                  {"loop_minus_identity_half_r", wh},
                  {"halving_ratio", w > 0 ? wh / w : 0.0},
                  {"min_gap", ev.stats().min_gap}};
    res.pass = wh <= 0.3 * w + 1e-12;
    res.verdict = *res.pass ? "quadratic decay of ||V_loop - 1||" : "||V_loop - 1|| decays slower than the r^2 slack";
    return res;
}

}  // namespace hq
