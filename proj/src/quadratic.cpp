#include "hallq/quadratic.hpp"

#include <tuple>

#include "hallq/error.hpp"

namespace hq {

namespace {

struct LocalQuadratic {
    double constant = 0.0;
    Eigen::MatrixXcd h;  // local modes (site, orbital)
    double residual = 0.0;
};

LocalQuadratic decompose(const SiteSpace& ss, const LocalTerm& t) {
    const int n = static_cast<int>(t.support.size());
    const int k = ss.fermion_modes;
    LocalSpace ls(ss, n);
    const int m = n * k;
    std::vector<int> single(m);
    std::vector<Eigen::MatrixXcd> c(m);
    for (int a = 0; a < m; ++a) {
        c[a] = ls.annihilate(a / k, a % k);
        // index of c_a^dag |vac>
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(ls.dim());
        e(0) = 1.0;
        Eigen::VectorXcd v = c[a].adjoint() * e;
        int idx = 0;
        v.cwiseAbs().maxCoeff(&idx);
        single[a] = idx;
    }
    LocalQuadratic out;
    out.constant = t.matrix(0, 0).real();
    out.h = Eigen::MatrixXcd::Zero(m, m);
    Eigen::MatrixXcd rebuilt = out.constant * ls.identity();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            cd v = t.matrix(single[a], single[b]);
            if (a == b) v -= out.constant;
            out.h(a, b) = v;
            if (std::abs(v) > 0.0) rebuilt += v * c[a].adjoint() * c[b];
        }
    out.residual = op_norm(t.matrix - rebuilt);
    return out;
}

void require_fermions(const ModelSpec& spec) {
    const auto& ss = spec.site_space;
    if (ss.fermion_modes == 0 || ss.boson_charges.size() != 1)
        config_error("single-particle reduction needs a pure fermion site space");
}

}  // namespace

double quadratic_residual(const ModelSpec& spec) {
    require_fermions(spec);
    double r = 0.0;
    for (const auto& t : spec.terms) r = std::max(r, decompose(spec.site_space, t).residual);
    return r;
}

QuadraticModel extract_quadratic(const ModelSpec& spec, const TermFilter& keep, double tol) {
    require_fermions(spec);
    const auto& lat = spec.lattice;
    const int k = spec.site_space.fermion_modes;
    const SiteSet xh = named_region(lat, {RegionLabel::XHalf});
    const SiteSet yh = named_region(lat, {RegionLabel::YHalf});

    QuadraticModel out;
    out.modes = lat.size() * k;
    out.particles = spec.Q;
    if (spec.Q < 0 || spec.Q > out.modes) config_error("particle number outside [0, modes]");

    std::map<std::tuple<int, int, int, int>, std::vector<Triplet>> buckets;
    for (const auto& t : spec.terms) {
        if (keep && !keep(t)) continue;
        const LocalQuadratic lq = decompose(spec.site_space, t);
        if (lq.residual > tol)
            config_error("term '" + t.tag + "' is not quadratic (residual " + std::to_string(lq.residual) + ")");
        out.constant += lq.constant;
        const TermRule r = twist_rule(lat, t.support, spec.R);
        const int m = static_cast<int>(lq.h.rows());
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                if (std::abs(lq.h(a, b)) == 0.0) continue;
                const int sa = t.support[a / k], sb = t.support[b / k];
                const int ga = sa * k + a % k, gb = sb * k + b % k;
                const int dqx = r.cx == 3 ? 0 : int(xh.contains(sa)) - int(xh.contains(sb));
                const int dqy = r.cy == 3 ? 0 : int(yh.contains(sa)) - int(yh.contains(sb));
                buckets[{dqx == 0 ? 3 : r.cx, dqy == 0 ? 3 : r.cy, dqx, dqy}].emplace_back(ga, gb, lq.h(a, b));
            }
    }
    std::vector<TwistGroup> groups;
    for (auto& [key, trip] : buckets) {
        TwistGroup g;
        std::tie(g.cx, g.cy, g.dqx, g.dqy) = key;
        g.M = SpMat(out.modes, out.modes);
        g.M.setFromTriplets(trip.begin(), trip.end());
        groups.push_back(std::move(g));
    }
    out.family = TwistedFamily(out.modes, std::move(groups));
    return out;
}

}  // namespace hq
