#include "hallq/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hallq/error.hpp"

namespace hq {

int SiteSpace::charge(int level) const {
    return boson_charges.at(boson_level(level)) + fermion_count(level);
}

int SiteSpace::fermion_count(int level) const { return __builtin_popcount(fermion_bits(level)); }

bool SiteSpace::occupied(int level, int orbital) const {
    return (fermion_bits(level) >> (fermion_modes - 1 - orbital)) & 1;
}

int SiteSpace::q_max() const {
    return *std::max_element(boson_charges.begin(), boson_charges.end()) + fermion_modes;
}

SiteSpace SiteSpace::soft_boson(int nmax) {
    SiteSpace s;
    s.boson_charges.resize(nmax + 1);
    std::iota(s.boson_charges.begin(), s.boson_charges.end(), 0);
    return s;
}

LocalSpace::LocalSpace(const SiteSpace& ss, int nsites) : ss_(ss), nsites_(nsites), dim_(1) {
    for (int i = 0; i < nsites; ++i) dim_ *= ss.dim();
}

int LocalSpace::level(int index, int site) const {
    int stride = 1;
    for (int s = nsites_ - 1; s > site; --s) stride *= ss_.dim();
    return (index / stride) % ss_.dim();
}

int LocalSpace::charge(int index) const {
    int q = 0;
    for (int s = 0; s < nsites_; ++s) q += ss_.charge(level(index, s));
    return q;
}

int LocalSpace::fermion_parity(int index) const {
    int n = 0;
    for (int s = 0; s < nsites_; ++s) n += ss_.fermion_count(level(index, s));
    return n & 1;
}

Eigen::MatrixXcd LocalSpace::identity() const { return Eigen::MatrixXcd::Identity(dim_, dim_); }

Eigen::MatrixXcd LocalSpace::annihilate(int site, int orbital) const {
    const int k = ss_.fermion_modes;
    if (orbital < 0 || orbital >= k) config_error("fermion orbital out of range");
    int stride = 1;
    for (int s = nsites_ - 1; s > site; --s) stride *= ss_.dim();
    const int bit = 1 << (k - 1 - orbital);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int idx = 0; idx < dim_; ++idx) {
        const int lv = level(idx, site);
        if (!(ss_.fermion_bits(lv) & bit)) continue;
        int before = 0;
        for (int s = 0; s < site; ++s) before += ss_.fermion_count(level(idx, s));
        for (int o = 0; o < orbital; ++o) before += ss_.occupied(lv, o) ? 1 : 0;
        const int target = idx - bit * stride;
        out(target, idx) = (before & 1) ? -1.0 : 1.0;
    }
    return out;
}

Eigen::MatrixXcd LocalSpace::number(int site, int orbital) const {
    Eigen::MatrixXcd c = annihilate(site, orbital);
    return c.adjoint() * c;
}

Eigen::MatrixXcd LocalSpace::lower(int site) const {
    const int nb = static_cast<int>(ss_.boson_charges.size());
    const int nf = 1 << ss_.fermion_modes;
    int stride = 1;
    for (int s = nsites_ - 1; s > site; --s) stride *= ss_.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int idx = 0; idx < dim_; ++idx) {
        const int b = ss_.boson_level(level(idx, site));
        if (b == 0 || b >= nb) continue;
        out(idx - nf * stride, idx) = std::sqrt(static_cast<double>(ss_.boson_charges[b]));
    }
    return out;
}

Eigen::MatrixXcd LocalSpace::site_charge(int site) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int idx = 0; idx < dim_; ++idx) out(idx, idx) = ss_.charge(level(idx, site));
    return out;
}

Eigen::MatrixXcd LocalSpace::total_charge() const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int idx = 0; idx < dim_; ++idx) out(idx, idx) = charge(idx);
    return out;
}

SectorBasis::SectorBasis(const TorusLattice& lat, const SiteSpace& ss, int Q, std::vector<std::uint64_t> codes)
    : lat_(lat), ss_(ss), Q_(Q), codes_(std::move(codes)) {
    std::sort(codes_.begin(), codes_.end());
    radix_.resize(lat.size() + 1);
    radix_[0] = 1;
    for (int s = 0; s < lat.size(); ++s) radix_[s + 1] = radix_[s] * static_cast<std::uint64_t>(ss.dim());
}

int SectorBasis::level_of_code(std::uint64_t code, int site) const {
    return static_cast<int>((code / radix_[site]) % static_cast<std::uint64_t>(ss_.dim()));
}

int SectorBasis::level(int i, int site) const { return level_of_code(codes_[i], site); }

std::uint64_t SectorBasis::set_level(std::uint64_t code, int site, int lv) const {
    const int old = level_of_code(code, site);
    return code - static_cast<std::uint64_t>(old) * radix_[site] + static_cast<std::uint64_t>(lv) * radix_[site];
}

int SectorBasis::find(std::uint64_t code) const {
    auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
    if (it == codes_.end() || *it != code) return -1;
    return static_cast<int>(it - codes_.begin());
}

int SectorBasis::fermions_before(int i, int site) const {
    int n = 0;
    for (int s = 0; s < site; ++s) n += ss_.fermion_count(level(i, s));
    return n;
}

double sector_dimension(const SiteSpace& ss, int nsites, int Q) {
    if (Q < 0) return 0.0;
    std::vector<double> ways(Q + 1, 0.0), next(Q + 1);
    ways[0] = 1.0;
    for (int s = 0; s < nsites; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int q = 0; q <= Q; ++q) {
            if (ways[q] == 0.0) continue;
            for (int lv = 0; lv < ss.dim(); ++lv) {
                const int c = q + ss.charge(lv);
                if (c <= Q) next[c] += ways[q];
            }
        }
        ways.swap(next);
    }
    return ways[Q];
}

namespace {

void enumerate(const SiteSpace& ss, int site, int nsites, int remaining, std::uint64_t code, std::uint64_t radix,
               int qmax, std::vector<std::uint64_t>& out) {
    if (site == nsites) {
        if (remaining == 0) out.push_back(code);
        return;
    }
    const int left_after = nsites - site - 1;
    for (int lv = 0; lv < ss.dim(); ++lv) {
        const int r = remaining - ss.charge(lv);
        if (r < 0 || r > qmax * left_after) continue;
        enumerate(ss, site + 1, nsites, r, code + static_cast<std::uint64_t>(lv) * radix,
                  radix * static_cast<std::uint64_t>(ss.dim()), qmax, out);
    }
}

}  // namespace

SectorBasis build_sector_basis(const TorusLattice& lat, const SiteSpace& ss, int Q, int cap) {
    const int n = lat.size();
    const int qmax = ss.q_max();
    if (Q < 0 || Q > qmax * n)
        config_error("charge Q=" + std::to_string(Q) + " outside [0, " + std::to_string(qmax * n) + "]");
    if (n * std::log2(static_cast<double>(ss.dim())) > 64.0)
        config_error("too many sites to encode configurations; use a smaller L");
    const double count = sector_dimension(ss, n, Q);
    if (count > cap)
        config_error("sector dimension " + std::to_string(static_cast<long long>(count)) + " exceeds cap " +
                     std::to_string(cap) + "; choose a smaller L or Q");
    std::vector<std::uint64_t> codes;
    codes.reserve(static_cast<size_t>(count));
    enumerate(ss, 0, n, Q, 0, 1, qmax, codes);
    return SectorBasis(lat, ss, Q, std::move(codes));
}

LocalTerm make_local_term(const SiteSpace& ss, std::vector<int> support, const Eigen::MatrixXcd& matrix,
                          std::string tag) {
    const int n = static_cast<int>(support.size());
    LocalSpace ls(ss, n);
    if (matrix.rows() != ls.dim() || matrix.cols() != ls.dim())
        config_error("term matrix dimension does not match its support");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return support[a] < support[b]; });
    for (int k = 1; k < n; ++k)
        if (support[order[k]] == support[order[k - 1]]) config_error("term support has repeated sites");

    const int d = ss.dim();
    std::vector<int> perm(ls.dim());
    std::vector<double> sign(ls.dim(), 1.0);
    for (int idx = 0; idx < ls.dim(); ++idx) {
        int newidx = 0;
        for (int k = 0; k < n; ++k) newidx = newidx * d + ls.level(idx, order[k]);
        perm[idx] = newidx;
        int crossings = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q)
                if (support[p] > support[q])
                    crossings += ss.fermion_count(ls.level(idx, p)) * ss.fermion_count(ls.level(idx, q));
        sign[idx] = (crossings & 1) ? -1.0 : 1.0;
    }
    LocalTerm out;
    out.tag = std::move(tag);
    out.matrix = Eigen::MatrixXcd::Zero(ls.dim(), ls.dim());
    for (int a = 0; a < ls.dim(); ++a)
        for (int b = 0; b < ls.dim(); ++b) out.matrix(perm[a], perm[b]) = sign[a] * sign[b] * matrix(a, b);
    out.support.resize(n);
    for (int k = 0; k < n; ++k) out.support[k] = support[order[k]];
    return out;
}

SpMat embed_local_operator(const LocalTerm& term, const SectorBasis& basis) {
    const SiteSpace& ss = basis.site_space();
    const int n = static_cast<int>(term.support.size());
    const int d = ss.dim();
    LocalSpace ls(ss, n);
    if (term.matrix.rows() != ls.dim()) config_error("term matrix dimension does not match site space");
    for (int s : term.support)
        if (s < 0 || s >= basis.lattice().size()) config_error("term support not on lattice");

    std::vector<std::vector<std::pair<int, cd>>> cols(ls.dim());
    for (int c = 0; c < ls.dim(); ++c)
        for (int r = 0; r < ls.dim(); ++r)
            if (std::abs(term.matrix(r, c)) > 0.0) cols[c].emplace_back(r, term.matrix(r, c));

    const bool fermionic = ss.fermion_modes > 0;
    auto local_sign = [&](int state) {
        if (!fermionic) return 1.0;
        int parity = 0, inside = 0;
        for (int k = 0; k < n; ++k) {
            const int nf = ss.fermion_count(basis.level(state, term.support[k]));
            const int outside_before = basis.fermions_before(state, term.support[k]) - inside;
            parity += nf * outside_before;
            inside += nf;
        }
        return (parity & 1) ? -1.0 : 1.0;
    };

    std::vector<Triplet> trip;
    for (int i = 0; i < basis.dim(); ++i) {
        int loc = 0;
        for (int k = 0; k < n; ++k) loc = loc * d + basis.level(i, term.support[k]);
        if (cols[loc].empty()) continue;
        const double si = local_sign(i);
        for (const auto& [r, v] : cols[loc]) {
            std::uint64_t code = basis.code(i);
            for (int k = 0; k < n; ++k) code = basis.set_level(code, term.support[k], ls.level(r, k));
            const int j = basis.find(code);
            if (j < 0) {
                if (std::abs(v) < 1e-14) continue;
                config_error("term '" + term.tag + "' does not conserve charge in the sector");
            }
            trip.emplace_back(j, i, si * local_sign(j) * v);
        }
    }
    SpMat M(basis.dim(), basis.dim());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Eigen::VectorXd charge_operator(const SiteSet& region, const SectorBasis& basis) {
    const auto members = region.members();
    Eigen::VectorXd q = Eigen::VectorXd::Zero(basis.dim());
    for (int i = 0; i < basis.dim(); ++i)
        for (int s : members) q(i) += basis.site_space().charge(basis.level(i, s));
    return q;
}

}  // namespace hq
