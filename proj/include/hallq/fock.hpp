#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "hallq/lattice.hpp"

namespace hq {

using cd = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cd>;
using Triplet = Eigen::Triplet<cd>;

enum class Statistics { Bosonic, Fermionic };

// A site factor is (bosonic levels) x (fermion modes). Level index
// l = b * 2^k + f where f holds the k mode occupations, orbital 0 in the
// most significant bit.
struct SiteSpace {
    std::vector<int> boson_charges{0};
    int fermion_modes = 0;

    int dim() const { return static_cast<int>(boson_charges.size()) << fermion_modes; }
    int charge(int level) const;
    int boson_level(int level) const { return level >> fermion_modes; }
    int fermion_bits(int level) const { return level & ((1 << fermion_modes) - 1); }
    int fermion_count(int level) const;
    bool occupied(int level, int orbital) const;
    int q_max() const;
    Statistics statistics() const { return fermion_modes > 0 ? Statistics::Fermionic : Statistics::Bosonic; }

    static SiteSpace hardcore_boson() { return {{0, 1}, 0}; }
    static SiteSpace soft_boson(int nmax);
    static SiteSpace fermions(int modes) { return {{0}, modes}; }
};

// Operators on the tensor product of `nsites` copies of a site space, first
// site most significant. Fermion operators carry Jordan-Wigner strings in the
// local mode order (site, then orbital).
class LocalSpace {
public:
    LocalSpace(const SiteSpace& ss, int nsites);

    int dim() const { return dim_; }
    int nsites() const { return nsites_; }
    int level(int index, int site) const;
    int charge(int index) const;
    int fermion_parity(int index) const;

    Eigen::MatrixXcd identity() const;
    Eigen::MatrixXcd annihilate(int site, int orbital) const;
    Eigen::MatrixXcd create(int site, int orbital) const { return annihilate(site, orbital).adjoint(); }
    Eigen::MatrixXcd number(int site, int orbital) const;
    // Bosonic ladder (lowering) operator on the boson factor of a site.
    Eigen::MatrixXcd lower(int site) const;
    Eigen::MatrixXcd site_charge(int site) const;
    Eigen::MatrixXcd total_charge() const;

private:
    SiteSpace ss_;
    int nsites_;
    int dim_;
};

// Fixed-charge basis. Configurations are mixed-radix codes, site 0 least
// significant, stored sorted.
class SectorBasis {
public:
    SectorBasis() = default;
    SectorBasis(const TorusLattice& lat, const SiteSpace& ss, int Q, std::vector<std::uint64_t> codes);

    const TorusLattice& lattice() const { return lat_; }
    const SiteSpace& site_space() const { return ss_; }
    int Q() const { return Q_; }
    int dim() const { return static_cast<int>(codes_.size()); }
    std::uint64_t code(int i) const { return codes_[i]; }
    int level(int i, int site) const;
    int level_of_code(std::uint64_t code, int site) const;
    std::uint64_t set_level(std::uint64_t code, int site, int level) const;
    int find(std::uint64_t code) const;
    int fermions_before(int i, int site) const;  // occupied modes on sites < site

private:
    TorusLattice lat_;
    SiteSpace ss_;
    int Q_ = 0;
    std::vector<std::uint64_t> codes_;
    std::vector<std::uint64_t> radix_;
};

constexpr int kDefaultSectorCap = 200000;

// Number of charge-Q configurations, without enumerating them.
double sector_dimension(const SiteSpace& ss, int nsites, int Q);

SectorBasis build_sector_basis(const TorusLattice& lat, const SiteSpace& ss, int Q, int cap = kDefaultSectorCap);

// A term on the ordered tensor factor of its support sites.
struct LocalTerm {
    std::vector<int> support;  // ascending site indices
    Eigen::MatrixXcd matrix;
    std::string tag;
};

// Sorts the support ascending and permutes the matrix accordingly, with
// fermionic reordering signs.
LocalTerm make_local_term(const SiteSpace& ss, std::vector<int> support, const Eigen::MatrixXcd& matrix,
                          std::string tag = {});

// Embeds a local term into a sector. Elements leaving the sector raise a
// config error (the term must conserve charge).
SpMat embed_local_operator(const LocalTerm& term, const SectorBasis& basis);

// Diagonal of sum_{s in region} q_s over the sector.
Eigen::VectorXd charge_operator(const SiteSet& region, const SectorBasis& basis);

}  // namespace hq
