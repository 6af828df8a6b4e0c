#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hq {

// Sites use 1-based coordinates; the flat index is row-major (x fastest).
struct Site {
    int x = 1;
    int y = 1;
    bool operator==(const Site&) const = default;
};

class TorusLattice {
public:
    TorusLattice() = default;
    explicit TorusLattice(int L) : TorusLattice(L, L) {}
    TorusLattice(int Lx, int Ly);

    int Lx() const { return lx_; }
    int Ly() const { return ly_; }
    // Linear size of a square torus; for strips this is Lx.
    int L() const { return lx_; }
    int size() const { return lx_ * ly_; }
    bool square() const { return lx_ == ly_; }

    int index(const Site& s) const;
    Site site(int idx) const;
    bool contains(const Site& s) const;
    Site wrap(int x, int y) const;

    // Periodic L1 distance.
    int distance(const Site& a, const Site& b) const;
    int distance(int a, int b) const { return distance(site(a), site(b)); }

    // Signed periodic coordinate in (-L/2, L/2], zero on the twist line x = 1 (resp. y = 1).
    int signed_x(const Site& s) const;
    int signed_y(const Site& s) const;

    // Shortest-arc distance between two column (row) coordinates.
    int column_distance(int x1, int x2) const;
    int row_distance(int y1, int y2) const;

    // Columns 1..half_x() carry the twist charge Q_X.
    int half_x() const { return (lx_ + 1) / 2; }
    int half_y() const { return (ly_ + 1) / 2; }

private:
    int lx_ = 1;
    int ly_ = 1;
};

enum class RegionLabel {
    XStrip,
    YStrip,
    XHalf,
    YHalf,
    OmegaX,
    OmegaY,
    Omega,
    Omega0,
    Ball,
    Fattening,
    Custom
};

std::string to_string(RegionLabel label);
RegionLabel region_label_from_string(const std::string& name);

class SiteSet {
public:
    SiteSet() = default;
    // Empty set carrying a label; named_region fills the named ones.
    SiteSet(const TorusLattice& lat, RegionLabel label);
    SiteSet(const TorusLattice& lat, const std::vector<int>& members, RegionLabel label = RegionLabel::Custom);

    const TorusLattice& lattice() const { return lat_; }
    RegionLabel label() const { return label_; }
    bool contains(int idx) const { return mask_.at(idx); }
    void insert(int idx) { mask_.at(idx) = true; }
    std::vector<int> members() const;
    int count() const;
    bool empty() const { return count() == 0; }
    bool subset_of(const SiteSet& other) const;
    const std::vector<bool>& mask() const { return mask_; }

    SiteSet complement() const;
    SiteSet intersect(const SiteSet& other) const;
    SiteSet unite(const SiteSet& other) const;

    // Diameter in the torus metric; zero for empty or singleton sets.
    int diameter() const;

private:
    TorusLattice lat_;
    RegionLabel label_ = RegionLabel::Custom;
    std::vector<bool> mask_;
};

struct RegionRequest {
    RegionLabel label = RegionLabel::Custom;
    int R = 1;
    std::optional<Site> center;           // Ball
    std::optional<int> radius;            // Ball, Fattening
    std::optional<SiteSet> base;          // Fattening
};

// Integer-rounded region boundaries; see README for the conventions.
SiteSet named_region(const TorusLattice& lat, const RegionRequest& req);

SiteSet ball(const TorusLattice& lat, const Site& u, int r);
SiteSet fattening(const SiteSet& Z, int M);

// Sites within distance R of the complement of S.
SiteSet thickened_complement(const SiteSet& S, int R);

}  // namespace hq
