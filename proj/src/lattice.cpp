#include "hallq/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "hallq/error.hpp"

namespace hq {

namespace {

int arc(int a, int b, int n) {
    int d = std::abs(a - b) % n;
    return std::min(d, n - d);
}

int signed_coord(int c, int n) {
    int t = ((c - 1) % n + n) % n;
    // (-n/2, n/2]: for even n the antipode n/2 stays positive
    if (2 * t > n) t -= n;
    return t;
}

}  // namespace

TorusLattice::TorusLattice(int Lx, int Ly) : lx_(Lx), ly_(Ly) {
    if (Lx <= 0 || Ly <= 0) config_error("lattice size must be positive");
}

int TorusLattice::index(const Site& s) const {
    if (!contains(s)) config_error("site (" + std::to_string(s.x) + "," + std::to_string(s.y) + ") not on lattice");
    return (s.y - 1) * lx_ + (s.x - 1);
}

Site TorusLattice::site(int idx) const {
    if (idx < 0 || idx >= size()) config_error("site index out of range");
    return {idx % lx_ + 1, idx / lx_ + 1};
}

bool TorusLattice::contains(const Site& s) const {
    return s.x >= 1 && s.x <= lx_ && s.y >= 1 && s.y <= ly_;
}

Site TorusLattice::wrap(int x, int y) const {
    return {((x - 1) % lx_ + lx_) % lx_ + 1, ((y - 1) % ly_ + ly_) % ly_ + 1};
}

int TorusLattice::distance(const Site& a, const Site& b) const {
    return arc(a.x, b.x, lx_) + arc(a.y, b.y, ly_);
}

int TorusLattice::signed_x(const Site& s) const { return signed_coord(s.x, lx_); }
int TorusLattice::signed_y(const Site& s) const { return signed_coord(s.y, ly_); }
int TorusLattice::column_distance(int x1, int x2) const { return arc(x1, x2, lx_); }
int TorusLattice::row_distance(int y1, int y2) const { return arc(y1, y2, ly_); }

std::string to_string(RegionLabel label) {
    switch (label) {
        case RegionLabel::XStrip: return "X-strip";
        case RegionLabel::YStrip: return "Y-strip";
        case RegionLabel::XHalf: return "X-half";
        case RegionLabel::YHalf: return "Y-half";
        case RegionLabel::OmegaX: return "Omega_X";
        case RegionLabel::OmegaY: return "Omega_Y";
        case RegionLabel::Omega: return "Omega";
        case RegionLabel::Omega0: return "Omega_0";
        case RegionLabel::Ball: return "Ball";
        case RegionLabel::Fattening: return "Fattening";
        case RegionLabel::Custom: return "custom";
    }
    return "custom";
}

RegionLabel region_label_from_string(const std::string& name) {
    static const std::map<std::string, RegionLabel> table = {
        {"X-strip", RegionLabel::XStrip}, {"Y-strip", RegionLabel::YStrip},
        {"X-half", RegionLabel::XHalf},   {"Y-half", RegionLabel::YHalf},
        {"Omega_X", RegionLabel::OmegaX}, {"Omega_Y", RegionLabel::OmegaY},
        {"Omega", RegionLabel::Omega},    {"Omega_0", RegionLabel::Omega0},
        {"Ball", RegionLabel::Ball},      {"Fattening", RegionLabel::Fattening},
        {"custom", RegionLabel::Custom}};
    auto it = table.find(name);
    if (it == table.end()) config_error("unknown region label '" + name + "'");
    return it->second;
}

SiteSet::SiteSet(const TorusLattice& lat, RegionLabel label)
    : lat_(lat), label_(label), mask_(lat.size(), false) {}

SiteSet::SiteSet(const TorusLattice& lat, const std::vector<int>& members, RegionLabel label)
    : SiteSet(lat, label) {
    for (int m : members) {
        if (m < 0 || m >= lat.size()) config_error("site set member outside lattice");
        mask_[m] = true;
    }
}

std::vector<int> SiteSet::members() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(mask_.size()); ++i)
        if (mask_[i]) out.push_back(i);
    return out;
}

int SiteSet::count() const { return static_cast<int>(std::count(mask_.begin(), mask_.end(), true)); }

bool SiteSet::subset_of(const SiteSet& other) const {
    for (size_t i = 0; i < mask_.size(); ++i)
        if (mask_[i] && !other.mask_.at(i)) return false;
    return true;
}

SiteSet SiteSet::complement() const {
    SiteSet out(lat_, RegionLabel::Custom);
    for (size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = !mask_[i];
    return out;
}

SiteSet SiteSet::intersect(const SiteSet& other) const {
    SiteSet out(lat_, RegionLabel::Custom);
    for (size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] && other.mask_.at(i);
    return out;
}

SiteSet SiteSet::unite(const SiteSet& other) const {
    SiteSet out(lat_, RegionLabel::Custom);
    for (size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] || other.mask_.at(i);
    return out;
}

int SiteSet::diameter() const {
    auto m = members();
    int d = 0;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = i + 1; j < m.size(); ++j) d = std::max(d, lat_.distance(m[i], m[j]));
    return d;
}

SiteSet ball(const TorusLattice& lat, const Site& u, int r) {
    if (!lat.contains(u)) config_error("ball center not on lattice");
    if (r < 0) config_error("ball radius must be nonnegative");
    SiteSet out(lat, RegionLabel::Ball);
    for (int i = 0; i < lat.size(); ++i)
        if (lat.distance(lat.site(i), u) <= r) out.insert(i);
    return out;
}

SiteSet fattening(const SiteSet& Z, int M) {
    const auto& lat = Z.lattice();
    if (M < 0) config_error("fattening radius must be nonnegative");
    if (M > std::max(lat.Lx(), lat.Ly())) config_error("fattening radius exceeds lattice extent");
    SiteSet out(lat, RegionLabel::Fattening);
    auto zs = Z.members();
    for (int i = 0; i < lat.size(); ++i)
        for (int z : zs)
            if (lat.distance(i, z) <= M) {
                out.insert(i);
                break;
            }
    return out;
}

SiteSet thickened_complement(const SiteSet& S, int R) {
    const auto& lat = S.lattice();
    auto outside = S.complement().members();
    SiteSet out(lat, RegionLabel::Custom);
    for (int i = 0; i < lat.size(); ++i)
        for (int z : outside)
            if (lat.distance(i, z) <= R) {
                out.insert(i);
                break;
            }
    return out;
}

SiteSet named_region(const TorusLattice& lat, const RegionRequest& req) {
    const RegionLabel label = req.label;
    const int R = req.R;
    auto need_strips = [&](int n) {
        if (n <= 2 * R) config_error("lattice too small for " + to_string(label) + " (need L > 2R)");
    };
    SiteSet out(lat, label);
    auto fill = [&](auto pred) {
        for (int i = 0; i < lat.size(); ++i)
            if (pred(lat.site(i))) out.insert(i);
    };
    switch (label) {
        case RegionLabel::XStrip:
            need_strips(lat.Lx());
            fill([&](const Site& s) { return lat.column_distance(s.x, 1) < R; });
            break;
        case RegionLabel::YStrip:
            need_strips(lat.Ly());
            fill([&](const Site& s) { return lat.row_distance(s.y, 1) < R; });
            break;
        case RegionLabel::XHalf:
            fill([&](const Site& s) { return s.x <= lat.half_x(); });
            break;
        case RegionLabel::YHalf:
            fill([&](const Site& s) { return s.y <= lat.half_y(); });
            break;
        case RegionLabel::OmegaX: {
            need_strips(lat.Lx());
            const int c = lat.Lx() / 4;
            fill([&](const Site& s) { return std::abs(lat.signed_x(s)) <= c; });
            break;
        }
        case RegionLabel::OmegaY: {
            need_strips(lat.Ly());
            const int c = lat.Ly() / 4;
            fill([&](const Site& s) { return std::abs(lat.signed_y(s)) <= c; });
            break;
        }
        case RegionLabel::Omega: {
            need_strips(lat.Ly());
            const int c = (5 * lat.Ly()) / 24 - R;
            if (c < 0) config_error("lattice too small for Omega");
            fill([&](const Site& s) { return std::abs(lat.signed_y(s)) <= c; });
            break;
        }
        case RegionLabel::Omega0: {
            need_strips(std::min(lat.Lx(), lat.Ly()));
            const int cx = lat.Lx() / 8 - R;
            const int cy = lat.Ly() / 8 - R;
            if (cx < 0 || cy < 0) config_error("lattice too small for Omega_0 (need L >= 8R)");
            fill([&](const Site& s) { return std::abs(lat.signed_x(s)) <= cx && std::abs(lat.signed_y(s)) <= cy; });
            break;
        }
        case RegionLabel::Ball:
            if (!req.center || !req.radius) config_error("Ball needs center and radius");
            return ball(lat, *req.center, *req.radius);
        case RegionLabel::Fattening:
            if (!req.base || !req.radius) config_error("Fattening needs base set and radius");
            return fattening(*req.base, *req.radius);
        case RegionLabel::Custom:
            config_error("custom regions are built from explicit member lists");
    }
    return out;
}

}  // namespace hq
