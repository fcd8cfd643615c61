#include "hallpump/lattice.hpp"

#include <algorithm>
#include <cstdlib>

namespace hallpump::lattice {

TorusLattice::TorusLattice(int L) : L_(L) {
    if (L < 4 || L % 2 != 0)
        throw PreconditionError("torus size must be even and >= 4, got " + std::to_string(L));
    sites_.reserve(static_cast<size_t>(L_) * L_);
    for (int x2 = -L_ / 2 + 1; x2 <= L_ / 2; ++x2)
        for (int x1 = -L_ / 2 + 1; x1 <= L_ / 2; ++x1)
            sites_.push_back({x1, x2});
}

int TorusLattice::canonical(int c) const {
    int m = c % L_;
    if (m <= -L_ / 2) m += L_;
    if (m > L_ / 2) m -= L_;
    return m;
}

int TorusLattice::site_index(Site s) const {
    s = canonical(s);
    int u1 = s.x1 + L_ / 2 - 1;
    int u2 = s.x2 + L_ / 2 - 1;
    return u1 + L_ * u2;
}

Site TorusLattice::site_at(int idx) const {
    int u1 = idx % L_;
    int u2 = idx / L_;
    return {u1 - L_ / 2 + 1, u2 - L_ / 2 + 1};
}

int TorusLattice::distance(Site a, Site b) const {
    int d1 = std::abs(canonical(a.x1 - b.x1));
    int d2 = std::abs(canonical(a.x2 - b.x2));
    d1 = std::min(d1, L_ - d1);
    d2 = std::min(d2, L_ - d2);
    return d1 + d2;
}

Region::Region(std::vector<Site> members, std::string label)
    : sites_(std::move(members)), label_(std::move(label)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool Region::contains(Site s) const {
    return std::binary_search(sites_.begin(), sites_.end(), s);
}

TorusLattice make_torus(int L) { return TorusLattice(L); }

NamedRegions named_regions(const TorusLattice& lat) {
    const int half = lat.L() / 2;
    std::vector<Site> eta, eta_m, eta_p, nu, nu_m, nu_p;
    for (Site s : lat.sites()) {
        if (s.x2 >= 0 && s.x2 < half) eta.push_back(s);
        if (s.x2 == 0) eta_m.push_back(s);
        if (s.x2 == half - 1) eta_p.push_back(s);
        if (s.x1 >= 0 && s.x1 < half) nu.push_back(s);
        if (s.x1 == 0) nu_m.push_back(s);
        if (s.x1 == half - 1) nu_p.push_back(s);
    }
    return {Region(eta, "eta"),      Region(eta_m, "eta_minus"), Region(eta_p, "eta_plus"),
            Region(nu, "nu"),        Region(nu_m, "nu_minus"),   Region(nu_p, "nu_plus")};
}

int distance_to_region(const TorusLattice& lat, Site s, const Region& z) {
    if (z.empty()) throw PreconditionError("distance to empty region is undefined");
    int best = lat.diameter();
    for (Site t : z.sites()) best = std::min(best, lat.distance(s, t));
    return best;
}

int region_distance(const TorusLattice& lat, const Region& a, const Region& b) {
    if (a.empty() || b.empty()) throw PreconditionError("distance to empty region is undefined");
    int best = lat.diameter();
    for (Site s : a.sites()) best = std::min(best, distance_to_region(lat, s, b));
    return best;
}

Region fatten(const TorusLattice& lat, const Region& z, int r) {
    if (r < 0) throw PreconditionError("fattening radius must be nonnegative");
    if (z.empty()) return z;
    std::vector<Site> out;
    for (Site s : lat.sites())
        if (distance_to_region(lat, s, z) <= r) out.push_back(s);
    return Region(std::move(out), z.label());
}

Region boundary(const TorusLattice& lat, const Region& z) {
    Region zc = region_complement(lat, z);
    if (z.empty() || zc.empty()) return Region(std::vector<Site>{});
    std::vector<Site> out;
    for (Site s : lat.sites())
        if (distance_to_region(lat, s, z) <= 1 && distance_to_region(lat, s, zc) <= 1)
            out.push_back(s);
    return Region(std::move(out));
}

Region region_union(const Region& a, const Region& b) {
    std::vector<Site> out(a.sites());
    out.insert(out.end(), b.sites().begin(), b.sites().end());
    return Region(std::move(out));
}

Region region_intersection(const Region& a, const Region& b) {
    std::vector<Site> out;
    for (Site s : a.sites())
        if (b.contains(s)) out.push_back(s);
    return Region(std::move(out));
}

Region region_complement(const TorusLattice& lat, const Region& z) {
    std::vector<Site> out;
    for (Site s : lat.sites())
        if (!z.contains(s)) out.push_back(s);
    return Region(std::move(out));
}

} // namespace hallpump::lattice
