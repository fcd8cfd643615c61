#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hallpump/common.hpp"

namespace hallpump::lattice {

/// Lattice site with coordinates in the canonical window {-L/2+1, ..., L/2}.
struct Site {
    int x1 = 0;
    int x2 = 0;
    friend bool operator==(const Site&, const Site&) = default;
    friend auto operator<=>(const Site&, const Site&) = default;
};

/// Periodic L x L torus with the graph (L1) metric.
class TorusLattice {
  public:
    explicit TorusLattice(int L);

    int L() const { return L_; }
    int num_sites() const { return L_ * L_; }

    /// Canonical representative of a coordinate mod L, in {-L/2+1, ..., L/2}.
    int canonical(int c) const;
    Site canonical(Site s) const { return {canonical(s.x1), canonical(s.x2)}; }

    /// Linear index used for basis ordering (row-major over shifted coords).
    int site_index(Site s) const;
    Site site_at(int idx) const;

    int distance(Site a, Site b) const;
    int diameter() const { return L_; }

    const std::vector<Site>& sites() const { return sites_; }

  private:
    int L_;
    std::vector<Site> sites_;
};

/// Explicit site set. Stored sorted and duplicate-free so set algebra is exact.
class Region {
  public:
    Region() = default;
    Region(std::vector<Site> members, std::string label = {});

    const std::vector<Site>& sites() const { return sites_; }
    const std::string& label() const { return label_; }
    size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    bool contains(Site s) const;

    /// Equality is set equality; labels are bookkeeping only.
    friend bool operator==(const Region& a, const Region& b) { return a.sites_ == b.sites_; }

  private:
    std::vector<Site> sites_;
    std::string label_;
};

/// The strips and boundary lines used throughout: eta is the horizontal strip
/// {0 <= x2 < L/2}, nu the vertical one, with lower/upper boundary lines.
struct NamedRegions {
    Region eta, eta_minus, eta_plus;
    Region nu, nu_minus, nu_plus;
};

TorusLattice make_torus(int L);
NamedRegions named_regions(const TorusLattice& lat);

int distance_to_region(const TorusLattice& lat, Site s, const Region& z);
int region_distance(const TorusLattice& lat, const Region& a, const Region& b);

/// r-fattening: all sites within distance r of z.
Region fatten(const TorusLattice& lat, const Region& z, int r);

/// Boundary {d(.,Z) <= 1} intersect {d(.,Z^c) <= 1}.
Region boundary(const TorusLattice& lat, const Region& z);

Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_complement(const TorusLattice& lat, const Region& z);

} // namespace hallpump::lattice
