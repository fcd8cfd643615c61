#include <doctest.h>

#include <queue>

#include "hallpump/lattice.hpp"

using namespace hallpump;
using namespace hallpump::lattice;

namespace {

// independent oracle: breadth-first search on the torus adjacency
int bfs_distance(const TorusLattice& lat, Site a, Site b) {
    std::vector<int> dist(lat.num_sites(), -1);
    std::queue<Site> q;
    q.push(lat.canonical(a));
    dist[lat.site_index(a)] = 0;
    while (!q.empty()) {
        Site u = q.front();
        q.pop();
        const int du = dist[lat.site_index(u)];
        for (Site step : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
            Site v = lat.canonical({u.x1 + step.x1, u.x2 + step.x2});
            if (dist[lat.site_index(v)] < 0) {
                dist[lat.site_index(v)] = du + 1;
                q.push(v);
            }
        }
    }
    return dist[lat.site_index(b)];
}

Region brute_force_fatten(const TorusLattice& lat, const Region& z, int r) {
    std::vector<Site> out;
    for (Site s : lat.sites())
        for (Site t : z.sites())
            if (bfs_distance(lat, s, t) <= r) {
                out.push_back(s);
                break;
            }
    return Region(out);
}

} // namespace

TEST_CASE("make_torus basics") {
    auto lat = make_torus(4);
    CHECK(lat.num_sites() == 16);
    CHECK(lat.diameter() == 4);

    auto lat6 = make_torus(6);
    CHECK(lat6.num_sites() == 36);
    CHECK(lat6.distance({0, 0}, {3, 3}) == 6);
    CHECK(lat6.distance({0, 0}, {3, 3}) == bfs_distance(lat6, {0, 0}, {3, 3}));

    CHECK_THROWS_AS(make_torus(3), PreconditionError);
    CHECK_THROWS_AS(make_torus(2), PreconditionError);
}

TEST_CASE("graph metric matches BFS oracle and is a metric") {
    auto lat = make_torus(6);
    const auto& sites = lat.sites();
    for (size_t i = 0; i < sites.size(); i += 5)
        for (size_t j = 0; j < sites.size(); j += 7) {
            const int d = lat.distance(sites[i], sites[j]);
            CHECK(d == bfs_distance(lat, sites[i], sites[j]));
            CHECK(d == lat.distance(sites[j], sites[i]));
            CHECK(d <= lat.diameter());
        }
    for (size_t i = 0; i < sites.size(); i += 7)
        for (size_t j = 0; j < sites.size(); j += 5)
            for (size_t k = 0; k < sites.size(); k += 11)
                CHECK(lat.distance(sites[i], sites[k]) <=
                      lat.distance(sites[i], sites[j]) + lat.distance(sites[j], sites[k]));
}

TEST_CASE("coordinates are canonical") {
    auto lat = make_torus(4);
    CHECK(lat.canonical(3) == -1);
    CHECK(lat.canonical(-2) == 2);
    CHECK(lat.canonical(2) == 2);
    CHECK(lat.canonical(6) == 2);
    for (int i = 0; i < lat.num_sites(); ++i) CHECK(lat.site_index(lat.site_at(i)) == i);
}

TEST_CASE("named regions") {
    auto lat = make_torus(4);
    auto r = named_regions(lat);
    CHECK(r.eta.size() == 8);
    CHECK(r.eta_minus.size() == 4);
    CHECK(r.eta_plus.size() == 4);
    CHECK(r.nu.size() == 8);

    auto lat6 = make_torus(6);
    auto r6 = named_regions(lat6);
    auto cross = region_intersection(r6.nu_minus, r6.eta_minus);
    CHECK(cross.size() == 1);
    CHECK(cross.sites()[0] == Site{0, 0});

    for (int L : {4, 6}) {
        auto l = make_torus(L);
        auto rr = named_regions(l);
        CHECK(region_intersection(rr.eta_minus, rr.eta_plus).empty());
        CHECK(region_distance(l, rr.eta_minus, rr.eta_plus) == L / 2 - 1);
        int brute = l.diameter();
        for (Site a : rr.eta_minus.sites())
            for (Site b : rr.eta_plus.sites()) brute = std::min(brute, bfs_distance(l, a, b));
        CHECK(brute == L / 2 - 1);
    }
}

TEST_CASE("fattening") {
    auto lat = make_torus(6);
    auto regions = named_regions(lat);

    SUBCASE("r = 0 is the identity") {
        CHECK(fatten(lat, regions.eta_minus, 0) == Region(regions.eta_minus.sites()));
    }
    SUBCASE("single site, r = 1 gives the 5-site cross") {
        Region single({Site{1, 1}});
        auto fat = fatten(lat, single, 1);
        CHECK(fat.size() == 5);
        CHECK(fat == brute_force_fatten(lat, single, 1));
    }
    SUBCASE("r >= L/2 covers the lattice for the boundary line") {
        Region single({Site{0, 0}});
        CHECK(fatten(lat, regions.eta_minus, lat.L() / 2).size() ==
              static_cast<size_t>(lat.num_sites()));
        CHECK(fatten(lat, single, lat.L()).size() == static_cast<size_t>(lat.num_sites()));
    }
    SUBCASE("matches the brute-force definition and is monotone") {
        Region z({Site{0, 0}, Site{2, -1}, Site{-2, 3}});
        Region prev = z;
        for (int r = 0; r <= 4; ++r) {
            auto fat = fatten(lat, z, r);
            CHECK(fat == brute_force_fatten(lat, z, r));
            for (Site s : prev.sites()) CHECK(fat.contains(s));
            prev = fat;
        }
    }
}

TEST_CASE("boundary nonempty iff proper nonempty subset") {
    auto lat = make_torus(4);
    auto regions = named_regions(lat);
    CHECK(!boundary(lat, regions.eta).empty());
    CHECK(boundary(lat, Region(std::vector<Site>{})).empty());
    CHECK(boundary(lat, Region(lat.sites())).empty());

    Region single({Site{1, 1}});
    auto b = boundary(lat, single);
    CHECK(!b.empty());
    CHECK(b.contains({1, 1}));
    CHECK(b.size() == 5);
}

TEST_CASE("set algebra") {
    auto lat = make_torus(4);
    auto r = named_regions(lat);
    auto uni = region_union(r.eta, region_complement(lat, r.eta));
    CHECK(uni.size() == static_cast<size_t>(lat.num_sites()));
    CHECK(region_intersection(r.eta, region_complement(lat, r.eta)).empty());
}
