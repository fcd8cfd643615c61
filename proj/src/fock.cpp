#include "hallpump/fock.hpp"

#include <algorithm>
#include <bit>

namespace hallpump::fock {

int Monomial::particle_delta() const {
    int d = 0;
    for (const auto& f : factors) d += f.dagger ? 1 : -1;
    return d;
}

Monomial Monomial::dagger() const {
    Monomial out;
    out.coeff = std::conj(coeff);
    out.factors.assign(factors.rbegin(), factors.rend());
    for (auto& f : out.factors) f.dagger = !f.dagger;
    return out;
}

uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
    return r;
}

SectorBasis::SectorBasis(const TorusLattice& lat, int n_particles, uint64_t dim_cap)
    : lat_(&lat), n_sites_(lat.num_sites()), n_(n_particles) {
    if (n_ < 0 || n_ > n_sites_)
        throw PreconditionError("particle number out of range");
    if (n_sites_ > 62)
        throw PreconditionError("lattice too large for 64-bit occupation strings");
    dim_ = binomial(n_sites_, n_);
    if (dim_ > dim_cap)
        throw PreconditionError("sector dimension " + std::to_string(dim_) +
                                " exceeds configured cap " + std::to_string(dim_cap));

    states_.reserve(dim_);
    if (n_ == 0) {
        states_.push_back(0);
    } else {
        // Enumerate N-bit subsets in increasing integer order (Gosper's hack).
        uint64_t v = (uint64_t{1} << n_) - 1;
        const uint64_t limit = (n_sites_ == 62) ? ~uint64_t{0} : (uint64_t{1} << n_sites_);
        while (n_sites_ == 62 || v < limit) {
            states_.push_back(v);
            if (states_.size() == dim_) break;
            uint64_t t = v | (v - 1);
            v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
        }
    }

    rank_table_.assign(n_ + 1, std::vector<uint64_t>(n_sites_ + 1, 0));
    for (int k = 0; k <= n_; ++k)
        for (int i = 0; i <= n_sites_; ++i) rank_table_[k][i] = binomial(i, k);
}

uint64_t SectorBasis::index_of(uint64_t state) const {
    // Combinatorial ranking: count subsets preceding `state` in integer order.
    uint64_t rank = 0;
    int seen = 0;
    uint64_t s = state;
    while (s) {
        int i = std::countr_zero(s);
        ++seen;
        rank += rank_table_[seen][i];
        s &= s - 1;
    }
    return rank;
}

bool apply_monomial_to_state(const Monomial& m, uint64_t state, uint64_t& out_state, int& sign) {
    uint64_t s = state;
    int sg = 1;
    for (const auto& f : m.factors) {
        const uint64_t bit = uint64_t{1} << f.site_index;
        if (f.dagger) {
            if (s & bit) return false; // creating on occupied site
        } else {
            if (!(s & bit)) return false; // annihilating an empty site
        }
        const uint64_t below = s & (bit - 1);
        if (std::popcount(below) & 1) sg = -sg;
        s ^= bit;
    }
    out_state = s;
    sign = sg;
    return true;
}

VectorXcd apply_monomial(const Monomial& m, const SectorBasis& from, const SectorBasis& to,
                         const VectorXcd& in) {
    if (from.n_particles() + m.particle_delta() != to.n_particles())
        throw PreconditionError("monomial particle change does not match target sector");
    if (in.size() != static_cast<Eigen::Index>(from.dim()))
        throw PreconditionError("input vector dimension mismatch");
    VectorXcd out = VectorXcd::Zero(to.dim());
    for (uint64_t i = 0; i < from.dim(); ++i) {
        if (in[i] == cplx{0.0, 0.0}) continue;
        uint64_t target;
        int sign;
        if (!apply_monomial_to_state(m, from.state(i), target, sign)) continue;
        out[to.index_of(target)] += m.coeff * static_cast<double>(sign) * in[i];
    }
    return out;
}

ChargeAssignment ChargeAssignment::site_number_default(const TorusLattice& lat) {
    ChargeAssignment q;
    q.range = 1;
    q.terms.reserve(lat.num_sites());
    for (int i = 0; i < lat.num_sites(); ++i) {
        Monomial n; // n_i = a_i^* a_i; a_i acts first in application order
        n.coeff = 1.0;
        n.factors = {{i, false}, {i, true}};
        q.terms.push_back({{i}, {n}});
    }
    return q;
}

namespace {
// Diagonal monomials are those whose occupation action is n_i-like: equal
// creation and annihilation multisets. Returns false if not diagonal.
bool diagonal_eigenvalue(const Monomial& m, uint64_t state, double& value) {
    uint64_t target;
    int sign;
    if (!apply_monomial_to_state(m, state, target, sign)) {
        value = 0.0;
        return true;
    }
    if (target != state) return false;
    if (std::abs(m.coeff.imag()) > 1e-14) return false;
    value = m.coeff.real() * sign;
    return true;
}
} // namespace

ChargeValidation validate_charge_assignment(const ChargeAssignment& q, const TorusLattice& lat,
                                            const SectorBasis& probe) {
    ChargeValidation rep;
    for (size_t ti = 0; ti < q.terms.size(); ++ti) {
        const auto& term = q.terms[ti];
        // Range: support diameter strictly below R_q.
        for (size_t a = 0; a < term.support.size(); ++a)
            for (size_t b = a + 1; b < term.support.size(); ++b) {
                int d = lat.distance(lat.site_at(term.support[a]), lat.site_at(term.support[b]));
                if (d >= q.range) {
                    rep.ok = false;
                    rep.violations.push_back("term " + std::to_string(ti) +
                                             " support diameter >= R_q");
                }
            }
        for (const auto& m : term.monomials) {
            // Diagonality implies mutual commutation; integer spectrum checked
            // on the probe sector's states.
            for (uint64_t i = 0; i < std::min<uint64_t>(probe.dim(), 4096); ++i) {
                double v;
                if (!diagonal_eigenvalue(m, probe.state(i), v)) {
                    rep.ok = false;
                    rep.violations.push_back("term " + std::to_string(ti) +
                                             " is not diagonal in the occupation basis");
                    break;
                }
            }
        }
        // Integer spectrum of the summed term on probe states.
        for (uint64_t i = 0; i < std::min<uint64_t>(probe.dim(), 4096); ++i) {
            double total = 0.0;
            bool diag = true;
            for (const auto& m : term.monomials) {
                double v;
                if (!diagonal_eigenvalue(m, probe.state(i), v)) { diag = false; break; }
                total += v;
            }
            if (diag && std::abs(total - std::round(total)) > 1e-10) {
                rep.ok = false;
                rep.violations.push_back("term " + std::to_string(ti) +
                                         " has non-integer eigenvalue " + std::to_string(total));
                break;
            }
        }
    }
    return rep;
}

Eigen::VectorXd charge_operator(const Region& z, const SectorBasis& basis,
                                const ChargeAssignment& q) {
    const auto& lat = basis.torus();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(basis.dim());
    for (const auto& term : q.terms) {
        bool inside = true;
        for (int s : term.support)
            if (!z.contains(lat.site_at(s))) { inside = false; break; }
        if (!inside) continue;
        for (const auto& m : term.monomials) {
            for (uint64_t i = 0; i < basis.dim(); ++i) {
                double v;
                if (!diagonal_eigenvalue(m, basis.state(i), v))
                    throw PreconditionError("charge assignment term is not diagonal");
                diag[i] += v;
            }
        }
    }
    return diag;
}

Eigen::VectorXd charge_operator(const Region& z, const SectorBasis& basis) {
    // Fast path for the default assignment: count occupied sites in Z.
    const auto& lat = basis.torus();
    uint64_t mask = 0;
    for (Site s : z.sites()) mask |= uint64_t{1} << lat.site_index(s);
    Eigen::VectorXd diag(basis.dim());
    for (uint64_t i = 0; i < basis.dim(); ++i)
        diag[i] = static_cast<double>(std::popcount(basis.state(i) & mask));
    return diag;
}

} // namespace hallpump::fock
