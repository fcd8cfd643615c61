#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hallpump/common.hpp"
#include "hallpump/lattice.hpp"

namespace hallpump::fock {

using lattice::Region;
using lattice::Site;
using lattice::TorusLattice;
using VectorXcd = Eigen::VectorXcd;

/// One creation (dagger=true) or annihilation factor.
struct FermiOp {
    int site_index = 0;
    bool dagger = false;
    friend bool operator==(const FermiOp&, const FermiOp&) = default;
    friend auto operator<=>(const FermiOp&, const FermiOp&) = default;
};

/// Product of fermionic operators with a complex coefficient. Factors are
/// stored in application order: factors[0] acts first on the ket.
struct Monomial {
    cplx coeff{0.0, 0.0};
    std::vector<FermiOp> factors;

    /// Net particle-number change of the monomial.
    int particle_delta() const;
    /// Hermitian conjugate (reverses factors, flips daggers, conjugates coeff).
    Monomial dagger() const;
};

uint64_t binomial(int n, int k);

/// Occupation-number basis of the N-particle sector over the lattice sites.
/// States are bitstrings (bit i = occupation of site with linear index i),
/// listed in increasing integer order; lookup is by combinatorial ranking.
class SectorBasis {
  public:
    SectorBasis(const TorusLattice& lat, int n_particles, uint64_t dim_cap = 20'000'000);

    const TorusLattice& torus() const { return *lat_; }
    int num_sites() const { return n_sites_; }
    int n_particles() const { return n_; }
    uint64_t dim() const { return dim_; }

    uint64_t state(uint64_t index) const { return states_[index]; }
    const std::vector<uint64_t>& states() const { return states_; }

    /// Position of a bitstring in the basis (must have the right popcount).
    uint64_t index_of(uint64_t state) const;

  private:
    const TorusLattice* lat_;
    int n_sites_;
    int n_;
    uint64_t dim_;
    std::vector<uint64_t> states_;
    std::vector<std::vector<uint64_t>> rank_table_; // rank_table_[k][i] = C(i, k)
};

/// Apply a monomial to a basis state. Returns false if the result vanishes;
/// otherwise sets out_state and multiplies sign by the accumulated JW parity.
/// Convention: a_i |n> = (-1)^{sum_{j<i} n_j} |n - e_i> when bit i is set.
bool apply_monomial_to_state(const Monomial& m, uint64_t state, uint64_t& out_state, int& sign);

/// Apply a monomial sector-to-sector: `from` must have N matching the input
/// vector, `to` must have N + particle_delta. Linear in the input.
VectorXcd apply_monomial(const Monomial& m, const SectorBasis& from, const SectorBasis& to,
                         const VectorXcd& in);

/// Charge assignment q(X): default is the site number operator on singletons.
/// Terms must be diagonal in the occupation basis with integer spectrum.
struct ChargeAssignment {
    struct Term {
        std::vector<int> support;          // site indices
        std::vector<Monomial> monomials;   // diagonal monomials only
    };
    std::vector<Term> terms;
    int range = 1; // R_q: supports have diameter < range

    static ChargeAssignment site_number_default(const TorusLattice& lat);
};

/// Validation report for a charge assignment (commutation + integer spectrum).
struct ChargeValidation {
    bool ok = true;
    std::vector<std::string> violations;
};
ChargeValidation validate_charge_assignment(const ChargeAssignment& q, const TorusLattice& lat,
                                            const SectorBasis& probe);

/// Diagonal of Q_Z on the sector: eigenvalue per basis state.
Eigen::VectorXd charge_operator(const Region& z, const SectorBasis& basis,
                                const ChargeAssignment& q);
/// Same with the default site-number assignment.
Eigen::VectorXd charge_operator(const Region& z, const SectorBasis& basis);

} // namespace hallpump::fock
