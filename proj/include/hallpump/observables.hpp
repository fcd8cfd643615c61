#pragma once

#include <functional>
#include <iosfwd>
#include <optional>

#include "hallpump/fock.hpp"
#include "hallpump/kernels.hpp"
#include "hallpump/lattice.hpp"

namespace hallpump::observables {

using fock::ChargeAssignment;
using fock::Monomial;
using fock::SectorBasis;
using kernels::CsrMatrix;
using kernels::MatrixXcd;
using lattice::Region;
using lattice::Site;
using lattice::TorusLattice;

/// Hermitian local term keyed by its support set (global site indices, sorted).
struct LocalTerm {
    std::vector<int> support;
    std::vector<Monomial> monomials;
};

/// Extensive observable: a map X -> Psi(X) of finite-range, uniformly bounded
/// Hermitian terms. The term decomposition is part of the value; restriction
/// and boundary splits are set-membership filters over it.
struct ExtensiveObservable {
    std::vector<LocalTerm> terms;
    int range = 0;         // declared R
    double strength = 0.0; // declared m

    /// Restriction S_Z: keep terms with support inside Z.
    ExtensiveObservable restrict_to(const TorusLattice& lat, const Region& z) const;
};

int support_diameter(const TorusLattice& lat, const std::vector<int>& support);
Region support_region(const TorusLattice& lat, const std::vector<int>& support);

/// Dense matrix of a term on the Fock space of its own support (sites
/// relabeled in global-index order; Jordan-Wigner signs internal to the
/// support). Adequate for norm/Hermiticity checks of the shipped term classes.
MatrixXcd local_dense(const LocalTerm& term);

/// Max-norm difference of two observables, compared term-by-term on local
/// factors (missing terms compare against zero).
double term_difference_norm(const TorusLattice& lat, const ExtensiveObservable& a,
                            const ExtensiveObservable& b);

struct ValidationReport {
    bool ok = true;
    int measured_range = 0;
    double measured_strength = 0.0;
    std::vector<std::string> violations;
};

/// Checks range, strength, Hermiticity and charge conservation (report style).
ValidationReport validate_extensive(const TorusLattice& lat, const ExtensiveObservable& obs);

/// Net charge shift of a monomial against Q_Z: (#creations in Z) - (#annihilations in Z).
int charge_weight(const Monomial& m, const TorusLattice& lat, const Region& z);

/// Symbolic commutator [S, Q_Z] as a sum of local terms, each supported on the
/// original term's support. Throws if S is not charge conserving.
struct BoundaryCommutator {
    std::vector<LocalTerm> terms;
    bool support_verified = false; // every term meets Z and a neighborhood of Z^c
};
BoundaryCommutator boundary_commutator(const TorusLattice& lat, const ExtensiveObservable& s,
                                       const Region& z);

/// i[S, Q_nu] split into the nu_- and nu_+ assigned halves. Terms are assigned
/// to the unique boundary line their support is nearest to; equidistant
/// supports are rejected (lattice too small for the declared ranges).
struct CurrentSplit {
    std::vector<LocalTerm> minus_terms;
    std::vector<LocalTerm> plus_terms;
    std::vector<int> minus_distance; // distance of each minus term to the minus line
};
CurrentSplit current_decomposition(const TorusLattice& lat, const ExtensiveObservable& s,
                                   const Region& nu, const Region& nu_minus,
                                   const Region& nu_plus);

/// Flux-twisted Hamiltonian family H_phi: terms whose support meets both the
/// cut line and its complement are conjugated by exp(i phi Q_strip); the rest
/// are untouched. Periodic of period 2 pi by integrality of the charge.
class HamiltonianFamily {
  public:
    HamiltonianFamily(const TorusLattice& lat, ExtensiveObservable base, Region strip,
                      Region cut_line);

    const TorusLattice& torus() const { return *lat_; }
    const ExtensiveObservable& base() const { return base_; }
    const Region& strip() const { return strip_; }
    const Region& cut_line() const { return cut_line_; }

    /// Twist Hamiltonian H_phi.
    ExtensiveObservable at_phi(double phi) const;
    /// d/dphi of the twist Hamiltonian (supported on the cut-crossing terms).
    ExtensiveObservable d_phi(double phi) const;
    /// Full gauge conjugation exp(i phi Q_strip) H exp(-i phi Q_strip).
    ExtensiveObservable antitwist_at(double phi) const;

    bool term_crosses_cut(const LocalTerm& t) const;

  private:
    const TorusLattice* lat_;
    ExtensiveObservable base_;
    Region strip_, cut_line_;
};

/// Assemble an observable into a sparse matrix on a fixed-charge sector.
CsrMatrix assemble(const ExtensiveObservable& obs, const SectorBasis& basis);
CsrMatrix assemble_terms(const std::vector<LocalTerm>& terms, const SectorBasis& basis);

/// Expectation <v| T |v> of a term list without assembling a matrix.
cplx terms_expectation(const std::vector<LocalTerm>& terms, const SectorBasis& basis,
                       const Eigen::VectorXcd& v);

/// Structured text serialization of interaction maps. Round trips bit-exactly
/// (coefficients written as C hexfloats). Schema documented in the README.
void write_interactions(std::ostream& os, const TorusLattice& lat,
                        const ExtensiveObservable& obs);
ExtensiveObservable read_interactions(std::istream& is, const TorusLattice& lat);

} // namespace hallpump::observables
