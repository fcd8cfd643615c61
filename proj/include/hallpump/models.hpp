#pragma once

#include <functional>

#include "hallpump/observables.hpp"

namespace hallpump::models {

using kernels::MatrixXcd;
using lattice::NamedRegions;
using lattice::TorusLattice;
using observables::ExtensiveObservable;
using observables::HamiltonianFamily;

/// Spinless fermions on the torus with uniform flux 2*pi*p/q per plaquette
/// (Peierls phases, Landau-type gauge with a seam column), hopping t and
/// nearest-neighbor density interaction V, at fixed particle number N.
struct HofstadterParams {
    int L = 4;
    int flux_p = 1;
    int flux_q = 4;
    double t = 1.0;
    double V = 0.0;
    int N = -1; // -1: fill the lowest magnetic band, N = L^2 * p / q states
};

/// Number of single-particle states per magnetic band on the torus.
int band_state_count(const HofstadterParams& p);

/// Single-particle hopping matrix (L^2 x L^2) in the site-index basis.
MatrixXcd single_particle_matrix(const TorusLattice& lat, const HofstadterParams& p);

/// Max deviation of any plaquette phase product from exp(2i pi p/q).
double plaquette_defect(const TorusLattice& lat, const MatrixXcd& sp, double t, double flux);

/// The many-body interaction map (hopping terms + optional V terms).
ExtensiveObservable hofstadter_observable(const TorusLattice& lat, const HofstadterParams& p);

/// Twist family with the flux cut along the given strip boundary (defaults to
/// eta/eta_-; the nu variant exists for driving-relocation diagnostics).
HamiltonianFamily build_hofstadter(const TorusLattice& lat, const NamedRegions& regions,
                                   const HofstadterParams& p, bool cut_along_nu = false);

/// Bloch Hamiltonian on the magnetic Brillouin zone, th1, th2 in [0, 2 pi).
using BlochFn = std::function<MatrixXcd(double th1, double th2)>;

/// Harper matrix of the Hofstadter model (q x q, magnetic cell along x1).
BlochFn hofstadter_bloch(int flux_p, int flux_q, double t);

/// Two-band staggered insulator in the atomic limit; Chern number zero.
BlochFn trivial_insulator_bloch(double delta, double t);

/// Chern number of the lowest `n_bands` Bloch bands by the lattice
/// field-strength method (plaquette products of multiband link overlaps) on an
/// n_grid x n_grid Brillouin grid. Exact integer output; gauge invariant.
/// Refuses if the band cluster is not gapped from the rest on the grid.
/// Sign convention: plaquettes oriented th1 -> th2; with this convention the
/// lowest Hofstadter band at p/q = 1/4 has Chern number -1.
int chern_number(const BlochFn& bloch, int dim, int n_bands, int n_grid = 32,
                 double gap_floor = 1e-9);

/// Relates the Chern integer of the filled bands to the transported charge
/// dQ_par across nu_-: dQ_par ~ chern_transport_sign * C. Fixed once, by the
/// gauge orientation above; used by the oracle comparison.
inline constexpr int chern_transport_sign = -1;

} // namespace hallpump::models
