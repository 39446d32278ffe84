#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "rydblock/atom.hpp"
#include "rydblock/dipole.hpp"
#include "rydblock/pair.hpp"

namespace rydblock {

// Relative geometry of the two atoms: separation r (um) and the angle theta
// (radians) between the interatomic axis and the magnetic-field axis.
struct Geometry {
    double r_um = 0.0;
    double theta = 0.0;

    // Throws ConfigError unless r_um > 0, finite, and theta in [0, pi].
    void validate() const;

    // Sites separated by z_um along the field axis and dy_um transverse to
    // it. Coincident sites are a singular geometry and throw.
    static Geometry from_sites(double z_um, double dy_um);
};

// Geometry-independent operators on a pair basis. Everything the pair
// Hamiltonian needs is precomputed here once, so field and geometry scans
// only pay for matrix assembly and diagonalization.
//
// The angular gathers combine the two atoms' dipole components d_q (atomic
// units) into the three tensor parts of the dipole-dipole coupling:
//   t_iso  = d10 d20 + (d1+ d2- + d1- d2+) / 2
//   t_tilt = d1+ d20 + d10 d2+ - d1- d20 - d10 d2-
//   t_perp = d1+ d2+ + d1- d2-
struct PairOperators {
    PairBasis basis;

    Eigen::VectorXd single_energy;            // MHz, per sublevel in basis.singles
    Eigen::MatrixXd single_zeeman;            // MHz/mT
    std::array<Eigen::MatrixXd, 3> dipole;    // q = -1, 0, +1 between singles, e a0

    Eigen::VectorXd pair_energy;              // MHz
    Eigen::MatrixXd pair_zeeman;              // MHz/mT
    Eigen::MatrixXd t_iso, t_tilt, t_perp;    // (e a0)^2

    double coupling_scale = 0.0;              // E_h a0^3, MHz um^3
};

PairOperators build_pair_operators(const PairBasis& basis, const MatrixElementContext& ctx);

// <t| V(r, theta) |s> in MHz for two product states,
//   V = (E_h a0^3 / r^3) [ (1 - 3 cos^2 t) t_iso
//                          - (3/sqrt(2)) sin t cos t * t_tilt
//                          - (3/2) sin^2 t * t_perp ].
double dipole_dipole_element(const PairState& t, const PairState& s, const Geometry& geom,
                             const MatrixElementContext& ctx);

// H(geometry, field) = diag(pair energies) + field * pair Zeeman + V. MHz.
Eigen::MatrixXd assemble_hamiltonian(const PairOperators& ops, const Geometry& geom,
                                     double field_mt);

struct EigenSystem {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns, largest component positive
};

// Throws ConfigError for a non-square or empty input, NumericalError when the
// input is asymmetric beyond 1e-9 relative or an eigenpair residual exceeds
// 1e-8 * ||H||.
EigenSystem diagonalize(const Eigen::MatrixXd& h);

// Pair eigenstates resolved against the laser-coupled doubly excited state
// |rr> = |r>|r>, where |r> is the field-dressed level targeted by the
// excitation light. detuning(k) is the pair eigenenergy minus twice the
// dressed single-atom energy; kappa2(k) = |<eigenstate_k|rr>|^2.
struct MolecularSpectrum {
    Geometry geometry;
    double field = 0.0;       // mT
    Eigen::VectorXd detuning; // MHz, ascending
    Eigen::VectorXd kappa2;
    Eigen::MatrixXd states;   // eigenvector columns matching detuning order

    Eigen::Index dominant() const;  // index of the largest kappa2
};

// Requires the leading basis channel to be (nd, nd); that shell hosts |r>.
MolecularSpectrum molecular_spectrum(const PairOperators& ops, const Geometry& geom,
                                     double field_mt, const QuantumDefectTable& table,
                                     const PhysicalConstants& consts);

// Second-order van der Waals coefficient of the doubly excited level against
// the rest of the basis, MHz um^6 (signed; negative when the dominant
// intermediate channels lie above the pair level). Sublevels are dressed by
// the field within each (n, l) shell before the perturbative sum, so the
// coefficient follows the laser-excited state as the field mixes j.
double c6_perturbative(const PairOperators& ops, double field_mt, double theta);

// Convenience form building the standard channel set for principal quantum
// number n first.
double c6_perturbative(int n, double field_mt, double theta, const MatrixElementContext& ctx);

// Asymptotic (r -> infinity) two-atom energies of one channel at the given
// field: eigenvalues of the channel's Zeeman-dressed block, ascending, MHz.
Eigen::VectorXd channel_asymptotes(const PairOperators& ops, std::size_t channel,
                                   double field_mt);

// channel_asymptotes swept over a field range, one row per field value.
// Columns group by channel in basis order; channel_of_column records the
// grouping. Energies are shifted by reference_mhz.
struct AsymptoticTable {
    Eigen::VectorXd fields;   // mT
    Eigen::MatrixXd energies; // MHz
    std::vector<std::size_t> channel_of_column;
};

AsymptoticTable asymptotic_energies_vs_field(const PairOperators& ops,
                                             const Eigen::VectorXd& fields_mt,
                                             double reference_mhz = 0.0);

}  // namespace rydblock
