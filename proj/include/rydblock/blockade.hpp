#pragma once

#include <vector>

#include "rydblock/interaction.hpp"

namespace rydblock {

// Double-excitation probability under weak drive at Rabi frequency omega
// (MHz): every molecular line phi admits population kappa_phi^2 suppressed
// by its detuning,
//   P2 = sum_phi kappa_phi^2 * omega^2 / (omega^2 + 2 * detuning_phi^2).
// Terms are summed in eigenvalue order so the result is bit-reproducible.
double p2_from_spectrum(const MolecularSpectrum& spec, double omega_mhz);

// Shift of the single equivalent blockading line that would give the same
// P2 at the same drive: B = omega * sqrt((1 - P2) / (2 P2)), MHz.
// Exact inverse of P2 = omega^2 / (omega^2 + 2 B^2).
// P2 <= 0 -> InfiniteBlockadeError, P2 > 1 -> NumericalError.
double blockade_shift(double p2, double omega_mhz);

struct AveragingOptions {
    // Gauss-Hermite order of the first transverse pass; doubled until the
    // averaged P2 moves by less than 1% or max_nodes is exceeded.
    int nodes = 40;
    int max_nodes = 640;
    // Axial position spread (um). Zero keeps the axial separation fixed;
    // positive values add a fixed 16-node axial average, which is ample for
    // spreads well below the trap separation.
    double sigma_z = 0.0;
};

struct BlockadeSample {
    double dy_um; // transverse offset of the quadrature node
    double p2;
    double shift; // MHz
};

// Thermal average of P2 over shot-to-shot atom positions. Each atom jitters
// independently by sigma_y transverse to the interatomic axis, so the
// relative offset dy is Gaussian with standard deviation sqrt(2) sigma_y;
// nodes beyond 6 of those standard deviations are skipped.
struct AveragedBlockade {
    double p2 = 0.0;
    double shift = 0.0;           // blockade_shift of the averaged p2, MHz
    int nodes = 0;                // transverse order that passed the check
    double doubling_change = 0.0; // relative P2 change on the accepted doubling
    std::vector<BlockadeSample> samples; // final pass nodes, dy ascending
};

// sigma_y = 0 evaluates P2 at dy = 0 directly. Throws NumericalError with
// the tried orders when the doubling check never passes.
AveragedBlockade averaged_blockade(const PairOperators& ops, double z_um, double sigma_y_um,
                                   double field_mt, double omega_mhz,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts,
                                   const AveragingOptions& options = {});

// Nodes and weights of the n-point Gauss-Hermite rule (weight e^{-t^2},
// sum of weights = sqrt(pi)), nodes ascending.
void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace rydblock
