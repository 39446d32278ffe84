#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"

namespace rydblock {

// <l,s;j2,m|g_L L_z + g_S S_z|l,s;j1,m> in units of hbar; diagonal in m,
// off-diagonal between j = l -+ 1/2. Quantization axis = field axis.
double zeeman_g_element(int l, int twice_j2, int twice_j1, int twice_m,
                        const PhysicalConstants& consts);

// H = diag(fine-structure energies) + (mu_B/h) * B * (g_L L_z + g_S S_z), MHz.
// All states must share (n, l); throws ConfigError otherwise or for B < 0.
Eigen::MatrixXd zeeman_hamiltonian(const std::vector<AtomState>& manifold, double field_mT,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts);

// The laser-excited |r> at field B: eigenstate of the (n d3/2, n d5/2) Zeeman
// manifold with maximal overlap on |d5/2, m_j = +1/2>.
struct DressedState {
    std::vector<AtomState> manifold; // basis order of the amplitudes
    Eigen::VectorXd amplitudes;      // real: the Hamiltonian is real symmetric
    double energy;                   // MHz relative to the zero-field d5/2 level
    double field;                    // mT

    double amplitude_for(const AtomState& s) const;
};

// Enumerates the 10-state d manifold of principal quantum number n in the
// documented order (j ascending, then m ascending).
std::vector<AtomState> d_manifold(int n);

// Throws AmbiguityError when two candidates tie in overlap (1e-9) and energy.
DressedState laser_excited_state(int n, double field_mT, const QuantumDefectTable& table,
                                 const PhysicalConstants& consts);

} // namespace rydblock
