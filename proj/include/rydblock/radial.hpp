#pragma once

#include <Eigen/Dense>

#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"

namespace rydblock {

// The radial equation is integrated on a lattice uniform in x = sqrt(r),
// which gives ~200 points per local de Broglie wavelength at step 0.01 for
// n ~ 80 (the transformed equation w'' = G w has |G| <= 8 + O(1/n^2) in the
// classically allowed region).
struct RadialGridParams {
    double step = 0.01; // x-lattice spacing, sqrt(bohr)

    unsigned long long content_hash() const;
};

struct RadialWavefunction {
    AtomState state;
    double step = 0.0;     // x spacing; r(k) = (k*step)^2, k = 0..size-1
    Eigen::VectorXd r;     // bohr, monotone increasing from 0
    Eigen::VectorXd u;     // reduced amplitude, normalized: integral u^2 dr = 1
    double norm_residual = 0.0; // |I(h)-I(2h)|/I(h) for the norm integral

    // Index below which the inward integration was truncated to zero
    // (divergence guard in the inner classically forbidden region).
    int inner_cutoff = 0;
};

// Numerov integration of u'' = [l(l+1)/r^2 - 2/r - 2E] u with
// E = -1/(2 n*^2) (atomic units), inward from r_out = 2n(n+15).
// Throws IntegrationError when no classically allowed region exists
// (n* too close to l) or the outer lobe is not resolved.
RadialWavefunction radial_wavefunction(const AtomState& state, const QuantumDefectTable& table,
                                       const PhysicalConstants& consts,
                                       const RadialGridParams& params = {});

// integral u_a u_b r dr over the common grid, bohr. Both inputs must share
// the lattice step.
double radial_overlap_r(const RadialWavefunction& a, const RadialWavefunction& b);

// Sign changes of u away from numerical noise (|u| > 1e-6 of the peak).
int count_nodes(const RadialWavefunction& wf);

} // namespace rydblock
