#include "rydblock/atom.hpp"

#include <cmath>
#include <sstream>

#include "rydblock/errors.hpp"
#include "rydblock/wigner.hpp"

namespace rydblock {
namespace {

int phase_from_doubled(int doubled_exponent) {
    return ((doubled_exponent / 2) % 2 == 0) ? 1 : -1;
}

} // namespace

double zeeman_g_element(int l, int twice_j2, int twice_j1, int twice_m,
                        const PhysicalConstants& consts) {
    // Wigner-Eckart for the T^1_0 components of L and S in the coupled basis.
    // The recoupling phase carries the initial j for an orbital-space operator
    // and the final j for a spin-space operator (Edmonds VII conventions).
    const double we = phase_from_doubled(twice_j2 - twice_m) *
                      wigner_3j_2(twice_j2, 2, twice_j1, -twice_m, 0, twice_m);
    if (we == 0.0) return 0.0;
    const double dim = std::sqrt((twice_j2 + 1.0) * (twice_j1 + 1.0));

    const double red_l = phase_from_doubled(2 * l + 1 + twice_j1 + 2) * dim *
                         wigner_6j_2(2 * l, twice_j2, 1, twice_j1, 2 * l, 2) *
                         std::sqrt(l * (l + 1.0) * (2.0 * l + 1.0));
    const double red_s = phase_from_doubled(2 * l + 1 + twice_j2 + 2) * dim *
                         wigner_6j_2(1, twice_j2, 2 * l, twice_j1, 1, 2) *
                         std::sqrt(1.5);
    return we * (consts.orbital_g_factor * red_l + consts.electron_g_factor * red_s);
}

Eigen::MatrixXd zeeman_hamiltonian(const std::vector<AtomState>& manifold, double field_mT,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts) {
    if (manifold.empty()) throw ConfigError("zeeman_hamiltonian: empty manifold");
    if (field_mT < 0.0) throw ConfigError("zeeman_hamiltonian: field must be >= 0");
    const int n = manifold.front().n;
    const int l = manifold.front().l;
    for (const auto& s : manifold) {
        s.validate();
        if (s.n != n || s.l != l)
            throw ConfigError("zeeman_hamiltonian: manifold mixes (n,l) shells: " +
                              to_string(manifold.front()) + " vs " + to_string(s));
    }

    const int dim = static_cast<int>(manifold.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        h(i, i) = level_energy(manifold[i], table, consts);
    const double scale = consts.bohr_magneton_over_h * field_mT;
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k) {
            if (manifold[i].twice_m != manifold[k].twice_m) continue;
            h(i, k) += scale * zeeman_g_element(l, manifold[i].twice_j, manifold[k].twice_j,
                                                manifold[i].twice_m, consts);
        }
    }
    return h;
}

std::vector<AtomState> d_manifold(int n) {
    std::vector<AtomState> states;
    for (int tj : {3, 5})
        for (int tm = -tj; tm <= tj; tm += 2)
            states.push_back(AtomState{n, 2, tj, tm});
    return states;
}

double DressedState::amplitude_for(const AtomState& s) const {
    for (std::size_t i = 0; i < manifold.size(); ++i)
        if (manifold[i] == s) return amplitudes(static_cast<Eigen::Index>(i));
    return 0.0;
}

DressedState laser_excited_state(int n, double field_mT, const QuantumDefectTable& table,
                                 const PhysicalConstants& consts) {
    const auto manifold = d_manifold(n);
    const Eigen::MatrixXd h = zeeman_hamiltonian(manifold, field_mT, table, consts);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
        throw NumericalError("laser_excited_state: eigensolver failed");

    int target = -1;
    for (std::size_t i = 0; i < manifold.size(); ++i)
        if (manifold[i].twice_j == 5 && manifold[i].twice_m == 1)
            target = static_cast<int>(i);

    const auto& vecs = solver.eigenvectors();
    const auto& vals = solver.eigenvalues();
    double best_ov = 0.0;
    for (int k = 0; k < vecs.cols(); ++k)
        best_ov = std::max(best_ov, vecs(target, k) * vecs(target, k));

    // Among the maximal-overlap candidates, take the lowest energy; two
    // candidates tied in both overlap and energy cannot be told apart.
    int best = -1;
    bool energy_tie = false;
    for (int k = 0; k < vecs.cols(); ++k) {
        const double ov = vecs(target, k) * vecs(target, k);
        if (ov < best_ov - 1e-9) continue;
        if (best < 0 || vals(k) < vals(best) - 1e-9) {
            best = k;
            energy_tie = false;
        } else if (std::abs(vals(k) - vals(best)) <= 1e-9) {
            energy_tie = true;
        }
    }
    if (energy_tie) {
        std::ostringstream os;
        os << "laser_excited_state: two eigenstates at B=" << field_mT
           << " mT tie in |<d5/2,1/2|.>|^2 = " << best_ov << " and energy";
        throw AmbiguityError(os.str());
    }

    DressedState r;
    r.manifold = manifold;
    r.amplitudes = vecs.col(best);
    // Reproducible sign: largest-magnitude amplitude positive.
    Eigen::Index imax;
    r.amplitudes.cwiseAbs().maxCoeff(&imax);
    if (r.amplitudes(imax) < 0.0) r.amplitudes = -r.amplitudes;
    r.energy = vals(best) - level_energy(AtomState{n, 2, 5, 1}, table, consts);
    r.field = field_mT;
    return r;
}

} // namespace rydblock
