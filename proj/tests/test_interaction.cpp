#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/dipole.hpp"
#include "rydblock/errors.hpp"
#include "rydblock/interaction.hpp"
#include "rydblock/wigner.hpp"

using namespace rydblock;

namespace {

const PhysicalConstants kC = codata2018_rb87();
const QuantumDefectTable kT = builtin_rb87_defects();
MatrixElementCache kCache(kT.content_hash(), RadialGridParams{}.content_hash());

MatrixElementContext ctx() { return MatrixElementContext{&kT, &kC, {}, &kCache}; }

const PairOperators& ops79() {
    static const PairOperators ops = build_pair_operators(build_pair_basis(forster_channels(79)), ctx());
    return ops;
}

}  // namespace

TEST_CASE("geometry validates separation and angle") {
    CHECK_THROWS_AS((Geometry{0.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((Geometry{-2.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((Geometry{5.0, -0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((Geometry{5.0, 4.0}.validate()), ConfigError);
    CHECK_THROWS_AS(Geometry::from_sites(0.0, 0.0), ConfigError);

    const Geometry g = Geometry::from_sites(11.0, 2.0);
    CHECK(g.r_um == doctest::Approx(std::hypot(11.0, 2.0)).epsilon(1e-15));
    CHECK(g.theta == doctest::Approx(std::atan2(2.0, 11.0)).epsilon(1e-15));
    // Transverse offsets enter through |dy| only.
    CHECK(Geometry::from_sites(11.0, -2.0).theta == g.theta);
    CHECK(Geometry::from_sites(0.0, 2.0).theta == doctest::Approx(1.5707963267948966));
}

TEST_CASE("pair operators have the documented shapes and symmetry") {
    const PairOperators& ops = ops79();
    CHECK(ops.basis.size() == 436);
    CHECK(ops.single_energy.size() == 50);
    CHECK(ops.dipole[1].rows() == 50);
    CHECK(ops.t_iso.rows() == 436);
    CHECK(ops.coupling_scale == doctest::Approx(kC.hartree_frequency * std::pow(kC.bohr_radius, 3)).epsilon(1e-15));

    CHECK((ops.pair_zeeman - ops.pair_zeeman.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ops.t_iso - ops.t_iso.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.t_tilt - ops.t_tilt.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((ops.t_perp - ops.t_perp.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dipole components satisfy the shell sum rule") {
    // Summing |<n'l'j'm'|d_q|79d5/2,1/2>|^2 over one (l', j') level and all q
    // gives (2j'+1)(2l'+1)(2l+1) 3j(l',1,l;0,0,0)^2 6j{l',j',1/2;j,l,1}^2 R^2.
    const PairOperators& ops = ops79();
    const Eigen::Index target = ops.basis.single_index(AtomState{79, 2, 5, 1});
    REQUIRE(target >= 0);

    struct Level { int n, l, tj; };
    for (const Level& lev : {Level{80, 1, 1}, Level{80, 1, 3}, Level{78, 3, 5}, Level{78, 3, 7}}) {
        double total = 0.0;
        for (int q = 0; q < 3; ++q) {
            for (Eigen::Index i = 0; i < 50; ++i) {
                const AtomState& s = ops.basis.singles[static_cast<std::size_t>(i)];
                if (s.n != lev.n || s.l != lev.l || s.twice_j != lev.tj) continue;
                total += ops.dipole[static_cast<std::size_t>(q)](i, target) *
                         ops.dipole[static_cast<std::size_t>(q)](i, target);
            }
        }
        const double r = radial_dipole(AtomState{79, 2, 5, 1}, AtomState{lev.n, lev.l, lev.tj, 1}, ctx());
        const double j3 = wigner_3j(lev.l, 1, 2, 0, 0, 0);
        const double j6 = wigner_6j(lev.l, lev.tj / 2.0, 0.5, 2.5, 2, 1);
        const double expected = (lev.tj + 1.0) * (2.0 * lev.l + 1.0) * 5.0 * j3 * j3 * j6 * j6 * r * r;
        CHECK(total == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("dipole-dipole element reproduces the frozen pf-dd coupling") {
    const PairState dd{AtomState{79, 2, 5, 1}, AtomState{79, 2, 5, 1}};
    const PairState pf{AtomState{80, 1, 3, 1}, AtomState{78, 3, 5, 1}};
    const Geometry geom{11.0, 0.0};

    const double v = dipole_dipole_element(pf, dd, geom, ctx());
    CHECK(v == doctest::Approx(1.353514205).epsilon(1e-6));

    // Same element straight out of the assembled Hamiltonian.
    const Eigen::MatrixXd h = assemble_hamiltonian(ops79(), geom, 1.15);
    const Eigen::Index row = ops79().basis.index_of(pf.a, pf.b);
    const Eigen::Index col = ops79().basis.index_of(dd.a, dd.b);
    REQUIRE(row >= 0);
    REQUIRE(col >= 0);
    CHECK(h(row, col) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("dipole-dipole element reduces to the axial form at theta = 0") {
    const MatrixElementContext c = ctx();
    const PairState dd{AtomState{79, 2, 5, 3}, AtomState{79, 2, 5, -1}};
    const PairState pf{AtomState{80, 1, 3, 3}, AtomState{78, 3, 7, -1}};
    const Geometry geom{9.0, 0.0};

    const double d10 = dipole_matrix_element(pf.a, dd.a, 0, c);
    const double d20 = dipole_matrix_element(pf.b, dd.b, 0, c);
    const double d1p = dipole_matrix_element(pf.a, dd.a, 1, c);
    const double d2m = dipole_matrix_element(pf.b, dd.b, -1, c);
    const double d1m = dipole_matrix_element(pf.a, dd.a, -1, c);
    const double d2p = dipole_matrix_element(pf.b, dd.b, 1, c);
    const double pref = kC.hartree_frequency * std::pow(kC.bohr_radius / 9.0, 3);
    const double axial = pref * (-2.0 * d10 * d20 - d1p * d2m - d1m * d2p);

    CHECK(dipole_dipole_element(pf, dd, geom, c) == doctest::Approx(axial).epsilon(1e-13));

    // Doubling the separation divides the coupling by exactly eight.
    const double v2 = dipole_dipole_element(pf, dd, Geometry{18.0, 0.0}, c);
    CHECK(8.0 * v2 == doctest::Approx(axial).epsilon(1e-15));

    CHECK_THROWS_AS((dipole_dipole_element(pf, dd, Geometry{0.0, 0.0}, c)), ConfigError);
}

TEST_CASE("assembled Hamiltonian is symmetric and block-diagonal in total M at theta = 0") {
    const PairOperators& ops = ops79();
    const Eigen::MatrixXd h = assemble_hamiltonian(ops, Geometry::from_sites(11.0, 2.0), 1.15);
    const double scale = h.cwiseAbs().maxCoeff();
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12 * scale);

    const Eigen::MatrixXd h0 = assemble_hamiltonian(ops, Geometry{11.0, 0.0}, 1.15);
    Eigen::VectorXi tm(h0.rows());
    for (Eigen::Index i = 0; i < h0.rows(); ++i) tm(i) = ops.basis.state(i).total_twice_m();
    int cross_block = 0;
    for (Eigen::Index i = 0; i < h0.rows(); ++i) {
        for (Eigen::Index j = 0; j < h0.cols(); ++j) {
            if (tm(i) != tm(j) && h0(i, j) != 0.0) ++cross_block;
        }
    }
    CHECK(cross_block == 0);

    CHECK_THROWS_AS((assemble_hamiltonian(ops, Geometry{11.0, 0.0}, -0.5)), ConfigError);
}

TEST_CASE("assembled Hamiltonian is unchanged by swapping the atom labels") {
    const PairOperators& ops = ops79();
    const PairBasis& basis = ops.basis;
    const Eigen::MatrixXd h = assemble_hamiltonian(ops, Geometry{11.0, 0.0}, 1.15);

    std::vector<Eigen::Index> swap(static_cast<std::size_t>(basis.size()));
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const PairState s = basis.state(i);
        const Eigen::Index j = basis.index_of(s.b, s.a);
        REQUIRE(j >= 0);
        swap[static_cast<std::size_t>(i)] = j;
    }
    double worst = 0.0;
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        for (Eigen::Index j = 0; j < basis.size(); ++j) {
            worst = std::max(worst, std::abs(h(swap[static_cast<std::size_t>(i)],
                                              swap[static_cast<std::size_t>(j)]) - h(i, j)));
        }
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("far-separated pair Hamiltonian is diagonal") {
    const PairOperators& ops = ops79();
    const Eigen::MatrixXd h = assemble_hamiltonian(ops, Geometry{1e6, 0.3}, 0.0);
    Eigen::MatrixXd off = h;
    off.diagonal().setZero();
    CHECK(off.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((h.diagonal() - ops.pair_energy).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("diagonalize matches the 2x2 closed form") {
    const double v = 1.5, d = 0.7;
    Eigen::MatrixXd h(2, 2);
    h << 0.0, v, v, d;
    const EigenSystem sys = diagonalize(h);
    const double disc = std::sqrt(d * d + 4.0 * v * v);
    CHECK(sys.values(0) == doctest::Approx(0.5 * (d - disc)).epsilon(1e-12));
    CHECK(sys.values(1) == doctest::Approx(0.5 * (d + disc)).epsilon(1e-12));
    CHECK(sys.vectors.col(0).norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(sys.vectors.col(0).dot(sys.vectors.col(1))) < 1e-14);
}

TEST_CASE("diagonalize reconstructs a random symmetric matrix") {
    std::mt19937 rng(20260815);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd a(50, 50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        for (Eigen::Index j = 0; j < 50; ++j) a(i, j) = uni(rng);
    }
    const Eigen::MatrixXd h = 0.5 * (a + a.transpose());

    const EigenSystem sys = diagonalize(h);
    const Eigen::MatrixXd rebuilt =
        sys.vectors * sys.values.asDiagonal() * sys.vectors.transpose();
    CHECK((rebuilt - h).norm() < 1e-8 * h.norm());
    CHECK((sys.vectors.transpose() * sys.vectors -
           Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 0; k + 1 < 50; ++k) CHECK(sys.values(k) <= sys.values(k + 1));
    for (Eigen::Index k = 0; k < 50; ++k) {
        Eigen::Index imax = 0;
        sys.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        CHECK(sys.vectors(imax, k) > 0.0);
    }

    Eigen::MatrixXd bad = h;
    bad(3, 7) += 1.0;
    CHECK_THROWS_AS(diagonalize(bad), NumericalError);
    CHECK_THROWS_AS(diagonalize(Eigen::MatrixXd::Zero(3, 4)), ConfigError);
    CHECK_THROWS_AS(diagonalize(Eigen::MatrixXd()), ConfigError);
}

TEST_CASE("molecular spectrum resolves the laser-coupled pair state") {
    const PairOperators& ops = ops79();
    const MolecularSpectrum spec = molecular_spectrum(ops, Geometry{11.0, 0.0}, 1.15, kT, kC);

    CHECK(spec.kappa2.sum() == doctest::Approx(1.0).epsilon(1e-10));
    for (Eigen::Index k = 0; k + 1 < spec.detuning.size(); ++k) {
        CHECK(spec.detuning(k) <= spec.detuning(k + 1));
    }

    // The five strongest lines, strongest first.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(spec.kappa2.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return spec.kappa2(a) > spec.kappa2(b); });
    const double expect_k2[5] = {0.509578, 0.304688, 0.171628, 0.004576, 0.001960};
    const double expect_d[5] = {-6.020182, -1.300883, -2.403487, 437.442523, 46.130578};
    for (int k = 0; k < 5; ++k) {
        CHECK(std::abs(spec.kappa2(order[static_cast<std::size_t>(k)]) - expect_k2[k]) < 1e-4);
        CHECK(std::abs(spec.detuning(order[static_cast<std::size_t>(k)]) - expect_d[k]) < 1e-3);
    }
    CHECK(spec.dominant() == order[0]);
}

TEST_CASE("well-separated atoms leave a single undisturbed pair line") {
    const MolecularSpectrum spec = molecular_spectrum(ops79(), Geometry{1e5, 0.0}, 1.15, kT, kC);
    const Eigen::Index k = spec.dominant();
    CHECK(spec.kappa2(k) > 1.0 - 1e-8);
    CHECK(std::abs(spec.detuning(k)) < 1e-4);
}

TEST_CASE("a weak line crosses zero detuning near dy = 4.9") {
    const MolecularSpectrum spec =
        molecular_spectrum(ops79(), Geometry::from_sites(11.0, 4.9), 1.15, kT, kC);
    Eigen::Index best = -1;
    for (Eigen::Index k = 0; k < spec.detuning.size(); ++k) {
        if (spec.kappa2(k) < 1e-5) continue;
        if (best < 0 || std::abs(spec.detuning(k)) < std::abs(spec.detuning(best))) best = k;
    }
    REQUIRE(best >= 0);
    CHECK(std::abs(spec.detuning(best)) < 0.1);
    CHECK(spec.kappa2(best) > 3e-4 / 3.0);
    CHECK(spec.kappa2(best) < 3e-4 * 3.0);
}

TEST_CASE("eigenstates track continuously along a transverse scan") {
    const PairOperators& ops = ops79();
    MolecularSpectrum prev = molecular_spectrum(ops, Geometry::from_sites(11.0, 0.0), 1.15, kT, kC);
    for (int step = 1; step <= 20; ++step) {
        const double dy = 0.05 * step;
        MolecularSpectrum next =
            molecular_spectrum(ops, Geometry::from_sites(11.0, dy), 1.15, kT, kC);
        const Eigen::MatrixXd overlap = (prev.states.transpose() * next.states).cwiseAbs();
        for (Eigen::Index k = 0; k < prev.kappa2.size(); ++k) {
            if (prev.kappa2(k) < 1e-8) continue;
            CHECK(overlap.row(k).maxCoeff() > 0.5);
        }
        prev = std::move(next);
    }
}

TEST_CASE("far-detuned dominant line follows the van der Waals coefficient") {
    const PairOperators& ops = ops79();
    const double c6 = c6_perturbative(ops, 1.15, 0.0);
    CHECK(c6 == doctest::Approx(-7.186756e6).epsilon(1e-4));

    const MolecularSpectrum spec = molecular_spectrum(ops, Geometry{30.0, 0.0}, 1.15, kT, kC);
    const double vdw = c6 / std::pow(30.0, 6);
    CHECK(spec.detuning(spec.dominant()) == doctest::Approx(vdw).epsilon(0.02));
}

TEST_CASE("perturbative C6 matches the frozen values and scales as n^11") {
    CHECK(c6_perturbative(79, 0.0, 0.0, ctx()) == doctest::Approx(-6.341296e6).epsilon(1e-4));

    const int ns[5] = {50, 60, 70, 79, 90};
    const double expect[5] = {5.5010e4, 3.3360e5, 1.7170e6, 6.3413e6, 2.6180e7};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < 5; ++k) {
        const double c6 = c6_perturbative(ns[k], 0.0, 0.0, ctx());
        CHECK(std::abs(c6) == doctest::Approx(expect[k]).epsilon(1e-3));
        const double x = std::log(static_cast<double>(ns[k]));
        const double y = std::log(std::abs(c6));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (5.0 * sxy - sx * sy) / (5.0 * sxx - sx * sx);
    CHECK(slope == doctest::Approx(10.512).epsilon(0.01));
    CHECK(std::abs(slope - 11.0) < 1.0);
}

TEST_CASE("C6 doubles when every dipole is scaled by the fourth root of two") {
    PairOperators scaled = ops79();
    const double f = std::pow(2.0, 0.25);
    for (auto& d : scaled.dipole) d *= f;
    const double base = c6_perturbative(ops79(), 1.15, 0.0);
    CHECK(c6_perturbative(scaled, 1.15, 0.0) == doctest::Approx(2.0 * base).epsilon(1e-12));
}

TEST_CASE("kappa-weighted detuning matches C6/R^6 in the far-detuned regime") {
    const PairOperators& ops = ops79();
    const double c6 = c6_perturbative(ops, 0.0, 0.0);
    for (const double z : {20.0, 25.0}) {
        const MolecularSpectrum spec = molecular_spectrum(ops, Geometry{z, 0.0}, 0.0, kT, kC);
        double wsum = 0.0, dsum = 0.0;
        for (Eigen::Index k = 0; k < spec.detuning.size(); ++k) {
            if (std::abs(spec.detuning(k)) > 5.0) continue;
            wsum += spec.kappa2(k);
            dsum += spec.kappa2(k) * spec.detuning(k);
        }
        REQUIRE(wsum > 0.9);
        CHECK(dsum / wsum == doctest::Approx(c6 / std::pow(z, 6)).epsilon(0.01));
    }
}

TEST_CASE("channel asymptotes reproduce pairwise level sums at zero field") {
    const PairOperators& ops = ops79();
    const Eigen::VectorXd dd = channel_asymptotes(ops, 0, 0.0);
    CHECK(dd.size() == 100);

    const double e32 = level_energy(AtomState{79, 2, 3, 1}, kT, kC);
    const double e52 = level_energy(AtomState{79, 2, 5, 1}, kT, kC);
    CHECK(dd(0) == doctest::Approx(2.0 * e32).epsilon(1e-12));
    CHECK(dd(99) == doctest::Approx(2.0 * e52).epsilon(1e-12));

    const Eigen::VectorXd pf = channel_asymptotes(ops, 3, 0.0);
    CHECK(pf.size() == 84);
    const double emin = level_energy(AtomState{81, 1, 1, 1}, kT, kC) +
                        level_energy(AtomState{77, 3, 7, 1}, kT, kC);
    const double emax = level_energy(AtomState{81, 1, 3, 1}, kT, kC) +
                        level_energy(AtomState{77, 3, 5, 1}, kT, kC);
    CHECK(pf(0) == doctest::Approx(emin).epsilon(1e-12));
    CHECK(pf(83) == doctest::Approx(emax).epsilon(1e-12));

    CHECK_THROWS_AS(channel_asymptotes(ops, 5, 0.0), ConfigError);
}

TEST_CASE("stretched pair asymptote follows the closed-form Zeeman slope") {
    const PairOperators& ops = ops79();
    const double e52 = level_energy(AtomState{79, 2, 5, 1}, kT, kC);
    const double gj = 1.0 + (kC.electron_g_factor - 1.0) * 0.2;
    for (const double b : {0.4, 1.15}) {
        const Eigen::VectorXd dd = channel_asymptotes(ops, 0, b);
        // Both atoms stretched (m = +5/2) is an exact eigenstate and always
        // tops the fan; the bottom switches branch with field, so compare it
        // against the single-atom manifold diagonalization instead.
        CHECK(dd(99) == doctest::Approx(2.0 * e52 + 5.0 * gj * kC.bohr_magneton_over_h * b)
                            .epsilon(1e-11));
        const EigenSystem single = diagonalize(zeeman_hamiltonian(d_manifold(79), b, kT, kC));
        CHECK(dd(0) == doctest::Approx(2.0 * single.values.minCoeff()).epsilon(1e-11));
        CHECK(dd(99) == doctest::Approx(2.0 * single.values.maxCoeff()).epsilon(1e-11));
    }
}

TEST_CASE("dd and pf asymptote fans begin to overlap near 0.33 mT") {
    const PairOperators& ops = ops79();
    auto gap = [&](double b) {
        return channel_asymptotes(ops, 0, b).maxCoeff() -
               channel_asymptotes(ops, 3, b).minCoeff();
    };
    // Disjoint at zero field, overlapping well before the working point.
    CHECK(gap(0.0) < 0.0);
    CHECK(gap(1.15) > 0.0);

    double lo = 0.28, hi = 0.38;
    REQUIRE(gap(lo) < 0.0);
    REQUIRE(gap(hi) > 0.0);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);

    // Linear estimate: the zero-field gap is the smallest pf - dd level
    // difference and it closes at the sum of the two stretched slopes.
    const double defect = level_energy(AtomState{81, 1, 1, 1}, kT, kC) +
                          level_energy(AtomState{77, 3, 7, 1}, kT, kC) -
                          2.0 * level_energy(AtomState{79, 2, 5, 1}, kT, kC);
    const double g_d52 = 1.0 + (kC.electron_g_factor - 1.0) * 0.2;
    const double g_f72 = 1.0 + (kC.electron_g_factor - 1.0) / 7.0;
    const double g_p12 = 1.0 - (kC.electron_g_factor - 1.0) / 3.0;
    const double rate = (5.0 * g_d52 + 3.5 * g_f72 + 0.5 * g_p12) * kC.bohr_magneton_over_h;
    CHECK(root == doctest::Approx(defect / rate).epsilon(0.02));
    CHECK(root > 0.30);
    CHECK(root < 0.36);
    CHECK(std::abs(gap(root)) < 1e-6);
}

TEST_CASE("asymptotic table sweeps the fan over a field range") {
    const PairOperators& ops = ops79();
    Eigen::VectorXd fields(3);
    fields << 0.0, 0.5, 1.15;
    const double ref = 2.0 * level_energy(AtomState{79, 2, 5, 1}, kT, kC);
    const AsymptoticTable table = asymptotic_energies_vs_field(ops, fields, ref);

    CHECK(table.energies.rows() == 3);
    CHECK(table.energies.cols() == 436);
    CHECK(table.channel_of_column[0] == 0);
    CHECK(table.channel_of_column[99] == 0);
    CHECK(table.channel_of_column[100] == 1);
    CHECK(table.channel_of_column[435] == 4);

    const Eigen::VectorXd dd = channel_asymptotes(ops, 0, 0.5);
    for (Eigen::Index k = 0; k < 100; ++k) {
        CHECK(table.energies(1, k) == doctest::Approx(dd(k) - ref).epsilon(1e-12));
    }
    CHECK_THROWS_AS(asymptotic_energies_vs_field(ops, Eigen::VectorXd(), 0.0), ConfigError);
}
