#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rydblock/blockade.hpp"
#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/errors.hpp"
#include "rydblock/interaction.hpp"

using namespace rydblock;

namespace {

const PhysicalConstants kC = codata2018_rb87();
const QuantumDefectTable kT = builtin_rb87_defects();
MatrixElementCache kCache(kT.content_hash(), RadialGridParams{}.content_hash());

const PairOperators& ops79() {
    static const PairOperators ops = build_pair_operators(
        build_pair_basis(forster_channels(79)), MatrixElementContext{&kT, &kC, {}, &kCache});
    return ops;
}

MolecularSpectrum spectrum_at(double dy, double field = 1.15) {
    return molecular_spectrum(ops79(), Geometry::from_sites(11.0, dy), field, kT, kC);
}

}  // namespace

TEST_CASE("p2 saturates to one on resonance and to 1/3 for a single line at omega") {
    MolecularSpectrum spec;
    spec.detuning = Eigen::VectorXd::Zero(3);
    spec.kappa2 = Eigen::VectorXd(3);
    spec.kappa2 << 0.2, 0.5, 0.3;
    CHECK(p2_from_spectrum(spec, 0.51) == doctest::Approx(1.0).epsilon(1e-14));

    spec.detuning = Eigen::VectorXd(1);
    spec.kappa2 = Eigen::VectorXd(1);
    spec.detuning << 0.51;
    spec.kappa2 << 1.0;
    CHECK(p2_from_spectrum(spec, 0.51) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    CHECK_THROWS_AS(p2_from_spectrum(spec, 0.0), ConfigError);
    CHECK_THROWS_AS(p2_from_spectrum(spec, -1.0), ConfigError);
}

TEST_CASE("blockade shift inverts the single-line p2 exactly") {
    const double omega = 0.51;
    for (const double b : {0.1, 1.0, 5.0, 30.0}) {
        const double p2 = omega * omega / (omega * omega + 2.0 * b * b);
        CHECK(blockade_shift(p2, omega) == doctest::Approx(b).epsilon(1e-12));
    }
    CHECK(blockade_shift(1.0, omega) == 0.0);
    // The measured working-point pair.
    CHECK(blockade_shift(0.069, 0.51) == doctest::Approx(1.32).epsilon(0.04));

    CHECK_THROWS_AS(blockade_shift(0.0, omega), InfiniteBlockadeError);
    CHECK_THROWS_AS(blockade_shift(-0.1, omega), InfiniteBlockadeError);
    CHECK_THROWS_AS(blockade_shift(1.5, omega), NumericalError);
    CHECK_THROWS_AS(blockade_shift(0.5, 0.0), ConfigError);
}

TEST_CASE("Gauss-Hermite rule integrates Gaussian moments") {
    Eigen::VectorXd t, w;
    gauss_hermite(1, t, w);
    CHECK(t(0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(w(0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));

    gauss_hermite(40, t, w);
    CHECK(w.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(w.dot(t.cwiseProduct(t)) == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-12));
    CHECK(w.dot(t.array().pow(6).matrix()) ==
          doctest::Approx(15.0 / 8.0 * std::sqrt(M_PI)).epsilon(1e-12));
    for (Eigen::Index k = 0; k < 40; ++k) {
        CHECK(t(k) == doctest::Approx(-t(39 - k)).epsilon(1e-12));
        CHECK(w(k) > 0.0);
    }
    // Orders far beyond the polynomial-recursion overflow limit stay finite.
    gauss_hermite(640, t, w);
    CHECK(std::isfinite(w.sum()));
    CHECK(w.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));

    CHECK_THROWS_AS(gauss_hermite(0, t, w), ConfigError);
}

TEST_CASE("p2 rises smoothly through the crossing region") {
    const double p44 = p2_from_spectrum(spectrum_at(4.4), 0.51);
    const double p49 = p2_from_spectrum(spectrum_at(4.9), 0.51);
    const double p54 = p2_from_spectrum(spectrum_at(5.4), 0.51);
    CHECK(p44 == doctest::Approx(0.073371).epsilon(1e-3));
    CHECK(p49 == doctest::Approx(0.088506).epsilon(1e-3));
    CHECK(p54 == doctest::Approx(0.106910).epsilon(1e-3));
    CHECK(std::abs(p49 - 0.5 * (p44 + p54)) < 0.02);
}

TEST_CASE("the derived shift is insensitive to the probe Rabi frequency") {
    const MolecularSpectrum spec = spectrum_at(0.0);
    const double b1 = blockade_shift(p2_from_spectrum(spec, 0.51), 0.51);
    for (const double scale : {0.5, 0.7, 1.5, 2.0}) {
        const double om = 0.51 * scale;
        const double b2 = blockade_shift(p2_from_spectrum(spec, om), om);
        CHECK(std::abs(b2 - b1) / b1 < 0.05);
    }
}

TEST_CASE("zero transverse spread reduces the average to the on-axis value") {
    const AveragedBlockade avg = averaged_blockade(ops79(), 11.0, 0.0, 1.15, 0.51, kT, kC);
    const double direct = p2_from_spectrum(spectrum_at(0.0), 0.51);
    CHECK(avg.p2 == doctest::Approx(direct).epsilon(1e-14));
    CHECK(avg.p2 == doctest::Approx(0.027345).epsilon(1e-3));
    CHECK(avg.nodes == 1);
    REQUIRE(avg.samples.size() == 1);
    CHECK(avg.samples[0].dy_um == 0.0);
    CHECK(avg.shift == doctest::Approx(2.1508).epsilon(1e-3));
}

TEST_CASE("thermal averaging at the working point reproduces the frozen mean") {
    const AveragedBlockade avg = averaged_blockade(ops79(), 11.0, 2.6, 1.15, 0.51, kT, kC);
    CHECK(avg.p2 == doctest::Approx(0.068001).epsilon(2e-3));
    CHECK(avg.shift == doctest::Approx(1.3350).epsilon(2e-3));
    CHECK(avg.nodes == 80);
    CHECK(avg.doubling_change < 0.01);

    // Samples cover the quadrature support symmetrically and stay physical.
    REQUIRE(!avg.samples.empty());
    double pmin = 1.0, pmax = 0.0;
    for (std::size_t k = 0; k < avg.samples.size(); ++k) {
        CHECK(avg.samples[k].p2 > 0.0);
        CHECK(avg.samples[k].p2 <= 1.0);
        CHECK(avg.samples[k].shift > 0.0);
        if (k > 0) CHECK(avg.samples[k].dy_um > avg.samples[k - 1].dy_um);
        CHECK(std::abs(avg.samples[k].dy_um) <= 6.0 * std::sqrt(2.0) * 2.6);
        pmin = std::min(pmin, avg.samples[k].p2);
        pmax = std::max(pmax, avg.samples[k].p2);
    }
    CHECK(avg.p2 >= pmin);
    CHECK(avg.p2 <= pmax);
}

TEST_CASE("removing the field raises the averaged p2 and lowers the shift") {
    const AveragedBlockade at_field = averaged_blockade(ops79(), 11.0, 2.6, 1.15, 0.51, kT, kC);
    const AveragedBlockade no_field = averaged_blockade(ops79(), 11.0, 2.6, 0.0, 0.51, kT, kC);
    CHECK(no_field.p2 == doctest::Approx(0.117572).epsilon(2e-3));
    CHECK(no_field.shift == doctest::Approx(0.9880).epsilon(2e-3));
    CHECK(at_field.shift > no_field.shift);
}

TEST_CASE("closer traps blockade the pair almost completely") {
    const AveragedBlockade avg = averaged_blockade(ops79(), 7.0, 2.6, 1.15, 0.51, kT, kC);
    // The quadrature ladder needs 320 nodes before the doubling check passes.
    CHECK(avg.nodes == 320);
    CHECK(avg.p2 == doctest::Approx(0.006788).epsilon(5e-3));
    CHECK(avg.p2 > 0.007 / 2.0);
    CHECK(avg.p2 < 0.007 * 2.0);
}

TEST_CASE("a capped node budget raises a diagnostic error") {
    AveragingOptions opts;
    opts.nodes = 40;
    opts.max_nodes = 40;
    CHECK_THROWS_WITH_AS(averaged_blockade(ops79(), 11.0, 2.6, 1.15, 0.51, kT, kC, opts),
                         doctest::Contains("did not converge"), NumericalError);
}

TEST_CASE("axial spread perturbs the mean only slightly") {
    AveragingOptions opts;
    opts.sigma_z = 0.23;
    const AveragedBlockade avg = averaged_blockade(ops79(), 11.0, 0.0, 1.15, 0.51, kT, kC, opts);
    const double direct = p2_from_spectrum(spectrum_at(0.0), 0.51);
    // P2 is convex in the separation here, so jitter can only raise the mean.
    CHECK(avg.p2 > direct);
    CHECK(avg.p2 < 1.05 * direct);

    opts.sigma_z = -0.1;
    CHECK_THROWS_AS(averaged_blockade(ops79(), 11.0, 2.6, 1.15, 0.51, kT, kC, opts), ConfigError);
    CHECK_THROWS_AS(averaged_blockade(ops79(), 11.0, -2.6, 1.15, 0.51, kT, kC), ConfigError);
    CHECK_THROWS_AS(averaged_blockade(ops79(), 11.0, 2.6, 1.15, 0.0, kT, kC), ConfigError);
}
