#include "rydblock/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

#include "rydblock/atom.hpp"
#include "rydblock/blockade.hpp"
#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/dipole.hpp"
#include "rydblock/errors.hpp"
#include "rydblock/expsim.hpp"
#include "rydblock/interaction.hpp"
#include "rydblock/pair.hpp"
#include "rydblock/radial.hpp"
#include "rydblock/wigner.hpp"

namespace rydblock {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Checklist {
    std::ostream& out;
    int total = 0;
    int failed = 0;

    void run(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
        ++total;
        bool ok = false;
        std::string detail;
        try {
            std::tie(ok, detail) = body();
        } catch (const std::exception& err) {
            ok = false;
            detail = std::string("exception: ") + err.what();
        }
        if (!ok) ++failed;
        out << (ok ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) out << "  [" << detail << "]";
        out << '\n' << std::flush;
    }
};

bool within(double value, double target, double tolerance) {
    return std::abs(value - target) <= tolerance;
}

// Zero-defect table: the radial solver must reproduce Coulomb closed forms.
QuantumDefectTable hydrogen_table() {
    QuantumDefectTable t;
    for (auto [l, tj] : {std::pair{0, 1}, {1, 1}, {1, 3}})
        t.channels[{l, tj}] = QuantumDefectChannel{0.0, 0.0, 1, 200, "exact"};
    return t;
}

double retention(const ExperimentResult& result, std::size_t point, Site site) {
    return result.points.at(point).site[static_cast<int>(site)].mean_retention;
}

} // namespace

int run_selftest(std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    Checklist list{out};

    const PhysicalConstants consts = codata2018_rb87();
    const QuantumDefectTable table = builtin_rb87_defects();

    list.run("pair basis holds 436 states", [&] {
        const PairBasis basis = build_pair_basis(forster_channels(79));
        return std::pair{basis.size() == 436, std::to_string(basis.size()) + " states"};
    });

    list.run("79d fine-structure splitting near 23 MHz", [&] {
        const double split =
            level_energy({79, 2, 5, 1}, table, consts) - level_energy({79, 2, 3, 1}, table, consts);
        return std::pair{within(split, 23.0, 0.15 * 23.0), fmt(split) + " MHz"};
    });

    // The shared operator set feeds every spectrum-based check below.
    const PairOperators& ops = shared_pair_operators(79, table, consts);

    AveragedBlockade at_field{};
    list.run("averaged double excitation and shift at the working point", [&] {
        at_field = averaged_blockade(ops, 11.0, 2.6, 1.15, 0.51, table, consts);
        const bool ok = within(at_field.p2, 0.069, 0.03) && within(at_field.shift, 1.3, 0.52);
        return std::pair{ok, "P2=" + fmt(at_field.p2) + ", B=" + fmt(at_field.shift) + " MHz"};
    });

    list.run("shift formula inverts P2 = 0.069 at omega = 0.51 MHz", [&] {
        const double shift = blockade_shift(0.069, 0.51);
        return std::pair{within(shift, 1.32, 0.05), fmt(shift) + " MHz"};
    });

    list.run("zero-detuning crossing near dy = 4.9 um stays weak", [&] {
        const MolecularSpectrum spec =
            molecular_spectrum(ops, Geometry::from_sites(11.0, 4.9), 1.15, table, consts);
        Eigen::Index best = -1;
        for (Eigen::Index k = 0; k < spec.detuning.size(); ++k) {
            if (spec.kappa2(k) < 1e-5) continue;
            if (best < 0 || std::abs(spec.detuning(k)) < std::abs(spec.detuning(best))) best = k;
        }
        if (best < 0) return std::pair{false, std::string("no coupled line found")};
        const double k2 = spec.kappa2(best);
        const auto p2 = [&](double dy) {
            return p2_from_spectrum(
                molecular_spectrum(ops, Geometry::from_sites(11.0, dy), 1.15, table, consts),
                0.51);
        };
        const double bump = std::abs(p2(4.9) - 0.5 * (p2(4.4) + p2(5.4)));
        const bool ok = std::abs(spec.detuning(best)) < 0.1 && k2 > 1e-4 && k2 < 9e-4 &&
                        bump < 0.02;
        return std::pair{ok, "kappa2=" + fmt(k2) + ", P2 bump=" + fmt(bump)};
    });

    list.run("tighter spacing Z = 7 um suppresses double excitation", [&] {
        const AveragedBlockade avg = averaged_blockade(ops, 7.0, 2.6, 1.15, 0.51, table, consts);
        const bool ok = avg.p2 > 0.007 / 2.0 && avg.p2 < 0.007 * 2.0;
        return std::pair{ok, "P2=" + fmt(avg.p2)};
    });

    list.run("bias field raises the averaged shift", [&] {
        const AveragedBlockade no_field = averaged_blockade(ops, 11.0, 2.6, 0.0, 0.51, table, consts);
        const bool ok = at_field.shift > no_field.shift;
        return std::pair{ok, fmt(at_field.shift) + " MHz vs " + fmt(no_field.shift) + " MHz"};
    });

    list.run("trap release times give the measured position spreads", [&] {
        const double axial = thermal_sigma(12.3, 150.0, consts);
        const double transverse = thermal_sigma(139.0, 150.0, consts);
        const bool ok = within(axial, 0.23, 0.1 * 0.23) && within(transverse, 2.6, 0.1 * 2.6);
        return std::pair{ok, "sigma_z=" + fmt(axial) + " um, sigma_y=" + fmt(transverse) + " um"};
    });

    const double tpi = 1.0 / (2.0 * 0.51);
    list.run("single-atom scan hits the excitation and return benchmarks", [&] {
        ExperimentConfig config;
        config.prep_error = 0.12;
        config.detection_error = 0.02;
        config.shots = 10000;
        config.seed = 2026;
        config.shards = 4;
        const ExperimentResult scan =
            run_experiment(config, SequenceKind::fig2, {tpi, 2.0 * tpi}, table, consts);
        const double excitation = 1.0 - retention(scan, 0, Site::target);
        const double comeback = retention(scan, 1, Site::target);
        const bool ok = within(excitation, 0.80, 0.07) && comeback >= 0.93;
        return std::pair{ok, "max excitation " + fmt(excitation) + ", return " + fmt(comeback)};
    });

    list.run("blockaded pulse keeps target excitation near 0.23", [&] {
        ExperimentConfig config;
        config.prep_error = 0.19;
        config.detection_error = 0.02;
        config.shots = 10000;
        config.seed = 3;
        config.shards = 4;
        const ExperimentResult run =
            run_experiment(config, SequenceKind::fig3, {tpi}, table, consts);
        const double excitation = 1.0 - retention(run, 0, Site::target);
        return std::pair{within(excitation, 0.23, 0.05), "excitation " + fmt(excitation)};
    });

    list.run("crosstalk excitation stays at or below 1e-4", [&] {
        const double p = crosstalk_probability(0.51, 0.019, 2.0);
        return std::pair{p <= 1e-4, fmt(p)};
    });

    list.run("van der Waals coefficient grows as n^11", [&] {
        MatrixElementCache cache(table.content_hash(), RadialGridParams{}.content_hash());
        const MatrixElementContext ctx{&table, &consts, {}, &cache};
        const int ns[5] = {50, 60, 70, 79, 90};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int n : ns) {
            const double x = std::log(static_cast<double>(n));
            const double y = std::log(std::abs(c6_perturbative(n, 0.0, 0.0, ctx)));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double slope = (5.0 * sxy - sx * sy) / (5.0 * sxx - sx * sx);
        return std::pair{within(slope, 11.0, 1.0), "exponent " + fmt(slope)};
    });

    list.run("3j orthogonality holds to 1e-10", [&] {
        const int tj1 = 5, tj2 = 4;
        double worst = 0.0;
        for (int tj3 = 1; tj3 <= 9; tj3 += 2) {
            for (int tj3p = 1; tj3p <= 9; tj3p += 2) {
                double sum = 0.0;
                for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2)
                    for (int tm2 = -tj2; tm2 <= tj2; tm2 += 2)
                        sum += (tj3 + 1) * wigner_3j_2(tj1, tj2, tj3, tm1, tm2, -1) *
                               wigner_3j_2(tj1, tj2, tj3p, tm1, tm2, -1);
                worst = std::max(worst, std::abs(sum - (tj3 == tj3p ? 1.0 : 0.0)));
            }
        }
        return std::pair{worst <= 1e-10, "max deviation " + fmt(worst)};
    });

    list.run("Coulomb <1s|r|2p> matches 1.2902 bohr to 1e-3", [&] {
        const QuantumDefectTable hydrogen = hydrogen_table();
        const auto w1s = radial_wavefunction({1, 0, 1, 1}, hydrogen, consts);
        const auto w2p = radial_wavefunction({2, 1, 3, 1}, hydrogen, consts);
        const double value = radial_overlap_r(w1s, w2p);
        return std::pair{within(value, 1.2902, 1e-3), fmt(value) + " bohr"};
    });

    const Geometry probe = Geometry::from_sites(11.0, 1.3);
    list.run("pair Hamiltonian is symmetric to 1e-12 relative", [&] {
        const Eigen::MatrixXd h = assemble_hamiltonian(ops, probe, 1.15);
        const double rel = (h - h.transpose()).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff();
        return std::pair{rel <= 1e-12, "asymmetry " + fmt(rel)};
    });

    list.run("laser overlaps sum to one within 1e-10", [&] {
        const MolecularSpectrum spec = molecular_spectrum(ops, probe, 1.15, table, consts);
        const double sum = spec.kappa2.sum();
        return std::pair{within(sum, 1.0, 1e-10), "sum " + fmt(sum)};
    });

    list.run("eigendecomposition reconstructs the Hamiltonian to 1e-8", [&] {
        const Eigen::MatrixXd h = assemble_hamiltonian(ops, probe, 1.15);
        const EigenSystem es = diagonalize(h);
        const Eigen::MatrixXd back =
            es.vectors * es.values.asDiagonal() * es.vectors.transpose();
        const double rel = (back - h).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff();
        return std::pair{rel <= 1e-8, "residual " + fmt(rel)};
    });

    list.run("perturbative C6 agrees with diagonalization at large R", [&] {
        const double c6 = c6_perturbative(ops, 1.15, 0.0);
        const MolecularSpectrum spec = molecular_spectrum(ops, Geometry{30.0, 0.0}, 1.15, table, consts);
        const double direct = spec.detuning(spec.dominant());
        const double vdw = c6 / std::pow(30.0, 6);
        const double rel = std::abs(direct - vdw) / std::abs(vdw);
        return std::pair{rel <= 0.05, "relative gap " + fmt(rel)};
    });

    list.run("pulse dynamics conserve the norm to 1e-9", [&] {
        ExperimentConfig config;
        ShotDisorder disorder;
        disorder.doppler_mhz = {0.31, -0.22};
        disorder.omega_scale = {1.03, 0.97};
        const Eigen::Vector4d p =
            evolve_two_atom(PulseSequence::fig3(3.7, config.omega_mhz), disorder, 1.3, config);
        const double drift = std::abs(p.sum() - 1.0);
        return std::pair{drift <= 1e-9, "drift " + fmt(drift)};
    });

    list.run("equal seeds reproduce results bit for bit at any shard count", [&] {
        ExperimentConfig config;
        config.blockade_source = BlockadeSource::fixed;
        config.fixed_blockade_mhz = 1.3;
        config.shots = 400;
        config.seed = 5;
        const auto run = [&](int shards) {
            config.shards = shards;
            return run_experiment(config, SequenceKind::fig3, {tpi, 2.0 * tpi}, table, consts);
        };
        const ExperimentResult a = run(1);
        const ExperimentResult b = run(1);
        const ExperimentResult c = run(4);
        bool ok = true;
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            for (int s = 0; s < 2; ++s) {
                const double base = a.points[i].site[s].mean_retention;
                ok = ok && base == b.points[i].site[s].mean_retention;
                ok = ok && base == c.points[i].site[s].mean_retention;
            }
            ok = ok && a.points[i].n_postselected == b.points[i].n_postselected;
            ok = ok && a.points[i].n_postselected == c.points[i].n_postselected;
        }
        return std::pair{ok, std::string(ok ? "identical" : "mismatch")};
    });

    list.run("statistical error falls as one over sqrt(shots)", [&] {
        ExperimentConfig config;
        config.prep_error = 0.0;
        config.detection_error = 0.0;
        config.trap_off_loss = 0.0;
        config.seed = 7;
        const auto standard_error = [&](long shots) {
            config.shots = shots;
            const ExperimentResult run =
                run_experiment(config, SequenceKind::fig2, {0.5 * tpi}, table, consts);
            return run.points[0].site[static_cast<int>(Site::target)].standard_error;
        };
        const double ratio = standard_error(400) / standard_error(40000);
        return std::pair{within(ratio, 10.0, 2.0), "error ratio " + fmt(ratio)};
    });

    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    out << list.total << " checks, " << list.failed << " failures ("
        << fmt(static_cast<double>(elapsed.count()) / 1000.0) << " s)\n";
    return list.failed;
}

} // namespace rydblock
