#include "rydblock/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

struct AngularWeights {
    double iso, tilt, perp;
};

AngularWeights angular_weights(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {1.0 - 3.0 * c * c, -3.0 / std::sqrt(2.0) * s * c, -1.5 * s * s};
}

// E_h a0^3 in MHz um^3; divide by r^3 for the 1/r^3 coupling scale.
double coupling_scale(const PhysicalConstants& consts) {
    const double a0 = consts.bohr_radius;
    return consts.hartree_frequency * a0 * a0 * a0;
}

}  // namespace

void Geometry::validate() const {
    if (!(r_um > 0.0) || !std::isfinite(r_um)) {
        throw ConfigError("singular geometry: separation must be positive, got r=" +
                          std::to_string(r_um) + " um");
    }
    if (!(theta >= 0.0 && theta <= 3.14159265358979323846 + 1e-12)) {
        throw ConfigError("geometry angle must lie in [0, pi], got " + std::to_string(theta));
    }
}

Geometry Geometry::from_sites(double z_um, double dy_um) {
    Geometry g{std::hypot(z_um, dy_um), std::atan2(std::abs(dy_um), z_um)};
    g.validate();
    return g;
}

PairOperators build_pair_operators(const PairBasis& basis, const MatrixElementContext& ctx) {
    if (!ctx.table || !ctx.consts) {
        throw ConfigError("pair operators need a defect table and constants");
    }
    const QuantumDefectTable& table = *ctx.table;
    const PhysicalConstants& consts = *ctx.consts;

    // A throwaway cache keeps the radial integrals shared across the m
    // sublevels of a shell pair even when the caller did not supply one.
    MatrixElementCache local(table.content_hash(), ctx.grid.content_hash());
    MatrixElementContext mctx = ctx;
    if (!mctx.cache) mctx.cache = &local;

    PairOperators ops;
    ops.basis = basis;
    ops.coupling_scale = coupling_scale(consts);
    const Eigen::Index ns = static_cast<Eigen::Index>(basis.singles.size());

    ops.single_energy.resize(ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        ops.single_energy(i) = level_energy(basis.singles[static_cast<std::size_t>(i)],
                                            table, consts);
    }

    ops.single_zeeman = Eigen::MatrixXd::Zero(ns, ns);
    for (Eigen::Index i = 0; i < ns; ++i) {
        const AtomState& si = basis.singles[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < ns; ++j) {
            const AtomState& sj = basis.singles[static_cast<std::size_t>(j)];
            if (si.n != sj.n || si.l != sj.l || si.twice_m != sj.twice_m) continue;
            ops.single_zeeman(i, j) =
                consts.bohr_magneton_over_h *
                zeeman_g_element(si.l, si.twice_j, sj.twice_j, si.twice_m, consts);
        }
    }

    for (int q = -1; q <= 1; ++q) {
        Eigen::MatrixXd& d = ops.dipole[static_cast<std::size_t>(q + 1)];
        d = Eigen::MatrixXd::Zero(ns, ns);
        for (Eigen::Index i = 0; i < ns; ++i) {
            for (Eigen::Index j = 0; j < ns; ++j) {
                d(i, j) = dipole_matrix_element(basis.singles[static_cast<std::size_t>(i)],
                                                basis.singles[static_cast<std::size_t>(j)],
                                                q, mctx);
            }
        }
    }

    const Eigen::Index np = basis.size();
    ops.pair_energy.resize(np);
    ops.pair_zeeman = Eigen::MatrixXd::Zero(np, np);
    ops.t_iso = Eigen::MatrixXd::Zero(np, np);
    ops.t_tilt = Eigen::MatrixXd::Zero(np, np);
    ops.t_perp = Eigen::MatrixXd::Zero(np, np);

    const Eigen::MatrixXd& dm = ops.dipole[0];
    const Eigen::MatrixXd& d0 = ops.dipole[1];
    const Eigen::MatrixXd& dp = ops.dipole[2];

    for (Eigen::Index p = 0; p < np; ++p) {
        const Eigen::Index pa = basis.a_index(p);
        const Eigen::Index pb = basis.b_index(p);
        ops.pair_energy(p) = ops.single_energy(pa) + ops.single_energy(pb);
        for (Eigen::Index q = 0; q < np; ++q) {
            const Eigen::Index qa = basis.a_index(q);
            const Eigen::Index qb = basis.b_index(q);
            if (pb == qb) ops.pair_zeeman(p, q) += ops.single_zeeman(pa, qa);
            if (pa == qa) ops.pair_zeeman(p, q) += ops.single_zeeman(pb, qb);
            ops.t_iso(p, q) = d0(pa, qa) * d0(pb, qb) +
                              0.5 * (dp(pa, qa) * dm(pb, qb) + dm(pa, qa) * dp(pb, qb));
            ops.t_tilt(p, q) = dp(pa, qa) * d0(pb, qb) + d0(pa, qa) * dp(pb, qb) -
                               dm(pa, qa) * d0(pb, qb) - d0(pa, qa) * dm(pb, qb);
            ops.t_perp(p, q) = dp(pa, qa) * dp(pb, qb) + dm(pa, qa) * dm(pb, qb);
        }
    }
    return ops;
}

double dipole_dipole_element(const PairState& t, const PairState& s, const Geometry& geom,
                             const MatrixElementContext& ctx) {
    geom.validate();
    if (!ctx.consts) throw ConfigError("dipole_dipole_element needs physical constants");

    double d1[3], d2[3];
    for (int q = -1; q <= 1; ++q) {
        d1[q + 1] = dipole_matrix_element(t.a, s.a, q, ctx);
        d2[q + 1] = dipole_matrix_element(t.b, s.b, q, ctx);
    }
    const double iso = d1[1] * d2[1] + 0.5 * (d1[2] * d2[0] + d1[0] * d2[2]);
    const double tilt = d1[2] * d2[1] + d1[1] * d2[2] - d1[0] * d2[1] - d1[1] * d2[0];
    const double perp = d1[2] * d2[2] + d1[0] * d2[0];

    const AngularWeights w = angular_weights(geom.theta);
    const double r3 = geom.r_um * geom.r_um * geom.r_um;
    return coupling_scale(*ctx.consts) / r3 * (w.iso * iso + w.tilt * tilt + w.perp * perp);
}

Eigen::MatrixXd assemble_hamiltonian(const PairOperators& ops, const Geometry& geom,
                                     double field_mt) {
    geom.validate();
    if (field_mt < 0.0) throw ConfigError("magnetic field must be >= 0 mT");
    const AngularWeights w = angular_weights(geom.theta);
    const double r3 = geom.r_um * geom.r_um * geom.r_um;
    const double pref = ops.coupling_scale / r3;

    Eigen::MatrixXd h = ops.pair_energy.asDiagonal();
    h += field_mt * ops.pair_zeeman;
    h += pref * (w.iso * ops.t_iso + w.tilt * ops.t_tilt + w.perp * ops.t_perp);
    return h;
}

EigenSystem diagonalize(const Eigen::MatrixXd& h) {
    if (h.rows() == 0 || h.rows() != h.cols()) {
        throw ConfigError("diagonalize needs a non-empty square matrix, got " +
                          std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
    }
    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1.0);
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * scale) {
        throw NumericalError("matrix is not symmetric: max |H - H^T| = " +
                             std::to_string(asym));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensolver failed to converge");
    }
    EigenSystem sys{solver.eigenvalues(), solver.eigenvectors()};

    const double hnorm = std::max(h.norm(), 1e-300);
    const Eigen::MatrixXd resid =
        h * sys.vectors - sys.vectors * sys.values.asDiagonal();
    for (Eigen::Index k = 0; k < sys.values.size(); ++k) {
        if (resid.col(k).norm() > 1e-8 * hnorm) {
            throw NumericalError("eigenpair " + std::to_string(k) + " residual " +
                                 std::to_string(resid.col(k).norm()) + " exceeds 1e-8 |H|");
        }
    }

    for (Eigen::Index k = 0; k < sys.vectors.cols(); ++k) {
        Eigen::Index imax = 0;
        sys.vectors.col(k).cwiseAbs().maxCoeff(&imax);
        if (sys.vectors(imax, k) < 0.0) sys.vectors.col(k) = -sys.vectors.col(k);
    }
    return sys;
}

Eigen::Index MolecularSpectrum::dominant() const {
    Eigen::Index k = 0;
    kappa2.maxCoeff(&k);
    return k;
}

MolecularSpectrum molecular_spectrum(const PairOperators& ops, const Geometry& geom,
                                     double field_mt, const QuantumDefectTable& table,
                                     const PhysicalConstants& consts) {
    geom.validate();
    const PairBasis& basis = ops.basis;
    if (basis.channels.empty() || !(basis.channels[0].a == basis.channels[0].b) ||
        basis.channels[0].a.l != 2) {
        throw ConfigError("molecular spectrum requires a leading (nd, nd) channel");
    }
    const int n0 = basis.channels[0].a.n;

    const DressedState dressed = laser_excited_state(n0, field_mt, table, consts);
    Eigen::VectorXd amp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.singles.size()));
    for (std::size_t k = 0; k < dressed.manifold.size(); ++k) {
        const Eigen::Index idx = basis.single_index(dressed.manifold[k]);
        if (idx < 0) throw NumericalError("dressed sublevel missing from the pair basis");
        amp(idx) = dressed.amplitudes(static_cast<Eigen::Index>(k));
    }
    Eigen::VectorXd rr(basis.size());
    for (Eigen::Index p = 0; p < basis.size(); ++p) {
        rr(p) = amp(basis.a_index(p)) * amp(basis.b_index(p));
    }

    EigenSystem sys = diagonalize(assemble_hamiltonian(ops, geom, field_mt));
    const double reference =
        2.0 * (level_energy(AtomState{n0, 2, 5, 1}, table, consts) + dressed.energy);

    MolecularSpectrum spec;
    spec.geometry = geom;
    spec.field = field_mt;
    spec.detuning = sys.values.array() - reference;
    spec.kappa2 = (sys.vectors.transpose() * rr).array().square();
    spec.states = std::move(sys.vectors);
    return spec;
}

double c6_perturbative(const PairOperators& ops, double field_mt, double theta) {
    if (field_mt < 0.0) throw ConfigError("magnetic field must be >= 0 mT");
    const PairBasis& basis = ops.basis;
    if (basis.channels.empty() || !(basis.channels[0].a == basis.channels[0].b) ||
        basis.channels[0].a.l != 2) {
        throw ConfigError("c6_perturbative requires a leading (nd, nd) channel");
    }
    const Eigen::Index ns = static_cast<Eigen::Index>(basis.singles.size());

    // Dress the sublevels shell by shell; eigenvectors are embedded at the
    // original index positions so the pair index arrays stay valid.
    Eigen::VectorXd dressed_energy = Eigen::VectorXd::Zero(ns);
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(ns, ns);
    std::vector<bool> done(static_cast<std::size_t>(ns), false);
    for (Eigen::Index i = 0; i < ns; ++i) {
        if (done[static_cast<std::size_t>(i)]) continue;
        std::vector<Eigen::Index> idx;
        const AtomState& si = basis.singles[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i; j < ns; ++j) {
            const AtomState& sj = basis.singles[static_cast<std::size_t>(j)];
            if (sj.n == si.n && sj.l == si.l) idx.push_back(j);
        }
        const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd block(m, m);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < m; ++c) {
                block(r, c) = (r == c ? ops.single_energy(idx[static_cast<std::size_t>(r)]) : 0.0) +
                              field_mt * ops.single_zeeman(idx[static_cast<std::size_t>(r)],
                                                           idx[static_cast<std::size_t>(c)]);
            }
        }
        const EigenSystem sub = diagonalize(block);
        for (Eigen::Index c = 0; c < m; ++c) {
            dressed_energy(idx[static_cast<std::size_t>(c)]) = sub.values(c);
            for (Eigen::Index r = 0; r < m; ++r) {
                v(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]) =
                    sub.vectors(r, c);
            }
            done[static_cast<std::size_t>(idx[static_cast<std::size_t>(c)])] = true;
        }
    }

    const int n0 = basis.channels[0].a.n;
    const Eigen::Index i_target = basis.single_index(AtomState{n0, 2, 5, 1});
    if (i_target < 0) throw NumericalError("target d5/2 sublevel missing from basis");
    Eigen::Index col = 0;
    v.row(i_target).cwiseAbs().maxCoeff(&col);

    const Eigen::MatrixXd dm = v.transpose() * ops.dipole[0] * v;
    const Eigen::MatrixXd d0 = v.transpose() * ops.dipole[1] * v;
    const Eigen::MatrixXd dp = v.transpose() * ops.dipole[2] * v;

    const AngularWeights w = angular_weights(theta);
    const double scale = ops.coupling_scale;
    const double e_rr = 2.0 * dressed_energy(col);

    double c6 = 0.0;
    for (Eigen::Index p = 0; p < basis.size(); ++p) {
        const Eigen::Index pa = basis.a_index(p);
        const Eigen::Index pb = basis.b_index(p);
        const double iso = d0(pa, col) * d0(pb, col) +
                           0.5 * (dp(pa, col) * dm(pb, col) + dm(pa, col) * dp(pb, col));
        const double tilt = dp(pa, col) * d0(pb, col) + d0(pa, col) * dp(pb, col) -
                            dm(pa, col) * d0(pb, col) - d0(pa, col) * dm(pb, col);
        const double perp = dp(pa, col) * dp(pb, col) + dm(pa, col) * dm(pb, col);
        const double coupling = scale * (w.iso * iso + w.tilt * tilt + w.perp * perp);
        const double den = e_rr - (dressed_energy(pa) + dressed_energy(pb));
        if (std::abs(den) < 1e-6 || std::abs(coupling) < 1e-12) continue;
        c6 += coupling * coupling / den;
    }
    return c6;
}

double c6_perturbative(int n, double field_mt, double theta, const MatrixElementContext& ctx) {
    if (!ctx.consts) throw ConfigError("c6_perturbative needs physical constants");
    const PairBasis basis = build_pair_basis(forster_channels(n));
    const PairOperators ops = build_pair_operators(basis, ctx);
    return c6_perturbative(ops, field_mt, theta);
}

Eigen::VectorXd channel_asymptotes(const PairOperators& ops, std::size_t channel,
                                   double field_mt) {
    const PairBasis& basis = ops.basis;
    if (channel >= basis.channels.size()) {
        throw ConfigError("channel index " + std::to_string(channel) + " out of range");
    }
    const Eigen::Index lo = basis.channel_offset[channel];
    const Eigen::Index m = basis.channel_offset[channel + 1] - lo;
    Eigen::MatrixXd block = field_mt * ops.pair_zeeman.block(lo, lo, m, m);
    block += Eigen::MatrixXd(ops.pair_energy.segment(lo, m).asDiagonal());
    return diagonalize(block).values;
}

AsymptoticTable asymptotic_energies_vs_field(const PairOperators& ops,
                                             const Eigen::VectorXd& fields_mt,
                                             double reference_mhz) {
    if (fields_mt.size() == 0) throw ConfigError("empty field range");
    AsymptoticTable out;
    out.fields = fields_mt;
    out.energies.resize(fields_mt.size(), ops.basis.size());
    out.channel_of_column.resize(static_cast<std::size_t>(ops.basis.size()));
    for (std::size_t c = 0; c + 1 < ops.basis.channel_offset.size(); ++c) {
        for (Eigen::Index j = ops.basis.channel_offset[c]; j < ops.basis.channel_offset[c + 1]; ++j) {
            out.channel_of_column[static_cast<std::size_t>(j)] = c;
        }
    }
    for (Eigen::Index i = 0; i < fields_mt.size(); ++i) {
        for (std::size_t c = 0; c + 1 < ops.basis.channel_offset.size(); ++c) {
            const Eigen::Index lo = ops.basis.channel_offset[c];
            const Eigen::VectorXd vals = channel_asymptotes(ops, c, fields_mt(i));
            out.energies.row(i).segment(lo, vals.size()) =
                vals.transpose().array() - reference_mhz;
        }
    }
    return out;
}

}  // namespace rydblock
