#include "rydblock/blockade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <utility>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

double p2_from_spectrum(const MolecularSpectrum& spec, double omega_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz) + " MHz");
    }
    const double o2 = omega_mhz * omega_mhz;
    double p2 = 0.0;
    for (Eigen::Index k = 0; k < spec.detuning.size(); ++k) {
        p2 += o2 * spec.kappa2(k) / (o2 + 2.0 * spec.detuning(k) * spec.detuning(k));
    }
    return p2;
}

double blockade_shift(double p2, double omega_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz) + " MHz");
    }
    if (p2 <= 0.0) {
        throw InfiniteBlockadeError("double-excitation probability " + fmt(p2) +
                                    " admits no finite blockade shift");
    }
    if (p2 > 1.0) {
        throw NumericalError("double-excitation probability " + fmt(p2) + " exceeds 1");
    }
    return omega_mhz * std::sqrt((1.0 - p2) / (2.0 * p2));
}

void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (n < 1) throw ConfigError("quadrature order must be >= 1, got " + std::to_string(n));
    // Golub-Welsch on the Hermite three-term recurrence: zero diagonal,
    // off-diagonal sqrt(k/2); weights from the first eigenvector row.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        j(k, k - 1) = j(k - 1, k) = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(j);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Gauss-Hermite node solve failed for n=" + std::to_string(n));
    }
    nodes = solver.eigenvalues();
    weights = kSqrtPi * solver.eigenvectors().row(0).array().square();
}

AveragedBlockade averaged_blockade(const PairOperators& ops, double z_um, double sigma_y_um,
                                   double field_mt, double omega_mhz,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts,
                                   const AveragingOptions& options) {
    if (sigma_y_um < 0.0) throw ConfigError("sigma_y must be >= 0 um");
    if (options.sigma_z < 0.0) throw ConfigError("sigma_z must be >= 0 um");
    if (!(omega_mhz > 0.0)) throw ConfigError("Rabi frequency must be positive");
    if (options.nodes < 1) throw ConfigError("quadrature order must be >= 1");

    // P2 depends on dy only through |dy|; axial offsets are not symmetric.
    std::map<std::pair<long long, long long>, double> cache;
    auto eval_p2 = [&](double dy, double dz) {
        const auto key = std::make_pair(std::llround(std::abs(dy) * 1e9),
                                        std::llround(dz * 1e9));
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const Geometry geom = Geometry::from_sites(z_um + dz, dy);
        const double p2 =
            p2_from_spectrum(molecular_spectrum(ops, geom, field_mt, table, consts), omega_mhz);
        cache.emplace(key, p2);
        return p2;
    };

    Eigen::VectorXd tz(1), wz(1);
    tz << 0.0;
    wz << kSqrtPi;
    if (options.sigma_z > 0.0) gauss_hermite(16, tz, wz);
    const double z_limit = 6.0 * std::sqrt(2.0) * options.sigma_z;

    // One quadrature pass at transverse order ny; the axial average is folded
    // into each node's P2 so samples stay a function of dy alone.
    auto run_pass = [&](int ny, double* p2_out, std::vector<BlockadeSample>* samples_out) {
        Eigen::VectorXd ty(1), wy(1);
        ty << 0.0;
        wy << kSqrtPi;
        if (sigma_y_um > 0.0) gauss_hermite(ny, ty, wy);
        const double y_limit = 6.0 * std::sqrt(2.0) * sigma_y_um;

        std::vector<BlockadeSample> samples;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < ty.size(); ++i) {
            const double dy = 2.0 * sigma_y_um * ty(i);
            if (sigma_y_um > 0.0 && std::abs(dy) > y_limit) continue;
            double p2_node = 0.0;
            for (Eigen::Index k = 0; k < tz.size(); ++k) {
                const double dz = 2.0 * options.sigma_z * tz(k);
                if (options.sigma_z > 0.0 && std::abs(dz) > z_limit) continue;
                p2_node += wz(k) * eval_p2(dy, dz);
            }
            p2_node /= kSqrtPi;
            samples.push_back({dy, p2_node, blockade_shift(p2_node, omega_mhz)});
            acc += wy(i) * p2_node;
        }
        *p2_out = acc / kSqrtPi;
        *samples_out = std::move(samples);
    };

    AveragedBlockade out;
    if (sigma_y_um == 0.0) {
        run_pass(1, &out.p2, &out.samples);
        out.nodes = 1;
        out.shift = blockade_shift(out.p2, omega_mhz);
        return out;
    }

    int order = options.nodes;
    double prev = 0.0;
    std::vector<BlockadeSample> samples;
    run_pass(order, &prev, &samples);
    std::string history = std::to_string(order) + " -> " + fmt(prev);
    while (true) {
        const int next_order = 2 * order;
        if (next_order > options.max_nodes) {
            throw NumericalError("thermal average did not converge within " +
                                 std::to_string(options.max_nodes) + " nodes: " + history);
        }
        double next = 0.0;
        run_pass(next_order, &next, &samples);
        history += ", " + std::to_string(next_order) + " -> " + fmt(next);
        const double change = std::abs(next - prev) / std::max(std::abs(next), 1e-300);
        if (change < 0.01) {
            out.p2 = next;
            out.nodes = next_order;
            out.doubling_change = change;
            out.samples = std::move(samples);
            out.shift = blockade_shift(out.p2, omega_mhz);
            return out;
        }
        prev = next;
        order = next_order;
    }
}

}  // namespace rydblock
