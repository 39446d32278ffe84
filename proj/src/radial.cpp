#include "rydblock/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

// Trapezoid on a uniform lattice.
double trapz(const Eigen::VectorXd& y, double h) {
    const Eigen::Index n = y.size();
    if (n < 2) return 0.0;
    double s = 0.5 * (y[0] + y[n - 1]);
    for (Eigen::Index k = 1; k + 1 < n; ++k) s += y[k];
    return s * h;
}

// Same integral with every other sample, for the step-halving residual.
double trapz_coarse(const Eigen::VectorXd& y, double h) {
    const Eigen::Index n = y.size();
    if (n < 3) return 0.0;
    Eigen::Index last = (n - 1) - (n - 1) % 2;
    double s = 0.5 * (y[0] + y[last]);
    for (Eigen::Index k = 2; k < last; k += 2) s += y[k];
    return s * 2.0 * h;
}

} // namespace

unsigned long long RadialGridParams::content_hash() const {
    // FNV-1a over the raw step bytes plus a format tag, so cached integrals
    // are invalidated when the lattice convention changes.
    unsigned long long hash = 1469598103934665603ull;
    auto mix = [&hash](const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            hash ^= b[i];
            hash *= 1099511628211ull;
        }
    };
    const char tag[] = "sqrt-lattice-v1";
    mix(tag, sizeof(tag));
    mix(&step, sizeof(step));
    return hash;
}

RadialWavefunction radial_wavefunction(const AtomState& state, const QuantumDefectTable& table,
                                       const PhysicalConstants& consts,
                                       const RadialGridParams& params) {
    (void)consts;
    state.validate();
    if (!(params.step > 0.0) || params.step > 0.1)
        throw ConfigError("radial grid step must be in (0, 0.1]");

    const int n = state.n;
    const int l = state.l;
    const double ns = table.effective_n(state);
    const double energy = -1.0 / (2.0 * ns * ns);

    const double disc = 1.0 - l * (l + 1) / (ns * ns);
    if (disc <= 0.0)
        throw IntegrationError("no classically allowed region for " + to_string(state));
    const double rtp_in = ns * ns * (1.0 - std::sqrt(disc));
    const double rtp_out = ns * ns * (1.0 + std::sqrt(disc));

    const double h = params.step;
    const double r_out = 2.0 * double(n) * (n + 15);
    const int kmax = int(std::sqrt(r_out) / h);
    if (kmax < 16) throw IntegrationError("radial grid too short for " + to_string(state));

    Eigen::VectorXd w = Eigen::VectorXd::Zero(kmax + 1);
    Eigen::VectorXd f(kmax + 1);
    const double cl = 4.0 * l * (l + 1) + 0.75;
    f[0] = 1.0; // never used by the recurrence (integration stops above k=0)
    for (int k = 1; k <= kmax; ++k) {
        const double x2 = (k * h) * (k * h);
        const double g = cl / x2 - 8.0 - 8.0 * energy * x2;
        f[k] = 1.0 - h * h * g / 12.0;
    }

    w[kmax] = 0.0;
    w[kmax - 1] = 1e-12;

    // Stop the inward sweep well inside the inner turning point; the
    // divergence guard below usually truncates earlier.
    const double x_lo = std::max(h, 0.25 * std::sqrt(rtp_in));
    const int klo = std::max(1, int(std::ceil(x_lo / h)));

    int cutoff = klo;
    double running_max = 0.0;
    for (int k = kmax - 1; k >= klo; --k) {
        w[k - 1] = ((12.0 - 10.0 * f[k]) * w[k] - f[k + 1] * w[k + 1]) / f[k - 1];
        const double a = std::abs(w[k - 1]);
        const double r_here = ((k - 1) * h) * ((k - 1) * h);
        if (r_here >= 0.5 * rtp_in) {
            // Reference amplitude comes from outside the guard zone only;
            // inside it the irregular solution grows without bound and would
            // otherwise inflate its own threshold.
            running_max = std::max(running_max, a);
        } else if (running_max > 0.0 && a > 3.0 * running_max) {
            // Unphysical growth in the inner forbidden region, zero it out.
            for (int j = 0; j < k; ++j) w[j] = 0.0;
            cutoff = k;
            break;
        }
    }

    // Norm: integral u^2 dr = 2 integral x^2 w^2 dx.
    Eigen::VectorXd integrand(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        const double x = k * h;
        integrand[k] = x * x * w[k] * w[k];
    }
    const double norm_fine = 2.0 * trapz(integrand, h);
    const double norm_coarse = 2.0 * trapz_coarse(integrand, h);
    if (!(norm_fine > 0.0) || !std::isfinite(norm_fine))
        throw IntegrationError("norm integral vanished for " + to_string(state));

    RadialWavefunction wf;
    wf.state = state;
    wf.step = h;
    wf.inner_cutoff = cutoff;
    wf.norm_residual = std::abs(norm_fine - norm_coarse) / norm_fine;
    wf.r.resize(kmax + 1);
    wf.u.resize(kmax + 1);
    const double scale = 1.0 / std::sqrt(norm_fine);
    for (int k = 0; k <= kmax; ++k) {
        const double x = k * h;
        wf.r[k] = x * x;
        wf.u[k] = std::sqrt(x) * w[k] * scale;
    }

    // The dominant lobe must sit in the classically allowed region. A peak
    // in the truncation zone means the guard fired after contaminating the
    // physical range.
    Eigen::Index peak = 0;
    wf.u.cwiseAbs().maxCoeff(&peak);
    const double r_peak = wf.r[peak];
    if (r_peak < std::max(0.5 * rtp_in, 0.02 * rtp_out))
        throw IntegrationError("outer lobe not resolved for " + to_string(state));

    return wf;
}

double radial_overlap_r(const RadialWavefunction& a, const RadialWavefunction& b) {
    if (std::abs(a.step - b.step) > 1e-15 * a.step)
        throw ConfigError("radial integrals require a common lattice step");
    const Eigen::Index n = std::min(a.u.size(), b.u.size());
    const double h = a.step;
    // integral u_a u_b r dr = 2 integral x^3 u_a u_b dx on the sqrt lattice.
    Eigen::VectorXd integrand(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double x = double(k) * h;
        integrand[k] = x * x * x * a.u[k] * b.u[k];
    }
    return 2.0 * trapz(integrand, h);
}

int count_nodes(const RadialWavefunction& wf) {
    const double floor_amp = 1e-6 * wf.u.cwiseAbs().maxCoeff();
    int nodes = 0;
    double prev = 0.0;
    for (Eigen::Index k = 0; k < wf.u.size(); ++k) {
        const double v = wf.u[k];
        if (std::abs(v) <= floor_amp) continue;
        if (prev != 0.0 && std::signbit(v) != std::signbit(prev)) ++nodes;
        prev = v;
    }
    return nodes;
}

} // namespace rydblock
