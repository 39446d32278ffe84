#include "rydblock/expsim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "rydblock/errors.hpp"
#include "rydblock/pair.hpp"
#include "rydblock/rng.hpp"

namespace rydblock {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void require_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(name) + " must lie in [0, 1], got " + fmt(v));
    }
}

// Effective drive and detuning of both atoms during one step. The addressed
// atom is driven at its sampled Rabi frequency, the other one at the
// crosstalk ratio and with the AC Stark shift added to its detuning. Idle
// steps leave only the free phase evolution.
struct StepParams {
    double omega_c = 0.0;
    double omega_t = 0.0;
    double det_c = 0.0;
    double det_t = 0.0;
};

StepParams step_params(const PulseStep& step, const ShotDisorder& disorder,
                       const ExperimentConfig& config) {
    StepParams p;
    p.det_c = disorder.doppler_mhz[0];
    p.det_t = disorder.doppler_mhz[1];
    if (step.kind != StepKind::rydberg_drive) {
        return p;
    }
    const double oc =
        disorder.coupled[0] ? config.omega_mhz * disorder.omega_scale[0] : 0.0;
    const double ot =
        disorder.coupled[1] ? config.omega_mhz * disorder.omega_scale[1] : 0.0;
    if (step.site == Site::control) {
        p.omega_c = oc;
        p.omega_t = config.crosstalk_ratio * ot;
        p.det_t += config.ac_stark_detuning_mhz;
    } else {
        p.omega_t = ot;
        p.omega_c = config.crosstalk_ratio * oc;
        p.det_c += config.ac_stark_detuning_mhz;
    }
    return p;
}

// psi <- exp(-i 2 pi H t) psi for a real symmetric H, done exactly through
// the eigendecomposition. The eigenbasis is real, so the rotation acts on
// the real and imaginary parts separately.
template <typename Matrix, typename Vector>
void propagate(const Matrix& h, double t_us, Vector& psi) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) {
        throw NumericalError("step Hamiltonian diagonalization failed");
    }
    const auto& w = es.eigenvalues();
    const auto& v = es.eigenvectors();
    Eigen::VectorXd re = v.transpose() * psi.real();
    Eigen::VectorXd im = v.transpose() * psi.imag();
    for (Eigen::Index k = 0; k < re.size(); ++k) {
        const double phase = -2.0 * kPi * w(k) * t_us;
        const double c = std::cos(phase);
        const double s = std::sin(phase);
        const double rk = re(k) * c - im(k) * s;
        im(k) = re(k) * s + im(k) * c;
        re(k) = rk;
    }
    psi.real() = v * re;
    psi.imag() = v * im;
}

void check_norm_drift(double norm2, const char* where) {
    if (std::abs(norm2 - 1.0) > 1e-9) {
        throw NumericalError(std::string("state norm drifted to ") + fmt(norm2) +
                             " during " + where);
    }
}

std::array<bool, 2> present_sites(SequenceKind kind) {
    switch (kind) {
        case SequenceKind::fig2:
            return {false, true};
        case SequenceKind::fig2_crosstalk:
            return {true, false};
        case SequenceKind::fig3:
        default:
            return {true, true};
    }
}

PulseSequence sequence_for(SequenceKind kind, double t_us, double omega_mhz) {
    // The crosstalk measurement runs the fig2 pulse train; only the loaded
    // site differs.
    if (kind == SequenceKind::fig3) {
        return PulseSequence::fig3(t_us, omega_mhz);
    }
    return PulseSequence::fig2(t_us);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(z_um > 0.0) || !std::isfinite(z_um)) {
        throw ConfigError("trap separation must be positive, got " + fmt(z_um) + " um");
    }
    if (!(sigma_y_um >= 0.0) || !(sigma_z_um >= 0.0)) {
        throw ConfigError("position spreads must be non-negative");
    }
    if (!(temperature_uk >= 0.0)) {
        throw ConfigError("temperature must be non-negative, got " + fmt(temperature_uk));
    }
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    if (!(field_mt >= 0.0)) {
        throw ConfigError("magnetic field must be non-negative, got " + fmt(field_mt));
    }
    if (!(wavelength_red_nm > 0.0) || !(wavelength_blue_nm > 0.0)) {
        throw ConfigError("wavelengths must be positive");
    }
    if (wavelength_red_nm == wavelength_blue_nm && !copropagating) {
        throw ConfigError("counterpropagating beams of equal wavelength have no "
                          "Doppler sensitivity to model");
    }
    require_probability(prep_error, "prep_error");
    require_probability(detection_error, "detection_error");
    require_probability(trap_off_loss, "trap_off_loss");
    require_probability(rydberg_loss_prob, "rydberg_loss_prob");
    require_probability(crosstalk_ratio, "crosstalk_ratio");
    if (!(ac_stark_detuning_mhz >= 0.0)) {
        throw ConfigError("AC Stark detuning must be non-negative, got " +
                          fmt(ac_stark_detuning_mhz));
    }
    if (!(omega_jitter >= 0.0)) {
        throw ConfigError("Rabi-frequency jitter must be non-negative, got " +
                          fmt(omega_jitter));
    }
    if (principal_n < 5) {
        throw ConfigError("principal quantum number must be at least 5, got " +
                          std::to_string(principal_n));
    }
    if (blockade_source == BlockadeSource::fixed && !(fixed_blockade_mhz >= 0.0)) {
        throw ConfigError("fixed blockade shift must be non-negative, got " +
                          fmt(fixed_blockade_mhz));
    }
    if (shots < 1) {
        throw ConfigError("shot count must be at least 1, got " + std::to_string(shots));
    }
    if (shards < 1) {
        throw ConfigError("shard count must be at least 1, got " + std::to_string(shards));
    }
}

PulseSequence PulseSequence::fig2(double t_us) {
    PulseSequence seq;
    seq.steps.push_back({Site::target, t_us, StepKind::rydberg_drive, false});
    return seq;
}

PulseSequence PulseSequence::fig3(double t_us, double omega_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    const double t_pi = 1.0 / (2.0 * omega_mhz);
    PulseSequence seq;
    seq.steps.push_back({Site::control, t_pi, StepKind::rydberg_drive, true});
    seq.steps.push_back({Site::target, t_us, StepKind::rydberg_drive, false});
    seq.steps.push_back({Site::control, t_pi, StepKind::rydberg_drive, true});
    return seq;
}

void PulseSequence::validate(double omega_mhz) const {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    const double t_pi = 1.0 / (2.0 * omega_mhz);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const PulseStep& step = steps[i];
        if (!(step.duration_us >= 0.0) || !std::isfinite(step.duration_us)) {
            throw ConfigError("step " + std::to_string(i) +
                              " has invalid duration " + fmt(step.duration_us) + " us");
        }
        if (step.is_pi && std::abs(step.duration_us - t_pi) > 1e-9) {
            throw ConfigError("step " + std::to_string(i) + " is marked as a pi pulse "
                              "but lasts " + fmt(step.duration_us) + " us instead of " +
                              fmt(t_pi) + " us");
        }
    }
}

double thermal_velocity(double temperature_uk, const PhysicalConstants& consts) {
    if (!(temperature_uk >= 0.0)) {
        throw ConfigError("temperature must be non-negative, got " + fmt(temperature_uk));
    }
    // kB*T in joules: (kB/h)[MHz/K] * h[J s] * T[uK] carries 1e6 * 1e-6 = 1.
    const double kbt = consts.boltzmann_over_h * consts.planck_h * temperature_uk;
    return std::sqrt(kbt / consts.atom_mass);
}

double thermal_sigma(double period_us, double temperature_uk,
                     const PhysicalConstants& consts) {
    if (!(period_us > 0.0)) {
        throw ConfigError("trap period must be positive, got " + fmt(period_us));
    }
    // sigma = v_rms / omega_trap; m/s times us gives micrometers directly.
    return thermal_velocity(temperature_uk, consts) * period_us / (2.0 * kPi);
}

double effective_wavenumber(double wavelength_red_nm, double wavelength_blue_nm,
                            bool copropagating) {
    if (!(wavelength_red_nm > 0.0) || !(wavelength_blue_nm > 0.0)) {
        throw ConfigError("wavelengths must be positive");
    }
    const double k_red = 2.0 * kPi / (wavelength_red_nm * 1e-9);
    const double k_blue = 2.0 * kPi / (wavelength_blue_nm * 1e-9);
    return copropagating ? k_red + k_blue : std::abs(k_blue - k_red);
}

double doppler_sigma(double temperature_uk, double wavelength_red_nm,
                     double wavelength_blue_nm, bool copropagating,
                     const PhysicalConstants& consts) {
    const double k_eff =
        effective_wavenumber(wavelength_red_nm, wavelength_blue_nm, copropagating);
    const double v = thermal_velocity(temperature_uk, consts);
    return k_eff * v / (2.0 * kPi) * 1e-6;  // rad/s over 2 pi, expressed in MHz
}

double crosstalk_probability(double omega_mhz, double crosstalk_ratio,
                             double ac_stark_detuning_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    require_probability(crosstalk_ratio, "crosstalk_ratio");
    const double op = crosstalk_ratio * omega_mhz;
    const double d2 = ac_stark_detuning_mhz * ac_stark_detuning_mhz;
    if (op == 0.0 && d2 == 0.0) {
        return 0.0;
    }
    return op * op / (op * op + d2);
}

Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder, double blockade_mhz,
                                const ExperimentConfig& config) {
    return evolve_two_atom(sequence, disorder, blockade_mhz, config,
                           Eigen::Vector4cd(1.0, 0.0, 0.0, 0.0));
}

Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder, double blockade_mhz,
                                const ExperimentConfig& config,
                                const Eigen::Vector4cd& initial) {
    sequence.validate(config.omega_mhz);
    if (std::abs(initial.squaredNorm() - 1.0) > 1e-9) {
        throw ConfigError("initial state is not normalized: |psi|^2 = " +
                          fmt(initial.squaredNorm()));
    }
    Eigen::Vector4cd psi = initial;
    for (const PulseStep& step : sequence.steps) {
        const StepParams p = step_params(step, disorder, config);
        Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
        h(0, 1) = h(1, 0) = 0.5 * p.omega_t;
        h(0, 2) = h(2, 0) = 0.5 * p.omega_c;
        h(1, 3) = h(3, 1) = 0.5 * p.omega_c;
        h(2, 3) = h(3, 2) = 0.5 * p.omega_t;
        h(1, 1) = -p.det_t;
        h(2, 2) = -p.det_c;
        h(3, 3) = -p.det_c - p.det_t + blockade_mhz;
        propagate(h, step.duration_us, psi);
    }
    check_norm_drift(psi.squaredNorm(), "two-atom evolution");
    return psi.cwiseAbs2();
}

Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder,
                                const MolecularSpectrum& spectrum,
                                const ExperimentConfig& config) {
    sequence.validate(config.omega_mhz);
    const Eigen::Index n = spectrum.detuning.size();
    if (n == 0) {
        throw ConfigError("molecular spectrum is empty");
    }
    // Laser coupling amplitude into each molecular state. The overall sign of
    // an eigenvector is a gauge choice and both single-excitation states
    // couple through the same amplitude, so the positive root is general.
    Eigen::VectorXd kappa(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        kappa(k) = std::sqrt(std::max(spectrum.kappa2(k), 0.0));
    }
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(3 + n);
    psi(0) = 1.0;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 + n, 3 + n);
    for (const PulseStep& step : sequence.steps) {
        const StepParams p = step_params(step, disorder, config);
        h.setZero();
        h(0, 1) = h(1, 0) = 0.5 * p.omega_t;
        h(0, 2) = h(2, 0) = 0.5 * p.omega_c;
        h(1, 1) = -p.det_t;
        h(2, 2) = -p.det_c;
        for (Eigen::Index k = 0; k < n; ++k) {
            h(1, 3 + k) = h(3 + k, 1) = 0.5 * p.omega_c * kappa(k);
            h(2, 3 + k) = h(3 + k, 2) = 0.5 * p.omega_t * kappa(k);
            h(3 + k, 3 + k) = spectrum.detuning(k) - p.det_c - p.det_t;
        }
        propagate(h, step.duration_us, psi);
    }
    check_norm_drift(psi.squaredNorm(), "molecular-basis evolution");
    Eigen::Vector4d out;
    out(0) = std::norm(psi(0));
    out(1) = std::norm(psi(1));
    out(2) = std::norm(psi(2));
    out(3) = psi.tail(n).squaredNorm();
    return out;
}

BlockadeModel BlockadeModel::fixed(double shift_mhz, double omega_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    if (!(shift_mhz >= 0.0)) {
        throw ConfigError("fixed blockade shift must be non-negative, got " +
                          fmt(shift_mhz));
    }
    BlockadeModel m;
    m.fixed_ = true;
    m.fixed_shift_mhz_ = shift_mhz;
    m.omega_mhz_ = omega_mhz;
    return m;
}

BlockadeModel BlockadeModel::from_samples(std::vector<BlockadeSample> samples,
                                          double omega_mhz) {
    if (!(omega_mhz > 0.0)) {
        throw ConfigError("Rabi frequency must be positive, got " + fmt(omega_mhz));
    }
    if (samples.empty()) {
        throw ConfigError("blockade model needs at least one sample");
    }
    // Key by |dy|: the geometry is symmetric in the offset sign, and sampling
    // rules often return mirrored node pairs.
    std::map<double, double> by_offset;
    for (const BlockadeSample& s : samples) {
        if (!std::isfinite(s.dy_um) || !std::isfinite(s.p2)) {
            throw ConfigError("blockade sample contains non-finite values");
        }
        by_offset.emplace(std::abs(s.dy_um), std::clamp(s.p2, 1e-15, 1.0));
    }
    BlockadeModel m;
    m.omega_mhz_ = omega_mhz;
    for (const auto& [dy, p2] : by_offset) {
        m.dy_um_.push_back(dy);
        m.p2_.push_back(p2);
    }
    return m;
}

double BlockadeModel::p2_at(double dy_um) const {
    if (fixed_) {
        const double o2 = omega_mhz_ * omega_mhz_;
        return o2 / (o2 + 2.0 * fixed_shift_mhz_ * fixed_shift_mhz_);
    }
    const double a = std::abs(dy_um);
    if (a <= dy_um_.front()) {
        return p2_.front();
    }
    if (a >= dy_um_.back()) {
        return p2_.back();
    }
    const auto it = std::upper_bound(dy_um_.begin(), dy_um_.end(), a);
    const std::size_t hi = static_cast<std::size_t>(it - dy_um_.begin());
    const std::size_t lo = hi - 1;
    const double w = (a - dy_um_[lo]) / (dy_um_[hi] - dy_um_[lo]);
    return (1.0 - w) * p2_[lo] + w * p2_[hi];
}

double BlockadeModel::shift_at(double dy_um) const {
    if (fixed_) {
        return fixed_shift_mhz_;
    }
    return blockade_shift(p2_at(dy_um), omega_mhz_);
}

const PairOperators& shared_pair_operators(int n, const QuantumDefectTable& table,
                                           const PhysicalConstants& consts) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<PairOperators>> cache;
    std::scoped_lock lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        static MatrixElementCache radial_cache(table.content_hash(),
                                               RadialGridParams{}.content_hash());
        MatrixElementContext ctx;
        ctx.table = &table;
        ctx.consts = &consts;
        ctx.cache = &radial_cache;
        auto ops = std::make_unique<PairOperators>(
            build_pair_operators(build_pair_basis(forster_channels(n)), ctx));
        it = cache.emplace(n, std::move(ops)).first;
    }
    return *it->second;
}

BlockadeModel build_blockade_model(const ExperimentConfig& config,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts) {
    config.validate();
    if (config.blockade_source == BlockadeSource::fixed) {
        return BlockadeModel::fixed(config.fixed_blockade_mhz, config.omega_mhz);
    }
    const PairOperators& ops = shared_pair_operators(config.principal_n, table, consts);
    // The relative offset is Gaussian with spread sqrt(2)*sigma_y; six of
    // those cover the disorder beyond any weight that matters.
    const double span = 6.0 * std::sqrt(2.0) * config.sigma_y_um;
    const int nodes = config.sigma_y_um > 0.0 ? 33 : 1;
    std::vector<BlockadeSample> samples;
    samples.reserve(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        const double dy = nodes == 1 ? 0.0 : span * i / (nodes - 1);
        const MolecularSpectrum spec = molecular_spectrum(
            ops, Geometry::from_sites(config.z_um, dy), config.field_mt, table, consts);
        const double p2 = p2_from_spectrum(spec, config.omega_mhz);
        const double clamped = std::clamp(p2, 1e-15, 1.0);
        samples.push_back({dy, clamped, blockade_shift(clamped, config.omega_mhz)});
    }
    return BlockadeModel::from_samples(std::move(samples), config.omega_mhz);
}

namespace {

// Fixed per-shot draw schedule. Every shot consumes the same draws in the
// same order no matter which branches fire, so records are reproducible
// functions of (seed, stream) alone.
struct ShotDraws {
    std::array<bool, 2> dark;
    std::array<double, 2> y_norm;
    std::array<double, 2> z_norm;
    std::array<double, 2> v_norm;
    std::array<double, 2> jitter_norm;
    double collapse;
    std::array<double, 2> ryd_loss;
    std::array<double, 2> trap_loss;
    std::array<double, 2> det_flip;
};

ShotDraws draw_shot(ShotRng& rng, const ExperimentConfig& config) {
    ShotDraws d;
    d.dark = {rng.next_bernoulli(config.prep_error),
              rng.next_bernoulli(config.prep_error)};
    for (int i = 0; i < 2; ++i) d.y_norm[i] = rng.next_normal();
    for (int i = 0; i < 2; ++i) d.z_norm[i] = rng.next_normal();
    for (int i = 0; i < 2; ++i) d.v_norm[i] = rng.next_normal();
    for (int i = 0; i < 2; ++i) d.jitter_norm[i] = rng.next_normal();
    d.collapse = rng.next_double();
    d.ryd_loss = {rng.next_double(), rng.next_double()};
    d.trap_loss = {rng.next_double(), rng.next_double()};
    d.det_flip = {rng.next_double(), rng.next_double()};
    return d;
}

struct ShotContext {
    const ExperimentConfig* config;
    const PhysicalConstants* consts;
    const BlockadeModel* blockade;
    const PairOperators* ops;             // only for full-spectrum dynamics
    const QuantumDefectTable* table;
    SequenceKind kind;
};

ShotRecord run_one_shot(const ShotContext& ctx, double t_us, std::uint64_t stream) {
    const ExperimentConfig& config = *ctx.config;
    ShotRng rng(config.seed, stream);
    const ShotDraws draws = draw_shot(rng, config);
    const std::array<bool, 2> present = present_sites(ctx.kind);

    ShotRecord rec;
    const double v_th = thermal_velocity(config.temperature_uk, *ctx.consts);
    const double k_eff = effective_wavenumber(
        config.wavelength_red_nm, config.wavelength_blue_nm, config.copropagating);
    ShotDisorder disorder;
    for (int i = 0; i < 2; ++i) {
        rec.y_um[i] = config.sigma_y_um * draws.y_norm[i];
        rec.z_um[i] = config.sigma_z_um * draws.z_norm[i];
        rec.velocity_ms[i] = v_th * draws.v_norm[i];
        rec.doppler_mhz[i] = k_eff * rec.velocity_ms[i] / (2.0 * kPi) * 1e-6;
        rec.dark[i] = draws.dark[i];
        disorder.doppler_mhz[i] = rec.doppler_mhz[i];
        disorder.omega_scale[i] =
            std::max(0.0, 1.0 + config.omega_jitter * draws.jitter_norm[i]);
        disorder.coupled[i] = present[i] && !draws.dark[i];
    }

    const double dy = rec.y_um[1] - rec.y_um[0];
    const PulseSequence sequence = sequence_for(ctx.kind, t_us, config.omega_mhz);
    if (config.full_spectrum_dynamics && ctx.ops != nullptr) {
        const double dz = rec.z_um[1] - rec.z_um[0];
        const MolecularSpectrum spec =
            molecular_spectrum(*ctx.ops, Geometry::from_sites(config.z_um + dz, dy),
                               config.field_mt, *ctx.table, *ctx.consts);
        rec.blockade_mhz = blockade_shift(
            std::clamp(p2_from_spectrum(spec, config.omega_mhz), 1e-15, 1.0),
            config.omega_mhz);
        rec.probabilities = evolve_two_atom(sequence, disorder, spec, config);
    } else {
        rec.blockade_mhz = ctx.blockade->shift_at(dy);
        rec.probabilities = evolve_two_atom(sequence, disorder, rec.blockade_mhz, config);
    }

    // Collapse onto one of the four classical outcomes; tiny negative
    // rounding residues are treated as zero.
    double cum = 0.0;
    int outcome = 3;
    for (int k = 0; k < 4; ++k) {
        cum += std::max(rec.probabilities(k), 0.0);
        if (draws.collapse < cum) {
            outcome = k;
            break;
        }
    }
    const std::array<bool, 2> rydberg{outcome >= 2, outcome % 2 == 1};

    for (int i = 0; i < 2; ++i) {
        if (!present[i]) {
            rec.measured_present[i] = false;
            continue;
        }
        bool atom_there = true;
        if (rydberg[i] && draws.ryd_loss[i] < config.rydberg_loss_prob) {
            atom_there = false;
        }
        if (draws.trap_loss[i] < config.trap_off_loss) {
            atom_there = false;
        }
        const bool flip = draws.det_flip[i] < config.detection_error;
        rec.measured_present[i] = atom_there != flip;
    }

    rec.post_selected = !(ctx.kind == SequenceKind::fig3 && config.post_select &&
                          !rec.measured_present[0]);
    return rec;
}

}  // namespace

ShotRecord simulate_shot(const ExperimentConfig& config, SequenceKind kind,
                         double t_us, std::uint64_t stream,
                         const BlockadeModel& blockade,
                         const PhysicalConstants& consts) {
    config.validate();
    if (!(t_us >= 0.0) || !std::isfinite(t_us)) {
        throw ConfigError("pulse length must be non-negative, got " + fmt(t_us) + " us");
    }
    ShotContext ctx{&config, &consts, &blockade, nullptr, nullptr, kind};
    return run_one_shot(ctx, t_us, stream);
}

ExperimentResult run_experiment(const ExperimentConfig& config, SequenceKind kind,
                                const std::vector<double>& t_grid_us,
                                const QuantumDefectTable& table,
                                const PhysicalConstants& consts) {
    config.validate();
    if (t_grid_us.empty()) {
        throw ConfigError("pulse-length grid is empty");
    }
    for (double t : t_grid_us) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw ConfigError("pulse length must be non-negative, got " + fmt(t) + " us");
        }
    }

    const std::array<bool, 2> present = present_sites(kind);
    // Single-atom sequences cannot populate |rr>, so the interaction model is
    // moot for them; full-spectrum shots draw their shift from the per-shot
    // spectrum instead. Only the remaining case pays for the offset table.
    const bool per_shot_spectrum =
        config.full_spectrum_dynamics && kind == SequenceKind::fig3;
    BlockadeModel blockade = kind == SequenceKind::fig3 && !per_shot_spectrum
                                 ? build_blockade_model(config, table, consts)
                                 : BlockadeModel::fixed(0.0, config.omega_mhz);
    ShotContext ctx{&config, &consts, &blockade, nullptr, &table, kind};
    if (per_shot_spectrum) {
        ctx.ops = &shared_pair_operators(config.principal_n, table, consts);
    }

    ExperimentResult result;
    result.kind = kind;
    result.site_present = present;
    result.points.reserve(t_grid_us.size());

    const long shots = config.shots;
    for (std::size_t ti = 0; ti < t_grid_us.size(); ++ti) {
        const double t_us = t_grid_us[ti];
        // kept flag plus one presence flag per site, in shot order.
        std::vector<std::array<std::uint8_t, 3>> outcomes(
            static_cast<std::size_t>(shots));
        const int shards = std::min<long>(config.shards, shots);
        const long chunk = (shots + shards - 1) / shards;
        std::vector<std::future<void>> workers;
        for (int w = 0; w < shards; ++w) {
            const long begin = w * chunk;
            const long end = std::min(shots, begin + chunk);
            if (begin >= end) {
                break;
            }
            workers.push_back(std::async(std::launch::async, [&, begin, end]() {
                for (long s = begin; s < end; ++s) {
                    const std::uint64_t stream =
                        static_cast<std::uint64_t>(ti) * static_cast<std::uint64_t>(shots) +
                        static_cast<std::uint64_t>(s);
                    const ShotRecord rec = run_one_shot(ctx, t_us, stream);
                    outcomes[static_cast<std::size_t>(s)] = {
                        static_cast<std::uint8_t>(rec.post_selected),
                        static_cast<std::uint8_t>(rec.measured_present[0]),
                        static_cast<std::uint8_t>(rec.measured_present[1])};
                }
            }));
        }
        for (auto& worker : workers) {
            worker.get();
        }

        ExperimentPoint point;
        point.t_us = t_us;
        point.n_shots = shots;
        long kept = 0;
        std::array<long, 2> retained{0, 0};
        for (const auto& o : outcomes) {
            if (o[0] == 0) {
                continue;
            }
            ++kept;
            retained[0] += o[1];
            retained[1] += o[2];
        }
        point.n_postselected = kept;
        for (int i = 0; i < 2; ++i) {
            if (!present[i] || kept == 0) {
                point.site[i] = {kNan, kNan};
                continue;
            }
            const double p = static_cast<double>(retained[i]) / static_cast<double>(kept);
            point.site[i].mean_retention = p;
            point.site[i].standard_error =
                std::sqrt(p * (1.0 - p) / static_cast<double>(kept));
        }
        result.points.push_back(point);
    }
    return result;
}

} // namespace rydblock
