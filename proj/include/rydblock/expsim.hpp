#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rydblock/blockade.hpp"
#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/interaction.hpp"

namespace rydblock {

// Frequencies are linear (cycles), not angular: omega_mhz is the Rabi
// frequency divided by 2*pi, so a resonant pi pulse lasts 1/(2*omega_mhz) us
// and a detuning enters the Hamiltonian as plain MHz. Propagation uses
// exp(-i*2*pi*H*t) accordingly.

enum class BlockadeSource {
    spectrum, // interaction shift from the diagonalized pair spectrum at shot geometry
    fixed,    // constant fixed_blockade_mhz, for controlled numerical experiments
};

struct ExperimentConfig {
    double z_um = 11.0;         // trap separation along the field axis
    double sigma_y_um = 2.6;    // transverse position spread per atom
    double sigma_z_um = 0.23;   // axial position spread per atom
    double temperature_uk = 150.0;
    double omega_mhz = 0.51;
    double field_mt = 1.15;
    double wavelength_red_nm = 780.0;
    double wavelength_blue_nm = 480.0;
    bool copropagating = false; // beams run against each other unless set
    double prep_error = 0.05;        // atom starts dark and is never driven
    double detection_error = 0.05;   // presence readout flips with this probability
    double trap_off_loss = 0.03;     // background loss while the traps are off
    double rydberg_loss_prob = 1.0;  // photoionization of an atom left in the Rydberg state
    double crosstalk_ratio = 0.019;  // Rabi-frequency ratio at the non-addressed site
    double ac_stark_detuning_mhz = 2.0; // transition shift at the non-addressed site
    double omega_jitter = 0.0;       // fractional rms Rabi-frequency spread per atom
    int principal_n = 79;
    BlockadeSource blockade_source = BlockadeSource::spectrum;
    double fixed_blockade_mhz = 0.0;
    bool full_spectrum_dynamics = false; // per-shot evolution in the molecular basis
    bool post_select = true;  // fig3 keeps only shots with the control atom retained
    long shots = 1000;
    std::uint64_t seed = 1;
    int shards = 1;           // independent shot ranges; result is shard-count invariant

    void validate() const; // throws ConfigError
};

enum class Site { control, target };
enum class StepKind { rydberg_drive, idle };

struct PulseStep {
    Site site = Site::target; // where the excitation beams point
    double duration_us = 0.0;
    StepKind kind = StepKind::rydberg_drive;
    bool is_pi = false;       // duration is tied to 1/(2*omega) for these steps
};

struct PulseSequence {
    std::vector<PulseStep> steps;

    // Single drive pulse of length t on the target site.
    static PulseSequence fig2(double t_us);
    // Pi on control, t on target, pi on control to bring the control back.
    static PulseSequence fig3(double t_us, double omega_mhz);

    // Durations must be finite and non-negative; pi-flagged steps must match
    // 1/(2*omega_mhz) within 1e-9 us. Throws ConfigError.
    void validate(double omega_mhz) const;
};

// Static per-shot disorder entering the coherent dynamics. Index 0 is the
// control atom, index 1 the target. coupled = false removes the atom from the
// drive entirely (dark or absent) while keeping it in the basis.
struct ShotDisorder {
    std::array<double, 2> doppler_mhz{0.0, 0.0};
    std::array<double, 2> omega_scale{1.0, 1.0};
    std::array<bool, 2> coupled{true, true};
};

struct ShotRecord {
    std::array<double, 2> y_um{0.0, 0.0};
    std::array<double, 2> z_um{0.0, 0.0};
    std::array<double, 2> velocity_ms{0.0, 0.0}; // beam-axis component
    std::array<double, 2> doppler_mhz{0.0, 0.0};
    std::array<bool, 2> dark{false, false};
    double blockade_mhz = 0.0;
    // Probabilities over {11, 1r, r1, rr}; first slot is the control atom.
    Eigen::Vector4d probabilities = Eigen::Vector4d::Zero();
    std::array<bool, 2> measured_present{false, false};
    bool post_selected = true;
};

// Position spread of a thermal atom in a harmonic trap of the given
// oscillation period: sigma = sqrt(kB*T/m)/omega_trap.
double thermal_sigma(double period_us, double temperature_uk,
                     const PhysicalConstants& consts);

// RMS one-dimensional thermal velocity sqrt(kB*T/m) in m/s.
double thermal_velocity(double temperature_uk, const PhysicalConstants& consts);

// Two-photon Doppler width in MHz. Counterpropagating beams subtract their
// wavenumbers; the copropagating option adds them instead.
double doppler_sigma(double temperature_uk, double wavelength_red_nm,
                     double wavelength_blue_nm, bool copropagating,
                     const PhysicalConstants& consts);

// Effective two-photon wavenumber in rad/m for the same beam geometry.
double effective_wavenumber(double wavelength_red_nm, double wavelength_blue_nm,
                            bool copropagating);

// Peak excitation probability at the non-addressed site: a two-level atom
// driven at ratio*omega while detuned by the differential light shift.
double crosstalk_probability(double omega_mhz, double crosstalk_ratio,
                             double ac_stark_detuning_mhz);

// Coherent evolution over {|11>, |1r>, |r1>, |rr>} with piecewise-constant
// Hamiltonians, one per pulse step, each exponentiated exactly. The addressed
// atom is driven at its sampled Rabi frequency, the other atom at the
// crosstalk ratio with the AC Stark detuning added; the |rr> level carries the
// blockade shift. Returns final probabilities; their sum stays within 1e-9
// of the initial norm.
Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder,
                                double blockade_mhz,
                                const ExperimentConfig& config);

// Same dynamics from an explicit initial state. Throws ConfigError when the
// initial state is not normalized to 1 within 1e-9.
Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder,
                                double blockade_mhz,
                                const ExperimentConfig& config,
                                const Eigen::Vector4cd& initial);

// Cross-check variant: the single |rr> level is replaced by every molecular
// eigenstate, each coupled through its laser overlap. Returns probabilities
// over {11, 1r, r1, all doubly-excited states combined}.
Eigen::Vector4d evolve_two_atom(const PulseSequence& sequence,
                                const ShotDisorder& disorder,
                                const MolecularSpectrum& spectrum,
                                const ExperimentConfig& config);

// Blockade shift as a function of the transverse offset y2-y1. Either a
// constant, or linear interpolation of P2 samples from the pair spectrum
// (clamped beyond the sampled range, symmetric in the sign of the offset).
class BlockadeModel {
public:
    static BlockadeModel fixed(double shift_mhz, double omega_mhz);
    static BlockadeModel from_samples(std::vector<BlockadeSample> samples,
                                      double omega_mhz);

    double p2_at(double dy_um) const;
    double shift_at(double dy_um) const; // MHz

private:
    BlockadeModel() = default;
    bool fixed_ = false;
    double fixed_shift_mhz_ = 0.0;
    double omega_mhz_ = 0.0;
    std::vector<double> dy_um_;
    std::vector<double> p2_;
};

// Spectrum mode evaluates P2 on a uniform transverse grid spanning the
// disorder range and wraps it in an interpolating model; fixed mode ignores
// the geometry. Grid construction is the only expensive part and is skipped
// when sigma_y is zero (single point).
BlockadeModel build_blockade_model(const ExperimentConfig& config,
                                   const QuantumDefectTable& table,
                                   const PhysicalConstants& consts);

// Pair operators for the standard channel set of a given n, built once per
// process and shared. The table and constants of the first call for each n
// are the ones baked in.
const PairOperators& shared_pair_operators(int n, const QuantumDefectTable& table,
                                           const PhysicalConstants& consts);

enum class SequenceKind { fig2, fig2_crosstalk, fig3 };

struct SitePointStats {
    double mean_retention = 0.0;
    double standard_error = 0.0;
};

struct ExperimentPoint {
    double t_us = 0.0;
    std::array<SitePointStats, 2> site{}; // control, target; NaN when absent
    long n_shots = 0;
    long n_postselected = 0;
};

struct ExperimentResult {
    SequenceKind kind = SequenceKind::fig2;
    std::array<bool, 2> site_present{false, false};
    std::vector<ExperimentPoint> points;
};

// One complete shot: disorder sampling, coherent evolution, collapse, loss
// and detection. The RNG stream index makes the draw sequence a pure function
// of (config.seed, stream). 4-state dynamics only; run_experiment switches to
// the molecular basis internally when full_spectrum_dynamics is set.
ShotRecord simulate_shot(const ExperimentConfig& config, SequenceKind kind,
                         double t_us, std::uint64_t stream,
                         const BlockadeModel& blockade,
                         const PhysicalConstants& consts);

// Monte Carlo over the pulse-length grid. fig2 loads only the target atom,
// fig2_crosstalk only the control atom (beams still point at the target),
// fig3 loads both and post-selects on the control reading when configured.
// Retention statistics are per site over kept shots; identical seeds give
// identical results for any shard count.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                SequenceKind kind,
                                const std::vector<double>& t_grid_us,
                                const QuantumDefectTable& table,
                                const PhysicalConstants& consts);

} // namespace rydblock
