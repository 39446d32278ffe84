#pragma once

#include <Eigen/Dense>

namespace rydblock {

// Least-squares parameters of a damped oscillation around its mean,
//   y(t) = (1 - a) + a * exp(-t/tau) * cos(2*pi*f*t),
// the retention signal of a resonantly driven atom read out after time t.
// omega_mhz is f, the Rabi frequency in linear MHz.
struct DampedRabiFit {
    double amplitude = 0.0;
    double tau_us = 0.0;
    double omega_mhz = 0.0;
    double rms_residual = 0.0;
    int iterations = 0;
};

// Levenberg-Marquardt with an analytic Jacobian. Starting values come from
// the data itself: half the peak-to-peak range for the amplitude, the
// discrete periodogram maximum for the frequency (valid for non-uniform
// sampling), and the envelope decay between the two halves of the record for
// tau. Throws ConfigError for fewer than four samples, mismatched lengths, or
// non-finite input; throws FitError when the data carry no oscillation to fit
// or the iteration fails to produce positive tau and frequency.
DampedRabiFit fit_damped_rabi(const Eigen::VectorXd& t_us,
                              const Eigen::VectorXd& population);

} // namespace rydblock
