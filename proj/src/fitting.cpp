#include "rydblock/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Model {
    const Eigen::VectorXd& t;
    const Eigen::VectorXd& y;

    // Residuals r = model - y and the analytic Jacobian in (a, tau, f).
    double cost(const Eigen::Vector3d& p, Eigen::VectorXd* r,
                Eigen::MatrixXd* jac) const {
        const double a = p(0), tau = p(1), f = p(2);
        double total = 0.0;
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double env = std::exp(-t(i) / tau);
            const double phase = 2.0 * kPi * f * t(i);
            const double c = std::cos(phase);
            const double ri = (1.0 - a) + a * env * c - y(i);
            total += ri * ri;
            if (r != nullptr) {
                (*r)(i) = ri;
            }
            if (jac != nullptr) {
                (*jac)(i, 0) = -1.0 + env * c;
                (*jac)(i, 1) = a * env * (t(i) / (tau * tau)) * c;
                (*jac)(i, 2) = -a * env * 2.0 * kPi * t(i) * std::sin(phase);
            }
        }
        return total;
    }
};

double initial_frequency(const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
    std::vector<double> sorted(t.data(), t.data() + t.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double d = sorted[i] - sorted[i - 1];
        if (d > 0.0) {
            gaps.push_back(d);
        }
    }
    if (gaps.empty()) {
        throw ConfigError("all pulse lengths are identical");
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    const double dt_med = gaps[gaps.size() / 2];
    const double span = sorted.back() - sorted.front();

    // Discrete periodogram of the demeaned data; the grid runs from the
    // slowest resolvable oscillation up to the sampling limit.
    const double f_lo = std::max(0.5 / span, 0.01);
    const double f_hi = 0.5 / dt_med;
    if (!(f_hi > f_lo)) {
        return f_lo;
    }
    const double mean = y.mean();
    const int points = 512;
    double best_f = f_lo;
    double best_power = -1.0;
    for (int k = 0; k < points; ++k) {
        const double f = f_lo + (f_hi - f_lo) * k / (points - 1);
        std::complex<double> sum(0.0, 0.0);
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double phase = -2.0 * kPi * f * t(i);
            sum += (y(i) - mean) * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        const double power = std::norm(sum);
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    return best_f;
}

double initial_tau(const Eigen::VectorXd& t, const Eigen::VectorXd& y, double a0) {
    // Envelope size in the two halves of the record; their ratio gives the
    // decay. Indices follow time order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(t.size()));
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return t(a) < t(b); });
    const std::size_t half = order.size() / 2;
    double dev1 = 0.0, dev2 = 0.0, t1 = 0.0, t2 = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double dev = std::abs(y(order[i]) - (1.0 - a0));
        if (i < half) {
            dev1 += dev;
            t1 += t(order[i]);
        } else {
            dev2 += dev;
            t2 += t(order[i]);
        }
    }
    dev1 /= static_cast<double>(half);
    t1 /= static_cast<double>(half);
    dev2 /= static_cast<double>(order.size() - half);
    t2 /= static_cast<double>(order.size() - half);

    const double span = t(order.back()) - t(order.front());
    double tau0 = span;  // no visible decay
    if (dev2 > 0.0 && dev1 > dev2) {
        tau0 = (t2 - t1) / std::log(dev1 / dev2);
    }
    return std::clamp(tau0, 0.1, 100.0 * std::max(span, 1.0));
}

}  // namespace

DampedRabiFit fit_damped_rabi(const Eigen::VectorXd& t_us,
                              const Eigen::VectorXd& population) {
    if (t_us.size() != population.size()) {
        throw ConfigError("time and population arrays differ in length: " +
                          std::to_string(t_us.size()) + " vs " +
                          std::to_string(population.size()));
    }
    const Eigen::Index n = t_us.size();
    if (n < 4) {
        throw ConfigError("need at least 4 samples to fit 3 parameters, got " +
                          std::to_string(n));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(t_us(i)) || !std::isfinite(population(i))) {
            throw ConfigError("fit input contains non-finite values");
        }
        if (t_us(i) < 0.0) {
            throw ConfigError("pulse lengths must be non-negative, got " +
                              fmt(t_us(i)));
        }
    }
    const double spread = population.maxCoeff() - population.minCoeff();
    if (spread < 1e-12) {
        throw FitError("population data are constant, no oscillation to fit");
    }

    const Model model{t_us, population};
    Eigen::Vector3d p;
    p(0) = 0.5 * spread;
    p(2) = initial_frequency(t_us, population);
    p(1) = initial_tau(t_us, population, p(0));

    Eigen::VectorXd r(n);
    Eigen::MatrixXd jac(n, 3);
    double cost = model.cost(p, &r, &jac);
    double lambda = 1e-3;
    int iterations = 0;
    for (; iterations < 200; ++iterations) {
        const Eigen::Matrix3d jtj = jac.transpose() * jac;
        const Eigen::Vector3d jtr = jac.transpose() * r;
        Eigen::Matrix3d damped = jtj;
        for (int k = 0; k < 3; ++k) {
            damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
        }
        const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
        if (!step.allFinite()) {
            lambda *= 10.0;
            if (lambda > 1e12) {
                break;
            }
            continue;
        }
        const Eigen::Vector3d candidate = p + step;
        const double new_cost = candidate(1) > 0.0 && candidate(2) > 0.0
                                    ? model.cost(candidate, nullptr, nullptr)
                                    : std::numeric_limits<double>::infinity();
        if (new_cost < cost) {
            p = candidate;
            const double improvement = cost - new_cost;
            cost = model.cost(p, &r, &jac);
            lambda = std::max(lambda / 10.0, 1e-12);
            if (step.norm() < 1e-12 * (1.0 + p.norm()) ||
                improvement < 1e-14 * (1.0 + cost)) {
                ++iterations;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                break;
            }
        }
    }

    if (!(p(1) > 0.0) || !(p(2) > 0.0) || !p.allFinite()) {
        throw FitError("fit did not converge to positive decay time and frequency");
    }
    DampedRabiFit out;
    out.amplitude = p(0);
    out.tau_us = p(1);
    out.omega_mhz = p(2);
    out.rms_residual = std::sqrt(cost / static_cast<double>(n));
    out.iterations = iterations;
    return out;
}

} // namespace rydblock
