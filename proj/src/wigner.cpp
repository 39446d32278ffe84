#include "rydblock/wigner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "rydblock/errors.hpp"

namespace rydblock {
namespace {

// Factorials up to 320! stay well inside long double range (~1e4932);
// enough for j up to ~75 in the 6j perimeter terms.
constexpr int kMaxFact = 321;

const long double* factorial_table() {
    static const auto table = [] {
        static std::array<long double, kMaxFact> f;
        f[0] = 1.0L;
        for (int i = 1; i < kMaxFact; ++i) f[i] = f[i - 1] * i;
        return f.data();
    }();
    return table;
}

long double fact(int n) {
    if (n < 0 || n >= kMaxFact)
        throw ConfigError("wigner: factorial argument out of range: " + std::to_string(n));
    return factorial_table()[n];
}

bool triangle_ok(int ta, int tb, int tc) {
    return (ta + tb + tc) % 2 == 0 && tc >= std::abs(ta - tb) && tc <= ta + tb;
}

// sqrt of the triangle coefficient Delta(abc); arguments doubled.
long double sqrt_delta(int ta, int tb, int tc) {
    return sqrtl(fact((ta + tb - tc) / 2) * fact((ta - tb + tc) / 2) *
                 fact((-ta + tb + tc) / 2) / fact((ta + tb + tc) / 2 + 1));
}

int parity(int doubled_exponent) {
    // (-1)^(doubled_exponent/2); exponent must be even for a real symbol.
    return ((doubled_exponent / 2) % 2 == 0) ? 1 : -1;
}

void check_j(int tj, const char* which) {
    if (tj < 0) throw ConfigError(std::string("wigner: negative angular momentum in ") + which);
}

} // namespace

double wigner_3j_2(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
    check_j(tj1, "3j");
    check_j(tj2, "3j");
    check_j(tj3, "3j");
    for (auto [tj, tm] : {std::pair{tj1, tm1}, {tj2, tm2}, {tj3, tm3}}) {
        if ((tj - tm) % 2 != 0)
            throw ConfigError("wigner_3j: m must differ from j by an integer");
        if (std::abs(tm) > tj) return 0.0;
    }
    if (tm1 + tm2 + tm3 != 0) return 0.0;
    if (!triangle_ok(tj1, tj2, tj3)) return 0.0;

    // Racah sum; every factorial argument below is an integer for valid input.
    const int a1 = (tj1 + tj2 - tj3) / 2;
    const int a2 = (tj1 - tm1) / 2;
    const int a3 = (tj2 + tm2) / 2;
    const int b1 = (tj2 - tj3 - tm1) / 2;
    const int b2 = (tj1 - tj3 + tm2) / 2;
    const int tmin = std::max({0, b1, b2});
    const int tmax = std::min({a1, a2, a3});
    if (tmin > tmax) return 0.0;

    long double sum = 0.0L;
    for (int t = tmin; t <= tmax; ++t) {
        const long double den = fact(t) * fact(a1 - t) * fact(a2 - t) * fact(a3 - t) *
                                fact(t - b1) * fact(t - b2);
        sum += ((t % 2 == 0) ? 1.0L : -1.0L) / den;
    }
    const long double pref =
        sqrt_delta(tj1, tj2, tj3) *
        sqrtl(fact((tj1 + tm1) / 2) * fact((tj1 - tm1) / 2) * fact((tj2 + tm2) / 2) *
              fact((tj2 - tm2) / 2) * fact((tj3 + tm3) / 2) * fact((tj3 - tm3) / 2));
    return static_cast<double>(parity(tj1 - tj2 - tm3) * pref * sum);
}

double wigner_6j_2(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
    for (int tj : {tj1, tj2, tj3, tj4, tj5, tj6}) check_j(tj, "6j");
    if (!triangle_ok(tj1, tj2, tj3) || !triangle_ok(tj1, tj5, tj6) ||
        !triangle_ok(tj4, tj2, tj6) || !triangle_ok(tj4, tj5, tj3))
        return 0.0;

    const int p1 = (tj1 + tj2 + tj3) / 2;
    const int p2 = (tj1 + tj5 + tj6) / 2;
    const int p3 = (tj4 + tj2 + tj6) / 2;
    const int p4 = (tj4 + tj5 + tj3) / 2;
    const int q1 = (tj1 + tj2 + tj4 + tj5) / 2;
    const int q2 = (tj2 + tj3 + tj5 + tj6) / 2;
    const int q3 = (tj1 + tj3 + tj4 + tj6) / 2;
    const int tmin = std::max({p1, p2, p3, p4});
    const int tmax = std::min({q1, q2, q3});
    if (tmin > tmax) return 0.0;

    long double sum = 0.0L;
    for (int t = tmin; t <= tmax; ++t) {
        const long double den = fact(t - p1) * fact(t - p2) * fact(t - p3) * fact(t - p4) *
                                fact(q1 - t) * fact(q2 - t) * fact(q3 - t);
        sum += ((t % 2 == 0) ? 1.0L : -1.0L) * fact(t + 1) / den;
    }
    const long double pref = sqrt_delta(tj1, tj2, tj3) * sqrt_delta(tj1, tj5, tj6) *
                             sqrt_delta(tj4, tj2, tj6) * sqrt_delta(tj4, tj5, tj3);
    return static_cast<double>(pref * sum);
}

namespace {

int to_doubled(double x, const char* what) {
    const double doubled = 2.0 * x;
    const double rounded = std::round(doubled);
    if (std::abs(doubled - rounded) > 1e-9)
        throw ConfigError(std::string("wigner: ") + what + " must be integer or half-integer");
    return static_cast<int>(rounded);
}

} // namespace

double wigner_3j(double j1, double j2, double j3, double m1, double m2, double m3) {
    return wigner_3j_2(to_doubled(j1, "j1"), to_doubled(j2, "j2"), to_doubled(j3, "j3"),
                       to_doubled(m1, "m1"), to_doubled(m2, "m2"), to_doubled(m3, "m3"));
}

double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6) {
    return wigner_6j_2(to_doubled(j1, "j1"), to_doubled(j2, "j2"), to_doubled(j3, "j3"),
                       to_doubled(j4, "j4"), to_doubled(j5, "j5"), to_doubled(j6, "j6"));
}

} // namespace rydblock
