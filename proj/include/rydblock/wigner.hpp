#pragma once

namespace rydblock {

// Wigner symbols on doubled-integer arguments (tj = 2j, tm = 2m), evaluated
// by Racah sums in long double. Selection-rule violations return 0; only
// malformed arguments (negative j, 2m-2j parity mismatch) throw.
double wigner_3j_2(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);
double wigner_6j_2(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

// Half-integer convenience wrappers; arguments must be within 1e-9 of an
// integer multiple of 1/2.
double wigner_3j(double j1, double j2, double j3, double m1, double m2, double m3);
double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6);

} // namespace rydblock
