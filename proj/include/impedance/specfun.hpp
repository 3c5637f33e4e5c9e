#pragma once

#include <vector>

#include "impedance/types.hpp"

namespace impedance {

// Orders 0 and 1 of J, Y together; every Hankel evaluation goes through this.
struct Bessel01 {
    cplx j0, j1, y0, y1;
    cplx h0() const { return j0 + kI * y0; }
    cplx h1() const { return j1 + kI * y1; }
};

struct Bessel01Real {
    double j0, j1, y0, y1;
};

Bessel01 bessel01(cplx z);
// Real-argument path used by the kernels when k is real (x > 0).
Bessel01Real bessel01(double x);

cplx hankel0(cplx z);
cplx hankel1(cplx z);

inline constexpr int kBesselMaxOrder = 60;

cplx besselj(int order, cplx z);
// J_0..J_nmax in one backward sweep; out.size() becomes nmax + 1.
void besselj_seq(cplx z, int nmax, std::vector<cplx>& out);
// H_0..H_nmax (first kind) by forward recurrence, which is stable for Y.
void hankel_seq(cplx z, int nmax, std::vector<cplx>& out);

struct SpectralRoot {
    cplx lambda;
    cplx k;
    cplx value;
};

// s = sqrt(lambda^2 - k^2) on the branch s = -i * sqrt_principal(k^2 - lambda^2).
cplx spectral_root_value(cplx lambda, cplx k);
SpectralRoot spectral_root(cplx lambda, cplx k);

}  // namespace impedance
