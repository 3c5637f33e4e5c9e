#include "impedance/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace impedance {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kSqrtHalf = 0.70710678118654752440;

// Below this modulus the ascending series is used, above kAsymptoticCut the
// Hankel expansion; Miller's backward recurrence covers the gap.
constexpr double kSeriesCut = 4.0;
constexpr double kAsymptoticCut = 25.0;

template <class T>
double mag(T z) { return std::abs(z); }

template <class T>
void series01(T z, T& j0, T& j1, T& y0, T& y1) {
    const T q = z * z / 4.0;
    const T half = z / 2.0;
    const T logterm = std::log(half) + kEulerGamma;

    // t0 = (-q)^m/(m!)^2, t1 = (-q)^m/(m!(m+1)!)
    T t0 = 1.0, t1 = 1.0;
    T s_j0 = 1.0, s_j1 = 1.0;
    double harm = 0.0;          // H_m
    T s_y0 = 0.0;               // sum_{m>=1} (-1)^{m+1} H_m q^m/(m!)^2
    T s_y1 = (-2.0 * kEulerGamma + 1.0) * t1;  // (psi(1)+psi(2)) term at m=0
    for (int m = 1; m < 60; ++m) {
        t0 *= -q / double(m * m);
        t1 *= -q / double(m * (m + 1));
        harm += 1.0 / m;
        s_j0 += t0;
        s_j1 += t1;
        s_y0 -= harm * t0;
        const double psi_sum = -2.0 * kEulerGamma + 2.0 * harm + 1.0 / (m + 1);
        s_y1 += psi_sum * t1;
        if (mag(t0) < 1e-18 * mag(s_j0) && mag(t1) < 1e-18 * mag(s_j1)) break;
    }
    j0 = s_j0;
    j1 = half * s_j1;
    y0 = (2.0 / kPi) * (logterm * j0 + s_y0);
    y1 = -2.0 / (kPi * z) + (2.0 / kPi) * (std::log(half) * j1) - (1.0 / kPi) * half * s_y1;
}

// Backward recurrence for J_n normalised by J_0 + 2 sum J_{2k} = 1, then the
// Neumann series for Y_0 and its derivative for Y_1.
template <class T>
void miller01(T z, T& j0, T& j1, T& y0, T& y1) {
    int nstart = static_cast<int>(mag(z)) + 32;
    if (nstart % 2) ++nstart;
    T fp1 = 0.0, f = 1e-30;
    T norm = 0.0;
    // Accumulators carry unnormalised J values.
    T sy0 = 0.0;   // sum (-1)^k J_{2k}/k
    T sy1 = 0.0;   // sum (-1)^k (J_{2k-1} - J_{2k+1})/k
    T f1 = 0.0;
    const T two_over_z = 2.0 / z;
    // f currently holds J_nstart.
    for (int n = nstart; n >= 1; --n) {
        T fm1 = double(n) * two_over_z * f - fp1;  // J_{n-1}
        if (n % 2 == 0) {
            const int kk = n / 2;
            const double sgn = (kk % 2) ? -1.0 : 1.0;
            norm += 2.0 * f;
            sy0 += sgn * f / double(kk);
            // (J_{2k-1} - J_{2k+1})/k, here J_{2k-1}=fm1 and J_{2k+1}=fp1
            sy1 += sgn * (fm1 - fp1) / double(kk);
        }
        if (n == 1) f1 = f;
        fp1 = f;
        f = fm1;
        if (mag(f) > 1e250) {
            const double s = 1e-250;
            f *= s; fp1 *= s; norm *= s; sy0 *= s; sy1 *= s; f1 *= s;
        }
    }
    norm += f;
    j0 = f / norm;
    j1 = f1 / norm;
    const T lg = std::log(z / 2.0) + kEulerGamma;
    y0 = (2.0 / kPi) * lg * j0 - (4.0 / kPi) * (sy0 / norm);
    y1 = -(2.0 / kPi) * j0 / z + (2.0 / kPi) * lg * j1 + (2.0 / kPi) * (sy1 / norm);
}

// P, Q of the Hankel asymptotic expansion for orders 0 and 1.
template <class T>
void asymptotic_pq(T z, T& p0, T& q0, T& p1, T& q1) {
    double a0 = 1.0, a1 = 1.0;
    T zinv = 1.0 / z;
    T zp = 1.0;
    p0 = 1.0; q0 = 0.0; p1 = 1.0; q1 = 0.0;
    double last = 1e300;
    for (int m = 1; m < 80; ++m) {
        const double odd = double(2 * m - 1) * double(2 * m - 1);
        a0 *= (0.0 - odd) / (8.0 * m);
        a1 *= (4.0 - odd) / (8.0 * m);
        zp *= zinv;
        const T t0 = a0 * zp;
        const T t1 = a1 * zp;
        const double size = std::max(mag(t0), mag(t1));
        if (size > last) break;  // divergence of the asymptotic series
        last = size;
        // i^m splits into even (P) and odd (Q) parts.
        switch (m % 4) {
            case 0: p0 += t0; p1 += t1; break;
            case 1: q0 += t0; q1 += t1; break;
            case 2: p0 -= t0; p1 -= t1; break;
            case 3: q0 -= t0; q1 -= t1; break;
        }
        if (size < 1e-17) break;
    }
}

void check_nonzero(double modulus, const char* who) {
    if (!(modulus > 0.0))
        throw std::domain_error(std::string(who) + ": argument is zero (logarithmic singularity)");
}

}  // namespace

Bessel01Real bessel01(double x) {
    check_nonzero(x, "bessel01");
    if (x < 0.0) throw std::domain_error("bessel01: real path needs x > 0");
    Bessel01Real r{};
    if (x <= kSeriesCut) {
        series01<double>(x, r.j0, r.j1, r.y0, r.y1);
    } else if (x < kAsymptoticCut) {
        miller01<double>(x, r.j0, r.j1, r.y0, r.y1);
    } else {
        double p0, q0, p1, q1;
        asymptotic_pq<double>(x, p0, q0, p1, q1);
        const double c = std::cos(x), s = std::sin(x);
        const double amp = std::sqrt(2.0 / (kPi * x));
        // chi0 = x - pi/4, chi1 = x - 3pi/4 expanded to keep x exact
        const double c0 = (c + s) * kSqrtHalf, s0 = (s - c) * kSqrtHalf;
        const double c1 = (s - c) * kSqrtHalf, s1 = -(s + c) * kSqrtHalf;
        r.j0 = amp * (p0 * c0 - q0 * s0);
        r.y0 = amp * (p0 * s0 + q0 * c0);
        r.j1 = amp * (p1 * c1 - q1 * s1);
        r.y1 = amp * (p1 * s1 + q1 * c1);
    }
    return r;
}

Bessel01 bessel01(cplx z) {
    check_nonzero(std::abs(z), "bessel01");
    Bessel01 r{};
    const double az = std::abs(z);
    if (z.imag() == 0.0 && z.real() > 0.0) {
        const Bessel01Real q = bessel01(z.real());
        return {q.j0, q.j1, q.y0, q.y1};
    }
    if (az <= kSeriesCut) {
        series01<cplx>(z, r.j0, r.j1, r.y0, r.y1);
    } else if (az < kAsymptoticCut) {
        miller01<cplx>(z, r.j0, r.j1, r.y0, r.y1);
    } else {
        cplx p0, q0, p1, q1;
        asymptotic_pq<cplx>(z, p0, q0, p1, q1);
        const cplx c = std::cos(z), s = std::sin(z);
        const cplx amp = std::sqrt(2.0 / (kPi * z));
        const cplx c0 = (c + s) * kSqrtHalf, s0 = (s - c) * kSqrtHalf;
        const cplx c1 = (s - c) * kSqrtHalf, s1 = -(s + c) * kSqrtHalf;
        r.j0 = amp * (p0 * c0 - q0 * s0);
        r.y0 = amp * (p0 * s0 + q0 * c0);
        r.j1 = amp * (p1 * c1 - q1 * s1);
        r.y1 = amp * (p1 * s1 + q1 * c1);
    }
    return r;
}

cplx hankel0(cplx z) {
    check_nonzero(std::abs(z), "hankel0");
    if (std::abs(z) >= kAsymptoticCut && z.imag() != 0.0) {
        // Direct form avoids the J + iY cancellation when Im z is large.
        cplx p0, q0, p1, q1;
        asymptotic_pq<cplx>(z, p0, q0, p1, q1);
        const cplx phase = std::exp(kI * z) * cplx(kSqrtHalf, -kSqrtHalf);
        return std::sqrt(2.0 / (kPi * z)) * (p0 + kI * q0) * phase;
    }
    return bessel01(z).h0();
}

cplx hankel1(cplx z) {
    check_nonzero(std::abs(z), "hankel1");
    if (std::abs(z) >= kAsymptoticCut && z.imag() != 0.0) {
        cplx p0, q0, p1, q1;
        asymptotic_pq<cplx>(z, p0, q0, p1, q1);
        const cplx phase = std::exp(kI * z) * cplx(-kSqrtHalf, -kSqrtHalf);
        return std::sqrt(2.0 / (kPi * z)) * (p1 + kI * q1) * phase;
    }
    return bessel01(z).h1();
}

void besselj_seq(cplx z, int nmax, std::vector<cplx>& out) {
    if (nmax < 0 || nmax > kBesselMaxOrder)
        throw std::domain_error("besselj: order outside 0.." + std::to_string(kBesselMaxOrder));
    out.assign(nmax + 1, cplx(0.0));
    const double az = std::abs(z);
    if (az == 0.0) {
        out[0] = 1.0;
        return;
    }
    if (az < 1e-3) {
        // Three series terms are exact to double precision here.
        const cplx q = z * z / 4.0;
        cplx term = 1.0;
        for (int n = 0; n <= nmax; ++n) {
            if (n > 0) term *= z / (2.0 * n);
            out[n] = term * (1.0 - q / double(n + 1) * (1.0 - q / (2.0 * (n + 2))));
        }
        return;
    }
    int nstart = static_cast<int>(std::max<double>(nmax, az)) + 40 +
                 static_cast<int>(2.0 * std::cbrt(az));
    std::vector<cplx> f(nstart + 2, cplx(0.0));
    f[nstart + 1] = 0.0;
    f[nstart] = 1e-30;
    for (int n = nstart; n >= 1; --n) {
        f[n - 1] = (2.0 * n / z) * f[n] - f[n + 1];
        if (std::abs(f[n - 1]) > 1e250) {
            for (int m = n - 1; m <= nstart; ++m) f[m] *= 1e-250;
        }
    }
    // Normalise against whichever of J0, J1 is larger in modulus.
    const Bessel01 ref = bessel01(z);
    cplx scale;
    if (std::abs(ref.j0) >= std::abs(ref.j1))
        scale = ref.j0 / f[0];
    else
        scale = ref.j1 / f[1];
    for (int n = 0; n <= nmax; ++n) out[n] = f[n] * scale;
}

cplx besselj(int order, cplx z) {
    if (order < 0 || order > kBesselMaxOrder)
        throw std::domain_error("besselj: order outside 0.." + std::to_string(kBesselMaxOrder));
    if (order <= 1 && std::abs(z) > 0.0) {
        const Bessel01 b = bessel01(z);
        return order == 0 ? b.j0 : b.j1;
    }
    std::vector<cplx> seq;
    besselj_seq(z, order, seq);
    return seq[order];
}

void hankel_seq(cplx z, int nmax, std::vector<cplx>& out) {
    if (nmax < 0 || nmax > kBesselMaxOrder)
        throw std::domain_error("hankel_seq: order outside 0.." + std::to_string(kBesselMaxOrder));
    out.resize(nmax + 1);
    if (std::abs(z) >= kAsymptoticCut && z.imag() != 0.0) {
        out[0] = hankel0(z);
        if (nmax == 0) return;
        out[1] = hankel1(z);
    } else {
        const Bessel01 b = bessel01(z);
        out[0] = b.h0();
        if (nmax == 0) return;
        out[1] = b.h1();
    }
    for (int n = 1; n < nmax; ++n) out[n + 1] = (2.0 * n / z) * out[n] - out[n - 1];
}

cplx spectral_root_value(cplx lambda, cplx k) {
    cplx w = k * k - lambda * lambda;
    // A signed zero imaginary part would flip the principal root on the cut.
    if (w.imag() == 0.0) w = cplx(w.real(), 0.0);
    return -kI * std::sqrt(w);
}

SpectralRoot spectral_root(cplx lambda, cplx k) {
    return {lambda, k, spectral_root_value(lambda, k)};
}

}  // namespace impedance
