#include <doctest.h>

#include <vector>

#include "impedance/specfun.hpp"

using namespace impedance;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

struct RealRow {
    double x, j0, j1, y0, y1;
};

// Reference values from mpmath at 30 digits.
const RealRow kReal[] = {
    {1e-08, 0.999999999999999975, 5.00000000000000004e-9, -11.8007738771795308, -63661977.2367581936},
    {0.01, 0.999975000156249566, 0.00499993750026041623, -3.00545563708364594, -63.678596282060655},
    {0.5, 0.938469807240812904, 0.242268457674873886, -0.444518733506706557, -1.47147239267024307},
    {1, 0.765197686557966551, 0.440050585744933516, 0.088256964215676958, -0.781212821300288717},
    {2, 0.223890779141235668, 0.576724807756873387, 0.51037567264974512, -0.107032431540937547},
    {3.9, -0.401826014887639907, -0.0272440396207798912, 0.0233759081987189638, 0.407820019526537904},
    {4.1, -0.38866967983585372, -0.103273257747338573, -0.056094626606344482, 0.384594034818916592},
    {10, -0.245935764451348335, 0.0434727461688614367, 0.0556711672835993914, 0.249015424206953884},
    {24.9, 0.0832459683530154901, -0.134855699531408869, -0.136499183996765235, -0.0860025575955542525},
    {25.1, 0.108275671499949452, -0.114634784134422567, -0.116767707638036947, -0.110622233227830988},
    {100, 0.0199858503042231224, -0.077145352014112158, -0.0772443133650831523, -0.0203723120027597933},
    {1e4, -0.00709616035338880148, 0.00364745075552958034, 0.00364780555898660589, 0.00709634275253649514},
};

struct ComplexRow {
    cplx z, h0, h1;
};

const ComplexRow kComplex[] = {
    {{1.0, 1.0}, {0.227449894802294755, -0.0510554586730896181}, {-0.0156406690699807721, -0.292666506764257448}},
    {{3.0, 0.5}, {-0.137254512470499443, 0.237462296864717233}, {0.224907235145075748, 0.179246758480891824}},
    {{10.0, 2.0}, {-0.0319970365043221137, 0.0106254415930430978}, {0.00921775048406408094, 0.0328428263523922608}},
    {{30.0, 3.0}, {-0.00457199963239006726, -0.00560235627868896094}, {-0.0056876491327662696, 0.00448788161176682461}},
    {{0.3, 0.2}, {0.577249244166039669, -0.724570752141566331}, {-0.785430648362112698, -1.56540998193164328}},
};

}  // namespace

TEST_CASE("H0(1) and H1(1) match the tabulated values") {
    CHECK(rel(hankel0(1.0), {0.765197686558, 0.088256964216}) < 1e-11);
    CHECK(rel(hankel1(1.0), {0.440050585745, -0.781212821300}) < 1e-11);
}

TEST_CASE("real-argument J0 J1 Y0 Y1 across series and asymptotic ranges") {
    for (const RealRow& r : kReal) {
        CAPTURE(r.x);
        const Bessel01Real b = bessel01(r.x);
        CHECK(std::abs(b.j0 - r.j0) <= 1e-14 * std::max(1.0, std::abs(r.j0)) + 1e-15);
        CHECK(std::abs(b.j1 - r.j1) <= 1e-14 * std::max(1.0, std::abs(r.j1)) + 1e-15);
        CHECK(std::abs(b.y0 - r.y0) <= 1e-14 * std::max(1.0, std::abs(r.y0)) + 1e-15);
        CHECK(std::abs(b.y1 - r.y1) <= 1e-14 * std::max(1.0, std::abs(r.y1)) + 1e-15);
        // The complex path agrees with the real one on the positive axis.
        const Bessel01 c = bessel01(cplx(r.x, 0.0));
        CHECK(std::abs(c.h0() - cplx(b.j0, b.y0)) <= 1e-13 * std::max(1.0, std::abs(c.h0())));
    }
}

TEST_CASE("complex-argument Hankel functions") {
    for (const ComplexRow& r : kComplex) {
        CAPTURE(r.z);
        CHECK(rel(hankel0(r.z), r.h0) < 1e-13);
        CHECK(rel(hankel1(r.z), r.h1) < 1e-13);
    }
}

TEST_CASE("Wronskian J1 Y0 - J0 Y1 = 2/(pi x)") {
    for (double x = 0.05; x < 60.0; x *= 1.37) {
        const Bessel01Real b = bessel01(x);
        CHECK(std::abs((b.j1 * b.y0 - b.j0 * b.y1) * kPi * x / 2.0 - 1.0) < 1e-13);
    }
}

TEST_CASE("J_n sequences, including orders far beyond the argument") {
    std::vector<cplx> v;
    besselj_seq(7.3, 60, v);
    REQUIRE(v.size() == 61u);
    CHECK(rel(v[0], 0.288216947635014399) < 1e-14);
    CHECK(rel(v[5], 0.313706170897309077) < 1e-14);
    CHECK(rel(v[20], 3.80266284668659088e-8) < 1e-13);
    CHECK(rel(v[40], 2.74409291350976918e-26) < 1e-13);
    CHECK(rel(v[60], 5.27689622248257608e-49) < 1e-13);
    besselj_seq(50.0, 60, v);
    CHECK(std::abs(v[0] - 0.055812327669251815) < 1e-14);
    CHECK(std::abs(v[20] + 0.116704352759579737) < 1e-14);
    CHECK(std::abs(v[40] + 0.138176281201161431) < 1e-14);
    CHECK(std::abs(v[60] - 0.00104851959953141805) < 1e-14);
    CHECK(rel(besselj(5, 7.3), 0.313706170897309077) < 1e-14);
}

TEST_CASE("H_n by forward recurrence at a complex argument") {
    std::vector<cplx> h;
    hankel_seq({2.5, 0.7}, 10, h);
    CHECK(rel(h[0], {0.0080333286268230771, 0.241332080528085257}) < 1e-13);
    CHECK(rel(h[3], {-0.0878584328714270576, -0.51316788085938328}) < 1e-13);
    CHECK(rel(h[10], {-4883.12623663646469, 8714.4363214883219}) < 1e-12);
}

TEST_CASE("spectral root branch: positive on the real axis beyond k, -i sqrt below") {
    CHECK(rel(spectral_root_value(5.0, 3.0), 4.0) < 1e-15);
    CHECK(rel(spectral_root_value(0.0, 3.0), cplx(0.0, -3.0)) < 1e-15);
    for (double t = -30.0; t <= 30.0; t += 0.37) {
        const cplx lam(t, -std::tanh(t));
        const cplx s = spectral_root_value(lam, 10.2);
        CHECK(std::abs(s * s - (lam * lam - 10.2 * 10.2)) < 1e-11 * std::max(1.0, std::norm(lam)));
        CHECK(s.real() >= -1e-14);   // exp(-s Y) stays bounded
    }
}
