#include "memsim/analysis.hpp"
#include "support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace memsim;
using Catch::Approx;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;

OscillatorDesign equal_design(double m, double c, double k = 29.0) {
    OscillatorDesign d;
    d.m1 = d.m2 = d.m3 = m;
    d.c = c;
    d.k = k;
    d.r4 = 10e3;
    return d;
}

bool close(cd a, cd b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

/// Node voltages of a three-section series-C / shunt-R ladder driven by 1 V,
/// solved by nodal analysis at angular frequency w.
std::array<cd, 3> ladder_nodes(double r, double c, double w) {
    const cd y_c(0.0, w * c);
    const cd g = 1.0 / r;
    // rows: KCL at n1, n2, n3 with V_in = 1
    cd a[3][3] = {{2.0 * y_c + g, -y_c, 0.0}, {-y_c, 2.0 * y_c + g, -y_c}, {0.0, -y_c, y_c + g}};
    cd b[3] = {y_c, 0.0, 0.0};
    // Gaussian elimination; the matrix is diagonally dominant
    for (int col = 0; col < 3; ++col) {
        for (int row = col + 1; row < 3; ++row) {
            const cd f = a[row][col] / a[col][col];
            for (int k = col; k < 3; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    std::array<cd, 3> v;
    for (int row = 2; row >= 0; --row) {
        cd s = b[row];
        for (int k = row + 1; k < 3; ++k) s -= a[row][k] * v[k];
        v[row] = s / a[row][row];
    }
    return v;
}

}  // namespace

TEST_CASE("gain alpha") {
    CHECK(gain_alpha(1.0, 1.0, 1.0) == 29.0);
    CHECK(gain_alpha(8050.0, 8050.0, 8050.0) == 29.0);
    CHECK(gain_alpha(1.0, 2.0, 4.0) == 26.5);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int k = 0; k < 1000; ++k) {
        const double m1 = u(rng) * 1e3, m2 = u(rng) * 1e3, m3 = u(rng) * 1e3, s = u(rng);
        CHECK(gain_alpha(s * m1, s * m2, s * m3) == Approx(gain_alpha(m1, m2, m3)).epsilon(1e-14));
    }
}

TEST_CASE("characteristic polynomial coefficients") {
    const auto e = char_poly_coeffs(equal_design(1e4, 1e-8, 3.0));
    const double mc = 1e4 * 1e-8;
    CHECK(e.a == Approx(mc * mc * mc * 4.0).epsilon(1e-14));
    CHECK(e.b == Approx(6.0 * mc * mc).epsilon(1e-14));
    CHECK(e.c == Approx(6.0 * mc).epsilon(1e-14));
    CHECK(e.d == 1.0);

    OscillatorDesign d = equal_design(1.0, 1e-6);
    d.m1 = 1e3;
    d.m2 = 2e3;
    d.m3 = 3e3;
    CHECK(char_poly_coeffs(d).b == Approx(1.8e-5).epsilon(1e-14));

    d.k = -1.0;
    CHECK(char_poly_coeffs(d).a == 0.0);
    try {
        (void)cubic_roots(char_poly_coeffs(d));
        FAIL("expected degenerate leading coefficient");
    } catch (const AnalysisError& err) {
        CHECK(err.kind() == AnalysisError::Kind::degenerate_leading_coefficient);
    }
}

TEST_CASE("cubic roots: closed cases") {
    const auto unity = cubic_roots({1.0, 0.0, 0.0, -1.0});
    CHECK(close(unity[0], 1.0, 1e-14));
    CHECK(close(unity[1], cd(-0.5, std::sqrt(3.0) / 2.0), 1e-14));
    CHECK(close(unity[2], cd(-0.5, -std::sqrt(3.0) / 2.0), 1e-14));

    const auto triple = cubic_roots({1.0, 3.0, 3.0, 1.0});
    for (const auto& r : triple) CHECK(close(r, -1.0, 1e-6));

    const auto real3 = cubic_roots({2.0, -12.0, 22.0, -12.0});  // 2(s-1)(s-2)(s-3)
    CHECK(close(real3[0], 1.0, 1e-12));
    CHECK(close(real3[1], 2.0, 1e-12));
    CHECK(close(real3[2], 3.0, 1e-12));
}

TEST_CASE("Vieta consistency on random cubics") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 10000; ++k) {
        CubicCoeffs p{u(rng), u(rng), u(rng), u(rng)};
        if (std::abs(p.a) < 1e-3) p.a = 1.0;
        const auto r = cubic_roots(p);
        const cd sum = r[0] + r[1] + r[2];
        const cd pairs = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
        const cd prod = r[0] * r[1] * r[2];
        REQUIRE(close(sum, -p.b / p.a, 1e-8));
        REQUIRE(close(pairs, p.c / p.a, 1e-8));
        REQUIRE(close(prod, -p.d / p.a, 1e-8));
    }
}

TEST_CASE("root locus crossing on the equal-M cubic") {
    const double m = 1e4, c = 1e-8;
    const double kc = critical_gain(equal_design(m, c));
    CHECK(1.0 + kc == Approx(36.0).epsilon(1e-8));
    const auto roots = cubic_roots(char_poly_coeffs(equal_design(m, c, kc)));
    // conjugate pair sits on the imaginary axis at 1/(MC sqrt 6)
    CHECK(std::abs(roots[1].real()) <= 1e-6 * std::abs(roots[1].imag()));
    CHECK(std::abs(roots[1].imag()) == Approx(1.0 / (m * c * std::sqrt(6.0))).epsilon(1e-8));
    CHECK(max_real_part(cubic_roots(char_poly_coeffs(equal_design(m, c, 0.9 * kc))) ) < 0.0);
    CHECK(max_real_part(cubic_roots(char_poly_coeffs(equal_design(m, c, 1.1 * kc))) ) > 0.0);
}

TEST_CASE("oscillation frequency") {
    CHECK(osc_frequency(equal_design(1e4, 1e-8)) == Approx(649.747334).epsilon(1e-8));
    CHECK(osc_frequency(equal_design(1e4, 1e-8)) == Approx(1.0 / (2.0 * pi * 1e4 * 1e-8 * std::sqrt(6.0))).epsilon(1e-15));
    OscillatorDesign d = equal_design(1.0, 1e-8);
    d.m1 = 3e3;
    d.m2 = 7e3;
    d.m3 = 11e3;
    const double f = osc_frequency(d);
    for (double s : {0.01, 3.0, 250.0}) {
        OscillatorDesign e = d;
        e.m1 *= s;
        e.m2 *= s;
        e.m3 *= s;
        e.c /= s;
        CHECK(osc_frequency(e) == Approx(f).epsilon(1e-14));
    }
}

TEST_CASE("state matrix as printed") {
    OscillatorDesign d = equal_design(1e4, 1e-8);
    d.r4 = 1e-300;  // m -> 0
    const auto a0 = state_matrix(d);
    d.r4 = 1e4;  // m = 1
    const auto a1 = state_matrix(d);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            CHECK(std::isfinite(a1[r][c]));
            // entries with m in them move, the rest halve
            if ((r == 0 && c > 0) || (r == 1 && c == 2)) continue;
            CHECK(a1[r][c] == Approx(0.5 * a0[r][c]).epsilon(1e-14));
        }
    }
    CHECK(a1[2][0] == a1[2][1]);
    CHECK(a1[2][1] == a1[2][2]);
}

TEST_CASE("eigenvalues of 3x3 matrices") {
    const auto id = eigenvalues_3x3({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    for (const auto& z : id) CHECK(close(z, 1.0, 1e-6));
    const auto diag = eigenvalues_3x3({{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}});
    CHECK(close(diag[0], 1.0, 1e-12));
    CHECK(close(diag[1], 2.0, 1e-12));
    CHECK(close(diag[2], 3.0, 1e-12));
    const auto rot = eigenvalues_3x3({{{0, -1, 0}, {1, 0, 0}, {0, 0, 2}}});
    CHECK(close(rot[0], 2.0, 1e-12));
    CHECK(close(rot[1], cd(0.0, 1.0), 1e-12));
    CHECK(close(rot[2], cd(0.0, -1.0), 1e-12));
}

TEST_CASE("eigenvalue residuals on random matrices") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 2000; ++trial) {
        StateMatrix a;
        double scale = 0.0;
        for (auto& row : a) {
            for (double& v : row) {
                v = u(rng);
                scale = std::max(scale, std::abs(v));
            }
        }
        for (const cd& l : eigenvalues_3x3(a)) {
            cd m[3][3];
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) m[r][c] = a[r][c] - (r == c ? l : 0.0);
            }
            const cd det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            REQUIRE(std::abs(det) <= 1e-8 * scale * scale * scale);
        }
    }
}

TEST_CASE("design report flags the two gain conditions") {
    const DesignReport r = analyze_design(equal_design(1e4, 1e-8));
    CHECK(r.alpha == 29.0);
    CHECK(1.0 + r.critical_k == Approx(36.0).epsilon(1e-8));
    CHECK(r.gain_conditions_diverge);
    CHECK(r.note.find("29") != std::string::npos);
    REQUIRE(r.roots);
}

TEST_CASE("fft matches a brute-force DFT") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 512u}) {
        std::vector<cd> x(n);
        for (auto& v : x) v = {u(rng), u(rng)};
        const auto fast = fft_radix2(x);
        const auto slow = testing::naive_dft(x);
        for (std::size_t k = 0; k < n; ++k) REQUIRE(std::abs(fast[k] - slow[k]) <= 1e-10 * static_cast<double>(n));
    }
    CHECK_THROWS_AS(fft_radix2(std::vector<cd>(6)), AnalysisError);
}

TEST_CASE("Parseval") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cd> x(4096);
    double time_energy = 0.0;
    for (auto& v : x) {
        v = u(rng);
        time_energy += std::norm(v);
    }
    double freq_energy = 0.0;
    for (const auto& v : fft_radix2(x)) freq_energy += std::norm(v);
    CHECK(freq_energy / 4096.0 == Approx(time_energy).epsilon(1e-9));
}

TEST_CASE("fft linearity") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cd> x(1024), y(1024), z(1024);
    const double a = 2.5, b = -0.75;
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = u(rng);
        y[k] = u(rng);
        z[k] = a * x[k] + b * y[k];
    }
    const auto fx = fft_radix2(x), fy = fft_radix2(y), fz = fft_radix2(z);
    for (std::size_t k = 0; k < z.size(); ++k) REQUIRE(std::abs(fz[k] - (a * fx[k] + b * fy[k])) <= 1e-12 * 1024);
}

TEST_CASE("spectrum of simple signals") {
    // N = 4096, fs = 409.6 kHz -> bin width 100 Hz, 1 kHz = bin 10
    const std::size_t n = 4096;
    const double h = 1.0 / 409.6e3;
    const auto dc = fft(std::vector<double>(1024, 1.0), h, Window::none);
    CHECK(dc.magnitude[0] == Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < dc.magnitude.size(); ++k) REQUIRE(dc.magnitude[k] < 1e-12);

    const auto tone = testing::sampled(n, h, [](double t) { return std::sin(2.0 * pi * 1e3 * t); });
    for (Window w : {Window::none, Window::hann}) {
        const auto s = fft(tone, h, w);
        CHECK(s.bin_width() == Approx(100.0).epsilon(1e-12));
        const auto peak = std::max_element(s.magnitude.begin(), s.magnitude.end()) - s.magnitude.begin();
        CHECK(s.freq[static_cast<std::size_t>(peak)] == Approx(1000.0).epsilon(1e-12));
        CHECK(s.magnitude[static_cast<std::size_t>(peak)] == Approx(1.0).epsilon(1e-9));
        CHECK(dominant_frequency(s) == Approx(1000.0).epsilon(1e-9));
    }

    // square wave with exactly 512 samples per period, 8 periods
    const double hs = 1.0 / 512e3;
    std::vector<double> square(n);
    for (std::size_t k = 0; k < n; ++k) square[k] = (k % 512) < 256 ? 1.0 : -1.0;
    const auto sq = fft(square, hs, Window::none);
    CHECK(harmonic_ratio(sq, 1e3, 3) == Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(sq.magnitude[sq.nearest_bin(1e3)] == Approx(4.0 / pi).epsilon(0.01));
    for (std::size_t k = 0; k < sq.magnitude.size(); ++k) REQUIRE(sq.magnitude[k] >= 0.0);
}

TEST_CASE("dominant frequency between bins") {
    const std::size_t n = 8192;
    const double h = 1e-5;  // bin width 12.2 Hz
    for (double f : {1006.1, 1234.5, 777.0}) {
        const auto x = testing::sampled(n, h, [f](double t) { return 0.3 + std::cos(2.0 * pi * f * t); });
        const double got = dominant_frequency(fft(x, h, Window::hann));
        CHECK(got == Approx(f).epsilon(0.003));
    }
    CHECK_THROWS_AS(dominant_frequency(fft(std::vector<double>(256, 0.0), h, Window::hann)), AnalysisError);
    CHECK_THROWS_AS(dominant_frequency(fft(std::vector<double>(256, 2.0), h, Window::hann)), AnalysisError);
}

TEST_CASE("phase shift") {
    const std::size_t n = 16384;
    const double h = 1e-6, f = 1e3;
    const auto s = testing::sampled(n, h, [f](double t) { return std::sin(2.0 * pi * f * t); });
    const auto c = testing::sampled(n, h, [f](double t) { return std::cos(2.0 * pi * f * t); });
    CHECK(phase_shift(s, s, h, f) == Approx(0.0).margin(1e-9));
    CHECK(phase_shift(s, c, h, f) == Approx(90.0).epsilon(1e-3));
    CHECK(phase_shift(c, s, h, f) == Approx(-90.0).epsilon(1e-3));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-179.0, 179.0);
    for (int k = 0; k < 50; ++k) {
        const double deg = u(rng);
        const auto b = testing::sampled(n, h, [&](double t) { return 0.2 * std::sin(2.0 * pi * f * t + deg * pi / 180.0); });
        const double ab = phase_shift(s, b, h, f);
        CHECK(ab == Approx(deg).margin(0.05));
        CHECK(phase_shift(b, s, h, f) == Approx(-ab).margin(1e-9));
    }
}

TEST_CASE("ladder arms at the oscillation frequency") {
    // analytic RC ladder sampled as waveforms; phases are measured, not computed
    const double r = 8050.0, c = 10e-9;
    const double f = 1.0 / (2.0 * pi * r * c * std::sqrt(6.0));
    const auto v = ladder_nodes(r, c, 2.0 * pi * f);
    const double h = 1.0 / (f * 64.0);  // 64 samples per period, bin-centered over 256 periods
    const std::size_t n = 32768;
    auto wave = [&](cd phasor) {
        return testing::sampled(n, h, [&](double t) { return std::abs(phasor) * std::cos(2.0 * pi * f * t + std::arg(phasor)); });
    };
    const auto w_in = wave(1.0), w1 = wave(v[0]), w2 = wave(v[1]), w3 = wave(v[2]);
    const double p1 = phase_shift(w_in, w1, h, f);
    const double p2 = phase_shift(w1, w2, h, f);
    const double p3 = phase_shift(w2, w3, h, f);
    CHECK(std::abs(p1 + p2 + p3) == Approx(180.0).margin(5.0));
    // classic ladder: the transfer is -1/29 at this frequency
    CHECK(std::abs(v[2]) == Approx(1.0 / 29.0).epsilon(1e-12));
    CHECK(std::arg(v[2]) == Approx(pi).epsilon(1e-12));
}

TEST_CASE("oscillation classification") {
    const double h = 1e-5, f = 500.0;
    const std::size_t n = 20000;  // 0.2 s, 100 cycles
    const auto steady = testing::sampled(n, h, [&](double t) { return std::sin(2.0 * pi * f * t); });
    const auto decay = testing::sampled(n, h, [&](double t) { return std::exp(-t / 0.02) * std::sin(2.0 * pi * f * t); });
    const auto grow = testing::sampled(n, h, [&](double t) { return std::exp(t / 0.02) * std::sin(2.0 * pi * f * t); });
    const auto s = sustained_oscillation(steady, h);
    CHECK(s.cls == OscillationClass::sustained);
    CHECK(s.frequency == Approx(f).epsilon(0.003));
    CHECK(s.amplitude == Approx(1.0).epsilon(0.01));
    CHECK(sustained_oscillation(decay, h).cls == OscillationClass::decaying);
    CHECK(sustained_oscillation(grow, h).cls == OscillationClass::growing);
    // e^{0.2 t} over the same window barely moves: still within the band
    const auto slow = testing::sampled(n, h, [&](double t) { return std::exp(0.2 * t) * std::sin(2.0 * pi * f * t); });
    CHECK(sustained_oscillation(slow, h).cls == OscillationClass::sustained);
    // the same e^{0.2 t} envelope over a 10 s record does register as growth
    const auto long_grow = testing::sampled(100000, 1e-4, [&](double t) { return std::exp(0.2 * t) * std::sin(2.0 * pi * 50.0 * t); });
    CHECK(sustained_oscillation(long_grow, 1e-4).cls == OscillationClass::growing);

    const auto few = testing::sampled(2000, h, [&](double t) { return std::sin(2.0 * pi * f * t); });
    try {
        (void)sustained_oscillation(few, h);
        FAIL("expected too_short");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::too_short);
    }
}

TEST_CASE("helpers") {
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(4096));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(12));
    CHECK(floor_power_of_two(1000) == 512);
    CHECK(floor_power_of_two(1024) == 1024);
    std::vector<double> x(1000);
    CHECK(steady_state_tail(x).size() == 256);
    CHECK(steady_state_tail(x).data() == x.data() + 744);
}
