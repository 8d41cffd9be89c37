#include "memsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace memsim {

double OscillatorDesign::arm_capacitance(int arm) const {
    const std::optional<double>* per_arm[] = {&c1, &c2, &c3};
    const auto& v = *per_arm[arm];
    return v ? *v : c;
}

std::string OscillatorDesign::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(m1) || !positive(m2) || !positive(m3)) return "memristances must be positive";
    if (!positive(c)) return "capacitance must be positive";
    for (const auto* v : {&c1, &c2, &c3}) {
        if (*v && !positive(**v)) return "arm capacitances must be positive";
    }
    if (!positive(k)) return "gain must be positive";
    if (!positive(r4)) return "r4 must be positive";
    return {};
}

CubicCoeffs char_poly_coeffs(const OscillatorDesign& d) {
    const double c = d.c;
    CubicCoeffs out;
    out.a = d.m1 * d.m2 * d.m3 * c * c * c * (1.0 + d.k);
    out.b = 3.0 * d.m1 * d.m2 * c * c + 2.0 * d.m1 * d.m3 * c * c + d.m2 * d.m3 * c * c;
    out.c = 2.0 * d.m1 * c + 2.0 * d.m2 * c + 2.0 * d.m3 * c;
    out.d = 1.0;
    return out;
}

namespace {

/// Newton refinement that only accepts steps reducing |P|.
std::complex<double> polish(const CubicCoeffs& p, std::complex<double> r) {
    for (int it = 0; it < 8; ++it) {
        const std::complex<double> value = p.evaluate(r);
        const std::complex<double> slope = (3.0 * p.a * r + 2.0 * p.b) * r + p.c;
        if (std::abs(slope) == 0.0 || std::abs(value) == 0.0) break;
        const std::complex<double> next = r - value / slope;
        if (!(std::abs(p.evaluate(next)) < std::abs(value))) break;
        r = next;
    }
    return r;
}

}  // namespace

Roots3 cubic_roots(const CubicCoeffs& coeffs) {
    if (coeffs.a == 0.0 || !std::isfinite(coeffs.a)) {
        throw AnalysisError(AnalysisError::Kind::degenerate_leading_coefficient,
                            "leading coefficient is zero; the system is not third order");
    }
    // monic form, then rescale s = sigma z so every coefficient is O(1)
    const double B = coeffs.b / coeffs.a;
    const double C = coeffs.c / coeffs.a;
    const double D = coeffs.d / coeffs.a;
    double sigma = std::max({std::abs(B), std::sqrt(std::abs(C)), std::cbrt(std::abs(D))});
    if (sigma == 0.0) sigma = 1.0;
    const double b = B / sigma;
    const double c = C / (sigma * sigma);
    const double d = D / (sigma * sigma * sigma);

    // depressed cubic t^3 + p t + q with z = t - b/3
    const double shift = b / 3.0;
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double half_q = q / 2.0;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    const CubicCoeffs monic{1.0, B, C, D};
    Roots3 roots;
    if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        const double u = -std::copysign(std::cbrt(std::abs(half_q) + sq), half_q);
        const double v = u != 0.0 ? -third_p / u : 0.0;
        const double real = (u + v) - shift;
        const double re_pair = -(u + v) / 2.0 - shift;
        const double im_pair = std::sqrt(3.0) / 2.0 * std::abs(u - v);
        std::complex<double> r0(real * sigma, 0.0);
        std::complex<double> r1(re_pair * sigma, im_pair * sigma);
        r0 = {polish(monic, r0).real(), 0.0};
        r1 = polish(monic, r1);
        if (r1.imag() < 0.0) r1 = std::conj(r1);
        roots = {r0, r1, std::conj(r1)};
    } else {
        std::array<double, 3> t{};
        if (p == 0.0) {
            t = {0.0, 0.0, 0.0};
        } else {
            const double m = 2.0 * std::sqrt(-third_p);
            const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
            const double theta = std::acos(arg) / 3.0;
            for (int k = 0; k < 3; ++k) t[k] = m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
        }
        for (int k = 0; k < 3; ++k) {
            const double s = (t[k] - shift) * sigma;
            roots[k] = {polish(monic, {s, 0.0}).real(), 0.0};
        }
        std::sort(roots.begin(), roots.end(), [](auto x, auto y) { return x.real() < y.real(); });
    }
    return roots;
}

double osc_frequency(const OscillatorDesign& d) {
    const double radical = 3.0 * d.m1 * d.m2 + 2.0 * d.m1 * d.m3 + d.m2 * d.m3;
    return 1.0 / (2.0 * std::numbers::pi * d.c * std::sqrt(radical));
}

double gain_alpha(double m1, double m2, double m3) {
    return 8.0 + 6.0 * m2 / m3 + 6.0 * m1 / m3 + 4.0 * m1 / m2 + 2.0 * m2 / m1 + 2.0 * m3 / m2 + m3 / m1;
}

StateMatrix state_matrix(const OscillatorDesign& d) {
    const double m = d.normalized_memristance();
    const double g1 = 1.0 / d.m1;
    const double g2 = 1.0 / d.m2;
    const double g3 = 1.0 / d.m3;
    const double c1 = d.arm_capacitance(0);
    const double c2 = d.arm_capacitance(1);
    const double c3 = d.arm_capacitance(2);

    StateMatrix a{{
        {(g1 + g2 + g3) / c1, (g1 + g2 - m * g3) / c1, (g1 - m * g2 - m * g3) / c1},
        {(g1 + g2) / c2, (g1 + g2) / c2, (g1 - m * g2) / c2},
        {g1 / c3, g1 / c3, g1 / c3},
    }};
    const double prefactor = -1.0 / (m + 1.0);
    for (auto& row : a) {
        for (double& v : row) v *= prefactor;
    }
    return a;
}

Roots3 eigenvalues_3x3(const StateMatrix& m) {
    const double trace = m[0][0] + m[1][1] + m[2][2];
    const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0] +
                          m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return cubic_roots({1.0, -trace, minors, -det});
}

double max_real_part(const Roots3& roots) {
    return std::max({roots[0].real(), roots[1].real(), roots[2].real()});
}

double critical_gain(const OscillatorDesign& design) {
    auto growth = [&](double k) {
        OscillatorDesign d = design;
        d.k = k;
        return max_real_part(cubic_roots(char_poly_coeffs(d)));
    };
    double lo = 0.0;
    if (growth(lo) >= 0.0) return lo;
    double hi = 1.0;
    while (growth(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e15) {
            throw AnalysisError(AnalysisError::Kind::invalid_input, "no finite gain destabilizes the design");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (growth(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

DesignReport analyze_design(const OscillatorDesign& design) {
    DesignReport r;
    r.design = design;
    r.alpha = gain_alpha(design.m1, design.m2, design.m3);
    r.frequency_hz = osc_frequency(design);
    r.frequency_equal_m_hz = 1.0 / (2.0 * std::numbers::pi * design.m1 * design.c * std::sqrt(6.0));
    r.coeffs = char_poly_coeffs(design);
    if (r.coeffs.a != 0.0) r.roots = cubic_roots(r.coeffs);
    r.critical_k = critical_gain(design);
    r.matrix = state_matrix(design);
    r.eigenvalues = eigenvalues_3x3(r.matrix);
    r.gain_conditions_diverge = std::abs(r.critical_k - r.alpha) > 1e-6 * r.alpha;
    std::ostringstream note;
    if (r.gain_conditions_diverge) {
        note << "critical gain from the characteristic cubic (K = " << r.critical_k << ", 1+K = "
             << 1.0 + r.critical_k << ") differs from the gain condition alpha = " << r.alpha;
    } else {
        note << "critical gain and alpha agree";
    }
    r.note = note.str();
    return r;
}

}  // namespace memsim
