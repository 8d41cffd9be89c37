#include "memsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace memsim {

const char* to_string(Window window) { return window == Window::hann ? "hann" : "none"; }

const char* to_string(OscillationClass cls) {
    switch (cls) {
    case OscillationClass::growing: return "growing";
    case OscillationClass::decaying: return "decaying";
    case OscillationClass::sustained: return "sustained";
    }
    return "unknown";
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t floor_power_of_two(std::size_t n) {
    if (n == 0) return 0;
    std::size_t p = 1;
    while (p <= n / 2) p <<= 1;
    return p;
}

std::vector<std::complex<double>> fft_radix2(std::span<const std::complex<double>> input) {
    const std::size_t n = input.size();
    if (!is_power_of_two(n)) {
        throw AnalysisError(AnalysisError::Kind::invalid_input, "transform length must be a power of two");
    }
    std::vector<std::complex<double>> x(input.begin(), input.end());

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t k = 0; k < half; ++k) {
            // exact twiddles instead of a running product
            const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
            for (std::size_t start = 0; start < n; start += len) {
                const std::complex<double> even = x[start + k];
                const std::complex<double> odd = x[start + k + half] * w;
                x[start + k] = even + odd;
                x[start + k + half] = even - odd;
            }
        }
    }
    return x;
}

std::size_t Spectrum::nearest_bin(double f) const {
    const double pos = std::round(f / bin_width());
    if (pos <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(pos), freq.size() - 1);
}

Spectrum fft(std::span<const double> samples, double dt, Window window) {
    if (samples.empty()) throw AnalysisError(AnalysisError::Kind::empty_channel, "channel has no samples");
    if (!(dt > 0.0)) throw AnalysisError(AnalysisError::Kind::invalid_input, "sample spacing must be positive");
    const std::size_t n = floor_power_of_two(samples.size());
    if (n < 2) throw AnalysisError(AnalysisError::Kind::empty_channel, "channel needs at least two samples");
    samples = samples.subspan(samples.size() - n);

    std::vector<std::complex<double>> buf(n);
    double gain_correction = 1.0;
    if (window == Window::hann) {
        // periodic Hann has mean exactly 1/2
        for (std::size_t k = 0; k < n; ++k) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));
            buf[k] = samples[k] * w;
        }
        gain_correction = 2.0;
    } else {
        for (std::size_t k = 0; k < n; ++k) buf[k] = samples[k];
    }
    const auto spectrum = fft_radix2(buf);

    Spectrum out;
    out.window = window;
    out.n = n;
    out.dt = dt;
    const std::size_t bins = n / 2 + 1;
    out.freq.resize(bins);
    out.magnitude.resize(bins);
    out.phase.resize(bins);
    const double df = 1.0 / (static_cast<double>(n) * dt);
    for (std::size_t k = 0; k < bins; ++k) {
        const double single_sided = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        out.freq[k] = static_cast<double>(k) * df;
        out.magnitude[k] = single_sided * std::abs(spectrum[k]) / static_cast<double>(n) * gain_correction;
        double ph = std::arg(spectrum[k]);
        if (ph <= -std::numbers::pi) ph = std::numbers::pi;
        out.phase[k] = ph;
    }
    return out;
}

double dominant_frequency(const Spectrum& s, bool ignore_dc) {
    if (s.magnitude.empty()) throw AnalysisError(AnalysisError::Kind::empty_channel, "empty spectrum");
    const auto& m = s.magnitude;
    const double global_max = *std::max_element(m.begin(), m.end());
    if (!(global_max > 0.0)) throw AnalysisError(AnalysisError::Kind::no_peak, "signal is identically zero");

    std::size_t first = 0;
    if (ignore_dc) {
        // skip the DC main lobe: bins that keep falling away from zero
        first = 1;
        while (first < m.size() && m[first] <= m[first - 1]) ++first;
        if (first >= m.size()) throw AnalysisError(AnalysisError::Kind::no_peak, "spectrum holds only DC");
    }
    const auto peak_it = std::max_element(m.begin() + static_cast<std::ptrdiff_t>(first), m.end());
    const auto k = static_cast<std::size_t>(peak_it - m.begin());
    if (!(*peak_it > 1e-9 * global_max)) {
        throw AnalysisError(AnalysisError::Kind::no_peak, "no spectral peak outside DC");
    }

    double offset = 0.0;
    if (k > 0 && k + 1 < m.size()) {
        const double alpha = m[k - 1];
        const double beta = m[k];
        const double gamma = m[k + 1];
        const double denom = alpha - 2.0 * beta + gamma;
        if (denom != 0.0) offset = std::clamp(0.5 * (alpha - gamma) / denom, -0.5, 0.5);
    }
    return (static_cast<double>(k) + offset) * s.bin_width();
}

double harmonic_ratio(const Spectrum& s, double f0, int harmonic) {
    const double base = s.magnitude[s.nearest_bin(f0)];
    if (!(base > 0.0)) throw AnalysisError(AnalysisError::Kind::weak_signal, "no energy at the fundamental");
    return s.magnitude[s.nearest_bin(f0 * harmonic)] / base;
}

std::span<const double> steady_state_tail(std::span<const double> samples) {
    const std::size_t tail = samples.size() - samples.size() / 2;
    const std::size_t n = floor_power_of_two(tail);
    return samples.subspan(samples.size() - n);
}

double phase_shift(std::span<const double> a, std::span<const double> b, double dt, double f0) {
    if (a.size() != b.size()) throw AnalysisError(AnalysisError::Kind::invalid_input, "channels differ in length");
    const Spectrum sa = fft(steady_state_tail(a), dt, Window::hann);
    const Spectrum sb = fft(steady_state_tail(b), dt, Window::hann);
    const std::size_t k = sa.nearest_bin(f0);
    for (const Spectrum* s : {&sa, &sb}) {
        const double peak = *std::max_element(s->magnitude.begin(), s->magnitude.end());
        if (!(s->magnitude[k] >= 1e-6 * peak) || peak == 0.0) {
            throw AnalysisError(AnalysisError::Kind::weak_signal, "channel has no energy near the requested frequency");
        }
    }
    double deg = (sb.phase[k] - sa.phase[k]) * 180.0 / std::numbers::pi;
    while (deg > 180.0) deg -= 360.0;
    while (deg <= -180.0) deg += 360.0;
    return deg;
}

double tone_amplitude(std::span<const double> samples, double dt, double f0) {
    const Spectrum s = fft(steady_state_tail(samples), dt, Window::hann);
    return s.magnitude[s.nearest_bin(f0)];
}

namespace {

double rms(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

OscillationReport sustained_oscillation(std::span<const double> samples, double dt) {
    if (samples.size() < 4) throw AnalysisError(AnalysisError::Kind::empty_channel, "channel is too short to analyze");
    const double f = dominant_frequency(fft(steady_state_tail(samples), dt, Window::hann), true);
    const double cycles_total = static_cast<double>(samples.size()) * dt * f;

    const std::size_t tail_len = samples.size() - samples.size() / 2;
    const std::span<const double> tail = samples.subspan(samples.size() - tail_len);
    const std::size_t half = tail_len / 2;
    const double period_samples = 1.0 / (f * dt);
    const double window_cycles = std::floor(static_cast<double>(half) / period_samples);
    if (cycles_total < 20.0 || window_cycles < 8.0) {
        throw AnalysisError(AnalysisError::Kind::too_short,
                            "record holds " + std::to_string(cycles_total) + " cycles; need 20 overall and 8 per window");
    }
    // whole cycles only, so the RMS is free of partial-cycle bias
    const auto len = std::min(half, static_cast<std::size_t>(std::llround(window_cycles * period_samples)));
    const auto first = tail.subspan(half - len, len);
    const auto second = tail.subspan(tail.size() - len, len);

    OscillationReport out;
    out.frequency = f;
    const double r1 = rms(first);
    const double r2 = rms(second);
    out.rms_ratio = r1 > 0.0 ? r2 / r1 : 0.0;
    out.amplitude = std::sqrt(2.0) * r2;
    if (out.rms_ratio - 1.0 > 0.05) out.cls = OscillationClass::growing;
    else if (out.rms_ratio - 1.0 < -0.05) out.cls = OscillationClass::decaying;
    else out.cls = OscillationClass::sustained;
    return out;
}

}  // namespace memsim
