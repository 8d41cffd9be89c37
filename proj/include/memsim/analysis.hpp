#pragma once

// =============================================================================
// Oscillator design math and waveform analysis
// =============================================================================

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

class AnalysisError : public std::runtime_error {
public:
    enum class Kind { degenerate_leading_coefficient, empty_channel, no_peak, weak_signal, too_short, invalid_input };

    AnalysisError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// -----------------------------------------------------------------------------
// Phase-shift oscillator design
// -----------------------------------------------------------------------------

/// Three memristor-capacitor arms treated as fixed resistances.
struct OscillatorDesign {
    double m1 = 0.0;  // ohms
    double m2 = 0.0;
    double m3 = 0.0;
    double c = 0.0;   // common arm capacitance, farads
    std::optional<double> c1, c2, c3;  // per-arm overrides for the state matrix
    double k = 0.0;   // amplifier gain
    double r4 = 0.0;  // ohms

    /// m = r4 / m1
    [[nodiscard]] double normalized_memristance() const { return r4 / m1; }
    [[nodiscard]] double arm_capacitance(int arm) const;

    /// Empty when all quantities are positive and finite.
    [[nodiscard]] std::string validate() const;
};

/// a s^3 + b s^2 + c s + d
struct CubicCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    [[nodiscard]] std::complex<double> evaluate(std::complex<double> s) const {
        return ((a * s + b) * s + c) * s + d;
    }
};

using Roots3 = std::array<std::complex<double>, 3>;
using StateMatrix = std::array<std::array<double, 3>, 3>;

/// Characteristic cubic coefficients of the three-arm ladder with gain K.
[[nodiscard]] CubicCoeffs char_poly_coeffs(const OscillatorDesign& design);

/// All three roots. A single real root comes first followed by the conjugate
/// pair (positive imaginary part first); three real roots are ascending.
/// Throws AnalysisError(degenerate_leading_coefficient) when a == 0.
[[nodiscard]] Roots3 cubic_roots(const CubicCoeffs& coeffs);

/// Oscillation frequency in hertz, 1 / (2 pi C sqrt(3 M1 M2 + 2 M1 M3 + M2 M3)).
[[nodiscard]] double osc_frequency(const OscillatorDesign& design);

/// Required amplifier gain for sustained oscillation from the memristance ratios.
[[nodiscard]] double gain_alpha(double m1, double m2, double m3);

/// 3x3 state matrix over (V_C1, V_C2, V_C3) with prefactor -1/(m+1).
[[nodiscard]] StateMatrix state_matrix(const OscillatorDesign& design);

/// Eigenvalues from the characteristic cubic of a 3x3 matrix.
[[nodiscard]] Roots3 eigenvalues_3x3(const StateMatrix& matrix);

/// Largest real part among the cubic's roots.
[[nodiscard]] double max_real_part(const Roots3& roots);

/// Gain K at which the characteristic cubic's conjugate pair crosses the
/// imaginary axis, found by bisection on the largest real part.
[[nodiscard]] double critical_gain(const OscillatorDesign& design);

/// Everything the design command prints.
struct DesignReport {
    OscillatorDesign design;
    double alpha = 0.0;
    double frequency_hz = 0.0;
    double frequency_equal_m_hz = 0.0;  // 1 / (2 pi M C sqrt 6) with M = m1
    CubicCoeffs coeffs;
    std::optional<Roots3> roots;        // absent when a == 0
    double critical_k = 0.0;
    StateMatrix matrix{};
    Roots3 eigenvalues{};
    bool gain_conditions_diverge = false;
    std::string note;
};

[[nodiscard]] DesignReport analyze_design(const OscillatorDesign& design);

// -----------------------------------------------------------------------------
// Spectral analysis
// -----------------------------------------------------------------------------

enum class Window { none, hann };

[[nodiscard]] const char* to_string(Window window);

/// In-place-style radix-2 decimation-in-time transform (unnormalized,
/// X_k = sum x_n e^{-2 pi i k n / N}). Size must be a power of two.
[[nodiscard]] std::vector<std::complex<double>> fft_radix2(std::span<const std::complex<double>> input);

struct Spectrum {
    std::vector<double> freq;       // hertz, 0 .. Nyquist
    std::vector<double> magnitude;  // single-sided amplitude, window-compensated
    std::vector<double> phase;      // radians in (-pi, pi]
    Window window = Window::none;
    std::size_t n = 0;              // transform length
    double dt = 0.0;

    [[nodiscard]] double bin_width() const { return 1.0 / (static_cast<double>(n) * dt); }
    [[nodiscard]] std::size_t nearest_bin(double f) const;
};

[[nodiscard]] bool is_power_of_two(std::size_t n);
[[nodiscard]] std::size_t floor_power_of_two(std::size_t n);

/// Amplitude spectrum of a uniformly sampled channel. Inputs whose length is
/// not a power of two are truncated to their last 2^k samples. A unit sine
/// centered on a bin reads 1.0 for either window.
[[nodiscard]] Spectrum fft(std::span<const double> samples, double dt, Window window);

/// Frequency of the largest bin, refined by parabolic interpolation. With
/// `ignore_dc` the DC main lobe is skipped; a signal with nothing left above
/// 1e-9 of its peak throws AnalysisError(no_peak).
[[nodiscard]] double dominant_frequency(const Spectrum& spectrum, bool ignore_dc = true);

/// Magnitude at n * f0 divided by magnitude at f0, using nearest bins.
[[nodiscard]] double harmonic_ratio(const Spectrum& spectrum, double f0, int harmonic);

/// The last half of a record, truncated to a power of two (newest samples).
[[nodiscard]] std::span<const double> steady_state_tail(std::span<const double> samples);

/// Phase of b relative to a at the bin nearest f0, in degrees within
/// (-180, 180]. Measured over the steady-state tail with a Hann window.
[[nodiscard]] double phase_shift(std::span<const double> a, std::span<const double> b, double dt, double f0);

/// Amplitude of the component nearest f0 over the steady-state tail.
[[nodiscard]] double tone_amplitude(std::span<const double> samples, double dt, double f0);

enum class OscillationClass { growing, decaying, sustained };

[[nodiscard]] const char* to_string(OscillationClass cls);

struct OscillationReport {
    OscillationClass cls = OscillationClass::sustained;
    double amplitude = 0.0;  // sqrt(2) * RMS of the later window
    double frequency = 0.0;  // hertz
    double rms_ratio = 0.0;  // later / earlier
};

/// Classifies the steady-state tail by comparing the RMS of its two halves.
/// Needs at least 20 cycles overall and 8 per window.
[[nodiscard]] OscillationReport sustained_oscillation(std::span<const double> samples, double dt);

}  // namespace memsim
