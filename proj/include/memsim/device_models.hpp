#pragma once

// =============================================================================
// Memristor device model
// =============================================================================
// HP-style dopant-drift memristor with a Biolek window. The state variable is
// the normalized dopant-front position x = w / D in [0, 1]. The physical
// drift equation is written for w,
//
//     dw/dt = eta * (mu_v * R_on / D) * i * f(x, i),
//
// and dividing by D gives the normalized form used throughout this library:
//
//     dx/dt = eta * (mu_v * R_on / D^2) * i * f(x, i).
// =============================================================================

namespace memsim {

/// Which window function multiplies the drift term.
enum class WindowKind {
    biolek,   ///< step term is 1 for i <= 0, 0 for i > 0 (vanishes at the boundary being approached)
    printed,  ///< step term is 1 for i >= 0, 0 for i < 0 (the literal, boundary-swapped variant)
    none,     ///< f == 1, plain linear drift
};

struct MemristorParams {
    double r_on = 100.0;     // ohms
    double r_off = 16.0e3;   // ohms
    double d = 10.0e-9;      // device thickness, m
    double mu_v = 1.0e-14;   // dopant mobility, m^2 V^-1 s^-1
    int eta = 1;             // polarity, +1 or -1
    int p = 1;               // window exponent
    double x0 = 0.5;         // initial normalized state
    WindowKind window = WindowKind::biolek;

    bool operator==(const MemristorParams&) const = default;

    /// Drift coefficient mu_v * R_on / D^2, in C^-1.
    [[nodiscard]] double drift_coefficient() const { return mu_v * r_on / (d * d); }
};

/// Returns an empty string when `params` satisfies the model invariants,
/// otherwise a description of the first violated one. r_on == r_off is
/// accepted: it degenerates the device into a fixed resistor.
[[nodiscard]] const char* validate(const MemristorParams& params);

struct MemristorState {
    double x = 0.5;
    bool operator==(const MemristorState&) const = default;
};

/// Biolek window f(x, i) = 1 - (x - step)^(2p).
[[nodiscard]] double biolek_window(double x, double current, int p,
                                   WindowKind kind = WindowKind::biolek);

/// Linear mixing relation M(x) = R_on * x + R_off * (1 - x).
[[nodiscard]] double memristance(const MemristorParams& params, double x);

/// dx/dt for the normalized state, in s^-1.
[[nodiscard]] double state_derivative(const MemristorParams& params, double x, double current);

struct LinearDriftState {
    double x = 0.0;
    bool saturated = false;
};

/// Closed-form state of a windowless (linear drift) device after charge q has
/// passed through it: clamp(x0 + eta * k * q, 0, 1).
[[nodiscard]] LinearDriftState linear_drift_state_of_charge(const MemristorParams& params,
                                                            double charge);

[[nodiscard]] inline double clamp_state(double x) {
    return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x);
}

}  // namespace memsim
