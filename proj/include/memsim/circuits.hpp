#pragma once

// =============================================================================
// Builders for the memristor phase-shift oscillator, integrator and
// differentiator. Each returns a validated Netlist carrying its own .tran and
// .probe directives.
// =============================================================================

#include "memsim/analysis.hpp"
#include "memsim/device_models.hpp"
#include "memsim/netlist.hpp"

#include <array>
#include <optional>

namespace memsim {

/// Three series-C / shunt-M high-pass arms closed through an inverting VCVS.
///
/// Nodes: `out` is the amplifier output, `in` the ladder input (the kick
/// source sits between them), `n1`..`n3` the arm outputs. The amplifier
/// senses `n3`.
struct PhaseShiftSpec {
    std::array<MemristorParams, 3> arms{};
    std::array<double, 3> c{10e-9, 10e-9, 10e-9};
    /// Amplifier gain magnitude; the stage is stamped with -k. Unset means
    /// 1.1 x the critical gain of the characteristic cubic.
    std::optional<double> k;
    double r4 = 10e3;
    /// Emitter-style stability network hung on the amplifier output. It loads
    /// an ideal source, so it does not change the loop.
    std::optional<double> r3;
    std::optional<double> c4;
    /// Soft-clip knee of the amplifier (clip * tanh(g v / clip)); unset for a
    /// purely linear stage.
    std::optional<double> clip = 5.0;
    double startup_kick = 5.0;  // volts
    double kick_width = 1e-6;    // seconds
    double dt = 1e-6;
    double t_stop = 50e-3;
};

/// Design view of a spec (memristances at each arm's x0).
[[nodiscard]] OscillatorDesign design_of(const PhaseShiftSpec& spec);

/// Gain the builder uses when spec.k is unset.
[[nodiscard]] double default_gain(const PhaseShiftSpec& spec);

[[nodiscard]] Netlist build_phase_shift_oscillator(const PhaseShiftSpec& spec);

/// Trapezoidal square wave between -amplitude and +amplitude with a 50 % duty
/// cycle measured at mid-edge, starting on the low level.
[[nodiscard]] PulseSource square_wave(double amplitude, double freq, double edge);

/// Inverting integrator: memristor in the input path, C in feedback.
struct IntegratorSpec {
    MemristorParams memristor{};
    double c = 10e-9;
    SourceSpec input = square_wave(1.0, 1e3, 1e-6);
    double dt = 1e-3 / 1024.0;
    double t_stop = 16e-3;
};

[[nodiscard]] Netlist build_integrator(const IntegratorSpec& spec);

enum class R1Placement {
    input_series,       ///< R1 in series with the input capacitor
    feedback_parallel,  ///< R1 across the feedback memristor
};

/// Inverting differentiator: C in the input path, memristor in feedback.
struct DifferentiatorSpec {
    MemristorParams memristor{};
    double c = 10e-9;
    SourceSpec input = square_wave(1.0, 1e3, 1e-6);
    double r1 = 10.0;
    R1Placement r1_placement = R1Placement::input_series;
    double dt = 1e-3 / 1024.0;
    double t_stop = 16e-3;
};

[[nodiscard]] Netlist build_differentiator(const DifferentiatorSpec& spec);

/// State giving memristance `ohms` under `params` (clamped to [0, 1]).
[[nodiscard]] double state_for_memristance(const MemristorParams& params, double ohms);

}  // namespace memsim
