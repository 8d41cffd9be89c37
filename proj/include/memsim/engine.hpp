#pragma once

// =============================================================================
// Fixed-step MNA transient engine
// =============================================================================
// Unknown vector layout: node voltages (ground excluded, nodes in sorted label
// order) followed by one branch current per V, E and O element in netlist
// order. Branch currents flow from the element's first node through the
// element to its second node; for O the branch current is the current drawn
// from the output node into the op-amp.
// =============================================================================

#include "memsim/linear_solver.hpp"
#include "memsim/netlist.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace memsim {

enum class IntegrationMethod { trapezoidal, backward_euler };

[[nodiscard]] const char* to_string(IntegrationMethod method);

struct SimConfig {
    double dt = 1e-6;
    double t_stop = 1e-3;
    double newton_tol = 1e-9;   // volts
    int max_inner_iters = 50;
    IntegrationMethod method = IntegrationMethod::trapezoidal;
    /// Take backward-Euler steps at t = 0 and around source slope
    /// discontinuities, which suppresses trapezoidal ringing.
    bool be_at_breakpoints = true;
    /// Record each memristor's state as an X(name) channel.
    bool record_states = false;
    /// Clamp recorded op-amp output voltages to +/- this level. Display only;
    /// the solve itself is never clamped.
    std::optional<double> opamp_clamp;

    /// Config from the netlist's .tran directive; throws std::invalid_argument
    /// when the netlist has none.
    [[nodiscard]] static SimConfig from_netlist(const Netlist& netlist);

    /// Empty when valid, otherwise a description of the problem.
    [[nodiscard]] std::string validate() const;
};

class SimulationError : public std::runtime_error {
public:
    enum class Kind { singular_matrix, non_convergence };

    SimulationError(Kind kind, std::size_t step, const std::string& message)
        : std::runtime_error(message), kind_(kind), step_(step) {}

    [[nodiscard]] Kind kind() const { return kind_; }
    /// Timestep index at which the failure occurred.
    [[nodiscard]] std::size_t step() const { return step_; }

private:
    Kind kind_;
    std::size_t step_;
};

// -----------------------------------------------------------------------------
// Waveform
// -----------------------------------------------------------------------------

struct Waveform {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<std::string> names;
    std::vector<std::vector<double>> channels;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] bool has(std::string_view name) const;
    /// Throws std::out_of_range for unknown channels.
    [[nodiscard]] const std::vector<double>& channel(std::string_view name) const;

    bool operator==(const Waveform&) const = default;
};

// -----------------------------------------------------------------------------
// MNA system
// -----------------------------------------------------------------------------

/// Node and branch placement in the unknown vector.
struct MnaLayout {
    std::map<std::string, std::size_t> node_row;  // ground absent
    std::vector<std::optional<std::size_t>> branch_row;  // per component
    std::size_t node_count = 0;
    std::size_t size = 0;

    [[nodiscard]] static MnaLayout build(const Netlist& netlist);
    /// Row of a node label, or nullopt for ground.
    [[nodiscard]] std::optional<std::size_t> row(const std::string& node) const;
    [[nodiscard]] double voltage(std::span<const double> solution, const std::string& node) const;
};

struct CapacitorHistory {
    double v = 0.0;  // voltage at the previous accepted time point
    double i = 0.0;  // current at the previous accepted time point
};

/// Everything besides the netlist needed to stamp one linear system.
struct StampContext {
    double t = 0.0;
    double dt = 0.0;
    IntegrationMethod method = IntegrationMethod::trapezoidal;
    std::vector<double> memristor_x;           // per component; ignored for non-memristors
    std::vector<CapacitorHistory> capacitors;  // per component; ignored for non-capacitors
    std::vector<double> linearization;         // solution estimate used for nonlinear elements

    /// Zero history, memristors at their x0, linearization at the origin.
    [[nodiscard]] static StampContext initial(const Netlist& netlist, const MnaLayout& layout);
};

struct MnaSystem {
    MnaLayout layout;
    DenseMatrix matrix;
    std::vector<double> rhs;
};

/// Stamps every element at the given operating point. A zero dt (only valid
/// for capacitor-free netlists) gives the resistive system.
[[nodiscard]] MnaSystem assemble(const Netlist& netlist, const StampContext& context);
/// Same, reusing a prebuilt layout.
[[nodiscard]] MnaSystem assemble(const Netlist& netlist, const MnaLayout& layout, const StampContext& context);

/// Dense LU with partial pivoting. Throws SimulationError(singular_matrix).
[[nodiscard]] std::vector<double> solve_linear(const MnaSystem& system);

/// Current through each component (first node -> second node) for a solved
/// system. Capacitor currents follow the companion model of `context`.
[[nodiscard]] std::vector<double> element_currents(const Netlist& netlist, const MnaLayout& layout,
                                                   const StampContext& context,
                                                   std::span<const double> solution);

// -----------------------------------------------------------------------------
// Transient analysis
// -----------------------------------------------------------------------------

struct RunStats {
    std::size_t steps = 0;
    std::size_t solves = 0;
    int max_inner_iterations = 0;
    double max_kcl_residual = 0.0;  // amperes, over all node rows and steps
};

struct TransientResult {
    Waveform waveform;
    RunStats stats;
};

/// Runs a transient analysis. Probed channels follow the netlist's .probe
/// directives; without any, every non-ground node voltage is recorded.
[[nodiscard]] TransientResult simulate(const Netlist& netlist, const SimConfig& config);

[[nodiscard]] Waveform transient_run(const Netlist& netlist, const SimConfig& config);

}  // namespace memsim
