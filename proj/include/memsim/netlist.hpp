#pragma once

// =============================================================================
// Netlist model, parser and serializer
// =============================================================================
// A small SPICE-flavored dialect:
//
//   <title line>
//   * comment
//   R<name> n+ n- value
//   C<name> n+ n- value
//   M<name> n+ n- [RON=v] [ROFF=v] [D=v] [MU=v] [ETA=v] [P=v] [X0=v] [WINDOW=BIOLEK|PRINTED|NONE]
//   V<name> n+ n- [DC] v | SIN(vo va freq phase) | PULSE(v1 v2 td tr tf pw per)
//   E<name> n+ n- nc+ nc- gain [CLIP=v]
//   O<name> out in+ in-
//   .tran tstep tstop
//   .param name=value           (referenced as {name} in value fields)
//   .probe V(n) V(n1,n2) I(elem) ...
//   .end
//
// Lines beginning with '+' continue the previous card. Names, keywords and
// suffixes are case-insensitive; node labels are stored lowercased.
// =============================================================================

#include "memsim/device_models.hpp"

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace memsim {

// -----------------------------------------------------------------------------
// Sources
// -----------------------------------------------------------------------------

struct DcSource {
    double level = 0.0;
    bool operator==(const DcSource&) const = default;
};

struct SinSource {
    double offset = 0.0;
    double amplitude = 0.0;
    double freq = 0.0;       // Hz
    double phase_deg = 0.0;
    bool operator==(const SinSource&) const = default;
};

struct PulseSource {
    double v1 = 0.0;
    double v2 = 0.0;
    double delay = 0.0;
    double rise = 0.0;
    double fall = 0.0;
    double width = 0.0;
    double period = 0.0;
    bool operator==(const PulseSource&) const = default;
};

using SourceSpec = std::variant<DcSource, SinSource, PulseSource>;

/// Instantaneous source value at time t.
[[nodiscard]] double source_value(const SourceSpec& spec, double t);

/// Times at which the source waveform has a slope discontinuity within
/// [0, t_stop]. Empty for DC and SIN.
[[nodiscard]] std::vector<double> source_breakpoints(const SourceSpec& spec, double t_stop);

// -----------------------------------------------------------------------------
// Elements
// -----------------------------------------------------------------------------

struct Resistor {
    double resistance = 0.0;
    bool operator==(const Resistor&) const = default;
};

struct Capacitor {
    double capacitance = 0.0;
    bool operator==(const Capacitor&) const = default;
};

struct Memristor {
    MemristorParams params;
    bool operator==(const Memristor&) const = default;
};

struct VoltageSource {
    SourceSpec spec;
    bool operator==(const VoltageSource&) const = default;
};

/// Voltage-controlled voltage source v(n+, n-) = gain * v(nc+, nc-).
/// With `clip` set the transfer becomes clip * tanh(gain * vc / clip).
struct Vcvs {
    double gain = 1.0;
    std::optional<double> clip;
    bool operator==(const Vcvs&) const = default;
};

/// Ideal op-amp (nullor): v(in+) = v(in-), output current unconstrained.
struct OpAmp {
    bool operator==(const OpAmp&) const = default;
};

using Element = std::variant<Resistor, Capacitor, Memristor, VoltageSource, Vcvs, OpAmp>;

/// Card letter for an element kind.
[[nodiscard]] char element_letter(const Element& element);

/// Number of node terminals each element kind takes.
[[nodiscard]] std::size_t element_arity(const Element& element);

struct Component {
    std::string name;
    std::vector<std::string> nodes;  // O: out, in+, in-; E: n+, n-, nc+, nc-
    Element element;

    bool operator==(const Component&) const = default;
};

// -----------------------------------------------------------------------------
// Directives
// -----------------------------------------------------------------------------

struct TranDirective {
    double step = 0.0;
    double stop = 0.0;
    bool operator==(const TranDirective&) const = default;
};

struct ParamDirective {
    std::string name;   // lowercased
    double value = 0.0;
    bool operator==(const ParamDirective&) const = default;
};

/// V(a), V(a,b) or I(element).
struct Probe {
    enum class Kind { voltage, current };
    Kind kind = Kind::voltage;
    std::string a;  // node, or element name for currents
    std::string b;  // optional reference node for voltages

    [[nodiscard]] std::string label() const;
    bool operator==(const Probe&) const = default;
};

struct ProbeDirective {
    std::vector<Probe> probes;
    bool operator==(const ProbeDirective&) const = default;
};

using Directive = std::variant<TranDirective, ParamDirective, ProbeDirective>;

// -----------------------------------------------------------------------------
// Netlist
// -----------------------------------------------------------------------------

inline constexpr std::string_view ground_node = "0";

struct Netlist {
    std::string title;
    std::vector<Component> components;
    std::vector<Directive> directives;

    /// All node labels referenced by components, ground included.
    [[nodiscard]] std::set<std::string> node_names() const;

    [[nodiscard]] const Component* find(std::string_view name) const;  // case-insensitive
    [[nodiscard]] std::optional<TranDirective> tran() const;
    [[nodiscard]] std::vector<Probe> probes() const;

    bool operator==(const Netlist&) const = default;
};

// -----------------------------------------------------------------------------
// Diagnostics
// -----------------------------------------------------------------------------

enum class ParseErrorKind {
    unknown_card,
    bad_arity,
    duplicate_name,
    bad_number,
    bad_syntax,
    bad_value,
    unknown_reference,
    missing_ground,
    disconnected_node,
};

[[nodiscard]] const char* to_string(ParseErrorKind kind);

struct Diagnostic {
    ParseErrorKind kind = ParseErrorKind::bad_syntax;
    std::size_t line = 0;    // 1-based; 0 when not tied to a line
    std::size_t column = 0;  // 1-based
    std::string message;

    /// "line:col: kind: message"
    [[nodiscard]] std::string format() const;
};

struct ParseResult {
    std::optional<Netlist> netlist;
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return netlist.has_value(); }
};

/// Parses netlist text. Never throws on malformed input; every failure comes
/// back as a diagnostic with its source location.
[[nodiscard]] ParseResult parse(std::string_view text);

/// Checks the structural invariants (names, arity, values, ground,
/// connectivity, probe references) of an already-built netlist.
[[nodiscard]] std::vector<Diagnostic> validate(const Netlist& netlist);

/// Canonical text form; parse(serialize(n)) == n for any valid n.
[[nodiscard]] std::string serialize(const Netlist& netlist);

/// Parses a number with an optional engineering suffix (f p n u m k meg g)
/// followed by optional unit letters.
[[nodiscard]] std::optional<double> parse_number(std::string_view token);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_number(double value);

}  // namespace memsim
