#include "memsim/circuits.hpp"

#include "memsim/analysis.hpp"

#include <algorithm>
#include <stdexcept>

namespace memsim {

namespace {

Component card(std::string name, std::vector<std::string> nodes, Element element) {
    return Component{std::move(name), std::move(nodes), std::move(element)};
}

Probe v(std::string a, std::string b = {}) { return Probe{Probe::Kind::voltage, std::move(a), std::move(b)}; }
Probe i(std::string name) { return Probe{Probe::Kind::current, std::move(name), {}}; }

void finish(Netlist& n, double dt, double t_stop, std::vector<Probe> probes) {
    n.directives.emplace_back(TranDirective{dt, t_stop});
    n.directives.emplace_back(ProbeDirective{std::move(probes)});
    if (const auto problems = validate(n); !problems.empty()) {
        throw std::invalid_argument("builder produced an invalid netlist: " + problems.front().format());
    }
}

}  // namespace

OscillatorDesign design_of(const PhaseShiftSpec& spec) {
    OscillatorDesign d;
    d.m1 = memristance(spec.arms[0], spec.arms[0].x0);
    d.m2 = memristance(spec.arms[1], spec.arms[1].x0);
    d.m3 = memristance(spec.arms[2], spec.arms[2].x0);
    d.c = spec.c[0];
    d.c1 = spec.c[0];
    d.c2 = spec.c[1];
    d.c3 = spec.c[2];
    d.r4 = spec.r4;
    d.k = spec.k.value_or(1.0);
    return d;
}

double default_gain(const PhaseShiftSpec& spec) { return 1.1 * critical_gain(design_of(spec)); }

Netlist build_phase_shift_oscillator(const PhaseShiftSpec& spec) {
    const double k = spec.k ? *spec.k : default_gain(spec);
    if (!(k > 0.0)) throw std::invalid_argument("oscillator gain must be positive");

    Netlist n;
    n.title = "memristor phase-shift oscillator";
    Vcvs amp;
    amp.gain = -k;
    amp.clip = spec.clip;
    n.components.push_back(card("E1", {"out", "0", "n3", "0"}, amp));

    PulseSource kick;
    kick.v1 = 0.0;
    kick.v2 = spec.startup_kick;
    kick.rise = 1e-9;
    kick.fall = 1e-9;
    kick.width = spec.kick_width;
    kick.period = std::max(1.0, 2.0 * spec.t_stop);
    n.components.push_back(card("VKICK", {"in", "out"}, VoltageSource{kick}));

    const char* prev = "in";
    const char* arm_nodes[] = {"n1", "n2", "n3"};
    for (int a = 0; a < 3; ++a) {
        const std::string idx = std::to_string(a + 1);
        n.components.push_back(card("C" + idx, {prev, arm_nodes[a]}, Capacitor{spec.c[a]}));
        n.components.push_back(card("M" + idx, {arm_nodes[a], "0"}, Memristor{spec.arms[a]}));
        prev = arm_nodes[a];
    }
    n.components.push_back(card("R4", {"out", "0"}, Resistor{spec.r4}));
    if (spec.r3) {
        if (spec.c4) {
            n.components.push_back(card("R3", {"out", "e"}, Resistor{*spec.r3}));
            n.components.push_back(card("C4", {"e", "0"}, Capacitor{*spec.c4}));
        } else {
            n.components.push_back(card("R3", {"out", "0"}, Resistor{*spec.r3}));
        }
    } else if (spec.c4) {
        n.components.push_back(card("C4", {"out", "0"}, Capacitor{*spec.c4}));
    }

    finish(n, spec.dt, spec.t_stop,
           {v("out"), v("in"), v("n1"), v("n2"), v("n3"), v("in", "n1"), v("n1", "n2"), v("n2", "n3"), i("M1"),
            i("M2"), i("M3")});
    return n;
}

PulseSource square_wave(double amplitude, double freq, double edge) {
    const double period = 1.0 / freq;
    PulseSource s;
    s.v1 = -amplitude;
    s.v2 = amplitude;
    s.delay = 0.0;
    s.rise = edge;
    s.fall = edge;
    s.width = period / 2.0 - edge;
    s.period = period;
    return s;
}

Netlist build_integrator(const IntegratorSpec& spec) {
    Netlist n;
    n.title = "memristor integrator";
    n.components.push_back(card("VIN", {"in", "0"}, VoltageSource{spec.input}));
    n.components.push_back(card("M1", {"in", "inv"}, Memristor{spec.memristor}));
    n.components.push_back(card("C1", {"inv", "out"}, Capacitor{spec.c}));
    n.components.push_back(card("O1", {"out", "0", "inv"}, OpAmp{}));
    finish(n, spec.dt, spec.t_stop, {v("in"), v("out"), i("M1")});
    return n;
}

Netlist build_differentiator(const DifferentiatorSpec& spec) {
    Netlist n;
    n.title = "memristor differentiator";
    n.components.push_back(card("VIN", {"in", "0"}, VoltageSource{spec.input}));
    if (spec.r1_placement == R1Placement::input_series) {
        n.components.push_back(card("R1", {"in", "mid"}, Resistor{spec.r1}));
        n.components.push_back(card("C1", {"mid", "inv"}, Capacitor{spec.c}));
        n.components.push_back(card("M1", {"inv", "out"}, Memristor{spec.memristor}));
    } else {
        n.components.push_back(card("C1", {"in", "inv"}, Capacitor{spec.c}));
        n.components.push_back(card("M1", {"inv", "out"}, Memristor{spec.memristor}));
        n.components.push_back(card("R1", {"inv", "out"}, Resistor{spec.r1}));
    }
    n.components.push_back(card("O1", {"out", "0", "inv"}, OpAmp{}));
    finish(n, spec.dt, spec.t_stop, {v("in"), v("out"), i("M1")});
    return n;
}

double state_for_memristance(const MemristorParams& params, double ohms) {
    if (params.r_off == params.r_on) return params.x0;
    return clamp_state((params.r_off - ohms) / (params.r_off - params.r_on));
}

}  // namespace memsim
