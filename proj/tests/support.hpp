#pragma once

// Shared helpers for the test executables: a random valid-netlist generator
// and a brute-force DFT used as an oracle for the FFT.

#include "memsim/netlist.hpp"

#include <cctype>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace memsim::testing {

/// O(N^2) DFT straight from the definition.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            // reduce k*j mod n first so the angle stays accurate
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            acc += x[j] * std::polar(1.0, angle);
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<double> sampled(std::size_t n, double dt, auto f) {
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = f(static_cast<double>(k) * dt);
    return v;
}

/// Produces random netlists that satisfy every structural invariant, so the
/// parser must accept their serialized form and give back the same value.
class NetlistGenerator {
public:
    explicit NetlistGenerator(std::uint64_t seed) : rng_(seed) {}

    Netlist next() {
        Netlist n;
        n.title = title();
        names_.clear();
        std::vector<std::string> nodes{"0"};
        const int count = uniform_int(1, 9);
        for (int c = 0; c < count; ++c) {
            // every new node hangs off an existing one, so the graph stays connected
            const int kind = uniform_int(0, 9);
            const std::string anchor = pick(nodes);
            const bool grow = nodes.size() == 1 || (nodes.size() < 8 && coin());
            std::string other = grow ? new_node() : pick(nodes);
            if (other == anchor) other = anchor == "0" ? nodes.back() : "0";
            if (kind <= 2) {
                n.components.push_back({name('R'), ordered(anchor, other), Resistor{positive()}});
            } else if (kind <= 4) {
                n.components.push_back({name('C'), ordered(anchor, other), Capacitor{positive()}});
            } else if (kind <= 6) {
                n.components.push_back({name('M'), ordered(anchor, other), Memristor{memristor()}});
            } else if (kind == 7) {
                n.components.push_back({name('V'), ordered(anchor, other), VoltageSource{source()}});
            } else if (kind == 8) {
                Vcvs e;
                e.gain = real(-50.0, 50.0);
                if (coin()) e.clip = positive();
                n.components.push_back({name('E'), {anchor, other, pick(nodes), pick(nodes)}, e});
            } else {
                n.components.push_back({name('O'), {other, pick(nodes), anchor}, OpAmp{}});
            }
            if (grow) nodes.push_back(other);
        }
        // a final resistor guarantees some card touches ground
        n.components.push_back({name('R'), {pick(nodes), "0"}, Resistor{positive()}});

        if (coin()) {
            const double step = positive();
            n.directives.emplace_back(TranDirective{step, step * real(2.0, 1e4)});
        }
        if (coin()) n.directives.emplace_back(ParamDirective{param_name(), real(-1e6, 1e6)});
        if (coin()) {
            ProbeDirective pd;
            const int probes = uniform_int(1, 4);
            for (int p = 0; p < probes; ++p) {
                const int what = uniform_int(0, 2);
                if (what == 0) pd.probes.push_back({Probe::Kind::voltage, pick(nodes), {}});
                else if (what == 1) pd.probes.push_back({Probe::Kind::voltage, pick(nodes), pick(nodes)});
                else pd.probes.push_back({Probe::Kind::current, n.components[index(n.components.size())].name, {}});
            }
            n.directives.emplace_back(pd);
        }
        return n;
    }

private:
    std::mt19937_64 rng_;
    std::set<std::string> names_;  // uppercased
    int node_counter_ = 0;

    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::size_t index(std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng_); }
    bool coin() { return uniform_int(0, 1) == 1; }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    const std::string& pick(const std::vector<std::string>& v) { return v[index(v.size())]; }

    /// Log-uniform over 1e-15 .. 1e9 with a full random mantissa.
    double positive() { return std::pow(10.0, real(-15.0, 9.0)); }

    std::vector<std::string> ordered(const std::string& a, const std::string& b) {
        return coin() ? std::vector<std::string>{a, b} : std::vector<std::string>{b, a};
    }

    std::string new_node() {
        static const char* stems[] = {"n", "out", "in", "mid", "node_", "a"};
        return stems[index(6)] + std::to_string(++node_counter_);
    }

    std::string name(char letter) {
        static const char alphabet[] = "abcxyzABCXYZ0123456789_";
        for (;;) {
            std::string s(1, coin() ? letter : static_cast<char>(std::tolower(letter)));
            const int len = uniform_int(1, 6);
            for (int k = 0; k < len; ++k) s += alphabet[index(sizeof alphabet - 1)];
            std::string upper = s;
            for (char& ch : upper) ch = static_cast<char>(std::toupper(ch));
            if (names_.insert(upper).second) return s;
        }
    }

    std::string param_name() {
        static const char* names[] = {"rval", "cap", "gain", "f0", "x"};
        return names[index(5)];
    }

    std::string title() {
        static const char* words[] = {"test", "circuit", "RC", "memristor", "ladder", "42", "osc"};
        std::string t = words[index(7)];
        const int extra = uniform_int(0, 3);
        for (int k = 0; k < extra; ++k) t += std::string(" ") + words[index(7)];
        return t;
    }

    MemristorParams memristor() {
        MemristorParams p;
        p.r_on = std::pow(10.0, real(0.0, 4.0));
        p.r_off = p.r_on * real(1.0, 1e3);
        p.d = std::pow(10.0, real(-9.0, -6.0));
        p.mu_v = std::pow(10.0, real(-16.0, -12.0));
        p.eta = coin() ? 1 : -1;
        p.p = uniform_int(1, 10);
        p.x0 = real(0.0, 1.0);
        const int w = uniform_int(0, 2);
        p.window = w == 0 ? WindowKind::biolek : (w == 1 ? WindowKind::printed : WindowKind::none);
        return p;
    }

    SourceSpec source() {
        const int kind = uniform_int(0, 2);
        if (kind == 0) return DcSource{real(-100.0, 100.0)};
        if (kind == 1) return SinSource{real(-5.0, 5.0), real(0.0, 10.0), positive(), real(-360.0, 360.0)};
        PulseSource p;
        p.v1 = real(-5.0, 5.0);
        p.v2 = real(-5.0, 5.0);
        p.delay = coin() ? 0.0 : positive();
        p.rise = positive();
        p.fall = positive();
        p.width = positive();
        p.period = (p.rise + p.width + p.fall) * real(1.0, 3.0);
        if (p.period < p.rise + p.width + p.fall) p.period = p.rise + p.width + p.fall;
        return p;
    }
};

}  // namespace memsim::testing
