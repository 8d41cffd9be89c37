#include "memsim/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace memsim {

namespace {

constexpr std::size_t no_row = static_cast<std::size_t>(-1);

/// Component terminals resolved to unknown-vector rows (no_row for ground).
struct CompiledCircuit {
    std::vector<std::array<std::size_t, 4>> rows;
    std::vector<std::size_t> branch;  // no_row when the element has no branch current
};

CompiledCircuit compile(const Netlist& netlist, const MnaLayout& layout) {
    CompiledCircuit out;
    out.rows.reserve(netlist.components.size());
    for (std::size_t k = 0; k < netlist.components.size(); ++k) {
        const Component& c = netlist.components[k];
        std::array<std::size_t, 4> r{no_row, no_row, no_row, no_row};
        for (std::size_t j = 0; j < c.nodes.size() && j < 4; ++j) {
            r[j] = layout.row(c.nodes[j]).value_or(no_row);
        }
        out.rows.push_back(r);
        out.branch.push_back(layout.branch_row[k].value_or(no_row));
    }
    return out;
}

double node_voltage(std::span<const double> x, std::size_t row) { return row == no_row ? 0.0 : x[row]; }

class Stamper {
public:
    Stamper(DenseMatrix& a, std::vector<double>& b) : a_(a), b_(b) {}

    void conductance(std::size_t p, std::size_t n, double g) {
        if (p != no_row) a_(p, p) += g;
        if (n != no_row) a_(n, n) += g;
        if (p != no_row && n != no_row) {
            a_(p, n) -= g;
            a_(n, p) -= g;
        }
    }

    /// Current j injected into node p and drawn from node n.
    void current(std::size_t p, std::size_t n, double j) {
        if (p != no_row) b_[p] += j;
        if (n != no_row) b_[n] -= j;
    }

    /// Branch current k leaves p, enters n.
    void branch_incidence(std::size_t p, std::size_t n, std::size_t k) {
        if (p != no_row) a_(p, k) += 1.0;
        if (n != no_row) a_(n, k) -= 1.0;
    }

    void constraint(std::size_t k, std::size_t node, double coeff) {
        if (node != no_row) a_(k, node) += coeff;
    }

    void rhs(std::size_t k, double v) { b_[k] += v; }

private:
    DenseMatrix& a_;
    std::vector<double>& b_;
};

struct CompanionCoeffs {
    double g = 0.0;
    double j = 0.0;  // i = g * v - j
};

CompanionCoeffs capacitor_companion(double capacitance, const CapacitorHistory& h, double dt,
                                    IntegrationMethod method) {
    if (dt <= 0.0) return {};
    if (method == IntegrationMethod::trapezoidal) {
        const double g = 2.0 * capacitance / dt;
        return {g, g * h.v + h.i};
    }
    const double g = capacitance / dt;
    return {g, g * h.v};
}

/// Output voltage and slope of a VCVS at control voltage vc.
std::pair<double, double> vcvs_transfer(const Vcvs& e, double vc) {
    if (!e.clip) return {e.gain * vc, e.gain};
    const double level = *e.clip;
    const double th = std::tanh(e.gain * vc / level);
    return {level * th, e.gain * (1.0 - th * th)};
}

void stamp_all(const Netlist& netlist, const CompiledCircuit& cc, const StampContext& ctx, DenseMatrix& a,
               std::vector<double>& b) {
    a.fill(0.0);
    std::fill(b.begin(), b.end(), 0.0);
    Stamper s(a, b);
    for (std::size_t k = 0; k < netlist.components.size(); ++k) {
        const Component& comp = netlist.components[k];
        const auto& r = cc.rows[k];
        std::visit(
            [&](const auto& el) {
                using T = std::decay_t<decltype(el)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    s.conductance(r[0], r[1], 1.0 / el.resistance);
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    const auto cmp = capacitor_companion(el.capacitance, ctx.capacitors[k], ctx.dt, ctx.method);
                    if (cmp.g == 0.0) return;
                    s.conductance(r[0], r[1], cmp.g);
                    s.current(r[0], r[1], cmp.j);
                } else if constexpr (std::is_same_v<T, Memristor>) {
                    s.conductance(r[0], r[1], 1.0 / memristance(el.params, ctx.memristor_x[k]));
                } else if constexpr (std::is_same_v<T, VoltageSource>) {
                    const std::size_t br = cc.branch[k];
                    s.branch_incidence(r[0], r[1], br);
                    s.constraint(br, r[0], 1.0);
                    s.constraint(br, r[1], -1.0);
                    s.rhs(br, source_value(el.spec, ctx.t));
                } else if constexpr (std::is_same_v<T, Vcvs>) {
                    const std::size_t br = cc.branch[k];
                    const double vc0 = node_voltage(ctx.linearization, r[2]) - node_voltage(ctx.linearization, r[3]);
                    const auto [h0, slope] = vcvs_transfer(el, vc0);
                    s.branch_incidence(r[0], r[1], br);
                    s.constraint(br, r[0], 1.0);
                    s.constraint(br, r[1], -1.0);
                    s.constraint(br, r[2], -slope);
                    s.constraint(br, r[3], slope);
                    if (el.clip) s.rhs(br, h0 - slope * vc0);
                } else {
                    // nullor: output branch leaves `out` towards ground, inputs held equal
                    const std::size_t br = cc.branch[k];
                    s.branch_incidence(r[0], no_row, br);
                    s.constraint(br, r[1], 1.0);
                    s.constraint(br, r[2], -1.0);
                }
            },
            comp.element);
    }
}


double max_abs_diff(std::span<const double> a, std::span<const double> b, std::size_t count) {
    double m = 0.0;
    for (std::size_t k = 0; k < count; ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

struct ChannelSource {
    std::string name;
    std::function<double(std::span<const double> solution, std::span<const double> currents,
                         std::span<const double> states)>
        read;
    bool opamp_output = false;
};

}  // namespace

// -----------------------------------------------------------------------------
// Config, waveform, layout
// -----------------------------------------------------------------------------

const char* to_string(IntegrationMethod method) {
    return method == IntegrationMethod::trapezoidal ? "trap" : "be";
}

SimConfig SimConfig::from_netlist(const Netlist& netlist) {
    const auto tran = netlist.tran();
    if (!tran) throw std::invalid_argument("netlist has no .tran directive");
    SimConfig cfg;
    cfg.dt = tran->step;
    cfg.t_stop = tran->stop;
    return cfg;
}

std::string SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) return "time step must be positive";
    if (!(t_stop > dt) || !std::isfinite(t_stop)) return "stop time must exceed the time step";
    if (!(newton_tol > 0.0)) return "newton tolerance must be positive";
    if (max_inner_iters < 1) return "max inner iterations must be at least 1";
    if (t_stop / dt > 1e9) return "too many time steps";
    return {};
}

bool Waveform::has(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& Waveform::channel(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no channel named '" + std::string(name) + "'");
    return channels[static_cast<std::size_t>(it - names.begin())];
}

MnaLayout MnaLayout::build(const Netlist& netlist) {
    MnaLayout layout;
    for (const auto& node : netlist.node_names()) {
        if (node == ground_node) continue;
        layout.node_row.emplace(node, layout.node_row.size());
    }
    layout.node_count = layout.node_row.size();
    std::size_t next = layout.node_count;
    for (const auto& c : netlist.components) {
        const bool has_branch = std::holds_alternative<VoltageSource>(c.element) ||
                                std::holds_alternative<Vcvs>(c.element) || std::holds_alternative<OpAmp>(c.element);
        layout.branch_row.push_back(has_branch ? std::optional<std::size_t>(next++) : std::nullopt);
    }
    layout.size = next;
    return layout;
}

std::optional<std::size_t> MnaLayout::row(const std::string& node) const {
    if (node == ground_node) return std::nullopt;
    const auto it = node_row.find(node);
    if (it == node_row.end()) throw std::out_of_range("unknown node '" + node + "'");
    return it->second;
}

double MnaLayout::voltage(std::span<const double> solution, const std::string& node) const {
    const auto r = row(node);
    return r ? solution[*r] : 0.0;
}

StampContext StampContext::initial(const Netlist& netlist, const MnaLayout& layout) {
    StampContext ctx;
    ctx.memristor_x.assign(netlist.components.size(), 0.0);
    ctx.capacitors.assign(netlist.components.size(), {});
    for (std::size_t k = 0; k < netlist.components.size(); ++k) {
        if (const auto* m = std::get_if<Memristor>(&netlist.components[k].element)) {
            ctx.memristor_x[k] = m->params.x0;
        }
    }
    ctx.linearization.assign(layout.size, 0.0);
    return ctx;
}

// -----------------------------------------------------------------------------
// Assembly and solve
// -----------------------------------------------------------------------------

MnaSystem assemble(const Netlist& netlist, const StampContext& context) {
    return assemble(netlist, MnaLayout::build(netlist), context);
}

MnaSystem assemble(const Netlist& netlist, const MnaLayout& layout, const StampContext& context) {
    MnaSystem sys;
    sys.layout = layout;
    sys.matrix = DenseMatrix(layout.size);
    sys.rhs.assign(layout.size, 0.0);
    StampContext ctx = context;
    ctx.memristor_x.resize(netlist.components.size(), 0.5);
    ctx.capacitors.resize(netlist.components.size());
    ctx.linearization.resize(layout.size, 0.0);
    stamp_all(netlist, compile(netlist, layout), ctx, sys.matrix, sys.rhs);
    return sys;
}

std::vector<double> solve_linear(const MnaSystem& system) {
    try {
        return lu_solve(system.matrix, system.rhs);
    } catch (const SingularMatrixError& e) {
        throw SimulationError(SimulationError::Kind::singular_matrix, 0,
                              "singular MNA matrix (pivot column " + std::to_string(e.column()) +
                                  "): floating node or contradictory constraints");
    }
}

namespace {

void currents_into(const Netlist& netlist, const CompiledCircuit& cc, const StampContext& ctx,
                   std::span<const double> x, std::vector<double>& out) {
    out.resize(netlist.components.size());
    for (std::size_t k = 0; k < netlist.components.size(); ++k) {
        const auto& r = cc.rows[k];
        const double v = node_voltage(x, r[0]) - node_voltage(x, r[1]);
        out[k] = std::visit(
            [&](const auto& el) -> double {
                using T = std::decay_t<decltype(el)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    return v / el.resistance;
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    const auto cmp = capacitor_companion(el.capacitance, ctx.capacitors[k], ctx.dt, ctx.method);
                    return cmp.g * v - cmp.j;
                } else if constexpr (std::is_same_v<T, Memristor>) {
                    return v / memristance(el.params, ctx.memristor_x[k]);
                } else {
                    return x[cc.branch[k]];
                }
            },
            netlist.components[k].element);
    }
}

}  // namespace

std::vector<double> element_currents(const Netlist& netlist, const MnaLayout& layout, const StampContext& context,
                                     std::span<const double> solution) {
    std::vector<double> out;
    currents_into(netlist, compile(netlist, layout), context, solution, out);
    return out;
}

// -----------------------------------------------------------------------------
// Transient
// -----------------------------------------------------------------------------

namespace {

std::vector<ChannelSource> make_channels(const Netlist& netlist, const MnaLayout& layout,
                                         const CompiledCircuit& cc, const SimConfig& config) {
    std::vector<ChannelSource> out;
    std::vector<std::string> seen;
    std::set<std::string> opamp_outputs;
    for (const auto& c : netlist.components) {
        if (std::holds_alternative<OpAmp>(c.element)) opamp_outputs.insert(c.nodes[0]);
    }

    auto add_voltage = [&](const std::string& a, const std::string& b, std::string name) {
        if (std::find(seen.begin(), seen.end(), name) != seen.end()) return;
        seen.push_back(name);
        const std::size_t ra = layout.row(a).value_or(no_row);
        const std::size_t rb = b.empty() ? no_row : layout.row(b).value_or(no_row);
        ChannelSource ch;
        ch.name = std::move(name);
        ch.read = [ra, rb](std::span<const double> x, std::span<const double>, std::span<const double>) {
            return node_voltage(x, ra) - node_voltage(x, rb);
        };
        ch.opamp_output = b.empty() && opamp_outputs.count(a) > 0;
        out.push_back(std::move(ch));
    };

    const std::vector<Probe> probes = netlist.probes();
    if (probes.empty()) {
        for (const auto& [node, row] : layout.node_row) add_voltage(node, {}, "V(" + node + ")");
    }
    for (const Probe& p : probes) {
        if (p.kind == Probe::Kind::voltage) {
            add_voltage(p.a, p.b, p.label());
            continue;
        }
        const std::string name = p.label();
        if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
        const Component* comp = netlist.find(p.a);
        if (!comp) throw std::invalid_argument("probe references unknown element '" + p.a + "'");
        const auto index = static_cast<std::size_t>(comp - netlist.components.data());
        seen.push_back(name);
        ChannelSource ch;
        ch.name = name;
        ch.read = [index](std::span<const double>, std::span<const double> i, std::span<const double>) {
            return i[index];
        };
        out.push_back(std::move(ch));
    }
    if (config.record_states) {
        for (std::size_t k = 0; k < netlist.components.size(); ++k) {
            if (!std::holds_alternative<Memristor>(netlist.components[k].element)) continue;
            ChannelSource ch;
            ch.name = "X(" + netlist.components[k].name + ")";
            ch.read = [k](std::span<const double>, std::span<const double>, std::span<const double> xs) {
                return xs[k];
            };
            out.push_back(std::move(ch));
        }
    }
    (void)cc;
    return out;
}

/// Step indices whose interval touches a slope discontinuity of any source.
std::vector<bool> breakpoint_steps(const Netlist& netlist, const SimConfig& config, std::size_t steps) {
    std::vector<bool> flag(steps + 1, false);
    if (!config.be_at_breakpoints) return flag;
    std::vector<double> bps{0.0};
    for (const auto& c : netlist.components) {
        if (const auto* v = std::get_if<VoltageSource>(&c.element)) {
            const auto more = source_breakpoints(v->spec, config.t_stop);
            bps.insert(bps.end(), more.begin(), more.end());
        }
    }
    const double eps = 1e-9 * config.dt;
    for (double bp : bps) {
        // step n covers (t_n, t_{n+1}]; flag the step containing bp and the one after
        const double pos = (bp + eps) / config.dt;
        if (pos < 0.0) continue;
        const auto n = static_cast<std::size_t>(std::floor(pos));
        for (std::size_t s = n; s <= n + 1 && s < steps; ++s) flag[s] = true;
    }
    return flag;
}

}  // namespace

TransientResult simulate(const Netlist& netlist, const SimConfig& config) {
    if (const std::string problem = config.validate(); !problem.empty()) throw std::invalid_argument(problem);

    const MnaLayout layout = MnaLayout::build(netlist);
    const CompiledCircuit cc = compile(netlist, layout);
    const std::size_t n_comp = netlist.components.size();
    const auto steps = static_cast<std::size_t>(std::floor(config.t_stop / config.dt + 1e-9));

    std::vector<std::size_t> memristors;
    std::vector<std::size_t> clipped;
    bool nonlinear = false;
    for (std::size_t k = 0; k < n_comp; ++k) {
        const auto& el = netlist.components[k].element;
        if (std::holds_alternative<Memristor>(el)) {
            memristors.push_back(k);
            nonlinear = true;
        }
        if (const auto* e = std::get_if<Vcvs>(&el); e && e->clip) {
            clipped.push_back(k);
            nonlinear = true;
        }
    }

    const std::vector<ChannelSource> sources = make_channels(netlist, layout, cc, config);
    const std::vector<bool> be_step = breakpoint_steps(netlist, config, steps);

    TransientResult result;
    Waveform& wf = result.waveform;
    wf.dt = config.dt;
    wf.t.reserve(steps + 1);
    for (const auto& s : sources) wf.names.push_back(s.name);
    wf.channels.assign(sources.size(), {});
    for (auto& ch : wf.channels) ch.reserve(steps + 1);

    StampContext ctx = StampContext::initial(netlist, layout);
    ctx.dt = config.dt;
    std::vector<double> solution(layout.size, 0.0);
    std::vector<double> currents(n_comp, 0.0);
    std::vector<double> x_prev = ctx.memristor_x;
    std::vector<double> i_prev(n_comp, 0.0);

    auto record = [&](std::size_t step) {
        wf.t.push_back(static_cast<double>(step) * config.dt);
        for (std::size_t c = 0; c < sources.size(); ++c) {
            double v = sources[c].read(solution, currents, ctx.memristor_x);
            if (config.opamp_clamp && sources[c].opamp_output) v = std::clamp(v, -*config.opamp_clamp, *config.opamp_clamp);
            wf.channels[c].push_back(v);
        }
    };
    record(0);

    DenseMatrix a(layout.size);
    std::vector<double> b(layout.size, 0.0);
    std::vector<double> x_next(n_comp, 0.0);

    for (std::size_t n = 0; n < steps; ++n) {
        ctx.t = static_cast<double>(n + 1) * config.dt;
        ctx.method = be_step[n] ? IntegrationMethod::backward_euler : config.method;
        ctx.linearization = solution;
        ctx.memristor_x = x_prev;
        const double dt = config.dt;
        const bool trap = ctx.method == IntegrationMethod::trapezoidal;

        std::vector<double> trial;
        int iter = 0;
        for (;;) {
            ++iter;
            stamp_all(netlist, cc, ctx, a, b);
            try {
                trial = LuFactorization(a).solve(b);
            } catch (const SingularMatrixError& e) {
                throw SimulationError(SimulationError::Kind::singular_matrix, n + 1,
                                      "singular MNA matrix at step " + std::to_string(n + 1) + " (pivot column " +
                                          std::to_string(e.column()) + ")");
            }
            ++result.stats.solves;
            currents_into(netlist, cc, ctx, trial, currents);

            if (!nonlinear) break;

            double dx = 0.0;
            for (std::size_t k : memristors) {
                const auto& params = std::get<Memristor>(netlist.components[k].element).params;
                const double g_new = state_derivative(params, ctx.memristor_x[k], currents[k]);
                const double raw = trap ? x_prev[k] + 0.5 * dt * (state_derivative(params, x_prev[k], i_prev[k]) + g_new)
                                        : x_prev[k] + dt * g_new;
                x_next[k] = clamp_state(raw);
                dx = std::max(dx, std::abs(x_next[k] - ctx.memristor_x[k]));
            }
            const double dv = max_abs_diff(trial, ctx.linearization, layout.node_count);
            // Newton on tanh cycles when started deep in saturation, so cap
            // the change of each clip argument at 1 per iteration
            double lambda = 1.0;
            for (std::size_t k : clipped) {
                const auto& e = std::get<Vcvs>(netlist.components[k].element);
                const auto& r = cc.rows[k];
                auto arg = [&](const std::vector<double>& v) {
                    return e.gain * (node_voltage(v, r[2]) - node_voltage(v, r[3])) / *e.clip;
                };
                const double du = std::abs(arg(trial) - arg(ctx.linearization));
                if (du > 1.0) lambda = std::min(lambda, 1.0 / du);
            }
            const bool converged = dx < 1e-9 && dv < config.newton_tol && lambda == 1.0;
            for (std::size_t k : memristors) ctx.memristor_x[k] = x_next[k];
            if (lambda < 1.0) {
                for (std::size_t r = 0; r < trial.size(); ++r) {
                    ctx.linearization[r] += lambda * (trial[r] - ctx.linearization[r]);
                }
            } else {
                ctx.linearization = trial;
            }
            if (converged) break;
            if (iter >= config.max_inner_iters) {
                std::ostringstream msg;
                msg << "inner iteration did not converge at step " << (n + 1) << " (t = " << ctx.t
                    << " s): |dx| = " << dx << ", |dv| = " << dv;
                throw SimulationError(SimulationError::Kind::non_convergence, n + 1, msg.str());
            }
        }
        result.stats.max_inner_iterations = std::max(result.stats.max_inner_iterations, iter);

        // KCL residual of the final linear system over node rows
        const std::vector<double> ax = a.multiply(trial);
        for (std::size_t r = 0; r < layout.node_count; ++r) {
            result.stats.max_kcl_residual = std::max(result.stats.max_kcl_residual, std::abs(ax[r] - b[r]));
        }

        solution = std::move(trial);
        for (std::size_t k = 0; k < n_comp; ++k) {
            const Component& comp = netlist.components[k];
            if (std::holds_alternative<Capacitor>(comp.element)) {
                const auto& r = cc.rows[k];
                ctx.capacitors[k] = {node_voltage(solution, r[0]) - node_voltage(solution, r[1]), currents[k]};
            }
        }
        for (std::size_t k : memristors) {
            x_prev[k] = ctx.memristor_x[k];
            i_prev[k] = currents[k];
        }
        record(n + 1);
    }
    result.stats.steps = steps;
    return result;
}

Waveform transient_run(const Netlist& netlist, const SimConfig& config) { return simulate(netlist, config).waveform; }

}  // namespace memsim
