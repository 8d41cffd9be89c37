#include "memsim/cli.hpp"

#include "memsim/analysis.hpp"
#include "memsim/circuits.hpp"
#include "memsim/engine.hpp"
#include "memsim/io.hpp"
#include "memsim/netlist.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <ostream>

namespace fs = std::filesystem;

namespace memsim {

namespace {

std::string num(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string complex_str(std::complex<double> z) {
    if (z.imag() == 0.0) return num(z.real());
    return num(z.real()) + (z.imag() < 0 ? " - " : " + ") + num(std::abs(z.imag())) + "j";
}

/// Lets numeric options take netlist-style suffixes (10k, 10n).
const CLI::Validator engineering(
    [](std::string& value) -> std::string {
        const auto v = parse_number(value);
        if (!v) return "'" + value + "' is not a number";
        value = format_number(*v);
        return {};
    },
    "NUMBER");

/// The directory a file will be written into must already exist.
bool writable_target(const std::string& path, std::ostream& err) {
    fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) parent = ".";
    std::error_code ec;
    if (!fs::is_directory(parent, ec)) {
        err << "error: output directory '" << parent.string() << "' does not exist\n";
        return false;
    }
    return true;
}

struct SimulateArgs {
    std::string netlist;
    std::optional<double> tstep, tstop;
    std::string method = "trap";
    std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    if (!writable_target(a.out, err)) return exit_io;
    std::string text;
    try {
        text = load_text(a.netlist);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    const ParseResult parsed = parse(text);
    if (!parsed.ok()) {
        for (const auto& d : parsed.diagnostics) err << a.netlist << ": " << d.format() << '\n';
        return exit_parse;
    }
    const Netlist& n = *parsed.netlist;

    // flags win over .tran
    SimConfig cfg;
    if (const auto tran = n.tran()) {
        cfg.dt = tran->step;
        cfg.t_stop = tran->stop;
    } else if (!a.tstep || !a.tstop) {
        err << "error: netlist has no .tran; pass --tstep and --tstop\n";
        return exit_parse;
    }
    if (a.tstep) cfg.dt = *a.tstep;
    if (a.tstop) cfg.t_stop = *a.tstop;
    cfg.method = a.method == "be" ? IntegrationMethod::backward_euler : IntegrationMethod::trapezoidal;
    if (const auto problem = cfg.validate(); !problem.empty()) {
        err << "error: " << problem << '\n';
        return exit_parse;
    }

    TransientResult result;
    try {
        result = simulate(n, cfg);
    } catch (const SimulationError& e) {
        err << "simulation failed: " << e.what() << '\n';
        return exit_sim;
    }
    try {
        save_waveform_csv(a.out, result.waveform);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    out << "wrote " << result.waveform.size() << " samples x " << result.waveform.names.size() << " channels to "
        << a.out << '\n';
    return exit_ok;
}

struct FftArgs {
    std::string csv;
    std::string column;
    std::string window = "hann";
    std::string out;
};

int cmd_fft(const FftArgs& a, std::ostream& out, std::ostream& err) {
    if (!writable_target(a.out, err)) return exit_io;
    Waveform w;
    try {
        w = load_waveform_csv(a.csv);
    } catch (const IoError& e) {
        err << "error: " << a.csv << ": " << e.what() << '\n';
        return exit_io;
    }
    if (!w.has(a.column)) {
        err << "error: no column '" << a.column << "' in " << a.csv << '\n';
        return exit_parse;
    }
    if (w.size() < 2 || !(w.dt > 0.0)) {
        err << "error: " << a.csv << " needs at least two increasing time samples\n";
        return exit_parse;
    }
    const Window win = a.window == "none" ? Window::none : Window::hann;
    Spectrum s;
    try {
        s = fft(w.channel(a.column), w.dt, win);
    } catch (const AnalysisError& e) {
        err << "error: " << e.what() << '\n';
        return exit_parse;
    }
    try {
        save_spectrum_csv(a.out, s);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }
    try {
        const double f = dominant_frequency(s, true);
        out << "dominant frequency: " << num(f) << " Hz\n";
    } catch (const AnalysisError& e) {
        // spectrum is still written; a DC-only column simply has no tone
        err << "dominant frequency: " << e.what() << '\n';
    }
    return exit_ok;
}

struct AnalyzeArgs {
    double m1 = 0, m2 = 0, m3 = 0, c = 0, k = 29.0, r4 = 10e3;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    OscillatorDesign d;
    d.m1 = a.m1;
    d.m2 = a.m2;
    d.m3 = a.m3;
    d.c = a.c;
    d.k = a.k;
    d.r4 = a.r4;
    if (const auto problem = d.validate(); !problem.empty()) {
        err << "error: " << problem << '\n';
        return exit_parse;
    }
    DesignReport r;
    try {
        r = analyze_design(d);
    } catch (const AnalysisError& e) {
        err << "error: " << e.what() << '\n';
        return exit_parse;
    }
    out << "design: M1=" << num(d.m1) << " M2=" << num(d.m2) << " M3=" << num(d.m3) << " C=" << num(d.c)
        << " K=" << num(d.k) << " R4=" << num(d.r4) << '\n';
    out << "alpha (required gain): " << num(r.alpha) << '\n';
    out << "oscillation frequency: " << num(r.frequency_hz) << " Hz\n";
    out << "equal-M frequency 1/(2 pi M1 C sqrt 6): " << num(r.frequency_equal_m_hz) << " Hz\n";
    out << "characteristic cubic: a=" << num(r.coeffs.a) << " b=" << num(r.coeffs.b) << " c=" << num(r.coeffs.c)
        << " d=" << num(r.coeffs.d) << '\n';
    if (r.roots) {
        out << "roots:";
        for (const auto& z : *r.roots) out << "  " << complex_str(z);
        out << '\n';
    } else {
        out << "roots: none (leading coefficient is zero)\n";
    }
    out << "critical K (root locus): " << num(r.critical_k) << "  (1+K = " << num(1.0 + r.critical_k) << ")\n";
    out << "state matrix:\n";
    for (const auto& row : r.matrix) out << "  " << num(row[0]) << "  " << num(row[1]) << "  " << num(row[2]) << '\n';
    out << "eigenvalues:";
    for (const auto& z : r.eigenvalues) out << "  " << complex_str(z);
    out << '\n';
    out << "note: " << r.note << '\n';
    return exit_ok;
}

double tail_peak_to_peak(std::span<const double> x) {
    const auto tail = x.subspan(x.size() / 2);
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    return *hi - *lo;
}

/// Mean |area| of the output over the last `count` half periods and whether
/// the signs alternate.
std::pair<double, bool> spike_areas(std::span<const double> x, double dt, double period, int count) {
    const auto half = static_cast<std::size_t>(std::llround(period / 2.0 / dt));
    double sum = 0.0;
    bool alternating = true;
    double prev = 0.0;
    const std::size_t end = x.size() - 1;
    for (int h = count; h >= 1; --h) {
        const std::size_t first = end - static_cast<std::size_t>(h) * half;
        double area = 0.0;
        for (std::size_t j = first; j < first + half; ++j) area += 0.5 * (x[j] + x[j + 1]) * dt;
        if (h != count && !((area > 0) != (prev > 0))) alternating = false;
        prev = area;
        sum += std::abs(area);
    }
    return {sum / count, alternating};
}

int cmd_demo(const std::string& name, const std::string& dir, std::ostream& out, std::ostream& err) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        err << "error: cannot create output directory '" << dir << "'\n";
        return exit_io;
    }

    Netlist n;
    double square_amplitude = 1.0;
    double square_period = 1e-3;
    double memristance_ohms = 0.0;
    double capacitance = 0.0;
    PhaseShiftSpec osc;
    if (name == "phase-shift") {
        n = build_phase_shift_oscillator(osc);
    } else if (name == "integrator") {
        IntegratorSpec spec;
        spec.memristor.x0 = state_for_memristance(spec.memristor, 10e3);
        memristance_ohms = memristance(spec.memristor, spec.memristor.x0);
        capacitance = spec.c;
        n = build_integrator(spec);
    } else {
        DifferentiatorSpec spec;
        memristance_ohms = memristance(spec.memristor, spec.memristor.x0);
        capacitance = spec.c;
        n = build_differentiator(spec);
    }

    const fs::path base = fs::path(dir) / name;
    TransientResult result;
    try {
        save_text(base.string() + ".cir", serialize(n));
        result = simulate(n, SimConfig::from_netlist(n));
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const SimulationError& e) {
        err << "simulation failed: " << e.what() << '\n';
        return exit_sim;
    }
    const Waveform& w = result.waveform;
    const auto& vout = w.channel("V(out)");
    const Spectrum spectrum = fft(steady_state_tail(vout), w.dt, Window::hann);
    try {
        save_waveform_csv(base.string() + ".csv", w);
        save_spectrum_csv(base.string() + "_spectrum.csv", spectrum);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    }

    out << "wrote " << base.string() << ".cir, " << base.string() << ".csv, " << base.string() << "_spectrum.csv\n";
    try {
        if (name == "phase-shift") {
            const auto rep = sustained_oscillation(vout, w.dt);
            const double predicted = osc_frequency(design_of(osc));
            out << "oscillation: " << to_string(rep.cls) << " (rms ratio " << num(rep.rms_ratio) << ", amplitude "
                << num(rep.amplitude) << " V)\n";
            out << "frequency: " << num(rep.frequency) << " Hz, predicted " << num(predicted) << " Hz, error "
                << num(100.0 * (rep.frequency - predicted) / predicted) << " %\n";
        } else if (name == "integrator") {
            const double predicted = square_amplitude * square_period / (2.0 * memristance_ohms * capacitance);
            const double vpp = tail_peak_to_peak(vout);
            out << "output Vpp: " << num(vpp) << " V, predicted A*T/(2MC) = " << num(predicted) << " V, error "
                << num(100.0 * (vpp - predicted) / predicted) << " %\n";
            out << "output |H3|/|H1|: " << num(harmonic_ratio(spectrum, 1.0 / square_period, 3)) << '\n';
        } else {
            const double predicted = memristance_ohms * capacitance * 2.0 * square_amplitude;
            const auto [area, alternating] = spike_areas(vout, w.dt, square_period, 8);
            out << "spike area: " << num(area) << " V s, predicted M*C*dV = " << num(predicted) << " V s, error "
                << num(100.0 * (area - predicted) / predicted) << " %, signs "
                << (alternating ? "alternate" : "do not alternate") << '\n';
        }
    } catch (const AnalysisError& e) {
        err << "analysis failed: " << e.what() << '\n';
        return exit_sim;
    }
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Memristor circuit simulator", "memsim"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a transient analysis of a netlist");
    simulate_cmd->add_option("netlist", sim.netlist, "Netlist file")->required();
    simulate_cmd->add_option("--tstep", sim.tstep, "Time step in seconds (overrides .tran)")->transform(engineering);
    simulate_cmd->add_option("--tstop", sim.tstop, "Stop time in seconds (overrides .tran)")->transform(engineering);
    simulate_cmd->add_option("--method", sim.method, "Integration method")
        ->check(CLI::IsMember({"trap", "be"}))
        ->capture_default_str();
    simulate_cmd->add_option("--out", sim.out, "Waveform CSV path")->required();

    FftArgs fa;
    auto* fft_cmd = app.add_subcommand("fft", "Amplitude spectrum of one waveform column");
    fft_cmd->add_option("csv", fa.csv, "Waveform CSV")->required();
    fft_cmd->add_option("--column", fa.column, "Column name, e.g. V(out)")->required();
    fft_cmd->add_option("--window", fa.window, "Window")->check(CLI::IsMember({"hann", "none"}))->capture_default_str();
    fft_cmd->add_option("--out", fa.out, "Spectrum CSV path")->required();

    AnalyzeArgs aa;
    auto* analyze_cmd = app.add_subcommand("oscillator-analyze", "Design report for the phase-shift oscillator");
    analyze_cmd->add_option("--m1", aa.m1, "Arm 1 memristance, ohms")->transform(engineering)->required();
    analyze_cmd->add_option("--m2", aa.m2, "Arm 2 memristance, ohms")->transform(engineering)->required();
    analyze_cmd->add_option("--m3", aa.m3, "Arm 3 memristance, ohms")->transform(engineering)->required();
    analyze_cmd->add_option("--c", aa.c, "Arm capacitance, farads")->transform(engineering)->required();
    analyze_cmd->add_option("--k", aa.k, "Amplifier gain")->transform(engineering)->capture_default_str();
    analyze_cmd->add_option("--r4", aa.r4, "Load resistance, ohms")->transform(engineering)->capture_default_str();

    std::string demo_name;
    std::string demo_dir = ".";
    auto* demo_cmd = app.add_subcommand("demo", "Build, simulate and analyze a reference circuit");
    demo_cmd->add_option("name", demo_name, "Circuit")
        ->required()
        ->check(CLI::IsMember({"phase-shift", "integrator", "differentiator"}));
    demo_cmd->add_option("--out", demo_dir, "Output directory")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        err << "run with --help for usage\n";
        return exit_parse;
    }

    if (simulate_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (fft_cmd->parsed()) return cmd_fft(fa, out, err);
    if (analyze_cmd->parsed()) return cmd_analyze(aa, out, err);
    return cmd_demo(demo_name, demo_dir, out, err);
}

}  // namespace memsim
