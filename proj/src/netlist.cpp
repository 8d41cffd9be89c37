#include "memsim/netlist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace memsim {

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), upper);
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) { return lower(x) == lower(y); });
}

bool is_separator(char c) { return c == '(' || c == ')' || c == ',' || c == '='; }

/// True when `label` survives tokenization as a single word.
bool is_word(std::string_view label) {
    if (label.empty()) return false;
    return std::none_of(label.begin(), label.end(), [](char c) {
        return is_space(c) || c == '\n' || is_separator(c);
    });
}

// -----------------------------------------------------------------------------
// Tokens
// -----------------------------------------------------------------------------

struct Token {
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;
};

struct LogicalLine {
    std::vector<Token> tokens;
    std::size_t line = 0;
};

void tokenize_into(std::string_view text, std::size_t line_no, std::size_t col_offset,
                   std::vector<Token>& out) {
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (is_space(c) || c == ',') {
            ++i;
            continue;
        }
        if (c == '(' || c == ')' || c == '=') {
            out.push_back({std::string(1, c), line_no, col_offset + i + 1});
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i]) && !is_separator(text[i])) ++i;
        out.push_back({std::string(text.substr(start, i - start)), line_no, col_offset + start + 1});
    }
}

/// Splits the body (everything after the title line) into logical lines,
/// folding '+' continuations and dropping comments.
std::vector<LogicalLine> split_lines(std::string_view text, std::string& title) {
    std::vector<std::string_view> physical;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        physical.push_back(line);
        pos = nl + 1;
    }

    title = physical.empty() ? std::string() : std::string(physical.front());

    std::vector<LogicalLine> lines;
    for (std::size_t k = 1; k < physical.size(); ++k) {
        std::string_view line = physical[k];
        const std::size_t line_no = k + 1;
        std::size_t first = 0;
        while (first < line.size() && is_space(line[first])) ++first;
        if (first == line.size()) continue;
        if (line[first] == '*') continue;
        if (line[first] == '+' && !lines.empty()) {
            tokenize_into(line.substr(first + 1), line_no, first + 1, lines.back().tokens);
            continue;
        }
        LogicalLine logical;
        logical.line = line_no;
        tokenize_into(line, line_no, 0, logical.tokens);
        if (!logical.tokens.empty()) lines.push_back(std::move(logical));
    }
    return lines;
}

// -----------------------------------------------------------------------------
// Card parsing
// -----------------------------------------------------------------------------

struct ParseFailure {
    Diagnostic diagnostic;
};

Diagnostic at(const Token& tok, ParseErrorKind kind, std::string message) {
    return Diagnostic{kind, tok.line, tok.column, std::move(message)};
}

class CardParser {
public:
    CardParser(const LogicalLine& line, const std::unordered_map<std::string, double>& params)
        : tokens_(line.tokens), params_(params), line_(line.line) {}

    [[nodiscard]] bool done() const { return pos_ >= tokens_.size(); }
    [[nodiscard]] std::size_t remaining() const { return tokens_.size() - pos_; }

    const Token& peek() const { return tokens_[pos_]; }

    const Token& next(ParseErrorKind kind_if_missing, const char* what) {
        if (done()) fail_end(kind_if_missing, what);
        return tokens_[pos_++];
    }

    void expect(const char* symbol) {
        if (done()) fail_end(ParseErrorKind::bad_syntax, (std::string("'") + symbol + "'").c_str());
        const Token& tok = tokens_[pos_];
        if (tok.text != symbol) {
            throw ParseFailure{at(tok, ParseErrorKind::bad_syntax,
                                  std::string("expected '") + symbol + "', found '" + tok.text + "'")};
        }
        ++pos_;
    }

    bool accept(const char* symbol) {
        if (!done() && tokens_[pos_].text == symbol) {
            ++pos_;
            return true;
        }
        return false;
    }

    /// Reads a node label; separators are not valid labels.
    std::string node(const char* what) {
        const Token& tok = next(ParseErrorKind::bad_arity, what);
        if (!is_word(tok.text)) {
            throw ParseFailure{at(tok, ParseErrorKind::bad_arity,
                                  std::string("expected ") + what + ", found '" + tok.text + "'")};
        }
        return to_lower(tok.text);
    }

    double number(const char* what) {
        const Token& tok = next(ParseErrorKind::bad_arity, what);
        if (tok.text.size() == 1 && is_separator(tok.text[0])) {
            throw ParseFailure{at(tok, ParseErrorKind::bad_arity,
                                  std::string("expected ") + what + ", found '" + tok.text + "'")};
        }
        return resolve(tok);
    }

    double resolve(const Token& tok) const {
        const std::string& s = tok.text;
        if (s.size() >= 2 && s.front() == '{' && s.back() == '}') {
            const auto it = params_.find(to_lower(s.substr(1, s.size() - 2)));
            if (it == params_.end()) {
                throw ParseFailure{at(tok, ParseErrorKind::unknown_reference,
                                      "undefined parameter '" + s + "'")};
            }
            return it->second;
        }
        const auto value = parse_number(s);
        if (!value) {
            throw ParseFailure{at(tok, ParseErrorKind::bad_number, "malformed number '" + s + "'")};
        }
        return *value;
    }

    void finish(const char* card) {
        if (!done()) {
            throw ParseFailure{at(peek(), ParseErrorKind::bad_syntax,
                                  std::string("unexpected token '") + peek().text + "' in " + card)};
        }
    }

    [[noreturn]] void fail_end(ParseErrorKind kind, const char* what) const {
        std::size_t col = 1;
        if (!tokens_.empty()) col = tokens_.back().column + tokens_.back().text.size();
        throw ParseFailure{Diagnostic{kind, line_, col, std::string("expected ") + what}};
    }

private:
    const std::vector<Token>& tokens_;
    const std::unordered_map<std::string, double>& params_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

void require(bool ok, const Token& tok, const std::string& message) {
    if (!ok) throw ParseFailure{at(tok, ParseErrorKind::bad_value, message)};
}

SourceSpec parse_source(CardParser& p, const Token& anchor) {
    if (p.done()) p.fail_end(ParseErrorKind::bad_arity, "source value");
    const Token& head = p.peek();
    if (iequals(head.text, "SIN")) {
        p.next(ParseErrorKind::bad_syntax, "SIN");
        p.expect("(");
        SinSource s;
        s.offset = p.number("SIN offset");
        s.amplitude = p.number("SIN amplitude");
        s.freq = p.number("SIN frequency");
        if (!p.accept(")")) {
            s.phase_deg = p.number("SIN phase");
            p.expect(")");
        }
        require(s.freq > 0.0, head, "SIN frequency must be positive");
        return s;
    }
    if (iequals(head.text, "PULSE")) {
        p.next(ParseErrorKind::bad_syntax, "PULSE");
        p.expect("(");
        PulseSource s;
        s.v1 = p.number("PULSE v1");
        s.v2 = p.number("PULSE v2");
        s.delay = p.number("PULSE delay");
        s.rise = p.number("PULSE rise");
        s.fall = p.number("PULSE fall");
        s.width = p.number("PULSE width");
        s.period = p.number("PULSE period");
        p.expect(")");
        require(s.delay >= 0.0 && s.rise >= 0.0 && s.fall >= 0.0 && s.width >= 0.0, head,
                "PULSE timings must be non-negative");
        require(s.period > 0.0 && s.period >= s.rise + s.width + s.fall, head,
                "PULSE period must cover rise + width + fall");
        return s;
    }
    if (iequals(head.text, "DC")) p.next(ParseErrorKind::bad_syntax, "DC");
    (void)anchor;
    return DcSource{p.number("source value")};
}

MemristorParams parse_memristor_params(CardParser& p, const Token& anchor) {
    MemristorParams params;
    std::set<std::string> seen;
    while (!p.done()) {
        const Token& key = p.next(ParseErrorKind::bad_syntax, "parameter name");
        const std::string name = to_upper(key.text);
        if (!seen.insert(name).second) {
            throw ParseFailure{at(key, ParseErrorKind::bad_syntax, "repeated parameter '" + key.text + "'")};
        }
        p.expect("=");
        if (name == "WINDOW") {
            const Token& val = p.next(ParseErrorKind::bad_syntax, "window name");
            if (iequals(val.text, "BIOLEK")) params.window = WindowKind::biolek;
            else if (iequals(val.text, "PRINTED")) params.window = WindowKind::printed;
            else if (iequals(val.text, "NONE")) params.window = WindowKind::none;
            else throw ParseFailure{at(val, ParseErrorKind::bad_value, "unknown window '" + val.text + "'")};
            continue;
        }
        const Token& val_tok = p.peek();
        const double v = p.number("parameter value");
        if (name == "RON") params.r_on = v;
        else if (name == "ROFF") params.r_off = v;
        else if (name == "D") params.d = v;
        else if (name == "MU") params.mu_v = v;
        else if (name == "X0") params.x0 = v;
        else if (name == "ETA" || name == "P") {
            require(std::trunc(v) == v && std::abs(v) < 1e9, val_tok, name + " must be an integer");
            (name == "ETA" ? params.eta : params.p) = static_cast<int>(v);
        } else {
            throw ParseFailure{at(key, ParseErrorKind::bad_syntax, "unknown memristor parameter '" + key.text + "'")};
        }
    }
    const char* problem = validate(params);
    require(*problem == '\0', anchor, problem);
    return params;
}

Component parse_component(const LogicalLine& line, const std::unordered_map<std::string, double>& params) {
    CardParser p(line, params);
    const Token& name_tok = p.next(ParseErrorKind::bad_syntax, "card name");
    Component comp;
    comp.name = name_tok.text;
    const char kind = upper(name_tok.text.front());

    switch (kind) {
    case 'R':
    case 'C': {
        comp.nodes.push_back(p.node("node"));
        comp.nodes.push_back(p.node("node"));
        const Token& vt = p.done() ? name_tok : p.peek();
        const double v = p.number("value");
        require(v > 0.0, vt, std::string(kind == 'R' ? "resistance" : "capacitance") + " must be positive");
        if (kind == 'R') comp.element = Resistor{v};
        else comp.element = Capacitor{v};
        p.finish(kind == 'R' ? "resistor card" : "capacitor card");
        break;
    }
    case 'M': {
        comp.nodes.push_back(p.node("node"));
        comp.nodes.push_back(p.node("node"));
        comp.element = Memristor{parse_memristor_params(p, name_tok)};
        break;
    }
    case 'V': {
        comp.nodes.push_back(p.node("node"));
        comp.nodes.push_back(p.node("node"));
        comp.element = VoltageSource{parse_source(p, name_tok)};
        p.finish("voltage source card");
        break;
    }
    case 'E': {
        for (int k = 0; k < 4; ++k) comp.nodes.push_back(p.node("node"));
        Vcvs e;
        e.gain = p.number("gain");
        if (!p.done()) {
            const Token& key = p.next(ParseErrorKind::bad_syntax, "CLIP");
            if (!iequals(key.text, "CLIP")) {
                throw ParseFailure{at(key, ParseErrorKind::bad_syntax, "unexpected token '" + key.text + "'")};
            }
            p.expect("=");
            const Token& vt = p.done() ? key : p.peek();
            const double clip = p.number("clip level");
            require(clip > 0.0, vt, "CLIP must be positive");
            e.clip = clip;
        }
        comp.element = e;
        p.finish("VCVS card");
        break;
    }
    case 'O': {
        for (int k = 0; k < 3; ++k) comp.nodes.push_back(p.node("node"));
        comp.element = OpAmp{};
        p.finish("op-amp card");
        break;
    }
    default:
        throw ParseFailure{at(name_tok, ParseErrorKind::unknown_card, "unknown card '" + name_tok.text + "'")};
    }
    return comp;
}

Probe parse_probe(CardParser& p) {
    const Token& head = p.next(ParseErrorKind::bad_syntax, "probe");
    Probe probe;
    if (iequals(head.text, "V")) probe.kind = Probe::Kind::voltage;
    else if (iequals(head.text, "I")) probe.kind = Probe::Kind::current;
    else throw ParseFailure{at(head, ParseErrorKind::bad_syntax, "probe must be V(...) or I(...), found '" + head.text + "'")};
    p.expect("(");
    if (probe.kind == Probe::Kind::voltage) {
        probe.a = p.node("node");
        if (!p.accept(")")) {
            probe.b = p.node("reference node");
            p.expect(")");
        }
    } else {
        const Token& name = p.next(ParseErrorKind::bad_syntax, "element name");
        if (!is_word(name.text)) throw ParseFailure{at(name, ParseErrorKind::bad_syntax, "expected element name")};
        probe.a = name.text;
        p.expect(")");
    }
    return probe;
}

bool is_finite_value(const Element& e) {
    return std::visit(
        [](const auto& el) -> bool {
            using T = std::decay_t<decltype(el)>;
            if constexpr (std::is_same_v<T, Resistor>) return std::isfinite(el.resistance);
            else if constexpr (std::is_same_v<T, Capacitor>) return std::isfinite(el.capacitance);
            else if constexpr (std::is_same_v<T, Vcvs>) return std::isfinite(el.gain) && (!el.clip || std::isfinite(*el.clip));
            else if constexpr (std::is_same_v<T, Memristor>)
                return std::isfinite(el.params.r_on) && std::isfinite(el.params.r_off) && std::isfinite(el.params.x0);
            else if constexpr (std::is_same_v<T, VoltageSource>)
                return std::visit(
                    [](const auto& s) {
                        using S = std::decay_t<decltype(s)>;
                        if constexpr (std::is_same_v<S, DcSource>) return std::isfinite(s.level);
                        else if constexpr (std::is_same_v<S, SinSource>)
                            return std::isfinite(s.offset) && std::isfinite(s.amplitude) && std::isfinite(s.freq) && std::isfinite(s.phase_deg);
                        else
                            return std::isfinite(s.v1) && std::isfinite(s.v2) && std::isfinite(s.delay) && std::isfinite(s.rise) &&
                                   std::isfinite(s.fall) && std::isfinite(s.width) && std::isfinite(s.period);
                    },
                    el.spec);
            else return true;
        },
        e);
}

// -----------------------------------------------------------------------------
// Structural validation
// -----------------------------------------------------------------------------

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// `component_lines` / `directive_lines` map items to source lines (may be empty).
std::vector<Diagnostic> validate_impl(const Netlist& n, const std::vector<std::size_t>& component_lines,
                                      const std::vector<std::size_t>& directive_lines) {
    std::vector<Diagnostic> out;
    auto comp_line = [&](std::size_t idx) { return idx < component_lines.size() ? component_lines[idx] : 0; };
    auto dir_line = [&](std::size_t idx) { return idx < directive_lines.size() ? directive_lines[idx] : 0; };

    std::map<std::string, std::size_t> names;
    for (std::size_t k = 0; k < n.components.size(); ++k) {
        const Component& c = n.components[k];
        const std::size_t line = comp_line(k);
        if (!is_word(c.name) || !is_alpha(c.name.front()) || upper(c.name.front()) != element_letter(c.element)) {
            out.push_back({ParseErrorKind::bad_syntax, line, 1, "invalid component name '" + c.name + "'"});
            continue;
        }
        if (!names.emplace(to_lower(c.name), k).second) {
            out.push_back({ParseErrorKind::duplicate_name, line, 1, "duplicate component name '" + c.name + "'"});
        }
        if (c.nodes.size() != element_arity(c.element)) {
            out.push_back({ParseErrorKind::bad_arity, line, 1,
                           c.name + " expects " + std::to_string(element_arity(c.element)) + " nodes"});
            continue;
        }
        for (const auto& node : c.nodes) {
            if (!is_word(node) || node != to_lower(node)) {
                out.push_back({ParseErrorKind::bad_syntax, line, 1, "invalid node label '" + node + "'"});
            }
        }
        if (!is_finite_value(c.element)) {
            out.push_back({ParseErrorKind::bad_number, line, 1, c.name + " has a non-finite value"});
        }
        if (const auto* m = std::get_if<Memristor>(&c.element)) {
            if (const char* problem = validate(m->params); *problem) {
                out.push_back({ParseErrorKind::bad_value, line, 1, c.name + ": " + problem});
            }
        }
        if (const auto* r = std::get_if<Resistor>(&c.element); r && !(r->resistance > 0.0)) {
            out.push_back({ParseErrorKind::bad_value, line, 1, c.name + ": resistance must be positive"});
        }
        if (const auto* cap = std::get_if<Capacitor>(&c.element); cap && !(cap->capacitance > 0.0)) {
            out.push_back({ParseErrorKind::bad_value, line, 1, c.name + ": capacitance must be positive"});
        }
    }
    if (!out.empty()) return out;

    // Directives
    std::set<std::string> param_names;
    const std::set<std::string> nodes = n.node_names();
    for (std::size_t k = 0; k < n.directives.size(); ++k) {
        const std::size_t line = dir_line(k);
        std::visit(
            [&](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, TranDirective>) {
                    if (!(d.step > 0.0 && d.step < d.stop && std::isfinite(d.stop))) {
                        out.push_back({ParseErrorKind::bad_value, line, 1, ".tran requires 0 < step < stop"});
                    }
                } else if constexpr (std::is_same_v<T, ParamDirective>) {
                    if (!is_word(d.name) || d.name != to_lower(d.name) || !std::isfinite(d.value)) {
                        out.push_back({ParseErrorKind::bad_syntax, line, 1, "invalid .param '" + d.name + "'"});
                    } else if (!param_names.insert(d.name).second) {
                        out.push_back({ParseErrorKind::duplicate_name, line, 1, "duplicate .param '" + d.name + "'"});
                    }
                } else {
                    for (const Probe& pr : d.probes) {
                        if (pr.kind == Probe::Kind::voltage) {
                            for (const std::string* node : {&pr.a, &pr.b}) {
                                if (node == &pr.b && node->empty()) continue;
                                if (!nodes.count(*node)) {
                                    out.push_back({ParseErrorKind::unknown_reference, line, 1,
                                                   "probe references unknown node '" + *node + "'"});
                                }
                            }
                        } else {
                            const Component* c = n.find(pr.a);
                            if (!c || c->name != pr.a || !pr.b.empty()) {
                                out.push_back({ParseErrorKind::unknown_reference, line, 1,
                                               "probe references unknown element '" + pr.a + "'"});
                            }
                        }
                    }
                }
            },
            n.directives[k]);
    }
    if (!out.empty()) return out;
    if (n.components.empty()) return out;

    // Connectivity: every node must reach ground. Control ports of E and the
    // input pair of O carry no current, so they form separate groups.
    std::map<std::string, std::size_t> index;
    for (const auto& node : nodes) index.emplace(node, index.size());
    if (!index.count(std::string(ground_node))) {
        out.push_back({ParseErrorKind::missing_ground, comp_line(0), 1, "no component connects to ground node '0'"});
        return out;
    }
    UnionFind uf(index.size());
    const std::size_t gnd = index.at(std::string(ground_node));
    for (const Component& c : n.components) {
        const auto id = [&](std::size_t k) { return index.at(c.nodes[k]); };
        if (std::holds_alternative<Vcvs>(c.element)) {
            uf.unite(id(0), id(1));
            uf.unite(id(2), id(3));
        } else if (std::holds_alternative<OpAmp>(c.element)) {
            uf.unite(id(0), gnd);
            uf.unite(id(1), id(2));
        } else {
            uf.unite(id(0), id(1));
        }
    }
    for (std::size_t k = 0; k < n.components.size(); ++k) {
        for (const auto& node : n.components[k].nodes) {
            if (uf.find(index.at(node)) != uf.find(gnd)) {
                out.push_back({ParseErrorKind::disconnected_node, comp_line(k), 1,
                               "node '" + node + "' has no path to ground"});
                return out;
            }
        }
    }
    return out;
}

}  // namespace

// -----------------------------------------------------------------------------
// Sources
// -----------------------------------------------------------------------------

double source_value(const SourceSpec& spec, double t) {
    constexpr double pi = 3.14159265358979323846;
    return std::visit(
        [t](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, DcSource>) {
                return s.level;
            } else if constexpr (std::is_same_v<T, SinSource>) {
                return s.offset + s.amplitude * std::sin(2.0 * pi * s.freq * t + s.phase_deg * pi / 180.0);
            } else {
                if (t < s.delay) return s.v1;
                const double tt = std::fmod(t - s.delay, s.period);
                if (tt < s.rise) return s.v1 + (s.v2 - s.v1) * tt / s.rise;
                if (tt < s.rise + s.width) return s.v2;
                if (tt < s.rise + s.width + s.fall) return s.v2 - (s.v2 - s.v1) * (tt - s.rise - s.width) / s.fall;
                return s.v1;
            }
        },
        spec);
}

std::vector<double> source_breakpoints(const SourceSpec& spec, double t_stop) {
    std::vector<double> out;
    if (const auto* s = std::get_if<PulseSource>(&spec)) {
        const double corners[] = {0.0, s->rise, s->rise + s->width, s->rise + s->width + s->fall};
        for (double base = s->delay; base <= t_stop; base += s->period) {
            for (double c : corners) {
                if (base + c <= t_stop) out.push_back(base + c);
            }
            if (out.size() > 4'000'000) break;
        }
    }
    return out;
}

// -----------------------------------------------------------------------------
// Elements and netlist accessors
// -----------------------------------------------------------------------------

char element_letter(const Element& element) {
    static constexpr char letters[] = {'R', 'C', 'M', 'V', 'E', 'O'};
    return letters[element.index()];
}

std::size_t element_arity(const Element& element) {
    if (std::holds_alternative<Vcvs>(element)) return 4;
    if (std::holds_alternative<OpAmp>(element)) return 3;
    return 2;
}

std::string Probe::label() const {
    if (kind == Kind::current) return "I(" + a + ")";
    if (b.empty()) return "V(" + a + ")";
    return "V(" + a + "," + b + ")";
}

std::set<std::string> Netlist::node_names() const {
    std::set<std::string> out;
    for (const auto& c : components) out.insert(c.nodes.begin(), c.nodes.end());
    return out;
}

const Component* Netlist::find(std::string_view name) const {
    for (const auto& c : components) {
        if (iequals(c.name, name)) return &c;
    }
    return nullptr;
}

std::optional<TranDirective> Netlist::tran() const {
    std::optional<TranDirective> out;
    for (const auto& d : directives) {
        if (const auto* t = std::get_if<TranDirective>(&d)) out = *t;
    }
    return out;
}

std::vector<Probe> Netlist::probes() const {
    std::vector<Probe> out;
    for (const auto& d : directives) {
        if (const auto* p = std::get_if<ProbeDirective>(&d)) out.insert(out.end(), p->probes.begin(), p->probes.end());
    }
    return out;
}

// -----------------------------------------------------------------------------
// Diagnostics
// -----------------------------------------------------------------------------

const char* to_string(ParseErrorKind kind) {
    switch (kind) {
    case ParseErrorKind::unknown_card: return "UnknownCard";
    case ParseErrorKind::bad_arity: return "BadArity";
    case ParseErrorKind::duplicate_name: return "DuplicateName";
    case ParseErrorKind::bad_number: return "BadNumber";
    case ParseErrorKind::bad_syntax: return "BadSyntax";
    case ParseErrorKind::bad_value: return "BadValue";
    case ParseErrorKind::unknown_reference: return "UnknownReference";
    case ParseErrorKind::missing_ground: return "MissingGround";
    case ParseErrorKind::disconnected_node: return "DisconnectedNode";
    }
    return "Unknown";
}

std::string Diagnostic::format() const {
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << to_string(kind) << ": " << message;
    return os.str();
}

// -----------------------------------------------------------------------------
// Numbers
// -----------------------------------------------------------------------------

std::optional<double> parse_number(std::string_view token) {
    if (token.empty()) return std::nullopt;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    if (*begin == '+') ++begin;
    if (begin == end || *begin == '+' || (*begin == '-' && begin + 1 == end)) return std::nullopt;
    // from_chars would accept these spellings
    if (is_alpha(*begin) || (*begin == '-' && is_alpha(begin[1]))) return std::nullopt;

    double mantissa = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, mantissa, std::chars_format::general);
    if (ec != std::errc() || ptr == begin) return std::nullopt;

    std::string rest = to_lower(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    double scale = 1.0;
    std::size_t used = 0;
    if (rest.rfind("meg", 0) == 0) {
        scale = 1e6;
        used = 3;
    } else if (!rest.empty()) {
        switch (rest.front()) {
        case 'f': scale = 1e-15; used = 1; break;
        case 'p': scale = 1e-12; used = 1; break;
        case 'n': scale = 1e-9; used = 1; break;
        case 'u': scale = 1e-6; used = 1; break;
        case 'm': scale = 1e-3; used = 1; break;
        case 'k': scale = 1e3; used = 1; break;
        case 'g': scale = 1e9; used = 1; break;
        default: break;
        }
    }
    // a dangling exponent such as "1e" is not a unit
    if (used == 0 && !rest.empty() && rest.front() == 'e') return std::nullopt;
    // anything after the suffix must be unit letters
    if (!std::all_of(rest.begin() + static_cast<std::ptrdiff_t>(used), rest.end(), is_alpha)) return std::nullopt;
    const double value = mantissa * scale;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

// -----------------------------------------------------------------------------
// parse / validate / serialize
// -----------------------------------------------------------------------------

ParseResult parse(std::string_view text) {
    ParseResult result;
    Netlist netlist;
    const std::vector<LogicalLine> lines = split_lines(text, netlist.title);

    std::vector<std::size_t> component_lines;
    std::vector<std::size_t> directive_lines;
    std::unordered_map<std::string, double> params;
    std::map<std::string, std::size_t> seen_names;

    // .param values are visible to every card, wherever they appear.
    for (const auto& line : lines) {
        if (iequals(line.tokens.front().text, ".end")) break;
        if (!iequals(line.tokens.front().text, ".param")) continue;
        try {
            CardParser p(line, params);
            p.next(ParseErrorKind::bad_syntax, ".param");
            if (p.done()) p.fail_end(ParseErrorKind::bad_syntax, "name=value");
            while (!p.done()) {
                const Token& name = p.next(ParseErrorKind::bad_syntax, "parameter name");
                if (!is_word(name.text) || name.text.front() == '{') {
                    throw ParseFailure{at(name, ParseErrorKind::bad_syntax, "invalid parameter name '" + name.text + "'")};
                }
                p.expect("=");
                const Token& vt = p.next(ParseErrorKind::bad_syntax, "parameter value");
                const auto value = parse_number(vt.text);
                if (!value) throw ParseFailure{at(vt, ParseErrorKind::bad_number, "malformed number '" + vt.text + "'")};
                const std::string key = to_lower(name.text);
                if (!params.emplace(key, *value).second) {
                    throw ParseFailure{at(name, ParseErrorKind::duplicate_name, "duplicate .param '" + name.text + "'")};
                }
            }
        } catch (const ParseFailure& f) {
            result.diagnostics.push_back(f.diagnostic);
            return result;
        }
    }

    for (const auto& line : lines) {
        const Token& head = line.tokens.front();
        try {
            if (head.text.front() == '.') {
                CardParser p(line, params);
                p.next(ParseErrorKind::bad_syntax, "directive");
                if (iequals(head.text, ".end")) break;
                if (iequals(head.text, ".tran")) {
                    TranDirective tran;
                    tran.step = p.number("time step");
                    tran.stop = p.number("stop time");
                    p.finish(".tran");
                    if (!(tran.step > 0.0 && tran.step < tran.stop)) {
                        throw ParseFailure{at(head, ParseErrorKind::bad_value, ".tran requires 0 < step < stop")};
                    }
                    netlist.directives.emplace_back(tran);
                    directive_lines.push_back(line.line);
                } else if (iequals(head.text, ".param")) {
                    while (!p.done()) {
                        const Token& name = p.next(ParseErrorKind::bad_syntax, "name");
                        p.expect("=");
                        p.next(ParseErrorKind::bad_syntax, "value");
                        const std::string key = to_lower(name.text);
                        netlist.directives.emplace_back(ParamDirective{key, params.at(key)});
                        directive_lines.push_back(line.line);
                    }
                } else if (iequals(head.text, ".probe")) {
                    ProbeDirective probes;
                    while (!p.done()) probes.probes.push_back(parse_probe(p));
                    if (probes.probes.empty()) p.fail_end(ParseErrorKind::bad_syntax, "at least one probe");
                    netlist.directives.emplace_back(std::move(probes));
                    directive_lines.push_back(line.line);
                } else {
                    throw ParseFailure{at(head, ParseErrorKind::unknown_card, "unknown directive '" + head.text + "'")};
                }
                continue;
            }
            Component comp = parse_component(line, params);
            const auto [it, inserted] = seen_names.emplace(to_lower(comp.name), line.line);
            if (!inserted) {
                throw ParseFailure{at(head, ParseErrorKind::duplicate_name,
                                      "duplicate component name '" + comp.name + "' (first defined on line " +
                                          std::to_string(it->second) + ")")};
            }
            netlist.components.push_back(std::move(comp));
            component_lines.push_back(line.line);
        } catch (const ParseFailure& f) {
            result.diagnostics.push_back(f.diagnostic);
            return result;
        }
    }

    // Current probes resolve to the declared element name.
    for (std::size_t k = 0; k < netlist.directives.size(); ++k) {
        auto* pd = std::get_if<ProbeDirective>(&netlist.directives[k]);
        if (!pd) continue;
        for (Probe& pr : pd->probes) {
            if (pr.kind != Probe::Kind::current) continue;
            if (const Component* c = netlist.find(pr.a)) pr.a = c->name;
        }
    }

    result.diagnostics = validate_impl(netlist, component_lines, directive_lines);
    if (result.diagnostics.empty()) result.netlist = std::move(netlist);
    return result;
}

std::vector<Diagnostic> validate(const Netlist& netlist) { return validate_impl(netlist, {}, {}); }

std::string serialize(const Netlist& netlist) {
    std::ostringstream os;
    os << netlist.title << '\n';
    const auto num = [](double v) { return format_number(v); };
    for (const auto& c : netlist.components) {
        os << c.name;
        for (const auto& node : c.nodes) os << ' ' << node;
        std::visit(
            [&](const auto& el) {
                using T = std::decay_t<decltype(el)>;
                if constexpr (std::is_same_v<T, Resistor>) {
                    os << ' ' << num(el.resistance);
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    os << ' ' << num(el.capacitance);
                } else if constexpr (std::is_same_v<T, Memristor>) {
                    const auto& m = el.params;
                    static constexpr const char* windows[] = {"BIOLEK", "PRINTED", "NONE"};
                    os << " RON=" << num(m.r_on) << " ROFF=" << num(m.r_off) << " D=" << num(m.d)
                       << " MU=" << num(m.mu_v) << " ETA=" << m.eta << " P=" << m.p << " X0=" << num(m.x0)
                       << " WINDOW=" << windows[static_cast<int>(m.window)];
                } else if constexpr (std::is_same_v<T, VoltageSource>) {
                    std::visit(
                        [&](const auto& s) {
                            using S = std::decay_t<decltype(s)>;
                            if constexpr (std::is_same_v<S, DcSource>) {
                                os << " DC " << num(s.level);
                            } else if constexpr (std::is_same_v<S, SinSource>) {
                                os << " SIN(" << num(s.offset) << ' ' << num(s.amplitude) << ' ' << num(s.freq)
                                   << ' ' << num(s.phase_deg) << ')';
                            } else {
                                os << " PULSE(" << num(s.v1) << ' ' << num(s.v2) << ' ' << num(s.delay) << ' '
                                   << num(s.rise) << ' ' << num(s.fall) << ' ' << num(s.width) << ' '
                                   << num(s.period) << ')';
                            }
                        },
                        el.spec);
                } else if constexpr (std::is_same_v<T, Vcvs>) {
                    os << ' ' << num(el.gain);
                    if (el.clip) os << " CLIP=" << num(*el.clip);
                }
            },
            c.element);
        os << '\n';
    }
    for (const auto& d : netlist.directives) {
        std::visit(
            [&](const auto& dir) {
                using T = std::decay_t<decltype(dir)>;
                if constexpr (std::is_same_v<T, TranDirective>) {
                    os << ".tran " << num(dir.step) << ' ' << num(dir.stop);
                } else if constexpr (std::is_same_v<T, ParamDirective>) {
                    os << ".param " << dir.name << '=' << num(dir.value);
                } else {
                    os << ".probe";
                    for (const auto& p : dir.probes) os << ' ' << p.label();
                }
            },
            d);
        os << '\n';
    }
    os << ".end\n";
    return os.str();
}

}  // namespace memsim
