#include "memsim/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace memsim {

namespace {

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (quoted) throw IoError("line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

double to_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    if (first < last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw IoError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
    }
    return v;
}

}  // namespace

void write_waveform_csv(std::ostream& out, const Waveform& wave) {
    out << 't';
    for (const auto& name : wave.names) out << ',' << quote(name);
    out << '\n';
    for (std::size_t r = 0; r < wave.t.size(); ++r) {
        put(out, wave.t[r]);
        for (const auto& ch : wave.channels) {
            out << ',';
            put(out, ch[r]);
        }
        out << '\n';
    }
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
    out << "freq_hz,magnitude,phase_rad\n";
    for (std::size_t k = 0; k < s.freq.size(); ++k) {
        put(out, s.freq[k]);
        out << ',';
        put(out, s.magnitude[k]);
        out << ',';
        put(out, s.phase[k]);
        out << '\n';
    }
}

Waveform read_waveform_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    auto header = split_fields(line, 1);
    if (header.empty() || header[0] != "t") throw IoError("line 1: first column must be 't'");

    Waveform w;
    w.names.assign(header.begin() + 1, header.end());
    w.channels.assign(w.names.size(), {});
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_fields(line, line_no);
        if (fields.size() != header.size()) {
            throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(fields.size()));
        }
        w.t.push_back(to_double(fields[0], line_no));
        for (std::size_t c = 1; c < fields.size(); ++c) w.channels[c - 1].push_back(to_double(fields[c], line_no));
    }
    if (w.t.size() >= 2) w.dt = w.t[1] - w.t[0];
    return w;
}

void save_waveform_csv(const std::string& path, const Waveform& wave) {
    std::ostringstream buf;
    write_waveform_csv(buf, wave);
    save_text(path, buf.str());
}

void save_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
    std::ostringstream buf;
    write_spectrum_csv(buf, spectrum);
    save_text(path, buf.str());
}

void save_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write to '" + path + "' failed");
}

Waveform load_waveform_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    return read_waveform_csv(f);
}

std::string load_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace memsim
