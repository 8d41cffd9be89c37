#pragma once

// CSV reading and writing for waveforms and spectra.

#include "memsim/analysis.hpp"
#include "memsim/engine.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace memsim {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Header `t,<channel names>`; names holding a comma or quote are quoted.
/// Values use %.17g so they read back bit-exact.
void write_waveform_csv(std::ostream& out, const Waveform& wave);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

/// Inverse of write_waveform_csv. dt is taken from the first two rows.
/// Throws IoError on malformed input.
[[nodiscard]] Waveform read_waveform_csv(std::istream& in);

/// File wrappers; throw IoError when the file cannot be opened or written.
void save_waveform_csv(const std::string& path, const Waveform& wave);
void save_spectrum_csv(const std::string& path, const Spectrum& spectrum);
void save_text(const std::string& path, const std::string& text);
[[nodiscard]] Waveform load_waveform_csv(const std::string& path);
[[nodiscard]] std::string load_text(const std::string& path);

}  // namespace memsim
