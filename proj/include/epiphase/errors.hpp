#pragma once

#include <stdexcept>
#include <string>

namespace epiphase {

// Failure classes surfaced by the library.  Everything thrown on purpose is an
// epiphase::Error carrying one of these codes, so callers (the CLI in
// particular) can map failures to exit codes without string matching.
enum class Errc {
    invalid_argument,      // caller broke a precondition
    out_of_range,          // index or date outside the supported window
    empty_series,          // an operation received or produced no data
    missing_data,          // a value required to be present is absent
    insufficient_data,     // too few observations for the requested analysis
    degenerate_regressor,  // zero variance in x, no slope can be estimated
    undefined_baseline,    // reduction against a zero or negative baseline
    sensor_rejected,       // per-sensor missing rate above the ceiling
    invalid_record,        // a record violates schema-level rules
    parse_error,           // malformed input file content
    io_error,              // file could not be opened / read / written
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_argument:     return "invalid_argument";
        case Errc::out_of_range:         return "out_of_range";
        case Errc::empty_series:         return "empty_series";
        case Errc::missing_data:         return "missing_data";
        case Errc::insufficient_data:    return "insufficient_data";
        case Errc::degenerate_regressor: return "degenerate_regressor";
        case Errc::undefined_baseline:   return "undefined_baseline";
        case Errc::sensor_rejected:      return "sensor_rejected";
        case Errc::invalid_record:       return "invalid_record";
        case Errc::parse_error:          return "parse_error";
        case Errc::io_error:             return "io_error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace epiphase
