#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evars {

/// Category of a library failure. Callers that need to degrade gracefully
/// (the online loop, the sweep harness) branch on this instead of on message text.
enum class ErrorKind {
    Schema,
    Parse,
    Ordering,
    Imputation,
    Spec,
    Split,
    Shape,
    Input,
    Conditioning,
    Config,
    Tuning,
    Calibration,
    History,
    DegenerateWindow,
    Parameter,
    Io,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Ordering: return "ordering";
        case ErrorKind::Imputation: return "imputation";
        case ErrorKind::Spec: return "spec";
        case ErrorKind::Split: return "split";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Input: return "input";
        case ErrorKind::Conditioning: return "conditioning";
        case ErrorKind::Config: return "config";
        case ErrorKind::Tuning: return "tuning";
        case ErrorKind::Calibration: return "calibration";
        case ErrorKind::History: return "history";
        case ErrorKind::DegenerateWindow: return "degenerate_window";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace evars
