#pragma once

// Command-line front end: configuration parsing (flags and key=value files),
// experiment dispatch and report emission.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sstlab/correlations.hpp"

namespace sstlab::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kReportSchema = "sstlab.report";
inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Malformed configuration or flags; mapped to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Real literal or one of the symbolic constants sqrt2-1, sqrt3-1.
double parse_real(const std::string& text);

/// "skew2", "rotation:a=sqrt2-1", "affine:d=3", "rotskew:a=...",
/// "heisenberg:a1=...,a2=...,a3=...", "bernoulli:p=.5/.5", joined with '*'
/// for products.
SystemSpec parse_system(const std::string& text);

/// "one", "char:f1,f2,...", "box:lo-hi,lo-hi,...", "sym:s" (symbol indicator).
Observable parse_observable(const SystemSpec& sys, const std::string& text);
/// ';'-separated observables.
std::vector<Observable> parse_observables(const SystemSpec& sys, const std::string& text);

/// Generator sets for strong-stationarity checks: characters,
/// y-characters / last-characters / x3-characters, cylinders.
std::vector<Observable> parse_algebra(const SystemSpec& sys, const std::string& name, int max_freq);

/// key=value lines; '#' starts a comment. Throws UsageError on a missing file
/// or malformed line.
std::map<std::string, std::string> read_config(const std::string& path);

/// Runs the command line and returns the exit code. The human-readable report
/// goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sstlab::cli
