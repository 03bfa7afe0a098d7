#pragma once

// Batch front-end. `run` is the whole program minus process setup, so tests
// can drive it in-process and compare the bytes it writes.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "detergo/alpha.hpp"
#include "detergo/dynamics.hpp"
#include "detergo/spec_io.hpp"

namespace detergo::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kAssertion = 2 };

/// args excludes the program name. Reports go to `out` (or the --out file),
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "4096", "2^12", "10^6", "1e6".
std::uint64_t parse_count(const std::string& text);
/// "2^8..2^20" (every power of two in between), or a comma list of counts.
std::vector<std::uint64_t> parse_n_list(const std::string& text);

/// Alpha argument: a named constant, {"named":..}, {"cf":[..]},
/// {"decimal":"..","digits":n}, {"rational":"p/q"}, or a bare rational.
/// Returns the canonical JSON form.
json resolve_alpha_argument(const std::string& text);
Irrational parse_alpha(const json& doc);

/// "cos", "e1", "one", "surrogate", or {"terms":[[j, re, im], ...]}.
FourierFunction parse_fourier(const json& doc, const Irrational& alpha, double beta);

}  // namespace detergo::cli
