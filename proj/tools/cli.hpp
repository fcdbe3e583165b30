#pragma once

#include <iosfwd>

namespace shapecomplete::cli {

/// Exit status per failure category; 0 on success.
enum ExitCode : int { ok = 0, internal = 1, config = 2, io = 3, format = 4, topology = 5, singular = 6 };

/**
 * Runs one command line. Normal output goes to `out`; failures print a single
 * "error: <CATEGORY>: <message>" line to `err`.
 */
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace shapecomplete::cli
