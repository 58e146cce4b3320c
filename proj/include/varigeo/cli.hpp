#pragma once

// Subcommand orchestration behind the varigeo executable.  Reports are JSON
// on stdout (or --out); trajectories are CSV files.  Exit codes:
//   0 success          2 parse/input error   3 hypothesis failure
//   4 rank undecided   5 inconsistent dynamics (report still emitted)
//   6 gauge freedom without pinning          7 verification failure
//   1 anything else

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace varigeo::cli {

struct Options {
    std::optional<std::string> out;  // report path; default stdout
    std::uint64_t seed = 20240817ull;
    int trials = 8;
};

// command is one of derive | classify | integrate | verify
int run(const std::string& command, const std::string& file,
        const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace varigeo::cli
