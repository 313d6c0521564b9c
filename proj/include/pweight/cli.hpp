#pragma once

#include <string>
#include <vector>

namespace pweight::cli {

/// Entry point shared by the binary and the tests.  Returns the process
/// exit code; never throws (errors become messages on stderr + nonzero).
int run(std::vector<std::string> args);

/// Runs one named simulation experiment and returns the result table as TSV
/// text (first line header).  `threads` caps worker parallelism; 0 means
/// use PWEIGHT_THREADS or the hardware count.
std::string run_experiment(const std::string& name, std::uint64_t seed, unsigned threads = 0);

}  // namespace pweight::cli
