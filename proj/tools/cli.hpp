#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace so3sync::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kInputError = 2,
    kRuntimeError = 3,
};

/// Entry point shared by the executable and the integration tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest-safe decimal form with 17 significant digits.
std::string format_double(double v);

/// Writes `content` to `path` through a sibling temp file and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// --seed when given, else SO3SYNC_SEED, else 1.
std::uint64_t resolve_seed(const std::string& flag_value);

/// Runs body(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

struct FuzzResult {
    int trials = 0;
    int passed = 0;
    double worst = 0.0;           ///< worst residual, or smallest margin for lemma1
    std::string worst_label;
    std::vector<std::string> failures;
};

FuzzResult fuzz_lemma1(int trials, std::uint64_t seed, int jobs);
FuzzResult fuzz_identities(int trials, std::uint64_t seed, int jobs);
FuzzResult fuzz_lyapunov(int trials, std::uint64_t seed, int jobs);

}  // namespace so3sync::cli
