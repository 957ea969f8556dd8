#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mqmc/errors.hpp"
#include "mqmc/lattice.hpp"
#include "mqmc/space.hpp"

namespace mqmc {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitSuccess = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitNumeric = 3,
    kExitCapability = 4,
};

/// An output file exists and --force was not given.
class OutputExistsError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

/// Linear-interpolation quantile (the "type 7" definition) of a nonempty sample.
double empirical_quantile(std::vector<double> values, double q);

struct WceHistogram {
    std::uint64_t n_points = 0;
    std::size_t dimension = 0;
    std::size_t k = 1;                // 1: single vectors; odd k > 1: median of k vectors per sample
    std::vector<double> log2_wce;     // sample i is element i-1
    std::optional<double> cbc_log2_wce;
    std::vector<std::uint64_t> cbc_z;
};

/// Sample i (1-based) uses vector seed derive(seed, i, vector) when k = 1; in
/// median mode vector l of sample i uses derive(derive(seed, i, study), l, vector).
/// The result does not depend on the thread count.
WceHistogram wce_histogram(const WeightedSpace& space, const ThetaTable& table, std::size_t samples, std::size_t k,
                           SeedSpec seed, bool with_cbc, std::size_t threads = 0);

/// Fraction of samples whose e^sh is at most factor times the CBC value.
double fraction_within(const WceHistogram& h, double factor);

/// Runs the tool. Normal output goes to out, diagnostics to err; returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mqmc
