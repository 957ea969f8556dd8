#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqmc/lattice.hpp"

namespace mqmc {

/// f : R^s -> R. The estimators apply the inverse normal transform themselves.
struct Integrand {
    std::size_t dimension = 0;
    std::function<double(std::span<const double>)> evaluate;
    std::string name;
    std::optional<double> exact;
};

/// (1/N) sum_n f(Phi^{-1}(x_n)) over the shifted lattice.
double qmc_estimate(const Integrand& f, const GeneratingVector& z, const Shift& shift);

/// Middle order statistic of an odd-length sample.
double median_of(std::vector<double> values);

struct Replicate {
    GeneratingVector z;
    Shift shift;
    double value = 0.0;
};

struct ReplicateSet {
    std::size_t k = 0;
    SeedSpec seed;
    std::vector<Replicate> replicates;  // replicate l is element l-1
};

struct MedianResult {
    double value = 0.0;
    ReplicateSet replicates;
};

/// Replicate l draws z_l from derive_replicate_seed(seed, l, vector) and
/// Delta_l from derive_replicate_seed(seed, l, shift). threads = 0 means all cores.
MedianResult median_estimate(const Integrand& f, std::uint64_t n_points, std::size_t k, SeedSpec seed,
                             std::size_t threads = 1);

/// Mean of k random shifts of a fixed vector; shift l from derive_replicate_seed(seed, l, shift).
double shifted_mean_estimate(const Integrand& f, const GeneratingVector& z, std::size_t k, SeedSpec seed,
                             std::size_t threads = 1);

/// Plain Monte Carlo with M points. Points come in chunks of kMcChunk; chunk c
/// uses stream derive_replicate_seed(seed, c + 1, mc), so the value does not
/// depend on the thread count.
inline constexpr std::size_t kMcChunk = 4096;
double mc_estimate(const Integrand& f, std::uint64_t samples, SeedSpec seed, std::size_t threads = 1);

struct ReferenceSpec {
    std::uint64_t n_points = 1048583;  // prime just above 2^20
    std::size_t k = 11;
    std::size_t repetitions = 10;
};

struct ReferenceValue {
    double value = 0.0;
    double dispersion = 0.0;  // sample standard deviation of the repetitions
    std::string provenance;   // "median-lattice" or "analytic"
    std::uint64_t n_points = 0;
    std::size_t k = 0;
    std::size_t repetitions = 0;
    std::vector<double> repetition_values;
    SeedSpec seed;
};

/// Mean of `repetitions` median estimates; repetition r uses derive_replicate_seed(seed, r, reference).
ReferenceValue reference_value(const Integrand& f, SeedSpec seed, const ReferenceSpec& spec = {},
                               std::size_t threads = 0);

/// The exact value recorded as a reference (zero dispersion).
ReferenceValue analytic_reference(const Integrand& f);

enum class Method { mc, cbc_lattice, median_lattice };

std::string method_name(Method m);
Method parse_method(const std::string& name);

struct MAERow {
    Method method = Method::median_lattice;
    std::uint64_t n_points = 0;
    std::uint64_t budget = 0;  // integrand evaluations per estimate
    double mae = 0.0;
    std::size_t replicates = 0;  // L
    std::vector<double> estimates;
};

struct MAEStudyOptions {
    std::vector<std::uint64_t> n_points;
    std::size_t k = 11;
    std::size_t replicates = 20;  // L
    std::vector<Method> methods{Method::mc, Method::cbc_lattice, Method::median_lattice};
    SeedSpec seed;
    bool use_analytic_reference = false;  // requires Integrand::exact
    ReferenceSpec reference;
    std::map<std::uint64_t, GeneratingVector> cbc_vectors;  // required for cbc-lattice
    std::size_t threads = 0;
};

struct MAEStudy {
    std::string problem;
    std::vector<MAERow> rows;
    ReferenceValue reference;
    std::size_t k = 0;
    SeedSpec seed;
    std::vector<std::string> warnings;
};

/// For every (N, method): L independent estimates and their MAE against the
/// reference. Replicate l of row (N index i, method m) uses
///   derive(derive(derive(seed, l, study), i, row), m, method)
/// with m = 1, 2, 3 for mc, cbc-lattice, median-lattice; the reference uses
/// derive(seed, 1, reference). Rows come out in (N, method) order.
MAEStudy run_mae_study(const Integrand& f, const MAEStudyOptions& options);

/// Columns: method,N,budget,MAE,L,reference,reference_dispersion,seed.
std::string to_csv(const MAEStudy& study);
nlohmann::json to_json(const MAEStudy& study);

/// Least-squares slope of log2 y against log2 x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Rows of one method in increasing N.
std::vector<const MAERow*> rows_for(const MAEStudy& study, Method m);

} // namespace mqmc
