#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mqmc/lattice.hpp"
#include "mqmc/numerics.hpp"

namespace mqmc {

enum class DensityKind { standard_normal };

/// Univariate density phi with cdf Phi and inverse cdf.
struct Density {
    DensityKind kind = DensityKind::standard_normal;

    double pdf(double y) const { return normal_pdf(y); }
    double cdf(double y) const { return normal_cdf(y); }
    double ccdf(double y) const { return normal_ccdf(y); }
    double inv_cdf(double p) const { return normal_inv_cdf(p); }
    std::string name() const { return "standard-normal"; }
};

enum class WeightFunctionKind {
    exp_abs,   // psi^2(x) = c * exp(-2 alpha |x|)
    constant,  // psi^2(x) = c
    gaussian,  // psi^2(x) = c * exp(-beta x^2)
};

/// Weight function psi_j, described through psi_j^2.
struct WeightFunction {
    WeightFunctionKind kind = WeightFunctionKind::exp_abs;
    double scale = 1.0;  // c
    double rate = 0.0;   // alpha (exp-abs) or beta (gaussian); unused for constant

    static WeightFunction exp_abs(double alpha, double c = 1.0);
    static WeightFunction constant(double c = 1.0);
    static WeightFunction gaussian(double beta, double c = 1.0);

    /// Throws ArgumentError on non-finite or nonpositive parameters.
    void validate() const;

    double log_psi_squared(double x) const;
    double psi_squared(double x) const { return std::exp(log_psi_squared(x)); }
    /// 1 / psi^2(x).
    double inverse_psi_squared(double x) const { return std::exp(-log_psi_squared(x)); }
    bool is_even() const { return true; }

    std::string kind_name() const;
    /// Stable textual key (parameters as exact hex floats) for caching and dedup.
    std::string key() const;

    bool operator==(const WeightFunction&) const = default;
};

enum class WeightKind { product, pod };

/// gamma_u = prod_{j in u} gamma_j (product) or Gamma_{|u|} prod_{j in u} gamma_j (POD).
struct WeightScheme {
    WeightKind kind = WeightKind::product;
    std::vector<double> gamma;          // gamma_1..gamma_s
    std::vector<double> order_weights;  // Gamma_0..Gamma_s (POD only), Gamma_0 = 1

    static WeightScheme product(std::vector<double> gamma);
    static WeightScheme pod(std::vector<double> order_weights, std::vector<double> gamma);

    std::size_t dimension() const { return gamma.size(); }
    void validate() const;
};

struct StrongerConditionReport {
    bool passed = false;
    double left_integral = 0.0;   // int_{-inf}^0 Phi / psi^2
    double right_integral = 0.0;  // int_0^inf (1 - Phi) / psi^2
    std::string diagnostics;
};

/// Checks both one-sided integrals at c = 0: a log-space tail test (the
/// integrand must be decreasing and below e^-60 at the truncation point) plus
/// quadrature of the truncated integrals.
StrongerConditionReport check_stronger_condition(const Density& density, const WeightFunction& psi);

class WeightedSpace {
public:
    /// Throws ArgumentError on inconsistent sizes and SpaceInvalidError when a
    /// weight function fails the stronger condition.
    WeightedSpace(Density density, std::vector<WeightFunction> weight_functions, WeightScheme weights);

    std::size_t dimension() const { return weight_functions_.size(); }
    const Density& density() const { return density_; }
    const WeightFunction& weight_function(std::size_t j) const { return weight_functions_.at(j); }
    const std::vector<WeightFunction>& weight_functions() const { return weight_functions_; }
    const WeightScheme& weights() const { return weights_; }

    /// Indices of distinct weight functions, and the group each coordinate belongs to.
    const std::vector<std::size_t>& distinct_representatives() const { return representatives_; }
    std::size_t group_of(std::size_t j) const { return group_.at(j); }

    /// The first d coordinates as a space of their own.
    WeightedSpace truncated(std::size_t d) const;

private:
    Density density_;
    std::vector<WeightFunction> weight_functions_;
    WeightScheme weights_;
    std::vector<std::size_t> representatives_;
    std::vector<std::size_t> group_;
};

// ---------------------------------------------------------------------------
// theta_j and its Fourier coefficients
// ---------------------------------------------------------------------------

/// theta for a single (density, psi) pair, u in [0,1].
double theta_kernel(const Density& density, const WeightFunction& psi, double u,
                    const QuadratureSpec& spec = {});

/// theta_j(u) (coordinate j is 0-based).
double theta(const WeightedSpace& space, std::size_t j, double u, const QuadratureSpec& spec = {});

/// Fourier coefficient of theta_j at h != 0.
double theta_hat(const WeightedSpace& space, std::size_t j, std::int64_t h);
double theta_hat_kernel(const Density& density, const WeightFunction& psi, std::int64_t h);

/// hat-theta(1..H) for one (density, psi) pair in a single sweep; entry h-1 holds h.
std::vector<double> theta_hat_all(const Density& density, const WeightFunction& psi, std::size_t H);

/// C(phi, psi_j) = int Phi (1 - Phi) / psi_j^2, which also equals theta_j(0).
/// Throws SpaceInvalidError when the stronger condition fails.
double embedding_constant(const WeightedSpace& space, std::size_t j);
double embedding_constant(const Density& density, const WeightFunction& psi);

/// Values theta_j(n/N), n = 0..N-1. Coordinates sharing a weight function share storage.
class ThetaTable {
public:
    ThetaTable() = default;
    ThetaTable(std::uint64_t n_points, std::vector<std::vector<double>> distinct,
               std::vector<std::size_t> group);

    std::uint64_t n_points() const { return n_points_; }
    std::size_t dimension() const { return group_.size(); }
    const double* row(std::size_t j) const { return distinct_[group_[j]].data(); }
    double operator()(std::size_t j, std::uint64_t n) const { return distinct_[group_[j]][n]; }
    const std::vector<std::vector<double>>& distinct() const { return distinct_; }

private:
    std::uint64_t n_points_ = 0;
    std::vector<std::vector<double>> distinct_;
    std::vector<std::size_t> group_;
};

/// Table for (space, N), using theta(u) = theta(1-u) and one row per distinct psi.
/// threads = 0 means all cores. When MQMC_CACHE_DIR is set, rows are read from
/// and written to the on-disk cache (see theta_cache.hpp).
ThetaTable build_theta_table(const WeightedSpace& space, std::uint64_t n_points,
                             std::size_t threads = 0, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Worst-case error
// ---------------------------------------------------------------------------

/// Squared shift-averaged worst-case error of z. Uses the first z.dimension()
/// coordinates of the space and table.
double wce_squared(const WeightedSpace& space, const GeneratingVector& z, const ThetaTable& table);

/// log2 e^sh from e^sh squared.
double log2_wce(double wce_sq);

struct FourierOracleResult {
    double value = 0.0;       // truncated dual-lattice sum
    double tail_bound = 0.0;  // bound on the omitted frequencies
};

struct CoordinateDecay {
    double rate = 1.0;      // r_j
    double constant = 1.0;  // C_j
};

/// Per-coordinate decay hat-theta_j(h) <= C_j / |h|^{2 r_j}.
struct DecayEstimate {
    std::vector<CoordinateDecay> coordinates;
    double rate() const;  // min_j r_j
};

/// Dual-lattice form of the squared error, brute force over |h_j| <= H.
/// Limited to s <= 3 and N <= 64 (CapabilityError otherwise). When `decay` is
/// absent it is fitted.
FourierOracleResult wce_fourier_oracle(const WeightedSpace& space, const GeneratingVector& z,
                                       std::size_t H, const std::optional<DecayEstimate>& decay = {});

struct DecayFitRange {
    std::int64_t h_min = 2;
    std::int64_t h_max = std::int64_t{1} << 14;
    std::size_t samples = 64;
};

/// Fitted rate is capped at this value.
inline constexpr double kDecayRateCap = 1.0;

/// Least-squares fit of log hat-theta_j(h) against log h, rate capped at
/// kDecayRateCap; C_j is then raised so the bound holds at every sampled h and at h = 1.
CoordinateDecay fit_decay(const WeightedSpace& space, std::size_t j, const DecayFitRange& range = {});
DecayEstimate fit_decay(const WeightedSpace& space, const DecayFitRange& range = {});

/// epsilon(delta, lambda) of the probabilistic bound.
double epsilon_bound(const WeightedSpace& space, std::uint64_t n_points, double delta, double lambda,
                     const DecayEstimate& decay);

/// Right side of the average bound on mean [e^sh]^{2 lambda} over G_N^s.
double average_bound_rhs(const WeightedSpace& space, std::uint64_t n_points, double lambda,
                         const DecayEstimate& decay);

/// Constant C(eta) for phi standard normal and psi(x) = exp(-|x|/16), valid with r = 1 - eta.
double example1_decay_constant(double eta);

struct BoundInfimum {
    double log2_epsilon = 0.0;
    double eta = 0.0;
    double lambda = 0.0;
    std::size_t evaluated = 0;
};

/// Grid infimum over (eta, lambda) of log2 epsilon(1, lambda) for the example-1
/// space with gamma_j = 1/j^2 and s coordinates. The grid has G = round(sqrt(grid_size))
/// points per axis: eta_i = i/(2G), i = 1..G-1, and
/// lambda_k = lo + (1 - lo) k / G, k = 1..G, lo = 1/(2(1 - eta)). Doubling G refines the grid.
BoundInfimum theoretical_bound_infimum(std::uint64_t n_points, std::size_t grid_size = 40000,
                                       std::size_t s = 30);

enum class KSchedule { fixed_rate, slow_growth };

/// Smallest odd k with k >= 4 ceil(r log2 N) - 1 (fixed_rate) or
/// k >= 4 ceil(h(N) log2 N) - 1 with h(N) = max(1, log log N) (slow_growth).
std::size_t choose_k(std::uint64_t n_points, double r, KSchedule schedule = KSchedule::fixed_rate);

} // namespace mqmc
