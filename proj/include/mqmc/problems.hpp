#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "mqmc/estimators.hpp"
#include "mqmc/numerics.hpp"
#include "mqmc/space.hpp"

namespace mqmc {

/// f(y) = exp(a . y), exact value exp(|a|^2 / 2).
Integrand exp_linear_integrand(std::vector<double> a);

/// The example-1 space: psi_j(x) = exp(-|x|/16), gamma_j = 1/j^2, product weights.
WeightedSpace example1_space(std::size_t s = 30);

// ---------------------------------------------------------------------------
// Asian put option under Black-Scholes, PCA path construction
// ---------------------------------------------------------------------------

enum class AsianMode { value, cdf };

struct AsianSpec {
    double S0 = 100.0;
    double rate = 0.1;  // risk-free rate R
    double sigma = 0.2;
    double T = 1.0;
    std::size_t steps = 16;  // d + 1
    AsianMode mode = AsianMode::value;
    double threshold = 110.0;  // strike K (value) or x (cdf)

    std::size_t d() const { return steps - 1; }
    /// Throws ArgumentError when an invariant fails.
    void validate() const;
};

/// A_{mi}, m, i = 0..d, with A A^T = [min(t_m, t_n)], t_m = (m+1) T / (d+1).
struct PCAMatrix {
    std::size_t d = 0;
    double T = 0.0;
    std::vector<double> entries;  // row-major (d+1) x (d+1)

    double operator()(std::size_t m, std::size_t i) const { return entries[m * (d + 1) + i]; }
    double time(std::size_t m) const { return static_cast<double>(m + 1) * T / static_cast<double>(d + 1); }
};

PCAMatrix pca_matrix(std::size_t d, double T);

/// h(y) for y = (y_0, ..., y_d), accumulated in log space.
double asian_average(const AsianSpec& spec, const PCAMatrix& A, std::span<const double> y);

/// Solves h(xi, y~) = x for xi, y~ = (y_1, ..., y_d). Newton on the log-sum-exp
/// form (convex and increasing in xi) inside the bracket [-60, 60]; throws
/// DomainError when the root lies outside it.
inline constexpr double kXiBracket = 60.0;
double xi_root(const AsianSpec& spec, const PCAMatrix& A, double x, std::span<const double> y_tilde);

/// The pre-integrated payoff as an integrand over R^d.
Integrand preintegrated_asian(const AsianSpec& spec, const PCAMatrix& A);

/// Product-weight space over R^d: psi_j^2(x) = L0 exp(-2 L0 |x|), gamma_j = L_j^{4/3},
/// L_j = sigma/(2j+1) sqrt(T (2d+3)/(d+1)).
WeightedSpace asian_weight_recipe(const AsianSpec& spec);

// ---------------------------------------------------------------------------
// Lognormal-coefficient two-point boundary value problem
// ---------------------------------------------------------------------------

struct PDESpec {
    std::size_t s = 30;
    double x0 = 1.0 / 3.0;
    std::size_t subintervals = 100;   // on [0, 1]
    std::size_t nodes_per_subinterval = 2;
    double coefficient_scale = 1.0;   // a is multiplied by this factor

    void validate() const;
};

/// Evaluates u(x, y) = int_0^x (c - t)/a(t, y) dt with
/// a(t, y) = scale * exp(sum_j sin(2 j pi t) y_j / j^2), reusing fixed node sets.
/// The [0, x] integral uses ceil(subintervals * x) subintervals.
class PDESolver {
public:
    explicit PDESolver(const PDESpec& spec);

    double solution(std::span<const double> y) const;  // at spec.x0
    double solution(std::span<const double> y, double x) const;
    const PDESpec& spec() const { return spec_; }

private:
    struct Nodes {
        CompositeRule rule;
        std::vector<double> basis;  // node-major, sin(2 j pi t)/j^2
    };
    Nodes make_nodes(double upper) const;
    std::pair<double, double> inverse_moments(const Nodes& nodes, std::span<const double> y) const;

    PDESpec spec_;
    Nodes full_;
    Nodes partial_;
};

double pde_solution(const PDESpec& spec, std::span<const double> y);

Integrand pde_integrand(const PDESpec& spec);

/// POD space of the PDE example with b_j = 1/j^2 and exponent lambda in (1/2, 1].
/// Throws SpaceInvalidError if some alpha_j <= b_j.
WeightedSpace pde_weight_recipe(std::size_t s, double lambda);

} // namespace mqmc
