#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mqmc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;

/// Integrands in scope are treated as zero beyond |t| = kTailCutoff, where the
/// standard normal density underflows.
inline constexpr double kTailCutoff = 40.0;

using RealFunction = std::function<double(double)>;

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::size_t max_subdivisions = std::size_t{1} << 14;

    /// Throws ArgumentError when a field violates its invariant.
    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t subdivisions = 0;
};

// ---------------------------------------------------------------------------
// Standard normal distribution
// ---------------------------------------------------------------------------

double normal_pdf(double x);

/// Phi(x), accurate to ~1 ulp relative via erfc; underflows gracefully in the tails.
double normal_cdf(double x);

/// 1 - Phi(x) without cancellation.
double normal_ccdf(double x);

/// log Phi(x), finite for every finite x (asymptotic series in the far left tail).
double log_normal_cdf(double x);

/// Phi^{-1}(p) for p in (0,1). Wichura's AS241 rational approximation, relative
/// accuracy about 1e-16. Throws DomainError outside (0,1).
double normal_inv_cdf(double p);

// ---------------------------------------------------------------------------
// One-dimensional quadrature
// ---------------------------------------------------------------------------

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b], starting from
/// `initial_panels` equal panels. Stops when the summed error estimate is below
/// max(abs_tol, rel_tol * |I|); throws AccuracyError once more than
/// spec.max_subdivisions intervals would be needed.
QuadratureResult integrate_adaptive(const RealFunction& f, double a, double b,
                                    const QuadratureSpec& spec = {},
                                    std::size_t initial_panels = 1);

/// Integral of f over [lower, +inf). `lower` may be -infinity. The domain is
/// truncated at |t| = kTailCutoff.
double integrate_semi_infinite(const RealFunction& f, double lower,
                               const QuadratureSpec& spec = {});

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
GaussLegendreRule gauss_legendre(std::size_t n);

/// Nodes and weights of a composite Gauss-Legendre rule on [a, b].
struct CompositeRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    double apply(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }
};

CompositeRule make_composite_rule(double a, double b, std::size_t n_subintervals,
                                  std::size_t nodes_per_subinterval);

/// Composite Gauss-Legendre on n_subintervals equal pieces of [a, b]; exact for
/// piecewise polynomials of degree <= 2 * nodes_per_subinterval - 1.
double composite_gauss_legendre(const RealFunction& f, double a, double b,
                                std::size_t n_subintervals,
                                std::size_t nodes_per_subinterval);

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Riemann zeta for real s >= 1.02 by Euler-Maclaurin summation (abs. error
/// below 1e-12). Throws CapabilityError closer to the pole.
double riemann_zeta(double s);

} // namespace mqmc
