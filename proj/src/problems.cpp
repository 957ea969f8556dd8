#include "mqmc/problems.hpp"

#include "mqmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mqmc {

Integrand exp_linear_integrand(std::vector<double> a) {
    if (a.empty()) throw ArgumentError("exp_linear: coefficient vector is empty");
    double norm2 = 0.0;
    for (double v : a) {
        if (!std::isfinite(v)) throw ArgumentError("exp_linear: coefficients must be finite");
        norm2 += v * v;
    }
    Integrand f;
    f.dimension = a.size();
    f.name = "exp-linear";
    f.exact = std::exp(0.5 * norm2);
    f.evaluate = [a = std::move(a)](std::span<const double> y) {
        double dot = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * y[j];
        return std::exp(dot);
    };
    return f;
}

WeightedSpace example1_space(std::size_t s) {
    std::vector<double> gamma(s);
    for (std::size_t j = 0; j < s; ++j) gamma[j] = 1.0 / static_cast<double>((j + 1) * (j + 1));
    return WeightedSpace(Density{}, std::vector<WeightFunction>(s, WeightFunction::exp_abs(1.0 / 16.0)),
                         WeightScheme::product(std::move(gamma)));
}

// ---------------------------------------------------------------------------
// Asian option
// ---------------------------------------------------------------------------

void AsianSpec::validate() const {
    if (!(S0 > 0.0 && sigma > 0.0 && T > 0.0 && threshold > 0.0)) {
        throw ArgumentError("asian: S0, sigma, T and the strike/threshold must be > 0");
    }
    if (!std::isfinite(rate)) throw ArgumentError("asian: rate must be finite");
    if (steps < 2) throw ArgumentError("asian: steps (d + 1) must be >= 2");
}

PCAMatrix pca_matrix(std::size_t d, double T) {
    if (d < 1) throw ArgumentError("pca_matrix: d must be >= 1");
    if (!(T > 0.0)) throw ArgumentError("pca_matrix: T must be > 0");
    PCAMatrix A;
    A.d = d;
    A.T = T;
    A.entries.resize((d + 1) * (d + 1));
    const double D = static_cast<double>(d);
    const double scale = std::sqrt(T / ((D + 1.0) * (2.0 * D + 3.0)));
    for (std::size_t m = 0; m <= d; ++m) {
        for (std::size_t i = 0; i <= d; ++i) {
            const double k = 2.0 * static_cast<double>(i) + 1.0;
            A.entries[m * (d + 1) + i] = scale * std::sin(static_cast<double>(m + 1) * k * kPi / (2.0 * D + 3.0)) /
                                         std::sin(k * kPi / (2.0 * (2.0 * D + 3.0)));
        }
    }
    return A;
}

namespace {

void check_asian_shapes(const AsianSpec& spec, const PCAMatrix& A) {
    if (A.d != spec.d()) throw ArgumentError("asian: PCA matrix size does not match the number of steps");
}

// mu_m = (R - sigma^2/2) t_m + sigma sum_{i>=1} A_{mi} y_i, with y~ = (y_1..y_d) stored 0-based.
std::vector<double> path_drift(const AsianSpec& spec, const PCAMatrix& A, std::span<const double> y_tilde) {
    const std::size_t d = spec.d();
    std::vector<double> mu(d + 1);
    for (std::size_t m = 0; m <= d; ++m) {
        double acc = 0.0;
        for (std::size_t i = 1; i <= d; ++i) acc += A(m, i) * y_tilde[i - 1];
        mu[m] = (spec.rate - 0.5 * spec.sigma * spec.sigma) * A.time(m) + spec.sigma * acc;
    }
    return mu;
}

// log of sum_m exp(v_m).
double log_sum_exp(const std::vector<double>& v) {
    const double top = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - top);
    return top + std::log(sum);
}

enum class XiOutcome { root, below, above };

struct XiSolve {
    XiOutcome outcome = XiOutcome::root;
    double xi = 0.0;
};

// g(xi) = log(S0/(d+1)) + log sum_m exp(mu_m + b_m xi) - log x; g is convex and increasing.
XiSolve solve_xi(const AsianSpec& spec, const std::vector<double>& mu, const std::vector<double>& b, double x) {
    const double offset = std::log(spec.S0 / static_cast<double>(spec.steps)) - std::log(x);
    std::vector<double> e(mu.size());
    auto g = [&](double xi, double* slope) {
        for (std::size_t m = 0; m < mu.size(); ++m) e[m] = mu[m] + b[m] * xi;
        const double lse = log_sum_exp(e);
        if (slope != nullptr) {
            double acc = 0.0;
            for (std::size_t m = 0; m < mu.size(); ++m) acc += b[m] * std::exp(e[m] - lse);
            *slope = acc;
        }
        return offset + lse;
    };

    double lo = -kXiBracket, hi = kXiBracket;
    if (g(lo, nullptr) > 0.0) return {XiOutcome::below, lo};
    if (g(hi, nullptr) < 0.0) return {XiOutcome::above, hi};

    double xi = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        double slope = 0.0;
        const double val = g(xi, &slope);
        if (val == 0.0) break;
        if (val > 0.0) hi = xi; else lo = xi;
        double next = xi - val / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - xi) <= 1e-15 * (1.0 + std::abs(xi))) {
            xi = next;
            break;
        }
        xi = next;
    }
    return {XiOutcome::root, xi};
}

std::vector<double> first_column(const AsianSpec& spec, const PCAMatrix& A) {
    std::vector<double> b(spec.d() + 1);
    for (std::size_t m = 0; m <= spec.d(); ++m) b[m] = spec.sigma * A(m, 0);
    return b;
}

} // namespace

double asian_average(const AsianSpec& spec, const PCAMatrix& A, std::span<const double> y) {
    check_asian_shapes(spec, A);
    if (y.size() != spec.steps) throw ArgumentError("asian_average: expected a point in R^(d+1)");
    const std::size_t d = spec.d();
    std::vector<double> e(d + 1);
    for (std::size_t m = 0; m <= d; ++m) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= d; ++i) acc += A(m, i) * y[i];
        e[m] = (spec.rate - 0.5 * spec.sigma * spec.sigma) * A.time(m) + spec.sigma * acc;
    }
    return spec.S0 / static_cast<double>(spec.steps) * std::exp(log_sum_exp(e));
}

double xi_root(const AsianSpec& spec, const PCAMatrix& A, double x, std::span<const double> y_tilde) {
    check_asian_shapes(spec, A);
    if (!(x > 0.0)) throw ArgumentError("xi_root: x must be > 0");
    if (y_tilde.size() != spec.d()) throw ArgumentError("xi_root: expected a point in R^d");
    const auto solve = solve_xi(spec, path_drift(spec, A, y_tilde), first_column(spec, A), x);
    if (solve.outcome != XiOutcome::root) {
        throw DomainError("xi_root: root lies outside [-60, 60]; x is unattainable at double precision");
    }
    return solve.xi;
}

Integrand preintegrated_asian(const AsianSpec& spec, const PCAMatrix& A) {
    spec.validate();
    check_asian_shapes(spec, A);
    Integrand f;
    f.dimension = spec.d();
    f.name = spec.mode == AsianMode::value ? "asian-value" : "asian-cdf";
    const auto b = first_column(spec, A);
    f.evaluate = [spec, A, b](std::span<const double> y_tilde) {
        const auto mu = path_drift(spec, A, y_tilde);
        const auto solve = solve_xi(spec, mu, b, spec.threshold);
        if (spec.mode == AsianMode::cdf) {
            if (solve.outcome == XiOutcome::below) return 0.0;
            if (solve.outcome == XiOutcome::above) return 1.0;
            return normal_cdf(solve.xi);
        }
        // e^{-RT} int_{-inf}^{xi} (K - h(y0, y~)) phi(y0) dy0, using
        // int_{-inf}^{xi} e^{b y0} phi(y0) dy0 = e^{b^2/2} Phi(xi - b).
        const double discount = std::exp(-spec.rate * spec.T);
        if (solve.outcome == XiOutcome::below) return 0.0;
        const double c = spec.S0 / static_cast<double>(spec.steps);
        double expected_h = 0.0;
        if (solve.outcome == XiOutcome::above) {
            for (std::size_t m = 0; m < mu.size(); ++m) expected_h += c * std::exp(mu[m] + 0.5 * b[m] * b[m]);
            return std::clamp(discount * (spec.threshold - expected_h), 0.0, discount * spec.threshold);
        }
        for (std::size_t m = 0; m < mu.size(); ++m) {
            expected_h += c * std::exp(mu[m] + 0.5 * b[m] * b[m]) * normal_cdf(solve.xi - b[m]);
        }
        const double value = discount * (spec.threshold * normal_cdf(solve.xi) - expected_h);
        return std::clamp(value, 0.0, discount * spec.threshold);
    };
    return f;
}

WeightedSpace asian_weight_recipe(const AsianSpec& spec) {
    spec.validate();
    const std::size_t d = spec.d();
    const double D = static_cast<double>(d);
    const double base = spec.sigma * std::sqrt(spec.T * (2.0 * D + 3.0) / (D + 1.0));
    const double lambda0 = base;
    std::vector<double> gamma(d);
    for (std::size_t j = 1; j <= d; ++j) gamma[j - 1] = std::pow(base / (2.0 * static_cast<double>(j) + 1.0), 4.0 / 3.0);
    return WeightedSpace(Density{}, std::vector<WeightFunction>(d, WeightFunction::exp_abs(lambda0, lambda0)),
                         WeightScheme::product(std::move(gamma)));
}

// ---------------------------------------------------------------------------
// PDE
// ---------------------------------------------------------------------------

void PDESpec::validate() const {
    if (s < 1) throw ArgumentError("pde: s must be >= 1");
    if (!(x0 > 0.0 && x0 < 1.0)) throw ArgumentError("pde: x0 must lie in (0,1)");
    if (subintervals < 1 || nodes_per_subinterval < 1) throw ArgumentError("pde: quadrature plan must be positive");
    if (!(coefficient_scale > 0.0)) throw ArgumentError("pde: coefficient scale must be > 0");
}

PDESolver::PDESolver(const PDESpec& spec) : spec_(spec) {
    spec_.validate();
    full_ = make_nodes(1.0);
    partial_ = make_nodes(spec_.x0);
}

PDESolver::Nodes PDESolver::make_nodes(double upper) const {
    Nodes nodes;
    if (upper <= 0.0) return nodes;
    const auto pieces = static_cast<std::size_t>(std::ceil(static_cast<double>(spec_.subintervals) * upper - 1e-12));
    nodes.rule = make_composite_rule(0.0, upper, std::max<std::size_t>(1, pieces), spec_.nodes_per_subinterval);
    const std::size_t s = spec_.s;
    nodes.basis.resize(nodes.rule.nodes.size() * s);
    for (std::size_t q = 0; q < nodes.rule.nodes.size(); ++q) {
        for (std::size_t j = 1; j <= s; ++j) {
            const double jd = static_cast<double>(j);
            nodes.basis[q * s + (j - 1)] = std::sin(2.0 * jd * kPi * nodes.rule.nodes[q]) / (jd * jd);
        }
    }
    return nodes;
}

// Moments (int 1/a, int t/a) over the node set.
std::pair<double, double> PDESolver::inverse_moments(const Nodes& nodes, std::span<const double> y) const {
    const std::size_t s = spec_.s;
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t q = 0; q < nodes.rule.nodes.size(); ++q) {
        const double* row = nodes.basis.data() + q * s;
        double expo = 0.0;
        for (std::size_t j = 0; j < s; ++j) expo += row[j] * y[j];
        const double w = nodes.rule.weights[q] * std::exp(-expo);
        m0 += w;
        m1 += w * nodes.rule.nodes[q];
    }
    return {m0 / spec_.coefficient_scale, m1 / spec_.coefficient_scale};
}

double PDESolver::solution(std::span<const double> y, double x) const {
    if (y.size() != spec_.s) throw ArgumentError("pde: expected a point in R^s");
    if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("pde: x must lie in [0,1]");
    const auto [m0, m1] = inverse_moments(full_, y);
    const double c = m1 / m0;
    if (x == 0.0) return 0.0;
    // u(x) = c int_0^x 1/a - int_0^x t/a.
    const auto [p0, p1] = x == spec_.x0 ? inverse_moments(partial_, y) : inverse_moments(make_nodes(x), y);
    return c * p0 - p1;
}

double PDESolver::solution(std::span<const double> y) const { return solution(y, spec_.x0); }

double pde_solution(const PDESpec& spec, std::span<const double> y) { return PDESolver(spec).solution(y); }

Integrand pde_integrand(const PDESpec& spec) {
    auto solver = std::make_shared<const PDESolver>(spec);
    Integrand f;
    f.dimension = spec.s;
    f.name = "pde";
    f.evaluate = [solver](std::span<const double> y) { return solver->solution(y); };
    return f;
}

WeightedSpace pde_weight_recipe(std::size_t s, double lambda) {
    if (s < 1) throw ArgumentError("pde_weight_recipe: s must be >= 1");
    if (!(lambda > 0.5 && lambda <= 1.0)) throw ArgumentError("pde_weight_recipe: lambda must lie in (1/2, 1]");
    const double eta = (2.0 * lambda - 1.0) / (4.0 * lambda);
    const double zeta = riemann_zeta(lambda + 0.5);
    auto b_of = [](std::size_t j) { return 1.0 / static_cast<double>(j * j); };
    auto alpha_of = [&](double b) { return 0.5 * (b + std::sqrt(b * b + 1.0 - 1.0 / (2.0 * lambda))); };

    std::vector<WeightFunction> psi(s);
    std::vector<double> gamma(s);
    for (std::size_t j = 1; j <= s; ++j) {
        const double b = b_of(j);
        const double alpha = alpha_of(j == 1 ? b_of(1) : b_of(2));
        if (!(alpha > b)) {
            throw SpaceInvalidError("pde_weight_recipe: alpha_" + std::to_string(j) + " <= b_" + std::to_string(j));
        }
        const double rho = 2.0 *
                           std::pow(kSqrt2Pi * std::exp(alpha * alpha / eta) /
                                        (std::pow(kPi, 2.0 - 2.0 * eta) * (1.0 - eta) * eta),
                                    lambda) *
                           zeta;
        const double b_tilde2 = b * b / (2.0 * std::exp(0.5 * b * b) * normal_cdf(b));
        gamma[j - 1] = std::pow(b_tilde2 / ((alpha - b) * rho), 1.0 / (1.0 + lambda));
        psi[j - 1] = WeightFunction::exp_abs(alpha);
    }
    std::vector<double> order(s + 1);
    order[0] = 1.0;
    const double ln2 = std::log(2.0);
    for (std::size_t l = 1; l <= s; ++l) {
        // [(l!)^2 / (ln 2)^{2l}]^{1/(1+lambda)} via lgamma to stay finite.
        const double log_val = 2.0 * std::lgamma(static_cast<double>(l) + 1.0) - 2.0 * static_cast<double>(l) * std::log(ln2);
        order[l] = std::exp(log_val / (1.0 + lambda));
    }
    return WeightedSpace(Density{}, std::move(psi), WeightScheme::pod(std::move(order), std::move(gamma)));
}

} // namespace mqmc
