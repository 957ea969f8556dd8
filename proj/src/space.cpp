#include "mqmc/space.hpp"

#include "mqmc/errors.hpp"
#include "mqmc/parallel.hpp"
#include "mqmc/theta_cache.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

namespace mqmc {

namespace {

std::size_t panels_for(double a, double b) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / 4.0)));
}

std::string hex_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Weight functions and schemes
// ---------------------------------------------------------------------------

WeightFunction WeightFunction::exp_abs(double alpha, double c) {
    WeightFunction w{WeightFunctionKind::exp_abs, c, alpha};
    w.validate();
    return w;
}

WeightFunction WeightFunction::constant(double c) {
    WeightFunction w{WeightFunctionKind::constant, c, 0.0};
    w.validate();
    return w;
}

WeightFunction WeightFunction::gaussian(double beta, double c) {
    WeightFunction w{WeightFunctionKind::gaussian, c, beta};
    w.validate();
    return w;
}

void WeightFunction::validate() const {
    if (!(std::isfinite(scale) && scale > 0.0)) throw ArgumentError("weight function: scale must be finite and > 0");
    if (kind != WeightFunctionKind::constant && !(std::isfinite(rate) && rate > 0.0)) {
        throw ArgumentError("weight function: rate must be finite and > 0");
    }
}

double WeightFunction::log_psi_squared(double x) const {
    switch (kind) {
    case WeightFunctionKind::exp_abs: return std::log(scale) - 2.0 * rate * std::abs(x);
    case WeightFunctionKind::constant: return std::log(scale);
    case WeightFunctionKind::gaussian: return std::log(scale) - rate * x * x;
    }
    return 0.0;
}

std::string WeightFunction::kind_name() const {
    switch (kind) {
    case WeightFunctionKind::exp_abs: return "exp-abs";
    case WeightFunctionKind::constant: return "constant";
    case WeightFunctionKind::gaussian: return "gaussian";
    }
    return "unknown";
}

std::string WeightFunction::key() const {
    return kind_name() + ":c=" + hex_double(scale) + ":rate=" + hex_double(rate);
}

WeightScheme WeightScheme::product(std::vector<double> gamma) {
    WeightScheme w{WeightKind::product, std::move(gamma), {}};
    w.validate();
    return w;
}

WeightScheme WeightScheme::pod(std::vector<double> order_weights, std::vector<double> gamma) {
    WeightScheme w{WeightKind::pod, std::move(gamma), std::move(order_weights)};
    w.validate();
    return w;
}

void WeightScheme::validate() const {
    for (double g : gamma) {
        if (!(std::isfinite(g) && g > 0.0)) throw ArgumentError("weights: gamma_j must be finite and > 0");
    }
    if (kind == WeightKind::pod) {
        if (order_weights.size() != gamma.size() + 1) {
            throw ArgumentError("weights: POD needs Gamma_0..Gamma_s (s + 1 values)");
        }
        if (order_weights[0] != 1.0) throw ArgumentError("weights: Gamma_0 must be 1");
        for (double g : order_weights) {
            if (!(std::isfinite(g) && g > 0.0)) throw ArgumentError("weights: Gamma_l must be finite and > 0");
        }
    }
}

// ---------------------------------------------------------------------------
// Stronger condition and the space
// ---------------------------------------------------------------------------

StrongerConditionReport check_stronger_condition(const Density& density, const WeightFunction& psi) {
    StrongerConditionReport report;
    // Log-integrands on the left tail (y <= 0) and right tail (y >= 0).
    auto log_left = [&](double y) { return log_normal_cdf(y) - psi.log_psi_squared(y); };
    auto log_right = [&](double y) { return log_normal_cdf(-y) - psi.log_psi_squared(y); };

    auto tail_ok = [&](auto&& log_f, double sign, const char* side) {
        const double l20 = log_f(sign * 20.0), l30 = log_f(sign * 30.0), l40 = log_f(sign * kTailCutoff);
        if (!(l40 < l30 && l30 < l20)) {
            report.diagnostics += std::string(side) + " tail integrand is not decreasing; ";
            return false;
        }
        if (!(l40 < -60.0)) {
            report.diagnostics += std::string(side) + " tail integrand is not negligible at the cutoff (log = " +
                                  std::to_string(l40) + "); ";
            return false;
        }
        return true;
    };
    (void)density;
    const bool left_ok = tail_ok(log_left, -1.0, "left");
    const bool right_ok = tail_ok(log_right, 1.0, "right");
    if (!left_ok || !right_ok) return report;

    try {
        QuadratureSpec spec;
        report.left_integral =
            integrate_adaptive([&](double y) { return std::exp(log_left(y)); }, -kTailCutoff, 0.0, spec, 10).value;
        report.right_integral =
            integrate_adaptive([&](double y) { return std::exp(log_right(y)); }, 0.0, kTailCutoff, spec, 10).value;
    } catch (const AccuracyError& e) {
        report.diagnostics += std::string("quadrature failed: ") + e.what();
        return report;
    }
    if (!std::isfinite(report.left_integral) || !std::isfinite(report.right_integral)) {
        report.diagnostics += "one-sided integral is not finite";
        return report;
    }
    report.passed = true;
    return report;
}

WeightedSpace::WeightedSpace(Density density, std::vector<WeightFunction> weight_functions, WeightScheme weights)
    : density_(density), weight_functions_(std::move(weight_functions)), weights_(std::move(weights)) {
    if (weight_functions_.empty()) throw ArgumentError("space: dimension must be >= 1");
    if (weights_.dimension() != weight_functions_.size()) {
        throw ArgumentError("space: " + std::to_string(weights_.dimension()) + " weights for " +
                            std::to_string(weight_functions_.size()) + " weight functions");
    }
    weights_.validate();
    group_.resize(weight_functions_.size());
    for (std::size_t j = 0; j < weight_functions_.size(); ++j) {
        weight_functions_[j].validate();
        std::size_t g = 0;
        while (g < representatives_.size() && !(weight_functions_[representatives_[g]] == weight_functions_[j])) ++g;
        if (g == representatives_.size()) {
            const auto report = check_stronger_condition(density_, weight_functions_[j]);
            if (!report.passed) {
                throw SpaceInvalidError("space: weight function " + weight_functions_[j].key() +
                                        " fails the stronger condition: " + report.diagnostics);
            }
            representatives_.push_back(j);
        }
        group_[j] = g;
    }
}

WeightedSpace WeightedSpace::truncated(std::size_t d) const {
    if (d < 1 || d > dimension()) throw ArgumentError("space: truncation dimension out of range");
    std::vector<WeightFunction> psi(weight_functions_.begin(), weight_functions_.begin() + static_cast<std::ptrdiff_t>(d));
    WeightScheme w = weights_;
    w.gamma.resize(d);
    if (w.kind == WeightKind::pod) w.order_weights.resize(d + 1);
    return WeightedSpace(density_, std::move(psi), std::move(w));
}

// ---------------------------------------------------------------------------
// theta
// ---------------------------------------------------------------------------

double theta_kernel(const Density& density, const WeightFunction& psi, double u, const QuadratureSpec& spec) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("theta: u must lie in [0,1]");
    // With m = min(u, 1-u) and c = -Phi^{-1}(m), the three terms combine into
    //   -int_{-inf}^{-c} Phi^2 w + int_{-c}^{c} (Phi Q - m) w - int_c^inf Q^2 w,
    // Q = 1 - Phi, w = 1/psi^2; each piece converges on its own.
    const double m = std::min(u, 1.0 - u);
    double c = m > 0.0 ? -density.inv_cdf(m) : kTailCutoff;
    c = std::clamp(c, 0.0, kTailCutoff);

    auto middle = [&](double t) { return (density.cdf(t) * density.ccdf(t) - m) * psi.inverse_psi_squared(t); };
    auto right = [&](double t) {
        const double q = density.ccdf(t);
        return q * q * psi.inverse_psi_squared(t);
    };
    auto left = [&](double t) {
        const double p = density.cdf(t);
        return p * p * psi.inverse_psi_squared(t);
    };

    if (psi.is_even()) {
        const double mid = c > 0.0 ? integrate_adaptive(middle, 0.0, c, spec, panels_for(0.0, c)).value : 0.0;
        const double tail =
            c < kTailCutoff ? integrate_adaptive(right, c, kTailCutoff, spec, panels_for(c, kTailCutoff)).value : 0.0;
        return 2.0 * (mid - tail);
    }
    const double mid = c > 0.0 ? integrate_adaptive(middle, -c, c, spec, panels_for(-c, c)).value : 0.0;
    double tails = 0.0;
    if (c < kTailCutoff) {
        tails += integrate_adaptive(right, c, kTailCutoff, spec, panels_for(c, kTailCutoff)).value;
        tails += integrate_adaptive(left, -kTailCutoff, -c, spec, panels_for(c, kTailCutoff)).value;
    }
    return mid - tails;
}

double theta(const WeightedSpace& space, std::size_t j, double u, const QuadratureSpec& spec) {
    return theta_kernel(space.density(), space.weight_function(j), u, spec);
}

namespace {

// Weighted nodes for int_0^{1/2} g(v) sin^2(pi h v) dv with
// g(v) = (w(t) + w(-t)) / phi(t), t = Phi^{-1}(v), which covers v in [0,1]
// since sin^2 is symmetric about 1/2. `panels` uniform panels of width
// 1/(2 panels); the first is graded geometrically towards v = 0.
struct FourierNodes {
    std::vector<double> v;
    std::vector<double> weight;  // quadrature weight times g(v)
};

FourierNodes fourier_nodes(const Density& density, const WeightFunction& psi, std::size_t panels) {
    static const GaussLegendreRule rule = gauss_legendre(8);
    const double width = 0.5 / static_cast<double>(panels);
    FourierNodes out;
    out.v.reserve(8 * (panels + 60));
    out.weight.reserve(8 * (panels + 60));
    auto add_panel = [&](double a, double b) {
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double v = mid + half * rule.nodes[i];
            const double t = density.inv_cdf(v);
            const double g = (psi.inverse_psi_squared(t) + psi.inverse_psi_squared(-t)) / density.pdf(t);
            out.v.push_back(v);
            out.weight.push_back(half * rule.weights[i] * g);
        }
    };
    double hi = width;
    for (int k = 0; k < 60; ++k) {
        add_panel(0.5 * hi, hi);
        hi *= 0.5;
    }
    for (std::size_t p = 1; p < panels; ++p) add_panel(width * static_cast<double>(p), width * static_cast<double>(p + 1));
    return out;
}

constexpr std::size_t kMinFourierPanels = 256;

} // namespace

double theta_hat_kernel(const Density& density, const WeightFunction& psi, std::int64_t h) {
    if (h == 0) throw ArgumentError("theta_hat: h must be nonzero");
    const double ha = std::abs(static_cast<double>(h));
    const auto nodes = fourier_nodes(density, psi, std::max<std::size_t>(kMinFourierPanels, static_cast<std::size_t>(ha)));
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.v.size(); ++i) {
        const double sn = std::sin(kPi * ha * nodes.v[i]);
        sum += nodes.weight[i] * sn * sn;
    }
    return sum / (kPi * kPi * ha * ha);
}

double theta_hat(const WeightedSpace& space, std::size_t j, std::int64_t h) {
    return theta_hat_kernel(space.density(), space.weight_function(j), h);
}

std::vector<double> theta_hat_all(const Density& density, const WeightFunction& psi, std::size_t H) {
    if (H < 1) throw ArgumentError("theta_hat_all: H must be >= 1");
    const auto nodes = fourier_nodes(density, psi, std::max(kMinFourierPanels, H));
    std::vector<double> acc(H, 0.0);
    // sin^2(pi h v) = (1 - cos(2 pi h v)) / 2; cos(2 pi h v) by complex rotation,
    // resynchronised with std::cos/std::sin every 64 steps. Nodes are processed in
    // cache-sized blocks with the node loop innermost.
    constexpr std::size_t kBlock = 256;
    const std::size_t M = nodes.v.size();
    double step_c[kBlock], step_s[kBlock], c[kBlock], s[kBlock], w[kBlock];
    for (std::size_t start = 0; start < M; start += kBlock) {
        const std::size_t B = std::min(kBlock, M - start);
        double total = 0.0;
        for (std::size_t i = 0; i < B; ++i) {
            step_c[i] = std::cos(2.0 * kPi * nodes.v[start + i]);
            step_s[i] = std::sin(2.0 * kPi * nodes.v[start + i]);
            c[i] = 1.0;
            s[i] = 0.0;
            w[i] = nodes.weight[start + i];
            total += w[i];
        }
        for (std::size_t h = 1; h <= H; ++h) {
            if ((h & 63) == 0) {
                for (std::size_t i = 0; i < B; ++i) {
                    c[i] = std::cos(2.0 * kPi * static_cast<double>(h) * nodes.v[start + i]);
                    s[i] = std::sin(2.0 * kPi * static_cast<double>(h) * nodes.v[start + i]);
                }
            } else {
                for (std::size_t i = 0; i < B; ++i) {
                    const double nc = c[i] * step_c[i] - s[i] * step_s[i];
                    s[i] = s[i] * step_c[i] + c[i] * step_s[i];
                    c[i] = nc;
                }
            }
            double dot[4] = {0.0, 0.0, 0.0, 0.0};
            std::size_t i = 0;
            for (; i + 4 <= B; i += 4) {
                for (std::size_t q = 0; q < 4; ++q) dot[q] += w[i + q] * c[i + q];
            }
            for (; i < B; ++i) dot[0] += w[i] * c[i];
            acc[h - 1] += 0.5 * (total - ((dot[0] + dot[1]) + (dot[2] + dot[3])));
        }
    }
    for (std::size_t h = 1; h <= H; ++h) {
        const double hd = static_cast<double>(h);
        acc[h - 1] /= kPi * kPi * hd * hd;
    }
    return acc;
}

double embedding_constant(const Density& density, const WeightFunction& psi) {
    const auto report = check_stronger_condition(density, psi);
    if (!report.passed) throw SpaceInvalidError("embedding constant diverges: " + report.diagnostics);
    auto f = [&](double y) { return density.cdf(y) * density.ccdf(y) * psi.inverse_psi_squared(y); };
    QuadratureSpec spec;
    if (psi.is_even()) return 2.0 * integrate_adaptive(f, 0.0, kTailCutoff, spec, 10).value;
    return integrate_adaptive(f, -kTailCutoff, kTailCutoff, spec, 20).value;
}

double embedding_constant(const WeightedSpace& space, std::size_t j) {
    return embedding_constant(space.density(), space.weight_function(j));
}

// ---------------------------------------------------------------------------
// Theta tables
// ---------------------------------------------------------------------------

ThetaTable::ThetaTable(std::uint64_t n_points, std::vector<std::vector<double>> distinct, std::vector<std::size_t> group)
    : n_points_(n_points), distinct_(std::move(distinct)), group_(std::move(group)) {
    for (const auto& row : distinct_) {
        if (row.size() != n_points_) throw ArgumentError("ThetaTable: row length differs from N");
    }
    for (auto g : group_) {
        if (g >= distinct_.size()) throw ArgumentError("ThetaTable: group index out of range");
    }
}

ThetaTable build_theta_table(const WeightedSpace& space, std::uint64_t n_points, std::size_t threads,
                             const QuadratureSpec& spec) {
    if (n_points < 2) throw ArgumentError("build_theta_table: N must be >= 2");
    spec.validate();
    if (threads == 0) threads = hardware_threads();
    const auto& reps = space.distinct_representatives();
    const auto cache_dir = theta_cache_directory();
    const std::size_t half = static_cast<std::size_t>(n_points / 2);

    std::vector<std::vector<double>> rows(reps.size());
    std::vector<std::size_t> missing;
    for (std::size_t g = 0; g < reps.size(); ++g) {
        if (cache_dir) {
            if (auto cached = load_theta_row(*cache_dir, space.density(), space.weight_function(reps[g]), n_points, spec)) {
                rows[g] = std::move(*cached);
                continue;
            }
        }
        rows[g].assign(n_points, 0.0);
        missing.push_back(g);
    }

    // Jobs cover n = 0..floor(N/2) for every missing row; the rest follows by symmetry.
    const std::size_t per_row = half + 1;
    parallel_for(missing.size() * per_row, threads, [&](std::size_t job) {
        const std::size_t g = missing[job / per_row];
        const std::size_t n = job % per_row;
        const double u = static_cast<double>(n) / static_cast<double>(n_points);
        rows[g][n] = theta_kernel(space.density(), space.weight_function(reps[g]), u, spec);
    });
    for (auto g : missing) {
        for (std::size_t n = half + 1; n < n_points; ++n) rows[g][n] = rows[g][n_points - n];
        if (cache_dir) store_theta_row(*cache_dir, space.density(), space.weight_function(reps[g]), n_points, spec, rows[g]);
    }

    std::vector<std::size_t> group(space.dimension());
    for (std::size_t j = 0; j < group.size(); ++j) group[j] = space.group_of(j);
    return ThetaTable(n_points, std::move(rows), std::move(group));
}

// ---------------------------------------------------------------------------
// Worst-case error
// ---------------------------------------------------------------------------

namespace {

double finish_wce(double value) {
    if (value < -1e-12) {
        throw NumericalConsistencyError("squared worst-case error is negative beyond round-off: " + std::to_string(value));
    }
    return std::max(value, 0.0);
}

} // namespace

double wce_squared(const WeightedSpace& space, const GeneratingVector& z, const ThetaTable& table) {
    const std::uint64_t N = z.n_points();
    const std::size_t s = z.dimension();
    if (table.n_points() != N) throw ArgumentError("wce_squared: table modulus differs from N");
    if (s > table.dimension() || s > space.dimension()) throw ArgumentError("wce_squared: vector longer than space");
    if (s == 0) return 0.0;

    const auto& w = space.weights();
    std::vector<const double*> rows(s);
    for (std::size_t j = 0; j < s; ++j) rows[j] = table.row(j);
    std::vector<std::uint64_t> idx(s, 0);

    double total = 0.0;
    if (w.kind == WeightKind::product) {
        for (std::uint64_t n = 0; n < N; ++n) {
            double prod = 1.0;
            for (std::size_t j = 0; j < s; ++j) {
                prod *= 1.0 + w.gamma[j] * rows[j][idx[j]];
                idx[j] += z[j];
                if (idx[j] >= N) idx[j] -= N;
            }
            total += prod;
        }
        return finish_wce(total / static_cast<double>(N) - 1.0);
    }

    // POD: P_l(n) over orders l = 0..s, updated in place one coordinate at a time.
    std::vector<double> P(s + 1);
    for (std::uint64_t n = 0; n < N; ++n) {
        std::fill(P.begin(), P.end(), 0.0);
        P[0] = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            const double t = w.gamma[j] * rows[j][idx[j]];
            for (std::size_t l = j + 1; l >= 1; --l) P[l] += t * P[l - 1];
            idx[j] += z[j];
            if (idx[j] >= N) idx[j] -= N;
        }
        double sum = 0.0;
        for (std::size_t l = 1; l <= s; ++l) sum += w.order_weights[l] * P[l];
        total += sum;
    }
    return finish_wce(total / static_cast<double>(N));
}

double log2_wce(double wce_sq) { return 0.5 * std::log2(wce_sq); }

double DecayEstimate::rate() const {
    if (coordinates.empty()) throw ArgumentError("DecayEstimate: no coordinates");
    double r = std::numeric_limits<double>::infinity();
    for (const auto& c : coordinates) r = std::min(r, c.rate);
    return r;
}

namespace {

// Oracle calls repeat for the same weight function; the coefficients cost O(H^2).
std::vector<double> cached_theta_hat_all(const Density& density, const WeightFunction& psi, std::size_t H) {
    static std::mutex mutex;
    static std::map<std::string, std::vector<double>> memo;
    const std::string key = density.name() + "|" + psi.key() + "|" + std::to_string(H);
    {
        std::lock_guard<std::mutex> lock(mutex);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    auto coeffs = theta_hat_all(density, psi, H);
    std::lock_guard<std::mutex> lock(mutex);
    return memo.emplace(key, std::move(coeffs)).first->second;
}

} // namespace

FourierOracleResult wce_fourier_oracle(const WeightedSpace& space, const GeneratingVector& z, std::size_t H,
                                       const std::optional<DecayEstimate>& decay) {
    const std::size_t s = z.dimension();
    const std::uint64_t N = z.n_points();
    if (s < 1 || s > 3 || N > 64) throw CapabilityError("wce_fourier_oracle: limited to s <= 3 and N <= 64");
    if (s > space.dimension()) throw ArgumentError("wce_fourier_oracle: vector longer than space");
    if (H < 1) throw ArgumentError("wce_fourier_oracle: H must be >= 1");

    const DecayEstimate dec = decay ? *decay : fit_decay(space.truncated(s));
    if (dec.coordinates.size() < s) throw ArgumentError("wce_fourier_oracle: decay estimate too short");

    // R_j[r] = sum over 0 < |h| <= H with h z_j = r (mod N) of hat-theta_j(h).
    std::vector<std::vector<double>> R(s, std::vector<double>(N, 0.0));
    std::vector<double> A(s, 0.0), T(s, 0.0);
    std::vector<std::vector<double>> coeff_cache(space.distinct_representatives().size());
    for (std::size_t j = 0; j < s; ++j) {
        auto& coeffs = coeff_cache[space.group_of(j)];
        if (coeffs.empty()) coeffs = cached_theta_hat_all(space.density(), space.weight_function(j), H);
        for (std::size_t h = 1; h <= H; ++h) {
            const std::uint64_t r = (static_cast<std::uint64_t>(h) % N) * z[j] % N;
            R[j][r] += coeffs[h - 1];
            R[j][(N - r) % N] += coeffs[h - 1];
            A[j] += 2.0 * coeffs[h - 1];
        }
        const auto& cd = dec.coordinates[j];
        T[j] = 2.0 * cd.constant * std::pow(static_cast<double>(H), 1.0 - 2.0 * cd.rate) / (2.0 * cd.rate - 1.0);
    }

    const auto& w = space.weights();
    FourierOracleResult out;
    for (std::uint32_t mask = 1; mask < (1u << s); ++mask) {
        double gamma_u = 1.0;
        std::size_t order = 0;
        std::vector<double> conv(N, 0.0);
        conv[0] = 1.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (!(mask & (1u << j))) continue;
            gamma_u *= w.gamma[j];
            ++order;
            std::vector<double> next(N, 0.0);
            for (std::uint64_t a = 0; a < N; ++a) {
                if (conv[a] == 0.0) continue;
                for (std::uint64_t b = 0; b < N; ++b) next[(a + b) % N] += conv[a] * R[j][b];
            }
            conv.swap(next);
        }
        if (w.kind == WeightKind::pod) gamma_u *= w.order_weights[order];
        out.value += gamma_u * conv[0];

        // Omitted frequencies: at least one |h_j| > H.
        double tail = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (!(mask & (1u << j))) continue;
            double term = T[j];
            for (std::size_t i = 0; i < s; ++i) {
                if (i != j && (mask & (1u << i))) term *= A[i] + T[i];
            }
            tail += term;
        }
        out.tail_bound += gamma_u * tail;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decay fit and bounds
// ---------------------------------------------------------------------------

CoordinateDecay fit_decay(const WeightedSpace& space, std::size_t j, const DecayFitRange& range) {
    if (range.h_min < 1 || range.h_max < 100 * range.h_min) {
        throw ArgumentError("fit_decay: h range must span at least two decades");
    }
    const double lo = std::log(static_cast<double>(range.h_min)), hi = std::log(static_cast<double>(range.h_max));
    std::vector<std::int64_t> hs;
    for (std::size_t i = 0; i < range.samples; ++i) {
        const double f = range.samples > 1 ? static_cast<double>(i) / static_cast<double>(range.samples - 1) : 0.0;
        const auto h = static_cast<std::int64_t>(std::llround(std::exp(lo + f * (hi - lo))));
        if (hs.empty() || h != hs.back()) hs.push_back(h);
    }
    if (hs.size() < 4) throw ArgumentError("fit_decay: fewer than 4 distinct sample points");

    std::vector<double> x(hs.size()), y(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        x[i] = std::log(static_cast<double>(hs[i]));
        y[i] = std::log(theta_hat(space, j, hs[i]));
    }
    const double n = static_cast<double>(hs.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    CoordinateDecay out;
    out.rate = std::min(-0.5 * sxy / sxx, kDecayRateCap);
    if (!(out.rate > 0.5)) {
        throw CapabilityError("fit_decay: fitted rate " + std::to_string(out.rate) + " is not above 1/2");
    }
    double c = theta_hat(space, j, 1);
    for (std::size_t i = 0; i < hs.size(); ++i) c = std::max(c, std::exp(y[i] + 2.0 * out.rate * x[i]));
    out.constant = c;
    return out;
}

DecayEstimate fit_decay(const WeightedSpace& space, const DecayFitRange& range) {
    const auto& reps = space.distinct_representatives();
    std::vector<CoordinateDecay> per_group(reps.size());
    for (std::size_t g = 0; g < reps.size(); ++g) per_group[g] = fit_decay(space, reps[g], range);
    DecayEstimate out;
    out.coordinates.resize(space.dimension());
    for (std::size_t j = 0; j < space.dimension(); ++j) out.coordinates[j] = per_group[space.group_of(j)];
    return out;
}

namespace {

// sum over nonempty u of gamma_u^lambda prod_{j in u} a_j.
double weighted_subset_sum(const WeightScheme& w, const std::vector<double>& a, double lambda) {
    const std::size_t s = w.dimension();
    if (w.kind == WeightKind::product) {
        double prod = 1.0;
        for (std::size_t j = 0; j < s; ++j) prod *= 1.0 + std::pow(w.gamma[j], lambda) * a[j];
        return prod - 1.0;
    }
    std::vector<double> e(s + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t j = 0; j < s; ++j) {
        const double t = std::pow(w.gamma[j], lambda) * a[j];
        for (std::size_t l = j + 1; l >= 1; --l) e[l] += t * e[l - 1];
    }
    double sum = 0.0;
    for (std::size_t l = 1; l <= s; ++l) sum += std::pow(w.order_weights[l], lambda) * e[l];
    return sum;
}

} // namespace

double average_bound_rhs(const WeightedSpace& space, std::uint64_t n_points, double lambda, const DecayEstimate& decay) {
    const std::size_t s = space.dimension();
    if (decay.coordinates.size() < s) throw ArgumentError("average bound: decay estimate too short");
    const double r = decay.rate();
    if (!(lambda > 0.5 / r && lambda <= 1.0)) {
        throw ArgumentError("average bound: lambda must lie in (1/(2r), 1]");
    }
    std::vector<double> a(s);
    for (std::size_t j = 0; j < s; ++j) {
        const auto& cd = decay.coordinates[j];
        a[j] = 2.0 * std::pow(cd.constant, lambda) * riemann_zeta(2.0 * cd.rate * lambda);
    }
    return weighted_subset_sum(space.weights(), a, lambda) / static_cast<double>(euler_totient(n_points));
}

double epsilon_bound(const WeightedSpace& space, std::uint64_t n_points, double delta, double lambda,
                     const DecayEstimate& decay) {
    if (!(delta > 0.0 && delta <= 1.0)) throw ArgumentError("epsilon_bound: delta must lie in (0,1]");
    return std::pow(average_bound_rhs(space, n_points, lambda, decay) / delta, 0.5 / lambda);
}

double example1_decay_constant(double eta) {
    if (!(eta > 0.0 && eta < 0.5)) throw ArgumentError("example1_decay_constant: eta must lie in (0, 1/2)");
    return kSqrt2Pi * std::exp(1.0 / (256.0 * eta)) / (std::pow(kPi, 2.0 - 2.0 * eta) * (1.0 - eta) * eta);
}

BoundInfimum theoretical_bound_infimum(std::uint64_t n_points, std::size_t grid_size, std::size_t s) {
    if (n_points < 2 || s < 1) throw ArgumentError("theoretical_bound_infimum: need N >= 2 and s >= 1");
    const auto G = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(grid_size))));
    if (G < 2) throw ArgumentError("theoretical_bound_infimum: grid too small");
    const double log2_totient = std::log2(static_cast<double>(euler_totient(n_points)));

    BoundInfimum best;
    best.log2_epsilon = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < G; ++i) {
        const double eta = static_cast<double>(i) / (2.0 * static_cast<double>(G));
        const double r = 1.0 - eta;
        const double C = example1_decay_constant(eta);
        const double lo = 1.0 / (2.0 * r);
        for (std::size_t k = 1; k <= G; ++k) {
            const double lambda = lo + (1.0 - lo) * static_cast<double>(k) / static_cast<double>(G);
            double zeta;
            try {
                zeta = riemann_zeta(2.0 * r * lambda);
            } catch (const CapabilityError&) {
                continue;
            }
            const double a = 2.0 * std::pow(C, lambda) * zeta;
            double log_prod = 0.0;
            for (std::size_t j = 1; j <= s; ++j) {
                log_prod += std::log1p(std::pow(static_cast<double>(j), -2.0 * lambda) * a);
            }
            const double sum = std::expm1(log_prod);
            const double value = (std::log2(sum) - log2_totient) / (2.0 * lambda);
            ++best.evaluated;
            if (value < best.log2_epsilon) {
                best.log2_epsilon = value;
                best.eta = eta;
                best.lambda = lambda;
            }
        }
    }
    return best;
}

std::size_t choose_k(std::uint64_t n_points, double r, KSchedule schedule) {
    if (n_points < 2) throw ArgumentError("choose_k: N must be >= 2");
    if (!(r > 0.0)) throw ArgumentError("choose_k: r must be > 0");
    const double log2n = std::log2(static_cast<double>(n_points));
    double factor = r;
    if (schedule == KSchedule::slow_growth) {
        factor = std::max(1.0, std::log(std::log(static_cast<double>(n_points))));
    }
    const double x = std::ceil(factor * log2n - 1e-12);
    return static_cast<std::size_t>(4.0 * x) - 1;
}

} // namespace mqmc
