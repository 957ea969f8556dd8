#include "mqmc/numerics.hpp"

#include "mqmc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

namespace mqmc {

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0.0)) throw ArgumentError("QuadratureSpec: abs_tol must be > 0");
    if (!(rel_tol >= 0.0)) throw ArgumentError("QuadratureSpec: rel_tol must be >= 0");
    if (max_subdivisions < 1) throw ArgumentError("QuadratureSpec: max_subdivisions must be >= 1");
}

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double log_normal_cdf(double x) {
    if (x > -30.0) return std::log(normal_cdf(x));
    // Mills-ratio expansion: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    const double x2 = x * x;
    const double inv = 1.0 / x2;
    const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
    return -0.5 * x2 - std::log(-x) - std::log(kSqrt2Pi) + std::log(series);
}

double normal_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("normal_inv_cdf: p must lie in (0,1), got " + std::to_string(p));
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        value = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        value = num / den;
    }
    return q < 0.0 ? -value : value;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
};

struct SegmentOrder {
    bool operator()(const Segment& l, const Segment& r) const {
        if (l.error != r.error) return l.error < r.error;
        return l.a > r.a;
    }
};

Segment gauss_kronrod_15(const RealFunction& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 7> fv1{};
    std::array<double, 7> fv2{};
    const double fc = f(center);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double dx = half * kXgk[jtw];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double dx = half * kXgk[jtwm1];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    }
    const double result = resk * half;
    resabs *= abs_half;
    resasc *= abs_half;
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return {a, b, result, err};
}

} // namespace

QuadratureResult integrate_adaptive(const RealFunction& f, double a, double b,
                                    const QuadratureSpec& spec, std::size_t initial_panels) {
    spec.validate();
    if (!(std::isfinite(a) && std::isfinite(b))) {
        throw ArgumentError("integrate_adaptive: limits must be finite");
    }
    QuadratureResult out;
    if (a == b) return out;
    initial_panels = std::max<std::size_t>(initial_panels, 1);

    std::priority_queue<Segment, std::vector<Segment>, SegmentOrder> heap;
    double total = 0.0;
    double total_err = 0.0;
    const double width = (b - a) / static_cast<double>(initial_panels);
    for (std::size_t i = 0; i < initial_panels; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == initial_panels) ? b : a + width * static_cast<double>(i + 1);
        Segment s = gauss_kronrod_15(f, lo, hi);
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    out.evaluations = 15 * initial_panels;

    // Segments too narrow to split further are retired with their error kept.
    double retired_err = 0.0;
    while (!heap.empty()) {
        const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total));
        if (total_err <= tol) break;
        if (heap.size() + 1 > spec.max_subdivisions) {
            throw AccuracyError("integrate_adaptive: subdivision limit reached", total, total_err);
        }
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            std::abs(worst.b - worst.a) < 1e-13 * std::max(1.0, std::abs(mid))) {
            retired_err += worst.error;
            if (heap.empty()) break;
            continue;
        }
        const Segment left = gauss_kronrod_15(f, worst.a, mid);
        const Segment right = gauss_kronrod_15(f, mid, worst.b);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in a fixed order so the result does not carry incremental drift.
    double sum = 0.0;
    double err = retired_err;
    std::vector<Segment> rest;
    rest.reserve(heap.size());
    while (!heap.empty()) {
        rest.push_back(heap.top());
        heap.pop();
    }
    std::sort(rest.begin(), rest.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
    for (const auto& s : rest) {
        sum += s.value;
        err += s.error;
    }
    out.value = sum;
    out.error = err;
    out.subdivisions = rest.size();
    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
    if (!(err <= tol) && retired_err > tol) {
        throw AccuracyError("integrate_adaptive: round-off prevents reaching tolerance", sum, err);
    }
    return out;
}

double integrate_semi_infinite(const RealFunction& f, double lower, const QuadratureSpec& spec) {
    if (std::isnan(lower)) throw ArgumentError("integrate_semi_infinite: lower limit is NaN");
    const double lo = std::max(lower, -kTailCutoff);
    if (lo >= kTailCutoff) return 0.0;
    // A few panels per unit length keeps the first pass close to the bulk of the mass.
    const auto panels = static_cast<std::size_t>(std::ceil((kTailCutoff - lo) / 4.0));
    return integrate_adaptive(f, lo, kTailCutoff, spec, panels).value;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre
// ---------------------------------------------------------------------------

GaussLegendreRule gauss_legendre(std::size_t n) {
    if (n == 0) throw ArgumentError("gauss_legendre: n must be positive");
    GaussLegendreRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    if (n == 1) {
        rule.weights[0] = 2.0;
        return rule;
    }
    // Returns P_n(x) and P_n'(x) by the three-term recurrence.
    auto legendre = [n](double x) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double kd = static_cast<double>(k);
            const double pk = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
            p0 = p1;
            p1 = pk;
        }
        const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        return std::pair{p1, dp};
    };
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

CompositeRule make_composite_rule(double a, double b, std::size_t n_subintervals,
                                  std::size_t nodes_per_subinterval) {
    if (!(a < b)) throw ArgumentError("make_composite_rule: requires a < b");
    if (n_subintervals == 0) throw ArgumentError("make_composite_rule: n_subintervals must be positive");
    const GaussLegendreRule base = gauss_legendre(nodes_per_subinterval);
    CompositeRule rule;
    rule.nodes.reserve(n_subintervals * nodes_per_subinterval);
    rule.weights.reserve(n_subintervals * nodes_per_subinterval);
    const double h = (b - a) / static_cast<double>(n_subintervals);
    for (std::size_t i = 0; i < n_subintervals; ++i) {
        const double lo = a + h * static_cast<double>(i);
        const double mid = lo + 0.5 * h;
        for (std::size_t k = 0; k < base.nodes.size(); ++k) {
            rule.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
            rule.weights.push_back(0.5 * h * base.weights[k]);
        }
    }
    return rule;
}

double composite_gauss_legendre(const RealFunction& f, double a, double b,
                                std::size_t n_subintervals, std::size_t nodes_per_subinterval) {
    return make_composite_rule(a, b, n_subintervals, nodes_per_subinterval).apply(f);
}

// ---------------------------------------------------------------------------
// Riemann zeta
// ---------------------------------------------------------------------------

double riemann_zeta(double s) {
    if (!(s >= 1.02)) {
        throw CapabilityError("riemann_zeta: argument " + std::to_string(s) +
                              " too close to the pole at 1 (need s >= 1.02)");
    }
    // B_{2k} / (2k)!
    constexpr std::array<double, 10> kB2kOverFact = {
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
        -3617.0 / 510.0 / 20922789888000.0,
        43867.0 / 798.0 / 6402373705728000.0,
        -174611.0 / 330.0 / 2432902008176640000.0};
    constexpr int kTerms = 16;
    const double m = static_cast<double>(kTerms);
    double sum = 0.0;
    for (int n = kTerms - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
    sum += std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s);
    // Rising factorial s (s+1) ... (s+2k-2) times m^{-s-2k+1}.
    double rising = s;
    double mpow = std::pow(m, -s - 1.0);
    for (std::size_t k = 0; k < kB2kOverFact.size(); ++k) {
        sum += kB2kOverFact[k] * rising * mpow;
        rising *= (s + 2.0 * k + 1.0) * (s + 2.0 * k + 2.0);
        mpow /= m * m;
    }
    return sum;
}

} // namespace mqmc
