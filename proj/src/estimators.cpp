#include "mqmc/estimators.hpp"

#include "mqmc/errors.hpp"
#include "mqmc/numerics.hpp"
#include "mqmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace mqmc {

namespace {

std::size_t resolve_threads(std::size_t threads) { return threads == 0 ? hardware_threads() : threads; }

void require_dimension(const Integrand& f, std::size_t s) {
    if (!f.evaluate) throw ArgumentError("integrand '" + f.name + "' has no evaluate function");
    if (f.dimension != s) {
        throw ArgumentError("integrand '" + f.name + "' has dimension " + std::to_string(f.dimension) +
                            ", point set has " + std::to_string(s));
    }
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

double qmc_estimate(const Integrand& f, const GeneratingVector& z, const Shift& shift) {
    const std::size_t s = z.dimension();
    require_dimension(f, s);
    if (shift.dimension() != s) throw ArgumentError("qmc_estimate: shift dimension differs from vector");
    const std::uint64_t N = z.n_points();
    const double inv_n = 1.0 / static_cast<double>(N);
    std::vector<double> y(s);
    std::vector<std::uint64_t> idx(s, 0);
    double sum = 0.0;
    for (std::uint64_t n = 0; n < N; ++n) {
        for (std::size_t j = 0; j < s; ++j) {
            double x = static_cast<double>(idx[j]) * inv_n + shift.components[j];
            if (x >= 1.0) x -= 1.0;
            y[j] = normal_inv_cdf(x);
            idx[j] += z[j];
            if (idx[j] >= N) idx[j] -= N;
        }
        sum += f.evaluate(y);
    }
    return sum * inv_n;
}

double median_of(std::vector<double> values) {
    if (values.empty() || values.size() % 2 == 0) throw ArgumentError("median_of: need an odd number of values");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

MedianResult median_estimate(const Integrand& f, std::uint64_t n_points, std::size_t k, SeedSpec seed,
                             std::size_t threads) {
    if (k < 1 || k % 2 == 0) throw ArgumentError("median_estimate: k must be odd and >= 1, got " + std::to_string(k));
    require_dimension(f, f.dimension);
    MedianResult out;
    out.replicates.k = k;
    out.replicates.seed = seed;
    out.replicates.replicates.resize(k);
    parallel_for(k, resolve_threads(threads), [&](std::size_t i) {
        const std::uint64_t l = i + 1;
        auto& rep = out.replicates.replicates[i];
        rep.z = sample_generating_vector(n_points, f.dimension, derive_replicate_seed(seed, l, StreamRole::vector));
        rep.shift = sample_shift(f.dimension, derive_replicate_seed(seed, l, StreamRole::shift));
        rep.value = qmc_estimate(f, rep.z, rep.shift);
    });
    std::vector<double> values(k);
    for (std::size_t i = 0; i < k; ++i) values[i] = out.replicates.replicates[i].value;
    out.value = median_of(std::move(values));
    return out;
}

double shifted_mean_estimate(const Integrand& f, const GeneratingVector& z, std::size_t k, SeedSpec seed,
                             std::size_t threads) {
    if (k < 1) throw ArgumentError("shifted_mean_estimate: k must be >= 1");
    std::vector<double> values(k);
    parallel_for(k, resolve_threads(threads), [&](std::size_t i) {
        const Shift shift = sample_shift(z.dimension(), derive_replicate_seed(seed, i + 1, StreamRole::shift));
        values[i] = qmc_estimate(f, z, shift);
    });
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(k);
}

double mc_estimate(const Integrand& f, std::uint64_t samples, SeedSpec seed, std::size_t threads) {
    if (samples < 1) throw ArgumentError("mc_estimate: M must be >= 1");
    require_dimension(f, f.dimension);
    const std::size_t s = f.dimension;
    const std::size_t chunks = static_cast<std::size_t>((samples + kMcChunk - 1) / kMcChunk);
    std::vector<double> partial(chunks, 0.0);
    parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
        RandomStream rng(derive_replicate_seed(seed, c + 1, StreamRole::mc));
        const std::uint64_t begin = static_cast<std::uint64_t>(c) * kMcChunk;
        const std::uint64_t end = std::min<std::uint64_t>(samples, begin + kMcChunk);
        std::vector<double> y(s);
        double sum = 0.0;
        for (std::uint64_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < s; ++j) y[j] = normal_inv_cdf(rng.uniform_open());
            sum += f.evaluate(y);
        }
        partial[c] = sum;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total / static_cast<double>(samples);
}

ReferenceValue reference_value(const Integrand& f, SeedSpec seed, const ReferenceSpec& spec, std::size_t threads) {
    if (spec.repetitions < 2) throw ArgumentError("reference_value: need at least 2 repetitions");
    if (spec.k < 1 || spec.k % 2 == 0) throw ArgumentError("reference_value: k must be odd");
    require_dimension(f, f.dimension);
    const std::size_t R = spec.repetitions, k = spec.k;

    // All R * k lattice estimates are independent jobs.
    std::vector<double> values(R * k);
    parallel_for(R * k, resolve_threads(threads), [&](std::size_t job) {
        const SeedSpec rep_seed = derive_replicate_seed(seed, job / k + 1, StreamRole::reference);
        const std::uint64_t l = job % k + 1;
        const auto z = sample_generating_vector(spec.n_points, f.dimension,
                                                derive_replicate_seed(rep_seed, l, StreamRole::vector));
        const auto shift = sample_shift(f.dimension, derive_replicate_seed(rep_seed, l, StreamRole::shift));
        values[job] = qmc_estimate(f, z, shift);
    });

    ReferenceValue out;
    out.provenance = "median-lattice";
    out.n_points = spec.n_points;
    out.k = k;
    out.repetitions = R;
    out.seed = seed;
    for (std::size_t r = 0; r < R; ++r) {
        out.repetition_values.push_back(median_of({values.begin() + static_cast<std::ptrdiff_t>(r * k),
                                                   values.begin() + static_cast<std::ptrdiff_t>((r + 1) * k)}));
    }
    double mean = 0.0;
    for (double v : out.repetition_values) mean += v;
    mean /= static_cast<double>(R);
    double ss = 0.0;
    for (double v : out.repetition_values) ss += (v - mean) * (v - mean);
    out.value = mean;
    out.dispersion = std::sqrt(ss / static_cast<double>(R - 1));
    return out;
}

ReferenceValue analytic_reference(const Integrand& f) {
    if (!f.exact) throw ArgumentError("integrand '" + f.name + "' has no exact value");
    ReferenceValue out;
    out.value = *f.exact;
    out.provenance = "analytic";
    return out;
}

std::string method_name(Method m) {
    switch (m) {
    case Method::mc: return "mc";
    case Method::cbc_lattice: return "cbc-lattice";
    case Method::median_lattice: return "median-lattice";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    if (name == "mc") return Method::mc;
    if (name == "cbc-lattice") return Method::cbc_lattice;
    if (name == "median-lattice") return Method::median_lattice;
    throw ArgumentError("unknown method '" + name + "' (expected mc, cbc-lattice or median-lattice)");
}

MAEStudy run_mae_study(const Integrand& f, const MAEStudyOptions& options) {
    if (options.replicates < 2) throw ArgumentError("run_mae_study: L must be >= 2");
    if (options.k < 1 || options.k % 2 == 0) throw ArgumentError("run_mae_study: k must be odd");
    if (options.n_points.empty()) throw ArgumentError("run_mae_study: empty N grid");
    if (options.methods.empty()) throw ArgumentError("run_mae_study: no methods");
    for (auto N : options.n_points) {
        if (N < 2) throw ArgumentError("run_mae_study: every N must be >= 2");
    }
    for (auto m : options.methods) {
        if (m != Method::cbc_lattice) continue;
        for (auto N : options.n_points) {
            auto it = options.cbc_vectors.find(N);
            if (it == options.cbc_vectors.end()) {
                throw ArgumentError("run_mae_study: cbc-lattice requested but no CBC vector for N = " + std::to_string(N));
            }
            if (it->second.dimension() != f.dimension) {
                throw ArgumentError("run_mae_study: CBC vector for N = " + std::to_string(N) + " has wrong dimension");
            }
        }
    }
    const std::size_t threads = resolve_threads(options.threads);

    MAEStudy study;
    study.problem = f.name;
    study.k = options.k;
    study.seed = options.seed;
    study.reference = options.use_analytic_reference
                          ? analytic_reference(f)
                          : reference_value(f, derive_replicate_seed(options.seed, 1, StreamRole::reference),
                                            options.reference, threads);

    std::vector<Method> methods = options.methods;
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

    const std::size_t L = options.replicates;
    const std::size_t cells = options.n_points.size() * methods.size();
    for (std::size_t i = 0; i < options.n_points.size(); ++i) {
        for (auto m : methods) {
            MAERow row;
            row.method = m;
            row.n_points = options.n_points[i];
            row.budget = static_cast<std::uint64_t>(options.k) * options.n_points[i];
            row.replicates = L;
            row.estimates.assign(L, 0.0);
            study.rows.push_back(std::move(row));
        }
    }

    parallel_for(cells * L, threads, [&](std::size_t job) {
        const std::size_t cell = job / L;
        const std::uint64_t l = job % L + 1;
        const std::size_t i = cell / methods.size();
        auto& row = study.rows[cell];
        const std::uint64_t m_tag = static_cast<std::uint64_t>(row.method) + 1;
        SeedSpec seed = derive_replicate_seed(options.seed, l, StreamRole::study);
        seed = derive_replicate_seed(seed, i + 1, StreamRole::row);
        seed = derive_replicate_seed(seed, m_tag, StreamRole::method);
        double estimate = 0.0;
        switch (row.method) {
        case Method::mc: estimate = mc_estimate(f, row.budget, seed, 1); break;
        case Method::cbc_lattice:
            estimate = shifted_mean_estimate(f, options.cbc_vectors.at(row.n_points), options.k, seed, 1);
            break;
        case Method::median_lattice: estimate = median_estimate(f, row.n_points, options.k, seed, 1).value; break;
        }
        row.estimates[l - 1] = estimate;
    });

    double smallest = std::numeric_limits<double>::infinity();
    for (auto& row : study.rows) {
        double sum = 0.0;
        for (double e : row.estimates) sum += std::abs(e - study.reference.value);
        row.mae = sum / static_cast<double>(L);
        smallest = std::min(smallest, row.mae);
    }
    if (study.reference.dispersion > 0.1 * smallest) {
        study.warnings.push_back("reference dispersion " + format_double(study.reference.dispersion) +
                                 " exceeds 10% of the smallest MAE " + format_double(smallest));
    }
    return study;
}

std::string to_csv(const MAEStudy& study) {
    std::ostringstream os;
    os << "method,N,budget,MAE,L,reference,reference_dispersion,seed\n";
    for (const auto& row : study.rows) {
        os << method_name(row.method) << ',' << row.n_points << ',' << row.budget << ',' << format_double(row.mae) << ','
           << row.replicates << ',' << format_double(study.reference.value) << ','
           << format_double(study.reference.dispersion) << ',' << study.seed.master_seed << '\n';
    }
    return os.str();
}

nlohmann::json to_json(const MAEStudy& study) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : study.rows) {
        rows.push_back({{"method", method_name(row.method)},
                        {"N", row.n_points},
                        {"budget", row.budget},
                        {"MAE", row.mae},
                        {"L", row.replicates},
                        {"estimates", row.estimates}});
    }
    const auto& ref = study.reference;
    return {{"problem", study.problem},
            {"k", study.k},
            {"seed", study.seed.master_seed},
            {"reference",
             {{"value", ref.value},
              {"dispersion", ref.dispersion},
              {"provenance", ref.provenance},
              {"N", ref.n_points},
              {"k", ref.k},
              {"repetitions", ref.repetitions},
              {"repetition_values", ref.repetition_values},
              {"seed", ref.seed.master_seed}}},
            {"rows", rows},
            {"warnings", study.warnings}};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("loglog_slope: need two or more paired values");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log2(x[i]);
        my += std::log2(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log2(x[i]) - mx;
        sxy += dx * (std::log2(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

std::vector<const MAERow*> rows_for(const MAEStudy& study, Method m) {
    std::vector<const MAERow*> out;
    for (const auto& row : study.rows) {
        if (row.method == m) out.push_back(&row);
    }
    std::sort(out.begin(), out.end(), [](const MAERow* a, const MAERow* b) { return a->n_points < b->n_points; });
    return out;
}

} // namespace mqmc
