#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "mqmc/errors.hpp"
#include "mqmc/estimators.hpp"
#include "mqmc/problems.hpp"

using namespace mqmc;

namespace {

Integrand constant_integrand(std::size_t s, double c) {
    Integrand f;
    f.dimension = s;
    f.name = "constant";
    f.exact = c;
    f.evaluate = [c](std::span<const double>) { return c; };
    return f;
}

Integrand first_coordinate() {
    Integrand f;
    f.dimension = 1;
    f.name = "y1";
    f.exact = 0.0;
    f.evaluate = [](std::span<const double> y) { return y[0]; };
    return f;
}

Integrand example_exp_linear(std::size_t s) {
    std::vector<double> a(s);
    for (std::size_t j = 0; j < s; ++j) a[j] = 1.0 / (4.0 * static_cast<double>((j + 1) * (j + 1)));
    return exp_linear_integrand(a);
}

} // namespace

TEST_CASE("median of an odd sample") {
    CHECK(median_of({3.0}) == 3.0);
    CHECK(median_of({5.0, -1.0, 2.0}) == 2.0);
    CHECK_THROWS_AS(median_of({1.0, 2.0}), ArgumentError);
    CHECK_THROWS_AS(median_of({}), ArgumentError);
}

TEST_CASE("single shifted lattice estimate") {
    const auto c = constant_integrand(3, 3.25);
    const auto z = sample_generating_vector(101, 3, SeedSpec{1});
    CHECK(qmc_estimate(c, z, sample_shift(3, SeedSpec{2})) == 3.25);

    const auto f = exp_linear_integrand({0.5, 0.25});
    const auto z2 = sample_generating_vector(4099, 2, SeedSpec{3});
    CHECK(std::abs(qmc_estimate(f, z2, sample_shift(2, SeedSpec{4})) - std::exp(0.15625)) < 1e-2);
    CHECK_THROWS_AS(qmc_estimate(f, GeneratingVector(7, {1}), Shift::zero(1)), ArgumentError);
}

TEST_CASE("shifted lattice estimate is unbiased") {
    const auto f = exp_linear_integrand({0.5, 0.25});
    const std::size_t reps = 10000;
    std::vector<double> v(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const SeedSpec s{i + 1};
        v[i] = qmc_estimate(f, sample_generating_vector(31, 2, derive_replicate_seed(s, 1, StreamRole::vector)),
                            sample_shift(2, derive_replicate_seed(s, 1, StreamRole::shift)));
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / reps;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(reps - 1);
    CHECK(std::abs(mean - *f.exact) <= 3.0 * std::sqrt(var / reps));
}

TEST_CASE("median estimate") {
    const auto f = example_exp_linear(4);
    const auto one = median_estimate(f, 127, 1, SeedSpec{5});
    REQUIRE(one.replicates.replicates.size() == 1);
    const auto& r = one.replicates.replicates[0];
    CHECK(one.value == qmc_estimate(f, r.z, r.shift));
    CHECK(r.value == one.value);

    const auto m = median_estimate(f, 127, 11, SeedSpec{5}, 1);
    std::vector<double> vals;
    for (const auto& rep : m.replicates.replicates) vals.push_back(rep.value);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(vals.begin(), vals.end(), rng);
        CHECK(median_of(vals) == m.value);
    }
    CHECK(median_estimate(f, 127, 11, SeedSpec{5}, 4).value == m.value);
    CHECK(m.replicates.replicates[0].z == one.replicates.replicates[0].z);

    CHECK(median_estimate(constant_integrand(3, -2.5), 61, 5, SeedSpec{9}).value == -2.5);
    CHECK_THROWS_AS(median_estimate(f, 127, 4, SeedSpec{5}), ArgumentError);
    CHECK_THROWS_AS(median_estimate(f, 127, 0, SeedSpec{5}), ArgumentError);
}

TEST_CASE("shifted mean of a fixed vector") {
    const auto f = example_exp_linear(3);
    const auto z = sample_generating_vector(257, 3, SeedSpec{2});
    const double v = shifted_mean_estimate(f, z, 7, SeedSpec{3}, 1);
    double sum = 0.0;
    for (std::uint64_t l = 1; l <= 7; ++l) sum += qmc_estimate(f, z, sample_shift(3, derive_replicate_seed(SeedSpec{3}, l, StreamRole::shift)));
    CHECK(v == doctest::Approx(sum / 7.0).epsilon(1e-15));
    CHECK(shifted_mean_estimate(f, z, 7, SeedSpec{3}, 3) == v);
}

TEST_CASE("monte carlo") {
    CHECK(mc_estimate(constant_integrand(2, 4.0), 10000, SeedSpec{1}) == doctest::Approx(4.0).epsilon(1e-15));
    const double m = mc_estimate(first_coordinate(), 1000000, SeedSpec{2});
    CHECK(std::abs(m) <= 4.0 / 1000.0);
    CHECK(mc_estimate(first_coordinate(), 50000, SeedSpec{2}, 1) == mc_estimate(first_coordinate(), 50000, SeedSpec{2}, 4));

    std::vector<double> Ms, rmse;
    for (unsigned e = 10; e <= 18; e += 2) {
        const std::uint64_t M = std::uint64_t{1} << e;
        double se = 0.0;
        for (std::uint64_t r = 1; r <= 50; ++r) {
            const double v = mc_estimate(first_coordinate(), M, derive_replicate_seed(SeedSpec{77}, r, StreamRole::study));
            se += v * v;
        }
        Ms.push_back(static_cast<double>(M));
        rmse.push_back(std::sqrt(se / 50.0));
    }
    const double slope = loglog_slope(Ms, rmse);
    CHECK(slope >= -0.6);
    CHECK(slope <= -0.4);
}

TEST_CASE("reference value") {
    const auto f = example_exp_linear(10);
    ReferenceSpec spec;
    spec.n_points = 262147;
    spec.repetitions = 3;
    const auto ref = reference_value(f, SeedSpec{4}, spec);
    CHECK(ref.value == doctest::Approx(*f.exact).epsilon(1e-5));
    CHECK(ref.provenance == "median-lattice");
    CHECK(ref.repetition_values.size() == 3);
    CHECK(ref.dispersion >= 0.0);

    ReferenceSpec small;
    small.n_points = 1021;
    small.repetitions = 4;
    const auto a = reference_value(f, SeedSpec{4}, small, 1);
    const auto b = reference_value(f, SeedSpec{4}, small, 3);
    CHECK(a.value == b.value);
    CHECK(a.repetition_values == b.repetition_values);
    double mean = 0.0;
    for (double v : a.repetition_values) mean += v / 4.0;
    CHECK(a.value == doctest::Approx(mean).epsilon(1e-15));

    const auto exact = analytic_reference(f);
    CHECK(exact.value == *f.exact);
    CHECK(exact.dispersion == 0.0);
    CHECK(exact.provenance == "analytic");
    CHECK_THROWS_AS(analytic_reference(Integrand{}), ArgumentError);
}

TEST_CASE("method names") {
    for (Method m : {Method::mc, Method::cbc_lattice, Method::median_lattice}) CHECK(parse_method(method_name(m)) == m);
    CHECK_THROWS_AS(parse_method("qmc"), ArgumentError);
}

TEST_CASE("MAE study") {
    const auto f = example_exp_linear(3);
    MAEStudyOptions opts;
    opts.n_points = {31, 61};
    opts.k = 3;
    opts.replicates = 5;
    opts.seed = SeedSpec{12};
    opts.use_analytic_reference = true;
    opts.threads = 1;
    CHECK_THROWS_AS(run_mae_study(f, opts), ArgumentError);  // no CBC vectors
    opts.cbc_vectors.emplace(31, GeneratingVector(31, {1, 12, 5}));
    opts.cbc_vectors.emplace(61, GeneratingVector(61, {1, 23, 11}));

    const auto study = run_mae_study(f, opts);
    REQUIRE(study.rows.size() == 6);
    CHECK(study.rows[0].method == Method::mc);
    CHECK(study.rows[0].n_points == 31);
    CHECK(study.rows[2].method == Method::median_lattice);
    for (const auto& row : study.rows) {
        CHECK(row.budget == 3 * row.n_points);
        CHECK(row.replicates == 5);
        REQUIRE(row.estimates.size() == 5);
        double mae = 0.0;
        for (double e : row.estimates) mae += std::abs(e - *f.exact) / 5.0;
        CHECK(row.mae == doctest::Approx(mae).epsilon(1e-14));
    }
    CHECK(study.reference.provenance == "analytic");

    opts.threads = 4;
    const auto again = run_mae_study(f, opts);
    CHECK(to_csv(again) == to_csv(study));

    const auto csv = to_csv(study);
    CHECK(csv.rfind("method,N,budget,MAE,L,reference,reference_dispersion,seed\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    const auto j = to_json(study);
    CHECK(j["rows"].size() == 6);

    CHECK(rows_for(study, Method::cbc_lattice).size() == 2);
    CHECK(rows_for(study, Method::cbc_lattice)[1]->n_points == 61);

    opts.k = 2;
    CHECK_THROWS_AS(run_mae_study(f, opts), ArgumentError);
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1.0, 2.0, 4.0, 8.0}, {1.0, 0.5, 0.25, 0.125}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ArgumentError);
}
