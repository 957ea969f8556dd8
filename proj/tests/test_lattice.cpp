#include <numeric>
#include <set>

#include <doctest.h>

#include "mqmc/errors.hpp"
#include "mqmc/lattice.hpp"

using namespace mqmc;

TEST_CASE("euler totient and coprime residues") {
    CHECK(euler_totient(257) == 256);
    CHECK(euler_totient(12) == 4);
    CHECK(euler_totient(1) == 1);
    CHECK(euler_totient(1024) == 512);
    CHECK(euler_totient(1048583) == 1048582);
    CHECK(coprime_residues(12) == std::vector<std::uint64_t>{1, 5, 7, 11});
    for (std::uint64_t n : {2u, 9u, 30u, 97u, 100u}) CHECK(coprime_residues(n).size() == euler_totient(n));
}

TEST_CASE("generating vector validation") {
    CHECK_NOTHROW(GeneratingVector(12, {1, 5, 7}));
    CHECK_THROWS_AS(GeneratingVector(12, {1, 4}), ArgumentError);
    CHECK_THROWS_AS(GeneratingVector(12, {13}), ArgumentError);
    CHECK_THROWS_AS(GeneratingVector(1, {1}), ArgumentError);
    CHECK_THROWS_AS(Shift({0.5, 1.0}), ArgumentError);
    CHECK_THROWS_AS(Shift({-0.1}), ArgumentError);
    const GeneratingVector z(31, {1, 12, 5});
    CHECK(z.truncated(2) == GeneratingVector(31, {1, 12}));
}

TEST_CASE("sampled generating vectors") {
    for (std::uint64_t n : {12u, 30u, 257u, 1024u}) {
        const auto z = sample_generating_vector(n, 40, SeedSpec{n});
        for (auto c : z.components()) CHECK(std::gcd(c, n) == 1);
    }
    CHECK(sample_generating_vector(257, 30, SeedSpec{5}) == sample_generating_vector(257, 30, SeedSpec{5}));
    CHECK_FALSE(sample_generating_vector(257, 30, SeedSpec{5}) == sample_generating_vector(257, 30, SeedSpec{6}));
}

TEST_CASE("sampled components are uniform on {1..N-1} for prime N") {
    const std::uint64_t n = 31;
    std::vector<double> counts(n, 0.0);
    const std::size_t draws = 100000, s = 10;
    for (std::size_t i = 0; i < draws / s; ++i) {
        const auto z = sample_generating_vector(n, s, derive_replicate_seed(SeedSpec{99}, i + 1, StreamRole::vector));
        for (auto c : z.components()) counts[c] += 1.0;
    }
    CHECK(counts[0] == 0.0);
    const double expected = static_cast<double>(draws) / static_cast<double>(n - 1);
    double chi2 = 0.0;
    for (std::size_t c = 1; c < n; ++c) chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
    // 0.999 quantile of chi-square with 29 degrees of freedom.
    CHECK(chi2 < 58.301);
}

TEST_CASE("lattice points") {
    const GeneratingVector z(4, {1, 3});
    CHECK(lattice_point(z, Shift::zero(2), 0) == std::vector<double>{0.0, 0.0});
    CHECK(lattice_point(z, Shift::zero(2), 2) == std::vector<double>{0.5, 0.5});
    CHECK(lattice_point(z, Shift({0.75, 0.75}), 2) == std::vector<double>{0.25, 0.25});
    CHECK(lattice_point(z, Shift({0.75, 0.75}), 1) == std::vector<double>{0.0, 0.5});
    CHECK_THROWS_AS(lattice_point(z, Shift::zero(3), 1), ArgumentError);

    // Large N: n z_j must not overflow.
    const GeneratingVector big(4294967291ULL, {4294967290ULL});
    const auto x = lattice_point(big, Shift::zero(1), 4294967290ULL);
    CHECK(x[0] == doctest::Approx(1.0 / 4294967291.0).epsilon(1e-6));
}

TEST_CASE("replicate seeds") {
    const SeedSpec m{42};
    const auto shift1 = derive_replicate_seed(m, 1, StreamRole::shift);
    CHECK(shift1.master_seed != derive_replicate_seed(m, 1, StreamRole::vector).master_seed);
    CHECK(shift1.master_seed != derive_replicate_seed(m, 2, StreamRole::shift).master_seed);
    CHECK(shift1.master_seed == derive_replicate_seed(m, 1, StreamRole::shift).master_seed);
    CHECK_THROWS_AS(derive_replicate_seed(m, 0, StreamRole::shift), ArgumentError);

    std::set<std::uint64_t> seen;
    for (std::uint64_t l = 1; l <= 1000; ++l) {
        for (auto role : {StreamRole::shift, StreamRole::vector, StreamRole::mc, StreamRole::study}) {
            seen.insert(derive_replicate_seed(m, l, role).master_seed);
        }
    }
    CHECK(seen.size() == 4000);
}

TEST_CASE("random stream ranges") {
    RandomStream rng(SeedSpec{3});
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform_open();
        CHECK((u > 0.0 && u < 1.0));
        const double v = rng.uniform();
        CHECK((v >= 0.0 && v < 1.0));
        const auto k = rng.uniform_int(1, 6);
        CHECK((k >= 1 && k <= 6));
    }
    const auto shift = sample_shift(5, SeedSpec{8});
    CHECK(shift.dimension() == 5);
    CHECK(shift.components == sample_shift(5, SeedSpec{8}).components);
}

TEST_CASE("generating vector serialization") {
    const GeneratingVector z(257, {1, 76, 113});
    CHECK(to_text(z) == "257 3 1 76 113\n");
    CHECK(generating_vector_from_text(to_text(z)) == z);
    CHECK(generating_vector_from_text("# header\n# more\n257 3 1 76 113\n") == z);
    CHECK(generating_vector_from_json(to_json(z)) == z);
    CHECK_THROWS_AS(generating_vector_from_text("257 3 1 76"), ArgumentError);
    CHECK_THROWS_AS(generating_vector_from_text("257 1 257"), ArgumentError);
    CHECK_THROWS_AS(generating_vector_from_json(nlohmann::json{{"z", {1}}}), ArgumentError);
}
