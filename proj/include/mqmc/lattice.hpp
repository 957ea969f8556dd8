#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace mqmc {

/// Rank-1 lattice generating vector z in G_N^s together with its modulus N.
/// Every component satisfies 1 <= z_j <= N-1 and gcd(z_j, N) = 1.
class GeneratingVector {
public:
    GeneratingVector() = default;
    /// Throws ArgumentError when N < 2, N >= 2^32 or a component is not in G_N.
    GeneratingVector(std::uint64_t n_points, std::vector<std::uint64_t> components);

    std::uint64_t n_points() const noexcept { return n_points_; }
    std::size_t dimension() const noexcept { return components_.size(); }
    const std::vector<std::uint64_t>& components() const noexcept { return components_; }
    std::uint64_t operator[](std::size_t j) const { return components_[j]; }

    /// Prefix z_1..z_d as a new vector.
    GeneratingVector truncated(std::size_t d) const;

    bool operator==(const GeneratingVector&) const = default;

private:
    std::uint64_t n_points_ = 0;
    std::vector<std::uint64_t> components_;
};

/// Random shift Delta in [0,1)^s.
struct Shift {
    std::vector<double> components;

    Shift() = default;
    explicit Shift(std::vector<double> c);
    static Shift zero(std::size_t s) { return Shift(std::vector<double>(s, 0.0)); }
    std::size_t dimension() const noexcept { return components.size(); }
};

// ---------------------------------------------------------------------------
// Seeds and random streams
// ---------------------------------------------------------------------------

/// Independent stream roles. The numeric tags are part of the seed-derivation
/// contract and must not change.
enum class StreamRole : std::uint64_t {
    shift = 1,
    vector = 2,
    mc = 3,
    study = 4,
    reference = 5,
    method = 6,
    row = 7,
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    bool operator==(const SeedSpec&) const = default;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for replicate l >= 1 and a stream role:
///   h = mix64(master + 0x9E3779B97F4A7C15)
///   h = mix64(h ^ role * 0xD1B54A32D192ED03)
///   h = mix64(h ^ l * 0x8CB92BA72F3D8DD7)
/// Pure and platform independent.
SeedSpec derive_replicate_seed(SeedSpec seed, std::uint64_t l, StreamRole role);

/// Bit-reproducible random stream (mt19937_64 plus explicit conversions, since
/// the standard distributions are implementation defined).
class RandomStream {
public:
    explicit RandomStream(SeedSpec seed) : engine_(seed.master_seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on the open interval (0,1) with 53-bit resolution.
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }
    /// Uniform on [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [lo, hi] (unbiased rejection).
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Number theory and point generation
// ---------------------------------------------------------------------------

/// |G_N|, by trial-division factorization.
std::uint64_t euler_totient(std::uint64_t n);

/// G_N in increasing order.
std::vector<std::uint64_t> coprime_residues(std::uint64_t n);

/// z with i.i.d. components uniform on G_N (rejection from {1..N-1}).
GeneratingVector sample_generating_vector(std::uint64_t n, std::size_t s, SeedSpec seed);

/// Delta uniform on [0,1)^s.
Shift sample_shift(std::size_t s, SeedSpec seed);

/// x_n = frac(n z / N + Delta) written into `out` (size s). Requires n < N.
void lattice_point(const GeneratingVector& z, const Shift& shift, std::uint64_t n,
                   std::span<double> out);
std::vector<double> lattice_point(const GeneratingVector& z, const Shift& shift,
                                  std::uint64_t n);

// ---------------------------------------------------------------------------
// Serialization: "N s z_1 ... z_s" and {"n_points": N, "z": [...]}
// ---------------------------------------------------------------------------

std::string to_text(const GeneratingVector& z);
GeneratingVector generating_vector_from_text(const std::string& text);
nlohmann::json to_json(const GeneratingVector& z);
GeneratingVector generating_vector_from_json(const nlohmann::json& j);

} // namespace mqmc
