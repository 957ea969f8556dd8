#include "mqmc/lattice.hpp"

#include "mqmc/errors.hpp"

#include <limits>
#include <numeric>
#include <sstream>

namespace mqmc {

GeneratingVector::GeneratingVector(std::uint64_t n_points, std::vector<std::uint64_t> components)
    : n_points_(n_points), components_(std::move(components)) {
    if (n_points_ < 2) throw ArgumentError("GeneratingVector: N must be >= 2");
    if (n_points_ >= (std::uint64_t{1} << 32)) {
        throw ArgumentError("GeneratingVector: N must be below 2^32");
    }
    for (std::size_t j = 0; j < components_.size(); ++j) {
        const auto zj = components_[j];
        if (zj < 1 || zj >= n_points_ || std::gcd(zj, n_points_) != 1) {
            throw ArgumentError("GeneratingVector: component " + std::to_string(j + 1) + " = " +
                                std::to_string(zj) + " is not in G_" + std::to_string(n_points_));
        }
    }
}

GeneratingVector GeneratingVector::truncated(std::size_t d) const {
    if (d > components_.size()) throw ArgumentError("GeneratingVector::truncated: d exceeds dimension");
    return GeneratingVector(n_points_, {components_.begin(), components_.begin() + static_cast<std::ptrdiff_t>(d)});
}

Shift::Shift(std::vector<double> c) : components(std::move(c)) {
    for (double v : components) {
        if (!(v >= 0.0 && v < 1.0)) throw ArgumentError("Shift: components must lie in [0,1)");
    }
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SeedSpec derive_replicate_seed(SeedSpec seed, std::uint64_t l, StreamRole role) {
    if (l < 1) throw ArgumentError("derive_replicate_seed: replicate index must be >= 1");
    std::uint64_t h = mix64(seed.master_seed + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (static_cast<std::uint64_t>(role) * 0xD1B54A32D192ED03ULL));
    h = mix64(h ^ (l * 0x8CB92BA72F3D8DD7ULL));
    return SeedSpec{h};
}

std::uint64_t RandomStream::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw ArgumentError("RandomStream::uniform_int: empty range");
    const std::uint64_t range = hi - lo;
    if (range == std::numeric_limits<std::uint64_t>::max()) return engine_();
    const std::uint64_t span = range + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + x % span;
}

std::uint64_t euler_totient(std::uint64_t n) {
    if (n == 0) throw ArgumentError("euler_totient: N must be >= 1");
    std::uint64_t result = n;
    std::uint64_t m = n;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p != 0) continue;
        while (m % p == 0) m /= p;
        result -= result / p;
    }
    if (m > 1) result -= result / m;
    return result;
}

std::vector<std::uint64_t> coprime_residues(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(euler_totient(n)));
    for (std::uint64_t a = 1; a <= n; ++a) {
        if (std::gcd(a, n) == 1) out.push_back(a % n == 0 ? n : a);
    }
    return out;
}

GeneratingVector sample_generating_vector(std::uint64_t n, std::size_t s, SeedSpec seed) {
    if (n < 2) throw ArgumentError("sample_generating_vector: N must be >= 2");
    if (s < 1) throw ArgumentError("sample_generating_vector: s must be >= 1");
    RandomStream rng(seed);
    std::vector<std::uint64_t> z(s);
    for (auto& zj : z) {
        do {
            zj = rng.uniform_int(1, n - 1);
        } while (std::gcd(zj, n) != 1);
    }
    return GeneratingVector(n, std::move(z));
}

Shift sample_shift(std::size_t s, SeedSpec seed) {
    RandomStream rng(seed);
    std::vector<double> d(s);
    for (auto& v : d) v = rng.uniform();
    return Shift(std::move(d));
}

void lattice_point(const GeneratingVector& z, const Shift& shift, std::uint64_t n,
                   std::span<double> out) {
    const std::uint64_t N = z.n_points();
    if (n >= N) throw ArgumentError("lattice_point: index must be < N");
    if (shift.dimension() != z.dimension() || out.size() != z.dimension()) {
        throw ArgumentError("lattice_point: dimension mismatch");
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    for (std::size_t j = 0; j < z.dimension(); ++j) {
        const std::uint64_t r = (n * z[j]) % N;
        double x = static_cast<double>(r) * inv_n + shift.components[j];
        if (x >= 1.0) x -= 1.0;
        out[j] = x;
    }
}

std::vector<double> lattice_point(const GeneratingVector& z, const Shift& shift, std::uint64_t n) {
    std::vector<double> out(z.dimension());
    lattice_point(z, shift, n, out);
    return out;
}

std::string to_text(const GeneratingVector& z) {
    std::ostringstream os;
    os << z.n_points() << ' ' << z.dimension();
    for (auto c : z.components()) os << ' ' << c;
    os << '\n';
    return os.str();
}

GeneratingVector generating_vector_from_text(const std::string& text) {
    // Lines starting with '#' are comments (the CLI writes a provenance header).
    std::istringstream lines(text);
    std::string line, body;
    while (std::getline(lines, line)) {
        if (!line.empty() && line[0] == '#') continue;
        body += line;
        body += '\n';
    }
    std::istringstream is(body);
    std::uint64_t n = 0;
    std::size_t s = 0;
    if (!(is >> n >> s)) throw ArgumentError("generating vector text: expected 'N s z_1 ... z_s'");
    std::vector<std::uint64_t> z(s);
    for (std::size_t j = 0; j < s; ++j) {
        if (!(is >> z[j])) {
            throw ArgumentError("generating vector text: expected " + std::to_string(s) + " components");
        }
    }
    return GeneratingVector(n, std::move(z));
}

nlohmann::json to_json(const GeneratingVector& z) {
    return nlohmann::json{{"n_points", z.n_points()}, {"z", z.components()}};
}

GeneratingVector generating_vector_from_json(const nlohmann::json& j) {
    if (!j.contains("n_points") || !j.contains("z")) {
        throw ArgumentError("generating vector JSON: requires 'n_points' and 'z'");
    }
    return GeneratingVector(j.at("n_points").get<std::uint64_t>(),
                            j.at("z").get<std::vector<std::uint64_t>>());
}

} // namespace mqmc
