#include "mqmc/theta_cache.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mqmc {

namespace {

constexpr char kMagic[8] = {'M', 'Q', 'M', 'C', 'T', 'H', 'T', '\0'};

std::string key_string(const Density& density, const WeightFunction& psi, std::uint64_t n_points,
                       const QuadratureSpec& spec) {
    char tol[96];
    std::snprintf(tol, sizeof tol, "abs=%a:rel=%a:sub=%zu", spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
    std::ostringstream os;
    os << "v" << kThetaCacheVersion << "|" << density.name() << "|" << psi.key() << "|N=" << n_points << "|" << tol;
    return os.str();
}

std::string file_stem(const std::string& key) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "theta-%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <class T>
void put(std::ostream& os, T value) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        os.write(bytes.data(), sizeof(T));
    } else {
        os.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }
}

template <class T>
bool get(std::istream& is, T& value) {
    std::array<char, sizeof(T)> bytes;
    if (!is.read(bytes.data(), sizeof(T))) return false;
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    value = std::bit_cast<T>(bytes);
    return true;
}

} // namespace

std::optional<std::filesystem::path> theta_cache_directory() {
    const char* env = std::getenv("MQMC_CACHE_DIR");
    if (env == nullptr || *env == '\0') return std::nullopt;
    return std::filesystem::path(env);
}

std::optional<std::vector<double>> load_theta_row(const std::filesystem::path& dir, const Density& density,
                                                  const WeightFunction& psi, std::uint64_t n_points,
                                                  const QuadratureSpec& spec) {
    const std::string key = key_string(density, psi, n_points, spec);
    const auto stem = file_stem(key);
    std::ifstream sidecar(dir / (stem + ".json"));
    if (!sidecar) return std::nullopt;
    try {
        const auto meta = nlohmann::json::parse(sidecar);
        if (meta.value("key", std::string{}) != key) return std::nullopt;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }

    std::ifstream in(dir / (stem + ".bin"), std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
    std::uint32_t version = 0, reserved = 0;
    std::uint64_t n = 0;
    if (!get(in, version) || !get(in, reserved) || !get(in, n)) return std::nullopt;
    if (version != kThetaCacheVersion || n != n_points) return std::nullopt;
    std::vector<double> row(n);
    for (auto& v : row) {
        if (!get(in, v)) return std::nullopt;
    }
    return row;
}

void store_theta_row(const std::filesystem::path& dir, const Density& density, const WeightFunction& psi,
                     std::uint64_t n_points, const QuadratureSpec& spec, const std::vector<double>& row) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return;
    const std::string key = key_string(density, psi, n_points, spec);
    const auto stem = file_stem(key);

    const auto bin = dir / (stem + ".bin");
    const auto bin_tmp = dir / (stem + ".bin.tmp");
    {
        std::ofstream out(bin_tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        out.write(kMagic, 8);
        put(out, kThetaCacheVersion);
        put(out, std::uint32_t{0});
        put(out, n_points);
        for (double v : row) put(out, v);
        if (!out) return;
    }
    std::filesystem::rename(bin_tmp, bin, ec);
    if (ec) return;

    nlohmann::json meta = {
        {"key", key},
        {"format_version", kThetaCacheVersion},
        {"density", density.name()},
        {"weight_function", {{"kind", psi.kind_name()}, {"scale", psi.scale}, {"rate", psi.rate}}},
        {"n_points", n_points},
        {"quadrature", {{"abs_tol", spec.abs_tol}, {"rel_tol", spec.rel_tol}, {"max_subdivisions", spec.max_subdivisions}}},
    };
    const auto json_tmp = dir / (stem + ".json.tmp");
    {
        std::ofstream out(json_tmp, std::ios::trunc);
        if (!out) return;
        out << meta.dump(2) << '\n';
    }
    std::filesystem::rename(json_tmp, dir / (stem + ".json"), ec);
}

} // namespace mqmc
