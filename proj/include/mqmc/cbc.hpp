#pragma once

#include <cstdint>
#include <vector>

#include "mqmc/lattice.hpp"
#include "mqmc/space.hpp"

namespace mqmc {

/// Incremental state of the component-by-component search after d coordinates.
/// Product weights keep the running products Pi(n) = prod_{j<=d} (1 + gamma_j theta_j);
/// POD weights keep P_l(n) for l = 0..d.
class CBCState {
public:
    CBCState(const WeightedSpace& space, const ThetaTable& table);

    std::size_t dimension() const { return components_.size(); }
    const std::vector<std::uint64_t>& components() const { return components_; }
    double wce_squared() const { return wce_squared_; }

    /// R(n) such that appending candidate c adds (gamma_{d+1}/N) sum_n R(n) theta_{d+1}(n c / N).
    std::vector<double> next_coefficients() const;

    /// The increment of the squared error when c is appended, given next_coefficients().
    double increment(const std::vector<double>& coefficients, std::uint64_t c) const;

    /// Appends z_{d+1} = c and updates the accumulators.
    void append(std::uint64_t c);

private:
    const WeightedSpace* space_;
    const ThetaTable* table_;
    std::uint64_t n_points_;
    std::vector<std::uint64_t> components_;
    double wce_squared_ = 0.0;
    std::vector<double> products_;  // product weights, size N
    std::vector<double> orders_;    // POD weights, (s + 1) x N, order-major
};

struct CBCTraceEntry {
    std::size_t d = 0;
    std::uint64_t z = 0;
    double wce_squared = 0.0;
};

struct CBCResult {
    GeneratingVector z;
    std::vector<CBCTraceEntry> trace;
};

/// Relative gap below which two candidate scores are treated as equal.
inline constexpr double kCbcTieTolerance = 1e-12;

/// z_1 = 1, then z_d minimises the squared error over G_N given z_1..z_{d-1},
/// ties (scores within kCbcTieTolerance) going to the smallest candidate. threads = 0 means all cores; the result
/// does not depend on the thread count.
CBCResult cbc_construct(const WeightedSpace& space, std::uint64_t n_points, const ThetaTable& table, std::size_t s,
                        std::size_t threads = 0);

} // namespace mqmc
