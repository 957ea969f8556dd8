#include "mqmc/cbc.hpp"

#include "mqmc/errors.hpp"
#include "mqmc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mqmc {

CBCState::CBCState(const WeightedSpace& space, const ThetaTable& table)
    : space_(&space), table_(&table), n_points_(table.n_points()) {
    if (table.dimension() < space.dimension()) throw ArgumentError("CBCState: table has fewer coordinates than space");
    const std::size_t N = static_cast<std::size_t>(n_points_);
    if (space.weights().kind == WeightKind::product) {
        products_.assign(N, 1.0);
    } else {
        orders_.assign((space.dimension() + 1) * N, 0.0);
        std::fill(orders_.begin(), orders_.begin() + static_cast<std::ptrdiff_t>(N), 1.0);
    }
}

std::vector<double> CBCState::next_coefficients() const {
    const std::size_t d = components_.size();
    if (d >= space_->dimension()) throw ArgumentError("CBCState: space dimension exhausted");
    if (space_->weights().kind == WeightKind::product) return products_;
    const std::size_t N = static_cast<std::size_t>(n_points_);
    const auto& Gamma = space_->weights().order_weights;
    std::vector<double> R(N, 0.0);
    for (std::size_t l = 1; l <= d + 1; ++l) {
        const double* P = orders_.data() + (l - 1) * N;
        for (std::size_t n = 0; n < N; ++n) R[n] += Gamma[l] * P[n];
    }
    return R;
}

double CBCState::increment(const std::vector<double>& coefficients, std::uint64_t c) const {
    const std::size_t j = components_.size();
    const double* theta = table_->row(j);
    double sum = 0.0;
    std::uint64_t idx = 0;
    for (std::uint64_t n = 0; n < n_points_; ++n) {
        sum += coefficients[n] * theta[idx];
        idx += c;
        if (idx >= n_points_) idx -= n_points_;
    }
    return space_->weights().gamma[j] * sum / static_cast<double>(n_points_);
}

void CBCState::append(std::uint64_t c) {
    if (c < 1 || c >= n_points_ || std::gcd(c, n_points_) != 1) throw ArgumentError("CBCState: candidate not in G_N");
    const std::size_t j = components_.size();
    wce_squared_ += increment(next_coefficients(), c);

    const double gamma = space_->weights().gamma[j];
    const double* theta = table_->row(j);
    const std::size_t N = static_cast<std::size_t>(n_points_);
    std::uint64_t idx = 0;
    if (space_->weights().kind == WeightKind::product) {
        for (std::size_t n = 0; n < N; ++n) {
            products_[n] *= 1.0 + gamma * theta[idx];
            idx += c;
            if (idx >= n_points_) idx -= n_points_;
        }
    } else {
        for (std::size_t n = 0; n < N; ++n) {
            const double t = gamma * theta[idx];
            for (std::size_t l = j + 1; l >= 1; --l) orders_[l * N + n] += t * orders_[(l - 1) * N + n];
            idx += c;
            if (idx >= n_points_) idx -= n_points_;
        }
    }
    components_.push_back(c);
}

CBCResult cbc_construct(const WeightedSpace& space, std::uint64_t n_points, const ThetaTable& table, std::size_t s,
                        std::size_t threads) {
    if (table.n_points() != n_points) throw ArgumentError("cbc_construct: table modulus differs from N");
    if (s < 1 || s > space.dimension()) throw ArgumentError("cbc_construct: s must lie in [1, space dimension]");
    if (threads == 0) threads = hardware_threads();

    // theta is symmetric, so R(n) = R(N-n) and candidates c and N-c score alike;
    // scanning c <= N/2 finds the minimum and already prefers the smaller of each pair.
    std::vector<std::uint64_t> candidates;
    for (std::uint64_t c = 1; c <= n_points / 2; ++c) {
        if (std::gcd(c, n_points) == 1) candidates.push_back(c);
    }
    if (candidates.empty()) candidates.push_back(1);

    CBCState state(space, table);
    CBCResult result;
    state.append(1);
    result.trace.push_back({1, 1, state.wce_squared()});

    std::vector<double> scores(candidates.size());
    constexpr std::size_t kChunk = 32;
    const std::size_t chunks = (candidates.size() + kChunk - 1) / kChunk;
    for (std::size_t d = 2; d <= s; ++d) {
        const auto R = state.next_coefficients();
        parallel_for(chunks, threads, [&](std::size_t chunk) {
            const std::size_t end = std::min(candidates.size(), (chunk + 1) * kChunk);
            for (std::size_t i = chunk * kChunk; i < end; ++i) scores[i] = state.increment(R, candidates[i]);
        });
        // Scores within rounding of each other count as ties (e.g. c and its inverse mod N
        // when two coordinates share psi), which then go to the smaller candidate.
        const double tol = kCbcTieTolerance * (state.wce_squared() + std::abs(*std::min_element(scores.begin(), scores.end())));
        std::size_t best = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            if (scores[i] < scores[best] - tol) best = i;
        }
        state.append(candidates[best]);
        result.trace.push_back({d, candidates[best], state.wce_squared()});
    }
    result.z = GeneratingVector(n_points, state.components());
    return result;
}

} // namespace mqmc
