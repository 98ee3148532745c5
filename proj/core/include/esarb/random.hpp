#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace esarb {

using Rng = std::mt19937_64;

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;
[[nodiscard]] std::uint64_t fnv1a(std::string_view text) noexcept;

/// Derives independent named generators from one master seed, so adding a
/// consumer never shifts the draws seen by another.
class RandomStreams {
public:
    explicit RandomStreams(std::uint64_t seed) noexcept : seed_(seed) {}

    [[nodiscard]] Rng stream(std::string_view name) const;
    /// Stream for the i-th repetition of a named job (multi-start index, trial number).
    [[nodiscard]] Rng stream(std::string_view name, std::uint64_t index) const;
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
};

}  // namespace esarb
