#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace randsig {

/// Splittable counter-based generator.
///
/// Output n of a stream is the SplitMix64 finalizer applied to
/// `key + n * gamma`. A child stream obtained with split() depends only on the
/// parent key and the stream id, never on how many values the parent has drawn,
/// so per-trajectory streams can be handed out in any order (or in parallel)
/// and still reproduce bit for bit.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

    [[nodiscard]] CounterRng split(std::uint64_t stream) const;

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    static std::uint64_t mix(std::uint64_t z);

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace randsig
