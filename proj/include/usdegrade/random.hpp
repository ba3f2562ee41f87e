#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace usdegrade {

/// SplitMix64 finalizer. Used to fold structured keys into stream ids.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Folds an ordered list of keys (image index, level index, ...) into one stream id.
constexpr std::uint64_t mix_stream_id(std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t acc = 0x243f6a8885a308d3ULL;
    for (std::uint64_t k : keys) {
        acc = splitmix64(acc ^ splitmix64(k));
    }
    return acc;
}

/// A reproducible random stream keyed by (seed, stream_id).
///
/// The engine is a 64-bit Mersenne Twister initialised through std::seed_seq, both of
/// which are specified bit-for-bit by the standard. Distributions come from Boost.Random,
/// whose algorithms are fixed in its headers, unlike the implementation-defined
/// distributions of <random>. Together this gives the same draw sequence on every platform.
///
/// A stream is not thread-safe; use one stream per task.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    /// Number of raw 64-bit words consumed so far.
    std::uint64_t counter() const noexcept { return counter_; }

    // UniformRandomBitGenerator interface, so Boost distributions can drive the stream.
    static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
    static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
    result_type operator()() {
        ++counter_;
        return engine_();
    }

    std::uint64_t next_u64() { return (*this)(); }

    double uniform(double lo, double hi) {
        return boost::random::uniform_real_distribution<double>(lo, hi)(*this);
    }

    double normal(double mean, double stddev) {
        return boost::random::normal_distribution<double>(mean, stddev)(*this);
    }

    /// Gamma(shape, scale); exact for non-integer shape.
    double gamma(double shape, double scale) {
        return boost::random::gamma_distribution<double>(shape, scale)(*this);
    }

    bool bernoulli(double p) { return boost::random::bernoulli_distribution<double>(p)(*this); }

    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return boost::random::uniform_int_distribution<std::int64_t>(lo, hi)(*this);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 engine_;
};

}  // namespace usdegrade
