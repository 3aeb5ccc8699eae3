#pragma once

#include <complex>
#include <cstdint>

namespace locsim {

/// Counter-free xoshiro256++ stream with splitmix64 seeding.
///
/// The simulation owns its generator instead of using <random> engines so
/// that draws are bit-identical across standard libraries and so that
/// independent streams can be derived from (seed, trial, ue, link) tuples.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    /// Stream derived by hashing the tuple; streams for distinct tuples are
    /// statistically independent and schedule-invariant.
    static RngStream derive(std::uint64_t master, std::uint64_t a,
                            std::uint64_t b, std::uint64_t c);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian();

    /// Zero-mean complex Gaussian with E|z|^2 = 1.
    std::complex<double> cgaussian();

  private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace locsim
