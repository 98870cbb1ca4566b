#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace selgeo::rng {

/// Hash-combine for deriving independent substream seeds from (seed, a, b).
/// splitmix64 finalizer; stable across platforms.
std::uint64_t mix(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0);

/// Deterministic random stream. Wraps mt19937_64 with explicit bit-to-double
/// conversions (std::*_distribution output is implementation-defined, so we
/// avoid it for reproducibility of written artifacts).
class Stream {
  public:
    explicit Stream(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double uniform_pos() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double normal();

    /// Matrix with i.i.d. N(0, sigma^2) entries, filled column-major.
    Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double sigma = 1.0);

    std::uint64_t next_raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace selgeo::rng
