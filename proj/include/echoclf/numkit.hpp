#pragma once

// Seeded numerics shared by every other module: a portable RNG, random matrix
// construction and the dominant-eigenvalue estimate used to rescale reservoirs.

#include <algorithm>
#include <complex>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "echoclf/error.hpp"

namespace echoclf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// splitmix64 finalizer. Used to derive independent sub-seeds from one master
// seed: derive_seed(master, stream) for stream = 1, 2, ...
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master ^ splitmix64(stream));
}

// Named sub-seed streams. One master seed reproduces an entire run.
namespace seed_stream {
inline constexpr std::uint64_t synth = 1;
inline constexpr std::uint64_t folds = 2;
inline constexpr std::uint64_t reservoir = 3;
inline constexpr std::uint64_t power_iteration = 4;
} // namespace seed_stream

/// Deterministic random source built on std::mt19937_64.
///
/// The engine's output sequence is fixed by the C++ standard. The conversions
/// to doubles and bounded integers are done here instead of through the
/// <random> distributions, whose algorithms are implementation-defined, so
/// the same seed gives the same uniforms and indices with any standard library.
/// normal() goes through std::log/std::cos and is only as portable as libm.
class SeededRng {
public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  // Uniform integer in [0, bound). Rejection sampling removes modulo bias.
  std::uint64_t index(std::uint64_t bound) {
    if (bound == 0) {
      throw InvalidArgument("SeededRng::index: bound must be positive");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
      x = engine_();
    }
    return x % bound;
  }

  // Standard normal draw (Box-Muller, one value per pair of uniforms).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) {
      u1 = uniform01();
    }
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline std::size_t count_nonzero(const Matrix& m) {
  return static_cast<std::size_t>((m.array() != 0.0).count());
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// round-half-up of density * n^2
inline std::size_t sparse_nonzero_count(std::size_t n, double density) {
  return static_cast<std::size_t>(std::floor(density * static_cast<double>(n) * static_cast<double>(n) + 0.5));
}

// Dense rows x cols matrix with entries uniform on [low, high).
inline Matrix dense_random_matrix(std::size_t rows, std::size_t cols, double low, double high, SeededRng& rng) {
  if (!(low < high)) {
    throw InvalidArgument("dense_random_matrix: low must be < high");
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = rng.uniform(low, high);
    }
  }
  return m;
}

/// n x n matrix with exactly round(density * n^2) nonzero entries.
///
/// Positions are a uniform sample without replacement (partial Fisher-Yates
/// over the n^2 row-major slots); values are uniform on [low, high) and an
/// exact 0.0 draw is redrawn so the nonzero count is exact.
inline Matrix sparse_random_matrix(std::size_t n, double density, double low, double high, SeededRng& rng) {
  if (n == 0) {
    throw InvalidArgument("sparse_random_matrix: n must be >= 1");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw InvalidArgument("sparse_random_matrix: density must lie in (0, 1]");
  }
  if (!(low < high)) {
    throw InvalidArgument("sparse_random_matrix: low must be < high");
  }
  const std::size_t slots = n * n;
  const std::size_t count = std::min(slots, sparse_nonzero_count(n, density));

  std::vector<std::size_t> pos(slots);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(slots - i));
    std::swap(pos[i], pos[j]);
  }

  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < count; ++i) {
    double value = rng.uniform(low, high);
    while (value == 0.0) {
      value = rng.uniform(low, high);
    }
    m(pos[i] / n, pos[i] % n) = value;
  }
  return m;
}

struct PowerIterationOptions {
  double tol = 1e-10;
  std::size_t max_iters = 20000;
  std::size_t restarts = 3;
  // Width of the iterated block; the dominant estimate converges at the rate
  // |lambda_{block+1}| / |lambda_1|.
  std::size_t block = 8;
  std::uint64_t seed = 0x5eedULL;
};

namespace detail {

inline Matrix orthonormal_columns(const Matrix& z) {
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
}

} // namespace detail

/// Magnitude of the dominant eigenvalue of a square matrix.
///
/// Block power iteration (orthogonal iteration) from a seeded random start,
/// with a Rayleigh-Ritz step on the small projected matrix Q'AQ at every
/// iteration. A single-vector Rayleigh quotient never settles when the
/// dominant eigenvalue is a complex-conjugate pair, which is the common case
/// for random reservoir matrices, and a block also absorbs near-ties in
/// magnitude. Converged once the relative Ritz residual is below tol and the
/// estimate moved by less than tol relative since the previous iteration.
/// Stagnation restarts from a fresh seeded block.
inline double spectral_radius(const Matrix& m, const PowerIterationOptions& opt) {
  if (m.rows() != m.cols()) {
    throw DimensionError("spectral_radius: matrix must be square");
  }
  if (!(opt.tol > 0.0) || opt.max_iters < 1) {
    throw InvalidArgument("spectral_radius: tol must be > 0 and max_iters >= 1");
  }
  if (m.rows() == 0) {
    throw DimensionError("spectral_radius: empty matrix");
  }
  if (!m.allFinite()) {
    throw InvalidArgument("spectral_radius: matrix has non-finite entries");
  }
  if (m.isZero(0.0)) {
    return 0.0;
  }
  using Complex = std::complex<double>;
  const Eigen::Index n = m.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::max<std::size_t>(opt.block, 1)));

  for (std::size_t attempt = 0; attempt <= opt.restarts; ++attempt) {
    SeededRng rng(derive_seed(opt.seed, attempt));
    Matrix q(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        q(i, j) = rng.normal();
      }
    }
    q = detail::orthonormal_columns(q);
    double prev = -1.0;

    for (std::size_t it = 0; it < opt.max_iters; ++it) {
      const Matrix z = m * q;
      const Matrix projected = q.transpose() * z;
      Eigen::EigenSolver<Matrix> ritz(projected, true);
      if (ritz.info() != Eigen::Success) {
        break;
      }
      const auto& theta = ritz.eigenvalues();
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < theta.size(); ++i) {
        if (std::abs(theta(i)) > std::abs(theta(best))) {
          best = i;
        }
      }
      const double estimate = std::abs(theta(best));
      if (p == n) {
        // The block spans the whole space, so Q'AQ is similar to A.
        return estimate;
      }
      if (estimate == 0.0) {
        // Block annihilated by a nilpotent part; the iterate carries no information.
        if (z.isZero(0.0)) {
          return 0.0;
        }
      } else {
        const Eigen::VectorXcd y = ritz.eigenvectors().col(best);
        const Eigen::VectorXcd x = q.cast<Complex>() * y;
        const Eigen::VectorXcd ax = z.cast<Complex>() * y;
        const double residual = (ax - theta(best) * x).norm() / (estimate * x.norm());
        if (residual < opt.tol && prev >= 0.0 && std::abs(estimate - prev) <= opt.tol * estimate) {
          return estimate;
        }
      }
      prev = estimate;
      q = detail::orthonormal_columns(z);
    }
  }
  throw ConvergenceError("spectral_radius: block power iteration did not converge after " +
                         std::to_string(opt.restarts + 1) + " attempts of " + std::to_string(opt.max_iters) +
                         " iterations");
}

inline double spectral_radius(const Matrix& m, double tol = 1e-10, std::size_t max_iters = 20000) {
  PowerIterationOptions opt;
  opt.tol = tol;
  opt.max_iters = max_iters;
  return spectral_radius(m, opt);
}

} // namespace echoclf
