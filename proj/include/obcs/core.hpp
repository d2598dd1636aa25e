#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

// Core dense linear-algebra semantics shared by the whole library:
// sign conventions, sparsity metrics, and the deterministic RNG contract.
namespace obcs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

/// Throws std::invalid_argument when the argument contains NaN/Inf.
void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

/// Deterministic substream-addressable random source.
///
/// A stream is identified by (master_seed, substream_id); identical ids give
/// bit-identical draw sequences on any platform and thread schedule. Distinct
/// substreams are derived with child() and are statistically independent.
/// Streams are immutable values; consuming operations instantiate their own
/// engine internally, so a stream can be reused and shared freely.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t substream_id = 0)
      : master_(master_seed), sub_(substream_id) {}

  RngStream child(std::uint64_t key) const;

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t substream_id() const { return sub_; }

  /// Identifier of the fixed draw algorithm (part of the seed-stability
  /// contract; bump only with a release).
  static const char* algorithm_id();

 private:
  std::uint64_t master_;
  std::uint64_t sub_;
};

/// Draws N(0,1) variates from a stream: mt19937-64 driving the Marsaglia
/// polar method. Both halves of each accepted pair are consumed.
class GaussianSampler {
 public:
  explicit GaussianSampler(const RngStream& stream);

  /// Uniform double in [0, 1) built from the top 53 bits of the engine.
  double uniform();
  /// Standard normal variate.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Componentwise sign with sign(0) = +1 (signed zero included).
Vector sign_vector(const Vector& v);

/// Analysis coefficients D^H f for a real dictionary D (n x N), f in R^n.
Vector analysis_coefficients(const Vector& f, const Matrix& D);

/// (||D^H f||_1 / ||D^H f||_2)^2; 0 signals the degenerate D^H f = 0 case.
double effective_sparsity(const Vector& f, const Matrix& D);

/// ||f - f_hat||_2 / ||f||_2. Throws on zero ground truth.
double normalized_error(const Vector& f, const Vector& f_hat);

/// i.i.d. standard normal matrix, filled row-major, deterministic per stream.
Matrix gaussian_matrix(Index rows, Index cols, const RngStream& rng);
Vector gaussian_vector(Index size, const RngStream& rng);

/// Dimensions and scale bounds of the signal class under recovery.
struct SignalModel {
  Index n = 0;       // signal dimension
  Index N = 0;       // analysis (coefficient) dimension
  int s = 0;         // sparsity level
  double r = 0.0;    // radius bound, ||f||_2 <= r

  void validate() const;
};

}  // namespace obcs
