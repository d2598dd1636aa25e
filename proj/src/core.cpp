#include "obcs/core.hpp"

#include <cmath>
#include <string>

namespace obcs {

namespace {

// SplitMix64 finalizer; the fixed mixing function behind substream derivation.
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t engine_seed(const RngStream& s) {
  return splitmix64(splitmix64(s.master_seed()) ^
                    splitmix64(s.substream_id() ^ 0xD1B54A32D192ED03ULL));
}

}  // namespace

RngStream RngStream::child(std::uint64_t key) const {
  return RngStream(master_, splitmix64(sub_ ^ splitmix64(key ^ 0x8CB92BA72F3D8DD7ULL)));
}

const char* RngStream::algorithm_id() {
  return "splitmix64-substreams/mt19937_64/polar-v1";
}

GaussianSampler::GaussianSampler(const RngStream& stream) : engine_(engine_seed(stream)) {}

double GaussianSampler::uniform() {
  // 53-bit mantissa; value in [0, 1).
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianSampler::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

Vector sign_vector(const Vector& v) {
  require_finite(v, "sign_vector");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    out[i] = (v[i] >= 0.0) ? 1.0 : -1.0;
  }
  return out;
}

Vector analysis_coefficients(const Vector& f, const Matrix& D) {
  if (f.size() != D.rows()) {
    throw std::invalid_argument("analysis_coefficients: dimension mismatch");
  }
  return D.transpose() * f;
}

double effective_sparsity(const Vector& f, const Matrix& D) {
  const Vector x = analysis_coefficients(f, D);
  const double l2 = x.norm();
  if (l2 == 0.0) {
    return 0.0;  // degenerate: zero analysis vector
  }
  const double l1 = x.lpNorm<1>();
  return (l1 / l2) * (l1 / l2);
}

double normalized_error(const Vector& f, const Vector& f_hat) {
  if (f.size() != f_hat.size()) {
    throw std::invalid_argument("normalized_error: dimension mismatch");
  }
  const double denom = f.norm();
  if (denom == 0.0) {
    throw std::invalid_argument("normalized_error: zero ground truth");
  }
  return (f - f_hat).norm() / denom;
}

Matrix gaussian_matrix(Index rows, Index cols, const RngStream& rng) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("gaussian_matrix: rows and cols must be >= 1");
  }
  GaussianSampler g(rng);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      out(i, j) = g.normal();
    }
  }
  return out;
}

Vector gaussian_vector(Index size, const RngStream& rng) {
  if (size < 1) {
    throw std::invalid_argument("gaussian_vector: size must be >= 1");
  }
  GaussianSampler g(rng);
  Vector out(size);
  for (Index i = 0; i < size; ++i) {
    out[i] = g.normal();
  }
  return out;
}

void SignalModel::validate() const {
  if (n < 1 || N < 1 || n > N) {
    throw std::invalid_argument("SignalModel: need 1 <= n <= N");
  }
  if (s < 1 || s > N) {
    throw std::invalid_argument("SignalModel: need 1 <= s <= N");
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("SignalModel: r must be positive and finite");
  }
}

}  // namespace obcs
