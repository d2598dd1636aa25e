#include "obcs/dictionaries.hpp"

#include "obcs/io.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace obcs {

std::string to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::identity: return "identity";
    case DictionaryKind::random_tight: return "random-tight";
    case DictionaryKind::haar2d: return "haar-2d";
    case DictionaryKind::custom: return "custom";
  }
  throw std::logic_error("unreachable dictionary kind");
}

DictionaryKind parse_dictionary_kind(const std::string& tag) {
  if (tag == "identity") return DictionaryKind::identity;
  if (tag == "random-tight") return DictionaryKind::random_tight;
  if (tag == "haar-2d") return DictionaryKind::haar2d;
  if (tag == "custom") return DictionaryKind::custom;
  throw std::invalid_argument("unknown dictionary kind '" + tag + "'");
}

double Dictionary::tightness_defect() const {
  const Matrix gram = D * D.transpose();
  return (gram - Matrix::Identity(n(), n())).cwiseAbs().maxCoeff();
}

Dictionary identity_dictionary(Index n) {
  if (n < 1) throw std::invalid_argument("identity_dictionary: n must be >= 1");
  return Dictionary{Matrix::Identity(n, n), DictionaryKind::identity};
}

Dictionary random_tight_dictionary(Index n, Index N, const RngStream& rng) {
  if (n < 1 || N < n) throw std::invalid_argument("random_tight_dictionary: need 1 <= n <= N");
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix G = gaussian_matrix(n, N, rng.child(static_cast<std::uint64_t>(attempt)));
    bool degenerate = false;
    for (Index j = 0; j < N; ++j) {
      const double norm = G.col(j).norm();
      if (norm < 1e-12) {
        degenerate = true;
        break;
      }
      G.col(j) /= norm;
    }
    if (degenerate) continue;

    // Orthonormal basis of the row space via QR of G^T.
    Eigen::HouseholderQR<Matrix> qr(G.transpose());
    const Matrix R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const double diag_max = R.diagonal().cwiseAbs().maxCoeff();
    if (diag_max <= 0.0 || R.diagonal().cwiseAbs().minCoeff() <= 1e-12 * diag_max) {
      continue;  // rank deficient draw
    }
    const Matrix Q = qr.householderQ() * Matrix::Identity(N, n);
    return Dictionary{Q.transpose(), DictionaryKind::random_tight};
  }
  throw std::runtime_error("random_tight_dictionary: degenerate draws, gave up after 10 attempts");
}

namespace {

// Orthonormal 1-D Haar matrix of size k x k, k a power of two.
// H_{2k} stacks scaled pairwise sums of H_k rows over pairwise differences.
Matrix haar_matrix_1d(Index k) {
  Matrix H = Matrix::Ones(1, 1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  while (H.rows() < k) {
    const Index m = H.rows();
    Matrix next = Matrix::Zero(2 * m, 2 * m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        next(i, 2 * j) = H(i, j) * inv_sqrt2;
        next(i, 2 * j + 1) = H(i, j) * inv_sqrt2;
      }
      next(m + i, 2 * i) = inv_sqrt2;
      next(m + i, 2 * i + 1) = -inv_sqrt2;
    }
    H = std::move(next);
  }
  return H;
}

bool is_power_of_two(Index v) { return v >= 1 && (v & (v - 1)) == 0; }

}  // namespace

Dictionary haar_dictionary_2d(Index side) {
  if (!is_power_of_two(side)) {
    throw std::invalid_argument("haar_dictionary_2d: side must be a power of two");
  }
  const Matrix H = haar_matrix_1d(side);
  const Index n = side * side;
  // Row-major vectorization: coefficient (a,b) of image X is (H X H^T)(a,b),
  // so the analysis operator is H (x) H and D is its transpose.
  Matrix D(n, n);
  for (Index a = 0; a < side; ++a) {
    for (Index b = 0; b < side; ++b) {
      const Index coeff = a * side + b;
      for (Index r = 0; r < side; ++r) {
        for (Index c = 0; c < side; ++c) {
          D(r * side + c, coeff) = H(a, r) * H(b, c);
        }
      }
    }
  }
  return Dictionary{std::move(D), DictionaryKind::haar2d};
}

Vector exact_sparse_signal(const Dictionary& dict, const SparseSignalSpec& spec) {
  const Index n = dict.n();
  const Index N = dict.N();
  std::set<Index> support(spec.support.begin(), spec.support.end());
  if (support.size() != spec.support.size()) {
    throw std::invalid_argument("exact_sparse_signal: duplicate support indices");
  }
  if (!support.empty() && (*support.begin() < 0 || *support.rbegin() >= N)) {
    throw std::invalid_argument("exact_sparse_signal: support index out of range");
  }

  std::vector<Index> off_support;
  off_support.reserve(N - support.size());
  for (Index j = 0; j < N; ++j) {
    if (support.count(j) == 0) off_support.push_back(j);
  }

  Matrix basis;
  if (off_support.empty()) {
    basis = Matrix::Identity(n, n);
  } else {
    // Rows are the adjoints of the off-support columns; the signal must be
    // orthogonal to all of them.
    Matrix W(static_cast<Index>(off_support.size()), n);
    for (std::size_t i = 0; i < off_support.size(); ++i) {
      W.row(static_cast<Index>(i)) = dict.D.col(off_support[i]).transpose();
    }
    Eigen::JacobiSVD<Matrix> svd(W, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol =
        sv.size() > 0 ? sv[0] * static_cast<double>(std::max(W.rows(), W.cols())) *
                            std::numeric_limits<double>::epsilon()
                      : 0.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv[i] > tol) ++rank;
    }
    const Index nullity = n - rank;
    if (nullity == 0) {
      throw std::runtime_error("exact_sparse_signal: support infeasible for this dictionary");
    }
    basis = svd.matrixV().rightCols(nullity);
  }

  const Vector coeffs = gaussian_vector(basis.cols(), spec.coefficients);
  return basis * coeffs;
}

std::vector<Index> analysis_sparse_support(Index n, Index N, int dof, const RngStream& rng) {
  if (n < 1 || N < n) throw std::invalid_argument("analysis_sparse_support: need 1 <= n <= N");
  if (dof < 1 || dof > n) throw std::invalid_argument("analysis_sparse_support: need 1 <= dof <= n");
  const Index complement_size = n - dof;

  // Fisher-Yates prefix over the index range, driven by uniform draws.
  std::vector<Index> indices(static_cast<std::size_t>(N));
  std::iota(indices.begin(), indices.end(), Index{0});
  GaussianSampler g(rng);
  for (Index i = 0; i < complement_size; ++i) {
    const Index remaining = N - i;
    const Index pick = i + static_cast<Index>(g.uniform() * static_cast<double>(remaining));
    std::swap(indices[i], indices[std::min(pick, N - 1)]);
  }
  std::vector<Index> support(indices.begin() + complement_size, indices.end());
  std::sort(support.begin(), support.end());
  return support;
}

void write_dictionary_file(const std::filesystem::path& path, const Dictionary& dict) {
  io::write_matrix_file(path, dict.D, {"kind: " + to_string(dict.kind)});
}

Dictionary read_dictionary_file(const std::filesystem::path& path) {
  std::vector<std::string> comments;
  Matrix D = io::read_matrix_file(path, &comments);
  DictionaryKind kind = DictionaryKind::custom;
  for (const auto& c : comments) {
    const std::string prefix = "kind:";
    if (c.rfind(prefix, 0) == 0) {
      std::string tag = c.substr(prefix.size());
      tag.erase(0, tag.find_first_not_of(' '));
      kind = parse_dictionary_kind(tag);
    }
  }
  return Dictionary{std::move(D), kind};
}

}  // namespace obcs
