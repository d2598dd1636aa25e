#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "obcs/core.hpp"
#include "obcs/dictionaries.hpp"

#include <algorithm>

using namespace obcs;

TEST_CASE("identity dictionary") {
  const Dictionary dict = identity_dictionary(3);
  CHECK(dict.D == Matrix::Identity(3, 3));
  CHECK(dict.kind == DictionaryKind::identity);

  const Vector f = gaussian_vector(3, RngStream(1));
  CHECK(dict.analyze(f) == f);
  CHECK(dict.tightness_defect() == 0.0);
}

TEST_CASE("random tight dictionary basic shapes") {
  const Dictionary tiny = random_tight_dictionary(1, 2, RngStream(5));
  CHECK(tiny.n() == 1);
  CHECK(tiny.N() == 2);
  CHECK(tiny.D.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));

  const Dictionary dict = random_tight_dictionary(5, 20, RngStream(7));
  CHECK(dict.tightness_defect() <= 1e-10);
}

TEST_CASE("random tight dictionary satisfies Parseval identity") {
  const Dictionary dict = random_tight_dictionary(5, 20, RngStream(8));
  for (int rep = 0; rep < 100; ++rep) {
    const Vector f = gaussian_vector(5, RngStream(8).child(100 + rep));
    CHECK(dict.analyze(f).norm() == doctest::Approx(f.norm()).epsilon(1e-8));
  }
}

TEST_CASE("random tight dictionary is deterministic per stream") {
  const Dictionary a = random_tight_dictionary(4, 9, RngStream(21));
  const Dictionary b = random_tight_dictionary(4, 9, RngStream(21));
  CHECK(a.D == b.D);
  const Dictionary c = random_tight_dictionary(4, 9, RngStream(22));
  CHECK(a.D != c.D);
}

TEST_CASE("haar 2d dictionary on the 2x2 constant image") {
  const Dictionary dict = haar_dictionary_2d(2);
  Vector f = Vector::Ones(4);
  const Vector coeffs = dict.analyze(f);
  CHECK(coeffs[0] == doctest::Approx(2.0).epsilon(1e-12));
  for (Index i = 1; i < 4; ++i) CHECK(coeffs[i] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("haar 2d dictionary is orthonormal and invertible") {
  const Dictionary dict = haar_dictionary_2d(8);
  CHECK(dict.tightness_defect() <= 1e-10);
  CHECK(dict.is_orthonormal_basis());

  const Vector f = gaussian_vector(64, RngStream(9));
  const Vector back = dict.synthesize(dict.analyze(f));
  CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-10);

  CHECK_THROWS_AS(haar_dictionary_2d(3), std::invalid_argument);
}

TEST_CASE("exact sparse signal with the identity dictionary") {
  const Dictionary dict = identity_dictionary(5);
  const Vector f = exact_sparse_signal(dict, {{1}, RngStream(31)});
  CHECK(f.size() == 5);
  CHECK(std::abs(f[1]) > 0.0);
  for (Index i = 0; i < 5; ++i) {
    if (i != 1) CHECK(f[i] == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("exact sparse signal on a redundant tight frame") {
  const Dictionary dict = random_tight_dictionary(5, 20, RngStream(40));
  // Leave 3 degrees of freedom: the feasible support size is N - n + 3 = 18.
  const auto support = analysis_sparse_support(5, 20, 3, RngStream(41));
  REQUIRE(support.size() == 18);
  const Vector f = exact_sparse_signal(dict, {support, RngStream(42)});

  const Vector coeffs = dict.analyze(f);
  double off_support_max = 0.0;
  for (Index j = 0; j < 20; ++j) {
    if (std::find(support.begin(), support.end(), j) == support.end()) {
      off_support_max = std::max(off_support_max, std::abs(coeffs[j]));
    }
  }
  CHECK(off_support_max <= 1e-10);
  CHECK(effective_sparsity(f, dict.D) <= static_cast<double>(support.size()) + 1e-9);
}

TEST_CASE("exact sparse signal reports infeasible supports") {
  // With 17 generic off-support columns in R^5 the orthogonal complement is
  // trivial, so a size-3 support cannot carry an exactly sparse signal.
  const Dictionary dict = random_tight_dictionary(5, 20, RngStream(50));
  CHECK_THROWS_WITH_AS(exact_sparse_signal(dict, {{0, 1, 2}, RngStream(51)}),
                       doctest::Contains("support infeasible"), std::runtime_error);
}

TEST_CASE("exact sparse signal input validation") {
  const Dictionary dict = identity_dictionary(4);
  CHECK_THROWS_AS(exact_sparse_signal(dict, {{0, 0}, RngStream(1)}), std::invalid_argument);
  CHECK_THROWS_AS(exact_sparse_signal(dict, {{7}, RngStream(1)}), std::invalid_argument);
}

TEST_CASE("analysis_sparse_support sizes and determinism") {
  const auto s1 = analysis_sparse_support(32, 64, 3, RngStream(60));
  CHECK(s1.size() == 64 - 32 + 3);
  const auto s2 = analysis_sparse_support(32, 64, 3, RngStream(60));
  CHECK(s1 == s2);

  const auto id_support = analysis_sparse_support(16, 16, 4, RngStream(61));
  CHECK(id_support.size() == 4);
  for (auto idx : id_support) {
    CHECK(idx >= 0);
    CHECK(idx < 16);
  }
  CHECK(std::is_sorted(id_support.begin(), id_support.end()));

  CHECK_THROWS_AS(analysis_sparse_support(8, 16, 0, RngStream(1)), std::invalid_argument);
  CHECK_THROWS_AS(analysis_sparse_support(8, 16, 9, RngStream(1)), std::invalid_argument);
}

TEST_CASE("tight frame property holds for all builders") {
  const Dictionary dicts[] = {identity_dictionary(6), random_tight_dictionary(6, 13, RngStream(70)),
                              haar_dictionary_2d(4)};
  for (const auto& dict : dicts) {
    for (int rep = 0; rep < 100; ++rep) {
      const Vector f = gaussian_vector(dict.n(), RngStream(71).child(rep));
      CHECK(dict.analyze(f).norm() == doctest::Approx(f.norm()).epsilon(1e-8));
    }
  }
}

TEST_CASE("dictionary file round trip keeps the kind tag") {
  const Dictionary dict = random_tight_dictionary(3, 6, RngStream(80));
  const auto path = std::filesystem::temp_directory_path() / "obcs_dict_test.txt";
  write_dictionary_file(path, dict);
  const Dictionary back = read_dictionary_file(path);
  CHECK(back.kind == DictionaryKind::random_tight);
  CHECK(back.D == dict.D);
}
