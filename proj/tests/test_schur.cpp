#include <doctest.h>

#include <functional>

#include "bincomp/schur.hpp"
#include "fixtures.hpp"

using namespace bincomp;

namespace {

IntMatrix cols(std::initializer_list<std::initializer_list<int>> columns) {
  const auto r = static_cast<Index>(columns.size());
  const auto n = static_cast<Index>(columns.begin()->size());
  IntMatrix m(n, r);
  Index j = 0;
  for (const auto& c : columns) {
    Index i = 0;
    for (int v : c) m(i++, j) = v;
    ++j;
  }
  return m;
}

/// Rank of {z_i (.) z_j : 0 <= i <= j <= r}, z_0 = e, by exact elimination.
Index direct_binary_rank(const BinaryMatrix& z) {
  const Index n = z.n(), r = z.r();
  IntMatrix aug(n, r + 1);
  aug.col(0).setOnes();
  aug.rightCols(r) = z.entries();
  std::vector<IntVector> prods;
  for (Index i = 0; i <= r; ++i)
    for (Index j = i; j <= r; ++j) prods.push_back(aug.col(i).cwiseProduct(aug.col(j)));
  IntMatrix m(n, static_cast<Index>(prods.size()));
  for (std::size_t k = 0; k < prods.size(); ++k) m.col(static_cast<Index>(k)) = prods[k];
  return exact_rank(m);
}

std::uint64_t brute_max_rank(std::uint64_t n) {
  std::uint64_t r = 1;
  while ((r + 1) * r / 2 + 1 <= n) ++r;
  return r;
}

}  // namespace

TEST_CASE("sign tester examples") {
  CHECK(is_schur_independent_signs(SignMatrix(cols({{1, -1, 1}}))));
  CHECK_FALSE(is_schur_independent_signs(SignMatrix(cols({{1, -1, 1, 1}, {1, -1, 1, 1}}))));
  const SignMatrix h(cols({{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, 1, -1}}));
  CHECK(is_schur_independent_signs(h));
  // The family {e, s1 s2, s1 s3, s2 s3} stacked as a 4x4 integer matrix.
  const IntMatrix fam = schur_family(h);
  CHECK(fam.cols() == 4);
  CHECK(exact_rank(fam) == 4);
  CHECK(fam.cast<double>().determinant() != doctest::Approx(0.0));
}

TEST_CASE("schur_rank_signs reports achieved and required") {
  const SchurRank r = schur_rank_signs(SignMatrix(cols({{1, 1, 1}, {1, 1, 1}})));
  CHECK(r.required == 2);
  CHECK(r.achieved == 1);
  CHECK_FALSE(r.independent());
}

TEST_CASE("binary tester examples") {
  CHECK_FALSE(is_schur_independent_binary(BinaryMatrix(cols({{1, 1, 1, 1}}))));
  const BinaryMatrix z(cols({{1, 1, 0, 0}, {1, 0, 1, 0}}));
  const bool direct = direct_binary_rank(z) == 4;  // C(3,2) + 1
  const bool lifted = is_schur_independent_signs(augmented_sign_lift(z));
  CHECK(direct);
  CHECK(lifted);
  CHECK(is_schur_independent_binary(z) == direct);
  CHECK(schur_rank_binary(z).required == 4);
}

TEST_CASE("augmented sign lift") {
  const BinaryMatrix z(cols({{1, 0, 1}, {0, 0, 1}}));
  const SignMatrix s = augmented_sign_lift(z);
  REQUIRE(s.r() == 3);
  CHECK(s.col(0) == IntVector::Ones(3));
  CHECK(s.col(1) == binary_to_sign(z.col(0)));
  CHECK(s.col(2) == binary_to_sign(z.col(1)));
}

TEST_CASE("max_schur_rank examples and closed form") {
  CHECK(max_schur_rank(7) == 4);
  CHECK(max_schur_rank(1) == 1);
  CHECK(max_schur_rank(11) == 5);
  CHECK(max_schur_rank(4) == 3);
  for (std::uint64_t n = 1; n <= 5000; ++n) CHECK(max_schur_rank(n) == brute_max_rank(n));
}

TEST_CASE("random_sign_family") {
  Rng a(0), b(0);
  const SignMatrix s = random_sign_family(8, 2, a);
  CHECK(s.n() == 8);
  CHECK(s.r() == 2);
  CHECK(s == random_sign_family(8, 2, b));
  Rng c(1);
  CHECK_ERRC(random_sign_family(4, 4, c), Errc::RankTooLarge);
}

TEST_CASE("random_sign_family meets the genericity bound at n = 100, r = 5") {
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    pass += is_schur_independent_signs(random_sign_family(100, 5, rng));
  }
  const double bound = 1.0 - 25.0 * std::exp(-100.0 / 25.0);
  CHECK(pass / 200.0 >= bound);
}

TEST_CASE("random_schur_independent_signs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const SignMatrix s = random_schur_independent_signs(16, 3, rng);
    CHECK(is_schur_independent_signs(s));
    for (Index i = 0; i < 3; ++i)
      for (Index j = i + 1; j < 3; ++j) {
        CHECK(s.col(i) != s.col(j));
        CHECK(s.col(i) != IntVector(-s.col(j)));
      }
  }
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    try {
      random_schur_independent_signs(7, 4, rng);
      ++ok;
    } catch (const Error&) {
    }
  }
  CHECK(ok > 0);
  Rng rng(0);
  CHECK_THROWS_AS(random_schur_independent_signs(3, 3, rng), Error);
}

TEST_CASE("random_binary_family_schur_independent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const BinaryMatrix z = random_binary_family_schur_independent(16, 3, rng);
    CHECK(is_schur_independent_binary(z));
    CHECK(is_schur_independent_signs(augmented_sign_lift(z)));
  }
  Rng rng(0);
  CHECK_THROWS_AS(random_binary_family_schur_independent(2, 2, rng), Error);
}

TEST_CASE("subset heredity, all subsets, r <= 5") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Index r = 2 + static_cast<Index>(seed % 4);
    const SignMatrix s = random_schur_independent_signs(24, r, rng);
    for (unsigned mask = 1; mask < (1u << r); ++mask) {
      std::vector<Index> keep;
      for (Index j = 0; j < r; ++j)
        if (mask & (1u << j)) keep.push_back(j);
      IntMatrix sub(s.n(), static_cast<Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k) sub.col(static_cast<Index>(k)) = s.col(keep[k]);
      CHECK(is_schur_independent_signs(SignMatrix(sub)));
    }
  }
}

TEST_CASE("sign flips do not change the verdict") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const SignMatrix s = random_sign_family(10, 4, rng);
    const bool base = is_schur_independent_signs(s);
    for (unsigned mask = 1; mask < 16; ++mask) {
      IntMatrix f = s.entries();
      for (Index j = 0; j < 4; ++j)
        if (mask & (1u << j)) f.col(j) *= -1;
      CHECK(is_schur_independent_signs(SignMatrix(f)) == base);
    }
  }
}

TEST_CASE("Schur independence implies full column rank") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Index r = 1 + static_cast<Index>(seed % 5);
    const SignMatrix s = random_schur_independent_signs(20, r, rng);
    CHECK(exact_rank(s.entries()) == r);
  }
}

TEST_CASE("binary tester equals the sign-lift tester and the direct span") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const Index n = 4 + static_cast<Index>(rng.below(8));
    const Index r = 1 + static_cast<Index>(rng.below(3));
    IntMatrix m(n, r);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < r; ++j) m(i, j) = static_cast<int>(rng.below(2));
    const BinaryMatrix z(m);
    const bool verdict = is_schur_independent_binary(z);
    CHECK(verdict == is_schur_independent_signs(augmented_sign_lift(z)));
    // Required dimension C(r+1,2)+1; products with repeated index collapse
    // (z (.) z = z) so the direct family has exactly that many members.
    CHECK(verdict == (direct_binary_rank(z) == (r + 1) * r / 2 + 1));
  }
}

TEST_CASE("gram rank agrees with exact rank on random families") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Index n = 3 + static_cast<Index>(rng.below(10));
    const Index r = 1 + static_cast<Index>(rng.below(max_schur_rank(static_cast<std::uint64_t>(n))));
    const SignMatrix s = random_sign_family(n, r, rng);
    CHECK(schur_rank_signs(s).achieved == exact_rank(schur_family(s)));
  }
}

TEST_CASE("families beyond capacity always fail, exhaustive for n <= 4") {
  for (Index n = 1; n <= 4; ++n) {
    const auto cap = static_cast<Index>(max_schur_rank(static_cast<std::uint64_t>(n)));
    for (Index r = cap + 1; r <= cap + 2; ++r) {
      const std::uint64_t vecs = std::uint64_t{1} << n;
      std::vector<std::uint64_t> idx(static_cast<std::size_t>(r), 0);
      long tested = 0;
      std::function<void(Index, std::uint64_t)> rec = [&](Index pos, std::uint64_t from) {
        if (pos == r) {
          IntMatrix m(n, r);
          for (Index j = 0; j < r; ++j)
            for (Index i = 0; i < n; ++i) m(i, j) = (idx[static_cast<std::size_t>(j)] >> i) & 1u ? 1 : -1;
          CHECK_FALSE(is_schur_independent_signs(SignMatrix(m)));
          ++tested;
          return;
        }
        for (std::uint64_t v = from; v < vecs; ++v) {
          idx[static_cast<std::size_t>(pos)] = v;
          rec(pos + 1, v);
        }
      };
      rec(0, 0);
      CHECK(tested > 0);
    }
  }
}

TEST_CASE("F and its inverse") {
  CHECK(binary_to_sign(IntVector::Ones(3)) == IntVector::Ones(3));
  CHECK(binary_to_sign(IntVector::Zero(3)) == IntVector(-IntVector::Ones(3)));
  for (int code = 0; code < 16; ++code) {
    IntVector z(4);
    for (int i = 0; i < 4; ++i) z(i) = (code >> i) & 1;
    CHECK(sign_to_binary(binary_to_sign(z)) == z);
  }
}

TEST_CASE("matrix types reject bad entries") {
  CHECK_THROWS_AS(SignMatrix(cols({{1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(BinaryMatrix(cols({{1, -1}})), std::invalid_argument);
  CHECK_THROWS_AS(SignMatrix(IntMatrix(0, 0)), std::invalid_argument);
}
