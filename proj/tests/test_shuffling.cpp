#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "smg/errors.hpp"
#include "smg/shuffling.hpp"

namespace smg {
namespace {

// Upper 0.001 quantiles of the chi-square distribution (scipy.stats.chi2.ppf).
constexpr double kChiSq51 = 87.96798047562868;
constexpr double kChiSq2601 = 2829.5938917206427;

bool is_bijection(std::vector<std::size_t> p) {
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != i) return false;
  return true;
}

TEST(Permutation, IncrementalIsIdentity) {
  const ShufflingStrategy inc{ShufflingKind::kIncremental, 99};
  for (std::size_t t : {1u, 2u, 17u}) {
    EXPECT_EQ(permutation_for_epoch(inc, 4, t), (std::vector<std::size_t>{0, 1, 2, 3}));
  }
}

TEST(Permutation, ShuffleOnceReusesOnePermutation) {
  const ShufflingStrategy once{ShufflingKind::kShuffleOnce, 5};
  const auto first = permutation_for_epoch(once, 30, 1);
  EXPECT_EQ(first, permutation_for_epoch(once, 30, 7));
  EXPECT_TRUE(is_bijection(first));
  std::vector<std::size_t> identity(30);
  std::iota(identity.begin(), identity.end(), 0);
  EXPECT_NE(first, identity);

  PermutationStream stream(once, 30);
  for (std::size_t t = 1; t <= 5; ++t) {
    const auto view = stream.next_epoch_permutation(t);
    EXPECT_TRUE(std::equal(view.begin(), view.end(), first.begin()));
  }
}

TEST(Permutation, ReshufflingIsReproducibleAndOrderIndependent) {
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 42};
  PermutationStream stream(rr, 20);
  std::vector<std::vector<std::size_t>> forward;
  for (std::size_t t = 1; t <= 6; ++t) {
    const auto v = stream.next_epoch_permutation(t);
    forward.emplace_back(v.begin(), v.end());
    EXPECT_TRUE(is_bijection(forward.back()));
  }
  for (std::size_t t = 6; t >= 1; --t) EXPECT_EQ(permutation_for_epoch(rr, 20, t), forward[t - 1]);
  EXPECT_NE(forward[0], forward[1]);
  const ShufflingStrategy other{ShufflingKind::kRandomizedReshuffling, 43};
  EXPECT_NE(permutation_for_epoch(other, 20, 1), forward[0]);
}

TEST(Permutation, AllStrategiesAreBijections) {
  for (auto kind : {ShufflingKind::kRandomizedReshuffling, ShufflingKind::kShuffleOnce,
                    ShufflingKind::kIncremental}) {
    for (std::size_t n : {1u, 2u, 3u, 64u, 1000u}) {
      for (std::size_t t = 1; t <= 3; ++t) EXPECT_TRUE(is_bijection(permutation_for_epoch({kind, 3}, n, t)));
    }
  }
}

TEST(Permutation, ReshufflingPositionsAreUniform) {
  constexpr std::size_t n = 52;
  constexpr std::size_t draws = 10000;
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  const ShufflingStrategy rr{ShufflingKind::kRandomizedReshuffling, 2024};
  PermutationStream stream(rr, n);
  for (std::size_t t = 1; t <= draws; ++t) {
    const auto p = stream.next_epoch_permutation(t);
    for (std::size_t pos = 0; pos < n; ++pos) counts[pos][p[pos]] += 1.0;
  }
  const double expected = static_cast<double>(draws) / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t pos : {std::size_t{0}, n / 2, n - 1}) {
    double stat = 0.0;
    for (double c : counts[pos]) stat += (c - expected) * (c - expected) / expected;
    EXPECT_LT(stat, kChiSq51) << "position " << pos;
  }
  for (const auto& row : counts)
    for (double c : row) total += (c - expected) * (c - expected) / expected;
  // Cells within a row are dependent (they sum to draws), so this is a loose
  // aggregate check on top of the per-position tests above.
  EXPECT_LT(total, kChiSq2601);
}

TEST(Permutation, RejectsDegenerateArguments) {
  const ShufflingStrategy rr{};
  EXPECT_THROW(permutation_for_epoch(rr, 0, 1), InvalidArgument);
  EXPECT_THROW(permutation_for_epoch(rr, 3, 0), InvalidArgument);
  EXPECT_THROW(PermutationStream(rr, 0), InvalidArgument);
}

TEST(Permutation, ParsesStrategyNames) {
  EXPECT_EQ(parse_shuffling_kind("rr"), ShufflingKind::kRandomizedReshuffling);
  EXPECT_EQ(parse_shuffling_kind("once"), ShufflingKind::kShuffleOnce);
  EXPECT_EQ(parse_shuffling_kind("inc"), ShufflingKind::kIncremental);
  EXPECT_THROW(parse_shuffling_kind("sometimes"), InvalidArgument);
  for (auto kind : {ShufflingKind::kRandomizedReshuffling, ShufflingKind::kShuffleOnce,
                    ShufflingKind::kIncremental}) {
    EXPECT_EQ(parse_shuffling_kind(to_string(kind)), kind);
  }
}

TEST(OutputSelection, ProbabilitiesAreNormalisedWeights) {
  const std::vector<double> etas{1.0, 2.0, 3.0};
  const auto p = output_probabilities(etas);
  EXPECT_DOUBLE_EQ(p[0], 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(p[2], 0.5);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);

  const std::vector<double> flat(7, 0.3);
  for (double q : output_probabilities(flat)) EXPECT_NEAR(q, 1.0 / 7.0, 1e-16);
}

TEST(OutputSelection, EmpiricalFrequenciesMatchWeights) {
  const std::vector<double> etas{1.0, 2.0, 3.0};
  const std::vector<double> expected{1.0 / 6.0, 1.0 / 3.0, 0.5};
  constexpr int draws = 100000;
  Rng rng(77);
  std::vector<double> counts(3, 0.0);
  for (int k = 0; k < draws; ++k) counts[sample_output_index(etas, rng)] += 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double sd = std::sqrt(draws * expected[i] * (1.0 - expected[i]));
    EXPECT_LE(std::abs(counts[i] - draws * expected[i]), 3.0 * sd) << "index " << i;
  }
}

TEST(OutputSelection, ZeroWeightIsNeverChosen) {
  const std::vector<double> etas{1.0, 1.0, 0.0};
  Rng rng(1);
  for (int k = 0; k < 10000; ++k) EXPECT_NE(sample_output_index(etas, rng), 2u);
}

TEST(OutputSelection, SelectsTheMatchingIterate) {
  std::vector<Vector> iterates;
  for (int i = 0; i < 4; ++i) iterates.push_back(Vector::Constant(2, i));
  const std::vector<double> etas{0.5, 0.5, 0.5, 0.5};
  Rng a(3), b(3);
  const auto [index, w] = select_output_iterate(iterates, etas, a);
  EXPECT_EQ(w, iterates[index]);
  EXPECT_EQ(select_output_iterate(iterates, etas, b).first, index);
}

TEST(OutputSelection, RejectsInvalidWeights) {
  Rng rng(0);
  EXPECT_THROW(output_probabilities(std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(output_probabilities(std::vector<double>{1.0, -1.0}), InvalidArgument);
  EXPECT_THROW(output_probabilities(std::vector<double>{0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(output_probabilities(std::vector<double>{1.0, NAN}), InvalidArgument);
  std::vector<Vector> two{Vector::Zero(1), Vector::Zero(1)};
  EXPECT_THROW(select_output_iterate(two, std::vector<double>{1.0}, rng), InvalidArgument);
  EXPECT_THROW(select_output_iterate(std::vector<Vector>{}, std::vector<double>{}, rng), InvalidArgument);
}

TEST(Random, DerivedStreamsDiffer) {
  Rng a(5, Stream::kPermutation), b(5, Stream::kSingleShuffle), c(5, Stream::kPermutation);
  const auto x = a.next();
  EXPECT_NE(x, b.next());
  EXPECT_EQ(x, c.next());
  Rng u(9);
  for (int k = 0; k < 1000; ++k) {
    const double r = u.uniform01();
    EXPECT_GE(r, 0.0);
    EXPECT_LT(r, 1.0);
    EXPECT_LT(u.uniform_index(7), 7u);
  }
}

}  // namespace
}  // namespace smg
