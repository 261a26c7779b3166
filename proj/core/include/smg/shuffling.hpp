#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "smg/problem.hpp"
#include "smg/random.hpp"

namespace smg {

enum class ShufflingKind {
  kRandomizedReshuffling,  // fresh uniform permutation every epoch
  kShuffleOnce,            // one seeded permutation reused every epoch
  kIncremental,            // identity permutation
};

struct ShufflingStrategy {
  ShufflingKind kind = ShufflingKind::kRandomizedReshuffling;
  std::uint64_t seed = 0;

  /// True when the same permutation is used in every epoch.
  bool is_single_permutation() const { return kind != ShufflingKind::kRandomizedReshuffling; }
};

std::string_view to_string(ShufflingKind kind);
/// Accepts "rr", "once", "inc" and the long names.
ShufflingKind parse_shuffling_kind(std::string_view name);

/// Permutation (0-based) used in epoch `t` (1-based).
///
/// RandomizedReshuffling draws a Fisher-Yates shuffle from the sub-stream (seed, t),
/// so any epoch can be regenerated without replaying earlier ones. ShuffleOnce uses a
/// dedicated sub-stream of the same seed for its one permutation.
std::vector<std::size_t> permutation_for_epoch(const ShufflingStrategy& strategy, std::size_t n,
                                               std::size_t t);

/// Per-run source of epoch permutations. Reuses one buffer, so no allocation
/// happens after construction.
class PermutationStream {
 public:
  PermutationStream(ShufflingStrategy strategy, std::size_t n);

  /// Permutation for epoch `t`; the view is valid until the next call.
  std::span<const std::size_t> next_epoch_permutation(std::size_t t);

  const ShufflingStrategy& strategy() const { return strategy_; }
  std::size_t size() const { return perm_.size(); }

 private:
  void fill(std::size_t t);

  ShufflingStrategy strategy_;
  std::vector<std::size_t> perm_;
  bool filled_ = false;
};

/// P[index = t-1] = eta_t / sum(eta). Entries must be finite and nonnegative with a
/// positive sum; zero entries (the final cosine epoch) receive zero probability.
std::vector<double> output_probabilities(std::span<const double> etas);

/// Samples the index of the output iterate from `etas` as above.
std::size_t sample_output_index(std::span<const double> etas, Rng& rng);

/// Picks w_hat from the epoch-start iterates {w~_0, ..., w~_{T-1}}.
std::pair<std::size_t, Vector> select_output_iterate(std::span<const Vector> iterates,
                                                     std::span<const double> etas, Rng& rng);

}  // namespace smg
