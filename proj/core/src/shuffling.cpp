#include "smg/shuffling.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "smg/errors.hpp"

namespace smg {
namespace {

void fisher_yates(std::vector<std::size_t>& perm, Rng& rng) {
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(perm[i - 1], perm[j]);
  }
}

void check_etas(std::span<const double> etas) {
  if (etas.empty()) throw InvalidArgument("output selection: empty learning-rate list");
  for (double e : etas) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidArgument("output selection: learning rates must be finite and nonnegative");
    }
  }
}

}  // namespace

std::string_view to_string(ShufflingKind kind) {
  switch (kind) {
    case ShufflingKind::kRandomizedReshuffling: return "rr";
    case ShufflingKind::kShuffleOnce: return "once";
    case ShufflingKind::kIncremental: return "inc";
  }
  return "?";
}

ShufflingKind parse_shuffling_kind(std::string_view name) {
  if (name == "rr" || name == "random_reshuffling") return ShufflingKind::kRandomizedReshuffling;
  if (name == "once" || name == "shuffle_once" || name == "single") return ShufflingKind::kShuffleOnce;
  if (name == "inc" || name == "incremental") return ShufflingKind::kIncremental;
  throw InvalidArgument("unknown shuffling strategy '" + std::string(name) + "'");
}

std::vector<std::size_t> permutation_for_epoch(const ShufflingStrategy& strategy, std::size_t n,
                                               std::size_t t) {
  if (n == 0) throw InvalidArgument("permutation_for_epoch: n must be >= 1");
  if (t == 0) throw InvalidArgument("permutation_for_epoch: epochs are numbered from 1");
  PermutationStream stream(strategy, n);
  const auto perm = stream.next_epoch_permutation(t);
  return {perm.begin(), perm.end()};
}

PermutationStream::PermutationStream(ShufflingStrategy strategy, std::size_t n)
    : strategy_(strategy), perm_(n) {
  if (n == 0) throw InvalidArgument("PermutationStream: n must be >= 1");
}

void PermutationStream::fill(std::size_t t) {
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  if (strategy_.kind == ShufflingKind::kShuffleOnce) {
    Rng rng(strategy_.seed, Stream::kSingleShuffle);
    fisher_yates(perm_, rng);
  } else if (strategy_.kind == ShufflingKind::kRandomizedReshuffling) {
    Rng rng(derive_seed(derive_seed(strategy_.seed, static_cast<std::uint64_t>(Stream::kPermutation)), t));
    fisher_yates(perm_, rng);
  }
}

std::span<const std::size_t> PermutationStream::next_epoch_permutation(std::size_t t) {
  if (t == 0) throw InvalidArgument("PermutationStream: epochs are numbered from 1");
  if (strategy_.kind == ShufflingKind::kRandomizedReshuffling || !filled_) {
    fill(t);
    filled_ = true;
  }
  return perm_;
}

std::vector<double> output_probabilities(std::span<const double> etas) {
  check_etas(etas);
  const double total = std::accumulate(etas.begin(), etas.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("output selection: learning rates sum to zero");
  std::vector<double> p(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) p[i] = etas[i] / total;
  return p;
}

std::size_t sample_output_index(std::span<const double> etas, Rng& rng) {
  check_etas(etas);
  const double total = std::accumulate(etas.begin(), etas.end(), 0.0);
  if (!(total > 0.0)) throw InvalidArgument("output selection: learning rates sum to zero");
  const double u = rng.uniform01() * total;
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (etas[i] <= 0.0) continue;
    last_positive = i;
    cum += etas[i];
    if (u < cum) return i;
  }
  // Rounding can leave u just above the accumulated total.
  return last_positive;
}

std::pair<std::size_t, Vector> select_output_iterate(std::span<const Vector> iterates,
                                                     std::span<const double> etas, Rng& rng) {
  if (iterates.empty()) throw InvalidArgument("select_output_iterate: no iterates");
  if (iterates.size() != etas.size()) {
    throw InvalidArgument("select_output_iterate: " + std::to_string(iterates.size()) +
                          " iterates but " + std::to_string(etas.size()) + " learning rates");
  }
  const std::size_t idx = sample_output_index(etas, rng);
  return {idx, iterates[idx]};
}

}  // namespace smg
