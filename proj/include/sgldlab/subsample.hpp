#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgldlab/errors.hpp"
#include "sgldlab/rng.hpp"

namespace sgldlab {

/// n distinct indices in [0, N), in draw order.
struct SubsetIndex {
  std::vector<std::uint32_t> indices;
};

/// Uniform size-n subsets of [0, N) by partial Fisher-Yates.
///
/// Owns an identity permutation of length N. Each draw shuffles the first n
/// slots and then undoes its swaps, so the scratch returns to the identity and
/// the result depends on the rng state alone, never on earlier draws.
class Subsampler {
 public:
  explicit Subsampler(std::size_t population);

  /// View into an internal buffer, valid until the next draw.
  std::span<const std::uint32_t> draw(std::size_t n, RngStream& rng);

  std::size_t population() const { return perm_.size(); }

 private:
  std::vector<std::uint32_t> perm_;
  std::vector<std::uint32_t> swaps_;
  std::vector<std::uint32_t> out_;
};

/// Per-thread Subsampler for population N, reused across calls. Safe because
/// every draw leaves the scratch permutation as it found it.
Subsampler& thread_subsampler(std::size_t population);

SubsetIndex sample_without_replacement(std::size_t N, std::size_t n,
                                       RngStream& rng);

inline constexpr std::size_t kEnumerationLimit = 20;

/// Calls `visit(std::span<const std::uint32_t>)` once for each size-n subset
/// of [0, N) in lexicographic order.
template <typename Visit>
void for_each_subset(std::size_t N, std::size_t n, Visit&& visit) {
  if (n < 1 || n > N) throw ArgumentError("for_each_subset: need 1 <= n <= N");
  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  while (true) {
    visit(std::span<const std::uint32_t>(idx));
    std::size_t pos = n;
    while (pos > 0 && idx[pos - 1] == N - n + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct SubsampleMoments {
  Eigen::VectorXd mean;
  /// Trace of the covariance of the estimator.
  double variance = 0.0;
  std::uint64_t subsets = 0;
};

/// Exact mean and scalar variance of (N/n) * sum_{i in tau} a_i over all
/// C(N, n) subsets tau. Refuses N > kEnumerationLimit.
SubsampleMoments enumerate_subsample_moments(
    const std::vector<Eigen::VectorXd>& values, std::size_t n);

}  // namespace sgldlab
