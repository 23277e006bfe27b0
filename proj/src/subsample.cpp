#include "sgldlab/subsample.hpp"

#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>

namespace sgldlab {

Subsampler::Subsampler(std::size_t population) : perm_(population) {
  if (population == 0) throw ArgumentError("Subsampler: empty population");
  if (population > std::numeric_limits<std::uint32_t>::max())
    throw ArgumentError("Subsampler: population exceeds 32-bit index range");
  std::iota(perm_.begin(), perm_.end(), std::uint32_t{0});
}

std::span<const std::uint32_t> Subsampler::draw(std::size_t n, RngStream& rng) {
  const std::size_t N = perm_.size();
  if (n < 1 || n > N)
    throw ArgumentError("sample_without_replacement: need 1 <= n <= N (n=" +
                        std::to_string(n) + ", N=" + std::to_string(N) + ")");
  swaps_.resize(n);
  out_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_below(rng, N - i);
    std::swap(perm_[i], perm_[j]);
    swaps_[i] = static_cast<std::uint32_t>(j);
    out_[i] = perm_[i];
  }
  for (std::size_t i = n; i-- > 0;) std::swap(perm_[i], perm_[swaps_[i]]);
  return out_;
}

Subsampler& thread_subsampler(std::size_t population) {
  thread_local std::map<std::size_t, std::unique_ptr<Subsampler>> cache;
  auto& slot = cache[population];
  if (!slot) slot = std::make_unique<Subsampler>(population);
  return *slot;
}

SubsetIndex sample_without_replacement(std::size_t N, std::size_t n,
                                       RngStream& rng) {
  if (n < 1 || n > N)
    throw ArgumentError("sample_without_replacement: need 1 <= n <= N");
  Subsampler sampler(N);
  const auto view = sampler.draw(n, rng);
  return SubsetIndex{std::vector<std::uint32_t>(view.begin(), view.end())};
}

SubsampleMoments enumerate_subsample_moments(
    const std::vector<Eigen::VectorXd>& values, std::size_t n) {
  const std::size_t N = values.size();
  if (N > kEnumerationLimit)
    throw GuardError("enumerate_subsample_moments: N=" + std::to_string(N) +
                     " exceeds the enumeration limit of " +
                     std::to_string(kEnumerationLimit));
  if (n < 1 || n > N)
    throw ArgumentError("enumerate_subsample_moments: need 1 <= n <= N");
  const Eigen::Index d = values.front().size();
  for (const auto& v : values)
    if (v.size() != d) throw ArgumentError("enumerate_subsample_moments: ragged values");

  const double scale = static_cast<double>(N) / static_cast<double>(n);
  std::vector<Eigen::VectorXd> estimates;
  for_each_subset(N, n, [&](std::span<const std::uint32_t> tau) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
    for (auto i : tau) u += values[i];
    estimates.push_back(scale * u);
  });

  SubsampleMoments out;
  out.subsets = estimates.size();
  out.mean = Eigen::VectorXd::Zero(d);
  for (const auto& u : estimates) out.mean += u;
  out.mean /= static_cast<double>(estimates.size());
  double acc = 0.0;
  for (const auto& u : estimates) acc += (u - out.mean).squaredNorm();
  out.variance = acc / static_cast<double>(estimates.size());
  return out;
}

}  // namespace sgldlab
