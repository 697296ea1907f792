#include "qxr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "qxr/detail/hashing.hpp"
#include "qxr/semantics.hpp"

namespace qxr {

IdSet query_set(std::span<const FactId> statements, std::span<const FactId> background) {
  IdSet out(statements.begin(), statements.end());
  out.insert(out.end(), background.begin(), background.end());
  normalize(out);
  return out;
}

PerfectOracle::PerfectOracle(std::span<const Fact> pool, bool memoize)
    : pool_(pool), memoize_(memoize) {
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].id != static_cast<FactId>(i)) {
      throw std::invalid_argument(
          fmt::format("fact pool is not dense: position {} holds id {}", i, pool_[i].id));
    }
  }
}

Verdict PerfectOracle::do_query(std::span<const FactId> statements,
                                std::span<const FactId> background) {
  IdSet ids = query_set(statements, background);
  if (memoize_) {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(ids); it != cache_.end()) return it->second;
  }
  const Verdict v = ground_truth_consistent(gather(pool_, ids));
  if (memoize_) {
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(std::move(ids), v);
  }
  return v;
}

NoisyOracle::NoisyOracle(OraclePtr inner, NoiseParams params)
    : inner_(std::move(inner)), params_(params) {
  if (!inner_) throw std::invalid_argument("noisy oracle needs an inner oracle");
  auto valid = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!valid(params_.alpha) || !valid(params_.beta)) {
    throw std::invalid_argument(
        fmt::format("noise rates must lie in [0,1], got alpha={} beta={}", params_.alpha,
                    params_.beta));
  }
}

Verdict NoisyOracle::do_query(std::span<const FactId> statements,
                              std::span<const FactId> background) {
  const Verdict truth = inner_->query(statements, background);
  const IdSet ids = query_set(statements, background);
  const std::uint64_t set_hash = detail::hash_ids<FactId>(ids);
  std::uint64_t call_index = 0;
  {
    std::lock_guard lock(counter_mutex_);
    call_index = calls_per_set_[set_hash]++;
  }
  const double u = detail::to_unit(
      detail::combine(detail::combine(detail::mix64(params_.seed), set_hash), call_index));
  const double flip = is_cons(truth) ? params_.alpha : params_.beta;
  if (u < flip) return is_cons(truth) ? Verdict::Incons : Verdict::Cons;
  return truth;
}

double majority_gamma(double alpha, double beta) { return 0.5 - std::max(alpha, beta); }

double binomial_majority_error(int repetitions, double eps) {
  if (repetitions < 1 || repetitions % 2 == 0) {
    throw std::invalid_argument(fmt::format("repetitions must be odd and positive, got {}",
                                            repetitions));
  }
  if (!(eps >= 0.0 && eps < 0.5)) {
    throw std::invalid_argument(fmt::format("eps must lie in [0, 1/2), got {}", eps));
  }
  if (eps == 0.0) return 0.0;
  const int r = repetitions;
  double total = 0.0;
  for (int t = (r + 1) / 2; t <= r; ++t) {
    const double log_choose =
        std::lgamma(r + 1.0) - std::lgamma(t + 1.0) - std::lgamma(r - t + 1.0);
    total += std::exp(log_choose + t * std::log(eps) + (r - t) * std::log1p(-eps));
  }
  return total;
}

double hoeffding_majority_bound(int repetitions, double eps) {
  const double gamma = 0.5 - eps;
  return std::exp(-2.0 * repetitions * gamma * gamma);
}

MajorityOracle::MajorityOracle(OraclePtr inner, VoteParams params)
    : inner_(std::move(inner)), repetitions_(params.repetitions) {
  if (!inner_) throw std::invalid_argument("majority oracle needs an inner oracle");
  if (repetitions_ < 1 || repetitions_ % 2 == 0) {
    throw std::invalid_argument(
        fmt::format("repetitions must be odd and positive, got {}", repetitions_));
  }
}

Verdict MajorityOracle::do_query(std::span<const FactId> statements,
                                 std::span<const FactId> background) {
  int incons = 0;
  for (int i = 0; i < repetitions_; ++i) {
    if (!is_cons(inner_->query(statements, background))) ++incons;
  }
  return 2 * incons > repetitions_ ? Verdict::Incons : Verdict::Cons;
}

CountingOracle::CountingOracle(OraclePtr inner, std::string label)
    : inner_(std::move(inner)), label_(std::move(label)) {
  if (!inner_) throw std::invalid_argument("counting oracle needs an inner oracle");
}

Verdict CountingOracle::do_query(std::span<const FactId> statements,
                                 std::span<const FactId> background) {
  const std::size_t size = query_set(statements, background).size();
  total_.fetch_add(1);
  {
    std::lock_guard lock(hist_mutex_);
    ++by_size_[size];
  }
  return inner_->query(statements, background);
}

OracleStats CountingOracle::stats() const {
  OracleStats s;
  s.total_calls = total_.load();
  {
    std::lock_guard lock(hist_mutex_);
    s.calls_by_subset_size = by_size_;
  }
  s.breakdown[label_] = s.total_calls;
  return s;
}

AuditingOracle::AuditingOracle(OraclePtr inner, OraclePtr reference)
    : inner_(std::move(inner)), reference_(std::move(reference)) {
  if (!inner_ || !reference_) throw std::invalid_argument("auditing oracle needs two oracles");
}

Verdict AuditingOracle::do_query(std::span<const FactId> statements,
                                 std::span<const FactId> background) {
  const Verdict v = inner_->query(statements, background);
  calls_.fetch_add(1);
  if (v != reference_->query(statements, background)) errors_.fetch_add(1);
  return v;
}

MutationOracle::MutationOracle(OraclePtr inner, IdSet target)
    : inner_(std::move(inner)), target_(std::move(target)) {
  normalize(target_);
}

Verdict MutationOracle::do_query(std::span<const FactId> statements,
                                 std::span<const FactId> background) {
  const Verdict v = inner_->query(statements, background);
  if (query_set(statements, background) != target_) return v;
  return is_cons(v) ? Verdict::Incons : Verdict::Cons;
}

}  // namespace qxr
