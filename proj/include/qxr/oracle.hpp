#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qxr/fact.hpp"

namespace qxr {

/// Subset-consistency oracle. A query asks whether background ∪ statements is consistent;
/// the split only matters to oracles that present the two parts differently (the LLM prompt).
/// Implementations must be safe to call from several threads.
class Oracle {
 public:
  virtual ~Oracle() = default;

  Verdict query(std::span<const FactId> statements) { return do_query(statements, {}); }
  Verdict query(std::span<const FactId> statements, std::span<const FactId> background) {
    return do_query(statements, background);
  }

 protected:
  virtual Verdict do_query(std::span<const FactId> statements,
                           std::span<const FactId> background) = 0;
};

using OraclePtr = std::shared_ptr<Oracle>;

/// Sorted union of a query's two parts.
IdSet query_set(std::span<const FactId> statements, std::span<const FactId> background);

/// Ground truth over a dense fact pool (pool[i].id == i). The pool must outlive the oracle.
class PerfectOracle final : public Oracle {
 public:
  explicit PerfectOracle(std::span<const Fact> pool, bool memoize = false);

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  std::span<const Fact> pool_;
  bool memoize_;
  std::mutex cache_mutex_;
  std::map<IdSet, Verdict> cache_;
};

struct NoiseParams {
  double alpha = 0.0;  ///< Pr[incons | truly cons]
  double beta = 0.0;   ///< Pr[cons | truly incons]
  std::uint64_t seed = 0;
};

/// Flips the inner verdict with probability alpha (cons -> incons) or beta (incons -> cons).
/// Each draw is keyed by (seed, hash of the queried set, per-set call counter), so verdicts are
/// reproducible regardless of thread scheduling and repeated calls on one set are independent.
class NoisyOracle final : public Oracle {
 public:
  NoisyOracle(OraclePtr inner, NoiseParams params);
  const NoiseParams& params() const { return params_; }

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  OraclePtr inner_;
  NoiseParams params_;
  std::mutex counter_mutex_;
  std::unordered_map<std::uint64_t, std::uint64_t> calls_per_set_;
};

struct VoteParams {
  int repetitions = 1;  ///< odd
};

/// gamma = 1/2 - max(alpha, beta).
double majority_gamma(double alpha, double beta);

/// Exact error of an r-fold majority vote over independent eps-noisy calls:
/// sum_{t=(r+1)/2}^{r} C(r,t) eps^t (1-eps)^(r-t). Requires r odd and 0 <= eps < 1/2.
double binomial_majority_error(int repetitions, double eps);

/// Hoeffding bound exp(-2 r gamma^2) with gamma = 1/2 - eps.
double hoeffding_majority_bound(int repetitions, double eps);

/// Queries the inner oracle r times and returns the majority verdict.
class MajorityOracle final : public Oracle {
 public:
  MajorityOracle(OraclePtr inner, VoteParams params);

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  OraclePtr inner_;
  int repetitions_;
};

struct OracleStats {
  std::uint64_t total_calls = 0;
  std::map<std::size_t, std::uint64_t> calls_by_subset_size;
  std::map<std::string, std::uint64_t> breakdown;  ///< label -> calls
};

/// Transparent wrapper recording call counts.
class CountingOracle final : public Oracle {
 public:
  CountingOracle(OraclePtr inner, std::string label);

  OracleStats stats() const;
  std::uint64_t total_calls() const { return total_.load(); }
  const std::string& label() const { return label_; }

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  OraclePtr inner_;
  std::string label_;
  std::atomic<std::uint64_t> total_{0};
  mutable std::mutex hist_mutex_;
  std::map<std::size_t, std::uint64_t> by_size_;
};

/// Passes verdicts through and counts how often they disagree with a reference oracle.
class AuditingOracle final : public Oracle {
 public:
  AuditingOracle(OraclePtr inner, OraclePtr reference);

  std::uint64_t calls() const { return calls_.load(); }
  std::uint64_t errors() const { return errors_.load(); }

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  OraclePtr inner_;
  OraclePtr reference_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> errors_{0};
};

/// Test hook: inverts the inner verdict whenever the queried set equals `target`.
class MutationOracle final : public Oracle {
 public:
  MutationOracle(OraclePtr inner, IdSet target);

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override;

 private:
  OraclePtr inner_;
  IdSet target_;
};

/// Adapts a callable to the oracle interface. Used by tests to script verdicts.
template <typename Fn>
class FunctionOracle final : public Oracle {
 public:
  explicit FunctionOracle(Fn fn) : fn_(std::move(fn)) {}

 protected:
  Verdict do_query(std::span<const FactId> statements, std::span<const FactId> background) override {
    return fn_(query_set(statements, background));
  }

 private:
  Fn fn_;
};

template <typename Fn>
OraclePtr make_function_oracle(Fn fn) {
  return std::make_shared<FunctionOracle<Fn>>(std::move(fn));
}

}  // namespace qxr
