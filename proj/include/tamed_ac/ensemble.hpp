#pragma once

// Sample-parallel Monte-Carlo driver. Each sample owns its noise stream, the
// per-sample results are stored by sample id, and every reduction walks them
// in id order, so outputs do not depend on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "tamed_ac/error.hpp"
#include "tamed_ac/noise.hpp"
#include "tamed_ac/scheme.hpp"

namespace tamed_ac {

enum class BlowUpPolicy { abort, skip };

struct EnsembleOptions {
  unsigned threads = 1;
  BlowUpPolicy on_blowup = BlowUpPolicy::abort;
};

struct FailedSample {
  std::uint64_t sample = 0;
  std::uint64_t step = 0;
};

template <class T>
struct SampleOutcomes {
  std::vector<std::optional<T>> values;  // indexed by sample id
  std::vector<FailedSample> failures;    // sorted by sample id

  std::uint64_t n_ok() const {
    return static_cast<std::uint64_t>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
  }
};

// Runs fn(state, sample) for sample = 0..n-1, where `state` is a per-worker
// object built by make_state(). A BlowUpError marks the sample as failed;
// under BlowUpPolicy::abort the lowest failed sample is rethrown once all
// workers have stopped. Any other exception is rethrown as is.
template <class MakeState, class Fn>
auto parallel_map(std::uint64_t n, const EnsembleOptions& opts, MakeState make_state, Fn fn) {
  using State = std::invoke_result_t<MakeState>;
  using T = std::invoke_result_t<Fn, State&, std::uint64_t>;
  SampleOutcomes<T> out;
  out.values.resize(n);

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::exception_ptr hard_error;
  std::vector<FailedSample> failures;

  auto worker = [&] {
    try {
      State state = make_state();
      for (;;) {
        if (stop.load(std::memory_order_relaxed)) return;
        const std::uint64_t s = next.fetch_add(1);
        if (s >= n) return;
        try {
          out.values[s] = fn(state, s);
        } catch (const BlowUpError& e) {
          std::lock_guard lock(mu);
          failures.push_back({s, e.step()});
          if (opts.on_blowup == BlowUpPolicy::abort) stop = true;
        }
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!hard_error) hard_error = std::current_exception();
      stop = true;
    }
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(std::max<std::uint64_t>(n, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (hard_error) std::rethrow_exception(hard_error);
  std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.sample < b.sample; });
  if (!failures.empty() && opts.on_blowup == BlowUpPolicy::abort) {
    throw BlowUpError(failures.front().step, failures.front().sample);
  }
  out.failures = std::move(failures);
  return out;
}

// ---------------------------------------------------------------------------
// Reductions

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // unbiased sample standard deviation
  std::uint64_t n = 0;
  std::uint64_t n_failed = 0;
};

// Neumaier-compensated sum in the given order.
inline double compensated_sum(std::span<const double> xs) noexcept {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

// Mean is computed about the first value, so a constant sample has mean equal
// to that constant and zero deviation exactly.
inline SampleStats summarize(std::span<const double> xs) {
  SampleStats st;
  st.n = xs.size();
  if (xs.empty()) return st;
  const double shift = xs.front();
  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d[i] = xs[i] - shift;
  const double mean_d = compensated_sum(d) / static_cast<double>(xs.size());
  st.mean = shift + mean_d;
  if (xs.size() > 1) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = d[i] - mean_d;
      d[i] = e * e;
    }
    st.std = std::sqrt(compensated_sum(d) / static_cast<double>(xs.size() - 1));
  }
  return st;
}

template <class T>
std::vector<T> successful(const SampleOutcomes<T>& o) {
  std::vector<T> v;
  v.reserve(o.values.size());
  for (const auto& x : o.values) {
    if (x) v.push_back(*x);
  }
  return v;
}

// Mean and standard deviation of observable(endpoint, sample) over
// n_samples trajectories from sin(pi x).
template <class Observable>
SampleStats run_ensemble(const SchemeConfig& cfg, const NoisePlan& plan, std::uint64_t n_samples,
                         Observable observable, const EnsembleOptions& opts = {}) {
  if (n_samples < 2) throw DomainError("an ensemble needs at least two samples");
  cfg.validate();
  const std::size_t n_modes = cfg.basis->size();
  const SpectralField x0 = sine_initial_state(n_modes);
  if (cfg.n_steps > 0) detail::coarse_ratio(cfg, plan);
  auto outcomes = parallel_map(
      n_samples, opts, [&] { return NoisePath(plan, n_modes); },
      [&](NoisePath& path, std::uint64_t s) -> double {
        if (cfg.n_steps > 0 && cfg.noise_enabled) path.generate(s);
        const TrajectoryRecord rec = run_trajectory(cfg, path, RecordSpec::endpoint(), x0);
        return static_cast<double>(observable(rec.endpoint, s));
      });
  const auto values = successful(outcomes);
  SampleStats st = summarize(values);
  st.n_failed = outcomes.failures.size();
  return st;
}

}  // namespace tamed_ac
