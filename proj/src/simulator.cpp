#include "geocat/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace geocat {

namespace {

// Fixed block size keeps the reduction order independent of the worker count.
constexpr std::uint64_t kBlock = 1024;

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t censored = 0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    censored += other.censored;
    if (other.n == 0) return;
    if (n == 0) {
      n = other.n;
      mean = other.mean;
      m2 = other.m2;
      return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(other.n);
    const double delta = other.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    n += other.n;
  }
};

std::uint64_t sample_offspring(const OffspringLaw& law, Rng& rng) {
  const auto probs = law.probs();
  double u = rng.uniform();
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    if (u < probs[k]) return k;
    u -= probs[k];
  }
  return probs.size() - 1;
}

}  // namespace

std::uint64_t sample_geometric_catastrophe(std::uint64_t size, double p, Rng& rng) {
  std::uint64_t remaining = size;
  while (remaining > 0) {
    if (rng.bernoulli(p)) return remaining;
    --remaining;
  }
  return 0;
}

Sample simulate_no_dispersion(const ModelParams& params, Rng& rng, std::uint64_t event_cap) {
  // Births arrive at rate lambda regardless of the population size.
  const double lambda = params.lambda();
  const double total_rate = lambda + 1.0;
  const double birth_prob = lambda / total_rate;
  std::uint64_t size = 1;
  double t = 0.0;
  Sample sample;
  while (sample.events < event_cap) {
    t += rng.exponential(total_rate);
    ++sample.events;
    if (rng.bernoulli(birth_prob)) {
      ++size;
    } else {
      size = sample_geometric_catastrophe(size, params.p(), rng);
      if (size == 0) {
        sample.tau = t;
        return sample;
      }
    }
  }
  return sample;
}

Sample simulate_no_dispersion(const ModelParams& params, std::uint64_t seed, std::uint64_t event_cap) {
  Rng rng(seed);
  return simulate_no_dispersion(params, rng, event_cap);
}

Sample simulate_colony_level(const OffspringLaw& law, Rng& rng, std::uint64_t event_cap) {
  std::uint64_t colonies = 1;
  double t = 0.0;
  Sample sample;
  while (sample.events < event_cap) {
    t += rng.exponential(static_cast<double>(colonies));
    ++sample.events;
    colonies = colonies - 1 + sample_offspring(law, rng);
    if (colonies == 0) {
      sample.tau = t;
      return sample;
    }
  }
  return sample;
}

Sample simulate_colony_level(const OffspringLaw& law, std::uint64_t seed, std::uint64_t event_cap) {
  Rng rng(seed);
  return simulate_colony_level(law, rng, event_cap);
}

Sample simulate_individual_tree(const ModelParams& params, const Scheme& scheme, Rng& rng,
                                std::uint64_t event_cap, const CatastropheObserver& observer) {
  if (!scheme.disperses()) throw DomainError("individual tree simulation needs a dispersion scheme");
  if (scheme.d > 64) throw UnsupportedError("individual tree simulation supports d <= 64");

  const double lambda = params.lambda();
  const double birth_prob = lambda / (lambda + 1.0);
  const auto d = static_cast<std::uint64_t>(scheme.d);
  const bool optimal = scheme.kind == Scheme::Kind::Optimal;

  // Vertex ids are handed out once; a vertex may disperse at most once.
  std::vector<std::uint8_t> dispersed{0};
  std::vector<ColonyState> colonies{ColonyState{1, 0}};
  double t = 0.0;
  Sample sample;

  while (sample.events < event_cap) {
    const auto n = static_cast<double>(colonies.size());
    t += rng.exponential(n * (lambda + 1.0));
    ++sample.events;
    const std::uint64_t idx = rng.below(colonies.size());
    if (rng.bernoulli(birth_prob)) {
      ++colonies[idx].size;
      continue;
    }

    const ColonyState hit = colonies[idx];
    colonies[idx] = colonies.back();
    colonies.pop_back();

    const std::uint64_t survivors = sample_geometric_catastrophe(hit.size, params.p(), rng);
    std::uint64_t occupied = 0;  // bitmask of colonized child slots
    if (optimal) {
      const std::uint64_t k = std::min(survivors, d);
      occupied = k == 64 ? ~0ULL : ((1ULL << k) - 1);
    } else {
      const std::uint64_t all = d == 64 ? ~0ULL : ((1ULL << d) - 1);
      for (std::uint64_t s = 0; s < survivors && occupied != all; ++s) {
        occupied |= 1ULL << rng.below(d);
      }
    }

    if (dispersed[hit.vertex]) {
      throw NumericalError("vertex " + std::to_string(hit.vertex) + " dispersed twice");
    }
    dispersed[hit.vertex] = 1;
    const auto created = static_cast<std::uint64_t>(std::popcount(occupied));
    for (std::uint64_t slot = 0; slot < d; ++slot) {
      if (!(occupied >> slot & 1ULL)) continue;
      if (dispersed.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw UnsupportedError("vertex id space exhausted");
      }
      colonies.push_back(ColonyState{1, static_cast<std::uint32_t>(dispersed.size())});
      dispersed.push_back(0);
    }
    if (observer) observer(CatastropheRecord{hit.size, survivors, created});

    if (colonies.empty()) {
      sample.tau = t;
      return sample;
    }
  }
  return sample;
}

Sample simulate_individual_tree(const ModelParams& params, const Scheme& scheme, std::uint64_t seed,
                                std::uint64_t event_cap) {
  Rng rng(seed);
  return simulate_individual_tree(params, scheme, rng, event_cap);
}

Sample simulate_replica(const ModelSpec& model, Rng& rng, std::uint64_t event_cap) {
  if (!model.scheme.disperses()) return simulate_no_dispersion(model.params, rng, event_cap);
  if (model.level == Level::Individual) {
    return simulate_individual_tree(model.params, model.scheme, rng, event_cap);
  }
  return simulate_colony_level(offspring_law(model.params, model.scheme), rng, event_cap);
}

SimEstimate estimate_mean(const ModelSpec& model, const SimConfig& config) {
  if (config.replicas < 2) throw DomainError("estimate_mean needs at least 2 replicas");
  if (config.event_cap < 1) throw DomainError("event cap must be >= 1");

  // Build the offspring law once rather than per replica.
  std::optional<OffspringLaw> law;
  if (model.scheme.disperses() && model.level == Level::Colony) {
    law = offspring_law(model.params, model.scheme);
  }
  auto run_one = [&](std::uint64_t index) {
    Rng rng = Rng::for_replica(config.master_seed, index);
    if (law) return simulate_colony_level(*law, rng, config.event_cap);
    return simulate_replica(model, rng, config.event_cap);
  };

  const std::uint64_t n_blocks = (config.replicas + kBlock - 1) / kBlock;
  std::vector<Moments> blocks(n_blocks);
  SimEstimate estimate;
  if (config.keep_raw) estimate.raw.resize(config.replicas);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::uint64_t b = next++; b < n_blocks; b = next++) {
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(config.replicas, lo + kBlock);
        Moments& m = blocks[b];
        for (std::uint64_t i = lo; i < hi; ++i) {
          Sample s = run_one(i);
          if (s.tau) {
            m.add(*s.tau);
          } else {
            ++m.censored;
          }
          if (config.keep_raw) estimate.raw[i] = s;
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n_blocks;
    }
  };

  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, n_blocks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  Moments total;
  for (const Moments& m : blocks) total.merge(m);
  estimate.n_completed = total.n;
  estimate.n_censored = total.censored;
  if (total.n == 0) throw EstimateUnavailable(config.replicas, total.censored);
  estimate.mean = total.mean;
  estimate.se = total.n >= 2
                    ? std::sqrt(total.m2 / static_cast<double>(total.n - 1) / static_cast<double>(total.n))
                    : std::numeric_limits<double>::quiet_NaN();
  return estimate;
}

void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples) {
  out << "replica,tau,censored\n";
  char buf[64];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << i << ',';
    if (samples[i].tau) {
      std::snprintf(buf, sizeof buf, "%.17g", *samples[i].tau);
      out << buf << ",0\n";
    } else {
      out << ",1\n";
    }
  }
}

}  // namespace geocat
