#pragma once

// Monte Carlo extinction times. Every sampler is a pure function of its
// inputs and the random stream it is handed; `estimate_mean` derives one
// stream per replica so results do not depend on the number of workers.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "geocat/core.hpp"
#include "geocat/rng.hpp"

namespace geocat {

inline constexpr std::uint64_t kDefaultEventCap = 10'000'000;

/// One replica: the extinction time, or nullopt when the event cap was hit.
struct Sample {
  std::optional<double> tau;
  std::uint64_t events = 0;

  bool censored() const noexcept { return !tau.has_value(); }
};

/// A colony on the tree: its population and the vertex it occupies.
struct ColonyState {
  std::uint64_t size = 1;
  std::uint32_t vertex = 0;
};

/// What happened at one colony catastrophe in an individual-level run.
struct CatastropheRecord {
  std::uint64_t size_before;
  std::uint64_t survivors;
  std::uint64_t colonies_created;
};

using CatastropheObserver = std::function<void(const CatastropheRecord&)>;

/// Sequential thinning: individuals are hit one at a time, each dying with
/// probability 1 - p, until the first survivor. Returns the survivor count.
std::uint64_t sample_geometric_catastrophe(std::uint64_t size, double p, Rng& rng);

Sample simulate_no_dispersion(const ModelParams& params, Rng& rng,
                              std::uint64_t event_cap = kDefaultEventCap);
Sample simulate_no_dispersion(const ModelParams& params, std::uint64_t seed,
                              std::uint64_t event_cap = kDefaultEventCap);

/// Continuous-time branching process with unit-rate colony lifetimes.
Sample simulate_colony_level(const OffspringLaw& law, Rng& rng,
                             std::uint64_t event_cap = kDefaultEventCap);
Sample simulate_colony_level(const OffspringLaw& law, std::uint64_t seed,
                             std::uint64_t event_cap = kDefaultEventCap);

/// Full individual-level dynamics on the rooted d-ary tree. `observer`, when
/// set, sees every catastrophe. Throws DomainError for Scheme::none().
Sample simulate_individual_tree(const ModelParams& params, const Scheme& scheme, Rng& rng,
                                std::uint64_t event_cap = kDefaultEventCap,
                                const CatastropheObserver& observer = {});
Sample simulate_individual_tree(const ModelParams& params, const Scheme& scheme,
                                std::uint64_t seed, std::uint64_t event_cap = kDefaultEventCap);

enum class Level { Individual, Colony };

struct ModelSpec {
  ModelParams params;
  Scheme scheme;
  /// Ignored for the no-dispersion model.
  Level level = Level::Colony;
};

struct SimConfig {
  std::uint64_t replicas = 100'000;
  std::uint64_t master_seed = 0;
  std::uint64_t event_cap = kDefaultEventCap;
  /// 0 means std::thread::hardware_concurrency().
  unsigned workers = 0;
  bool keep_raw = false;
};

struct SimEstimate {
  double mean = 0.0;
  /// Standard error of the mean over completed replicas; NaN with fewer than two.
  double se = 0.0;
  std::uint64_t n_completed = 0;
  std::uint64_t n_censored = 0;
  /// Per-replica samples in replica order when SimConfig::keep_raw is set.
  std::vector<Sample> raw;

  bool flagged() const noexcept { return n_censored > 0; }
};

/// Runs one replica of `model` on the given stream.
Sample simulate_replica(const ModelSpec& model, Rng& rng, std::uint64_t event_cap);

/// Throws EstimateUnavailable when every replica is censored, DomainError
/// when replicas < 2.
SimEstimate estimate_mean(const ModelSpec& model, const SimConfig& config);

/// Writes `replica,tau,censored` rows; tau is empty for censored replicas.
void write_samples_csv(std::ostream& out, const std::vector<Sample>& samples);

}  // namespace geocat
