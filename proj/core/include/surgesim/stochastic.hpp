#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "surgesim/rng.hpp"
#include "surgesim/theory.hpp"

namespace surge {

enum class ArrivalKind { deterministic, poisson };

const char* to_string(ArrivalKind kind);
std::optional<ArrivalKind> arrival_kind_from_string(const std::string& name);

struct ArrivalProcess {
  ArrivalKind kind = ArrivalKind::poisson;
  double mean = 0.0;  // arrivals per time step

  // Deterministic returns round(mean) without consuming the stream.
  std::int64_t sample(RandomStream& rng) const;
};

struct StochasticParams {
  TheoryParams base;
  ArrivalProcess demand_process;
  ArrivalProcess supply_process;
  std::uint64_t seed = 0;

  static StochasticParams make(const TheoryParams& base, ArrivalKind demand,
                               ArrivalKind supply, std::uint64_t seed);

  // Process means must equal base.lambda / base.mu.
  void validate() const;
};

// The core recursion with lambda and mu replaced, per step and per zone, by
// independent samples. Each (zone, flow) pair owns a stream derived from the
// seed; equal (params, seed) give bit-identical trajectories.
Trajectory simulate_stochastic(const StochasticParams& params);

}  // namespace surge
