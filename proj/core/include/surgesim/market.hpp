#pragma once

#include <cstdint>
#include <vector>

#include "surgesim/rng.hpp"

namespace surge {

enum class Zone { surge, non_surge };

struct RiderAgent {
  std::int64_t id = 0;
  int arrived_at = 0;
  double wtp = 0.0;        // accepts a ride iff wtp >= zone price
  double move_cost = 0.0;  // walks iff move_cost <= price gap
  Zone zone = Zone::surge;

  bool operator==(const RiderAgent&) const = default;
};

// Underlying normal parameters; samples are rejected until nonnegative.
struct TruncatedNormalSpec {
  double mean = 0.0;
  double stddev = 1.0;

  double sample(RandomStream& rng) const { return rng.truncated_normal(mean, stddev); }
  void validate(const char* label) const;

  bool operator==(const TruncatedNormalSpec&) const = default;
};

struct PricingConfig {
  double logit_sensitivity = 0.25;  // beta; 0 means price-insensitive drivers
  double base_price = 1.0;          // non-surge price multiplier
  double cap = 10.0;                // maximum surge price M

  void validate() const;

  bool operator==(const PricingConfig&) const = default;
};

struct AgentParams {
  double lambda = 0.0;
  double mu = 0.0;
  std::int64_t d0_surge = 0;     // initial rider counts
  std::int64_t d0_nonsurge = 0;
  int horizon = 1;
  std::uint64_t seed = 0;
  TruncatedNormalSpec cost_dist{8.0, 8.0};  // move-cost distribution D
  TruncatedNormalSpec wtp_dist{7.0, 2.0};
  PricingConfig pricing{};
  bool strategic = true;  // false = non-strategic benchmark, riders never move

  void validate() const;
};

struct MarketStepRecord {
  int t = 0;
  std::int64_t d_s = 0;   // unmet riders at the end of the step
  std::int64_t d_ns = 0;
  double p_s = 0.0;
  double p_ns = 0.0;
  double delta_p = 0.0;   // gap applied during the step (set from t-1 demands)
  std::int64_t r_s = 0;   // realized drivers per zone
  std::int64_t r_ns = 0;
  std::int64_t moved = 0;
  std::int64_t matched_s = 0;
  std::int64_t matched_ns = 0;
  std::int64_t arrived_s = 0;
  std::int64_t arrived_ns = 0;

  bool operator==(const MarketStepRecord&) const = default;
};

// Equilibrium price gap: 0 once total unmet demand falls below the per-step
// supply, otherwise (1/beta) * ln(d_s / d_ns) floored at 0 and capped at
// cap - base_price. d_ns == 0 with d_s > 0 makes the cap bind.
double price_gap(std::int64_t d_s, std::int64_t d_ns, const PricingConfig& cfg,
                 double total_supply_per_step);

struct DriverSplit {
  double gamma_s = 0.5;
  double gamma_ns = 0.5;
};

// Multinomial logit over the two zones, computed against the larger exponent.
// gamma_s + gamma_ns == 1 exactly.
DriverSplit driver_split(double p_s, double p_ns, double beta);

bool rider_moves(double move_cost, double delta_p);

// One market, one seed. Owns the rider pools and the per-flow random streams.
class MarketSimulation {
 public:
  explicit MarketSimulation(const AgentParams& params);

  // Pre-open snapshot at t = 0: initial rider counts under normal pricing.
  MarketStepRecord initial_record() const;

  // Advances one step: price from last demands, strategic movement, arrivals,
  // driver zone choice, FIFO matching by arrival time among eligible riders.
  MarketStepRecord step();

  std::int64_t unmet_surge() const { return static_cast<std::int64_t>(surge_.size()); }
  std::int64_t unmet_nonsurge() const {
    return static_cast<std::int64_t>(nonsurge_.size());
  }
  const AgentParams& params() const { return params_; }

 private:
  RiderAgent make_rider(Zone zone, int arrived_at);

  AgentParams params_;
  std::vector<RiderAgent> surge_;     // both pools stay sorted by (arrived_at, id)
  std::vector<RiderAgent> nonsurge_;
  RandomStream arrivals_s_;
  RandomStream arrivals_ns_;
  RandomStream wtp_s_;
  RandomStream wtp_ns_;
  RandomStream cost_s_;
  RandomStream cost_ns_;
  RandomStream driver_count_;
  RandomStream driver_choice_;
  std::int64_t next_id_ = 0;
  int t_ = 0;
};

struct MarketRun {
  AgentParams params;
  std::vector<MarketStepRecord> records;  // records[0] = initial state
  bool converged = false;
  int convergence_t = 0;  // first step whose end-of-step total unmet < 2*mu

  bool operator==(const MarketRun&) const = default;
};

// Runs until the surge clears (total unmet demand below the nominal per-step
// supply 2*mu) or the horizon is exhausted. With stop_when_cleared = false the
// run spans the full horizon and convergence_t still reports the first
// clearing step.
MarketRun simulate_market(const AgentParams& params, bool stop_when_cleared = true);

}  // namespace surge
