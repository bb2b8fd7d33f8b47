#include "surgesim/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace surge {

void TruncatedNormalSpec::validate(const char* label) const {
  if (!(stddev > 0.0))
    throw std::invalid_argument(std::string(label) + ": requires stddev > 0");
}

void PricingConfig::validate() const {
  if (!(logit_sensitivity >= 0.0))
    throw std::invalid_argument("PricingConfig: requires logit_sensitivity >= 0");
  if (!(cap >= base_price))
    throw std::invalid_argument("PricingConfig: requires cap >= base_price");
}

void AgentParams::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("AgentParams: requires lambda >= 0");
  if (!(lambda < mu)) throw std::invalid_argument("AgentParams: requires lambda < mu");
  if (d0_nonsurge < 0)
    throw std::invalid_argument("AgentParams: requires d0_nonsurge >= 0");
  if (d0_surge < d0_nonsurge)
    throw std::invalid_argument("AgentParams: requires d0_surge >= d0_nonsurge");
  if (horizon < 1) throw std::invalid_argument("AgentParams: requires horizon >= 1");
  cost_dist.validate("AgentParams.cost_dist");
  wtp_dist.validate("AgentParams.wtp_dist");
  pricing.validate();
}

double price_gap(std::int64_t d_s, std::int64_t d_ns, const PricingConfig& cfg,
                 double total_supply_per_step) {
  const double beta = cfg.logit_sensitivity;
  if (beta == 0.0) return 0.0;  // price-insensitive limit, no finite equilibrium gap
  if (static_cast<double>(d_s + d_ns) < total_supply_per_step) return 0.0;
  const double max_gap = cfg.cap - cfg.base_price;
  if (d_ns == 0) return d_s > 0 ? max_gap : 0.0;
  const double raw = std::log(static_cast<double>(d_s) / static_cast<double>(d_ns)) / beta;
  return std::clamp(raw, 0.0, max_gap);
}

DriverSplit driver_split(double p_s, double p_ns, double beta) {
  if (beta == 0.0) return DriverSplit{0.5, 0.5};
  const double top = std::max(p_s, p_ns);
  const double e_s = std::exp(beta * (p_s - top));
  const double e_ns = std::exp(beta * (p_ns - top));
  const double gamma_s = e_s / (e_s + e_ns);
  return DriverSplit{gamma_s, 1.0 - gamma_s};
}

bool rider_moves(double move_cost, double delta_p) { return move_cost <= delta_p; }

namespace {

bool rider_before(const RiderAgent& a, const RiderAgent& b) {
  return a.arrived_at != b.arrived_at ? a.arrived_at < b.arrived_at : a.id < b.id;
}

// FIFO among riders whose wtp clears the zone price; the rest keep waiting.
std::int64_t match_zone(std::vector<RiderAgent>& pool, std::int64_t drivers,
                        double price) {
  std::int64_t matched = 0;
  std::vector<RiderAgent> waiting;
  waiting.reserve(pool.size());
  for (const RiderAgent& r : pool) {
    if (matched < drivers && r.wtp >= price)
      ++matched;
    else
      waiting.push_back(r);
  }
  pool.swap(waiting);
  return matched;
}

}  // namespace

MarketSimulation::MarketSimulation(const AgentParams& params)
    : params_(params),
      arrivals_s_(derive_stream_seed(params.seed, 0)),
      arrivals_ns_(derive_stream_seed(params.seed, 1)),
      wtp_s_(derive_stream_seed(params.seed, 2)),
      wtp_ns_(derive_stream_seed(params.seed, 3)),
      cost_s_(derive_stream_seed(params.seed, 4)),
      cost_ns_(derive_stream_seed(params.seed, 5)),
      driver_count_(derive_stream_seed(params.seed, 6)),
      driver_choice_(derive_stream_seed(params.seed, 7)) {
  params_.validate();
  surge_.reserve(static_cast<std::size_t>(params_.d0_surge));
  for (std::int64_t i = 0; i < params_.d0_surge; ++i)
    surge_.push_back(make_rider(Zone::surge, 0));
  nonsurge_.reserve(static_cast<std::size_t>(params_.d0_nonsurge));
  for (std::int64_t i = 0; i < params_.d0_nonsurge; ++i)
    nonsurge_.push_back(make_rider(Zone::non_surge, 0));
}

RiderAgent MarketSimulation::make_rider(Zone zone, int arrived_at) {
  RandomStream& wtp = zone == Zone::surge ? wtp_s_ : wtp_ns_;
  RandomStream& cost = zone == Zone::surge ? cost_s_ : cost_ns_;
  return RiderAgent{next_id_++, arrived_at, params_.wtp_dist.sample(wtp),
                    params_.cost_dist.sample(cost), zone};
}

MarketStepRecord MarketSimulation::initial_record() const {
  MarketStepRecord rec;
  rec.t = 0;
  rec.d_s = unmet_surge();
  rec.d_ns = unmet_nonsurge();
  rec.p_s = params_.pricing.base_price;
  rec.p_ns = params_.pricing.base_price;
  return rec;
}

MarketStepRecord MarketSimulation::step() {
  const int t = ++t_;
  const PricingConfig& pricing = params_.pricing;
  const double total_supply = 2.0 * params_.mu;

  // 1. prices from end-of-previous-step demands
  const double delta_p = price_gap(unmet_surge(), unmet_nonsurge(), pricing, total_supply);
  const double p_ns = pricing.base_price;
  const double p_s = p_ns + delta_p;

  // 2. strategic surge riders walk; they keep their original arrival time
  std::int64_t moved = 0;
  if (params_.strategic) {
    auto keep = std::stable_partition(
        surge_.begin(), surge_.end(),
        [&](const RiderAgent& r) { return !rider_moves(r.move_cost, delta_p); });
    moved = std::distance(keep, surge_.end());
    if (moved > 0) {
      const auto merge_from = nonsurge_.insert(nonsurge_.end(), keep, surge_.end());
      for (auto it = merge_from; it != nonsurge_.end(); ++it) it->zone = Zone::non_surge;
      std::inplace_merge(nonsurge_.begin(), merge_from, nonsurge_.end(), rider_before);
      surge_.erase(keep, surge_.end());
    }
  }

  // 3. new riders arrive with fresh wtp/cost draws
  const std::int64_t arrived_s = arrivals_s_.poisson(params_.lambda);
  for (std::int64_t i = 0; i < arrived_s; ++i)
    surge_.push_back(make_rider(Zone::surge, t));
  const std::int64_t arrived_ns = arrivals_ns_.poisson(params_.lambda);
  for (std::int64_t i = 0; i < arrived_ns; ++i)
    nonsurge_.push_back(make_rider(Zone::non_surge, t));

  // 4. drivers arrive and pick a zone via the logit split
  const std::int64_t drivers = driver_count_.poisson(2.0 * params_.mu);
  const DriverSplit split = driver_split(p_s, p_ns, pricing.logit_sensitivity);
  std::int64_t r_s = 0;
  for (std::int64_t i = 0; i < drivers; ++i)
    if (driver_choice_.uniform() < split.gamma_s) ++r_s;
  const std::int64_t r_ns = drivers - r_s;

  // 5. matching; unmatched drivers leave
  const std::int64_t matched_s = match_zone(surge_, r_s, p_s);
  const std::int64_t matched_ns = match_zone(nonsurge_, r_ns, p_ns);

  MarketStepRecord rec;
  rec.t = t;
  rec.d_s = unmet_surge();
  rec.d_ns = unmet_nonsurge();
  rec.p_s = p_s;
  rec.p_ns = p_ns;
  rec.delta_p = delta_p;
  rec.r_s = r_s;
  rec.r_ns = r_ns;
  rec.moved = moved;
  rec.matched_s = matched_s;
  rec.matched_ns = matched_ns;
  rec.arrived_s = arrived_s;
  rec.arrived_ns = arrived_ns;
  return rec;
}

MarketRun simulate_market(const AgentParams& params, bool stop_when_cleared) {
  MarketSimulation sim(params);
  MarketRun run{params, {}, false, 0};
  run.records.push_back(sim.initial_record());

  const double total_supply = 2.0 * params.mu;
  const auto cleared = [&](const MarketStepRecord& rec) {
    return static_cast<double>(rec.d_s + rec.d_ns) < total_supply;
  };

  if (cleared(run.records.front())) {
    run.converged = true;
    run.convergence_t = 0;
    if (stop_when_cleared) return run;
  }
  for (int t = 1; t <= params.horizon; ++t) {
    const MarketStepRecord rec = sim.step();
    run.records.push_back(rec);
    if (!run.converged && cleared(rec)) {
      run.converged = true;
      run.convergence_t = t;
    }
    if (run.converged && stop_when_cleared) break;
  }
  return run;
}

}  // namespace surge
