#include "avcredit/auction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace avcredit {
namespace {

void check_credit(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw InvalidInput("valuation: credit outside [0, 1]");
}

// Price-greedy fill into `out` (sized by caller). `order` is scratch space.
void allocate_into(const std::vector<Bid>& bids, std::vector<std::size_t>& order,
                   VectorXd& out) {
  const std::size_t n = bids.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return bids[a].beta > bids[b].beta; });
  out.setZero(static_cast<Eigen::Index>(n));

  double remaining = 1.0;
  std::size_t start = 0;
  while (start < n && remaining > 0.0) {
    std::size_t end = start;
    double tier_demand = 0.0;
    while (end < n && bids[order[end]].beta == bids[order[start]].beta) {
      tier_demand += bids[order[end]].demand;
      ++end;
    }
    if (tier_demand <= remaining) {
      for (std::size_t q = start; q < end; ++q) out(order[q]) = bids[order[q]].demand;
      remaining -= tier_demand;
    } else {
      for (std::size_t q = start; q < end; ++q)
        out(order[q]) = remaining * bids[order[q]].demand / tier_demand;
      remaining = 0.0;
    }
    start = end;
  }
}

void validate_bids(const std::vector<Bid>& bids) {
  for (const Bid& b : bids) {
    if (!(b.beta >= 0.0) || !std::isfinite(b.beta)) throw InvalidInput("bid: negative or non-finite price");
    if (!(b.demand >= 0.0 && b.demand <= 1.0)) throw InvalidInput("bid: demand outside [0, 1]");
  }
}

// Candidate demand g of a grid with `count` intervals; the last point is exactly 1.
double grid_point(long g, long count, double step) {
  return g >= count ? 1.0 : static_cast<double>(g) * step;
}

long grid_intervals(double step) {
  return static_cast<long>(std::ceil(1.0 / step - 1e-9));
}

// Grid index of the best reply; see best_response.
long best_response_index(const std::vector<Bid>& profile, std::size_t i, const ValuationParams& p,
                         double grid_step) {
  std::vector<Bid> bids = profile;
  std::vector<std::size_t> order;

  // Allocation without bidder i does not depend on its bid.
  bids[i] = Bid{0.0, 0.0};
  VectorXd without(static_cast<Eigen::Index>(bids.size()));
  allocate_into(bids, order, without);

  const long count = grid_intervals(grid_step);
  VectorXd with(static_cast<Eigen::Index>(bids.size()));
  long best = 0;
  double best_u = -std::numeric_limits<double>::infinity();
  for (long g = 0; g <= count; ++g) {
    bids[i] = truthful_bid(grid_point(g, count, grid_step), p);
    allocate_into(bids, order, with);
    double payment = 0.0;
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (j != i) payment += bids[j].beta * (without(j) - with(j));
    }
    const double u = valuation(with(i), p) - payment;
    if (g == 0 || u > best_u + 1e-12 * std::max(1.0, std::abs(best_u))) {
      best_u = u;
      best = g;
    }
  }
  return best;
}

}  // namespace

void ValuationParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("valuation: alpha must be positive");
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw InvalidInput("valuation: gamma must be >= 1");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidInput("valuation: k must be positive");
  if (n < 0) throw InvalidInput("valuation: encounter count must be >= 0");
}

double ValuationParams::scale() const { return std::pow(gamma, n) * alpha; }

double valuation(double credit, const ValuationParams& p) {
  check_credit(credit);
  return p.scale() * -std::expm1(-p.k * credit);
}

double marginal_valuation(double credit, const ValuationParams& p) {
  check_credit(credit);
  return p.scale() * p.k * std::exp(-p.k * credit);
}

Bid truthful_bid(double demand, const ValuationParams& p) {
  return Bid{marginal_valuation(demand, p), demand};
}

VectorXd allocate(const std::vector<Bid>& bids) {
  if (bids.empty()) throw InvalidInput("allocate: no bids");
  validate_bids(bids);
  std::vector<std::size_t> order;
  VectorXd out;
  allocate_into(bids, order, out);
  return out;
}

double vcg_payment(const std::vector<Bid>& bids, std::size_t i) {
  if (i >= bids.size()) throw InvalidInput("vcg_payment: bidder index out of range");
  const VectorXd with = allocate(bids);
  std::vector<Bid> counterfactual = bids;
  counterfactual[i].demand = 0.0;
  const VectorXd without = allocate(counterfactual);
  double payment = 0.0;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (j != i) payment += bids[j].beta * (without(j) - with(j));
  }
  return payment;
}

VectorXd vcg_payments(const std::vector<Bid>& bids) {
  VectorXd out(static_cast<Eigen::Index>(bids.size()));
  for (std::size_t i = 0; i < bids.size(); ++i) out(i) = vcg_payment(bids, i);
  return out;
}

double utility(const std::vector<Bid>& bids, std::size_t i, const ValuationParams& p) {
  const VectorXd c = allocate(bids);
  return valuation(std::clamp(c(i), 0.0, 1.0), p) - vcg_payment(bids, i);
}

Bid best_response(const std::vector<Bid>& profile, std::size_t i, const ValuationParams& p,
                  double grid_step) {
  if (i >= profile.size()) throw InvalidInput("best_response: bidder index out of range");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InvalidInput("best_response: grid_step must be in (0, 1]");
  p.validate();
  validate_bids(profile);
  const long g = best_response_index(profile, i, p, grid_step);
  return truthful_bid(grid_point(g, grid_intervals(grid_step), grid_step), p);
}

Bid best_response_against(const std::vector<Bid>& others, const ValuationParams& p,
                          double grid_step) {
  std::vector<Bid> profile = others;
  profile.push_back(Bid{});
  return best_response(profile, profile.size() - 1, p, grid_step);
}

void AuctionOptions::validate() const {
  if (!(eps > 0.0)) throw InvalidInput("auction: eps must be positive");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw InvalidInput("auction: grid_step must be in (0, 1]");
  if (max_rounds < 1) throw InvalidInput("auction: max_rounds must be >= 1");
  if (!(initial_decrement >= 0.0)) throw InvalidInput("auction: initial_decrement must be >= 0");
  if (decrement_divisor < 2) throw InvalidInput("auction: decrement_divisor must be >= 2");
}

AuctionOutcome run_auction(const std::vector<ValuationParams>& valuations,
                           const AuctionOptions& options) {
  if (valuations.size() < 2) throw InvalidInput("run_auction: need at least two participants");
  options.validate();
  for (const auto& v : valuations) v.validate();

  const std::size_t n = valuations.size();
  const long count = grid_intervals(options.grid_step);
  std::vector<Bid> profile(n, Bid{0.0, 0.0});
  long decrement = std::lround(options.initial_decrement / options.grid_step);

  AuctionOutcome out;
  while (out.iterations < options.max_rounds) {
    ++out.iterations;
    bool changed = false;
    double max_gain = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double before = utility(profile, i, valuations[i]);
      const long g = std::max(0L, best_response_index(profile, i, valuations[i], options.grid_step) -
                                      decrement);
      const Bid next = truthful_bid(grid_point(g, count, options.grid_step), valuations[i]);
      if (!(next == profile[i])) changed = true;
      profile[i] = next;
      max_gain = std::max(max_gain, utility(profile, i, valuations[i]) - before);
    }
    if (!changed || max_gain <= options.eps) {
      if (decrement == 0) {
        out.converged = true;
        break;
      }
      decrement /= options.decrement_divisor;
    }
  }

  out.bids = profile;
  out.credits = allocate(profile);
  out.payments = vcg_payments(profile);
  return out;
}

VectorXd welfare_oracle(const std::vector<ValuationParams>& valuations) {
  if (valuations.size() < 2) throw InvalidInput("welfare_oracle: need at least two participants");
  for (const auto& v : valuations) v.validate();
  const auto n = static_cast<Eigen::Index>(valuations.size());
  VectorXd c(n);

  const bool same_shape = std::all_of(valuations.begin(), valuations.end(),
                                      [&](const ValuationParams& v) { return v.k == valuations[0].k; });
  if (n == 2 && same_shape) {
    // Equal marginals: s1 k e^{-k c1} = s2 k e^{-k (1 - c1)}.
    const double k = valuations[0].k;
    const double ratio = std::log(valuations[0].scale() / valuations[1].scale());
    c(0) = std::clamp(0.5 + ratio / (2.0 * k), 0.0, 1.0);
    c(1) = 1.0 - c(0);
    return c;
  }

  // Demand at a common marginal value mu, clamped to [0, 1].
  auto demand_at = [&](double log_mu) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& v = valuations[static_cast<std::size_t>(i)];
      c(i) = std::clamp((std::log(v.scale() * v.k) - log_mu) / v.k, 0.0, 1.0);
      total += c(i);
    }
    return total;
  };
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& v : valuations) hi = std::max(hi, std::log(v.scale() * v.k));
  double lo = hi;
  for (const auto& v : valuations) lo = std::min(lo, std::log(v.scale() * v.k) - v.k);
  // total(lo) >= 1 since every demand is 1 there (n >= 2); total(hi) = 0.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (demand_at(mid) > 1.0) lo = mid;
    else hi = mid;
  }
  demand_at(0.5 * (lo + hi));
  return c;
}

}  // namespace avcredit
