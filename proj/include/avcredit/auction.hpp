#pragma once

#include <cstddef>
#include <vector>

#include "avcredit/types.hpp"

namespace avcredit {

/// Parameters of v(c) = gamma^n * alpha * (1 - exp(-k c)).
struct ValuationParams {
  double alpha{1.0};
  double gamma{8.0};
  double k{5.0};
  int n{0};  // auction events already taken part in

  void validate() const;
  /// gamma^n * alpha
  double scale() const;
};

double valuation(double credit, const ValuationParams& p);
double marginal_valuation(double credit, const ValuationParams& p);

/// One bid for avoidance credit: unit price and requested quantity.
struct Bid {
  double beta{0.0};
  double demand{0.0};
  friend bool operator==(const Bid&, const Bid&) = default;
};

/// The truthful bid for a demanded quantity: price equal to the marginal value there.
Bid truthful_bid(double demand, const ValuationParams& p);

/// Price-greedy allocation of one unit of credit. Bidders at the same price
/// share what is left at that price pro rata by demand; any supply beyond the
/// total demand stays unallocated.
VectorXd allocate(const std::vector<Bid>& bids);

/// VCG externality payment of bidder i (its demand set to zero for the counterfactual).
double vcg_payment(const std::vector<Bid>& bids, std::size_t i);
VectorXd vcg_payments(const std::vector<Bid>& bids);

/// v_i(c_i) - pi_i at the given profile.
double utility(const std::vector<Bid>& bids, std::size_t i, const ValuationParams& p);

/// Best truthful reply of bidder i to the rest of `profile` (entry i is
/// ignored). Candidate demands are the grid {0, grid_step, ..., 1}; utility
/// ties go to the smaller demand.
Bid best_response(const std::vector<Bid>& profile, std::size_t i, const ValuationParams& p,
                  double grid_step);

/// Best reply when the bidder faces only `others`.
Bid best_response_against(const std::vector<Bid>& others, const ValuationParams& p,
                          double grid_step);

struct AuctionOptions {
  double eps{1e-6};
  double grid_step{1e-4};
  int max_rounds{200};
  /// Demand shaved off each best reply in the first phase (a bid fee in
  /// quantity units). It is divided by `decrement_divisor` each time a round
  /// settles, down to zero.
  double initial_decrement{0.05};
  int decrement_divisor{4};

  void validate() const;
};

struct AuctionOutcome {
  VectorXd credits;
  VectorXd payments;
  std::vector<Bid> bids;
  int iterations{0};
  bool converged{false};
};

/// Round-robin best-reply dynamics from the all-zero profile.
AuctionOutcome run_auction(const std::vector<ValuationParams>& valuations,
                           const AuctionOptions& options = {});

/// Welfare-maximising split of one unit of credit computed directly from the
/// valuations: equal marginal values, or a corner when one bidder dominates.
VectorXd welfare_oracle(const std::vector<ValuationParams>& valuations);

}  // namespace avcredit
