#pragma once

// Independent reference computations and the randomized comparison suites
// behind `avcredit verify`. Nothing in the simulation path depends on this.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avcredit/auction.hpp"
#include "avcredit/safety.hpp"

namespace avcredit::verify {

/// Platform-stable random source (the standard distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int integer(int lo, int hi);

 private:
  std::mt19937_64 engine_;
};

/// -1/lambda * log(sum exp(-lambda h)), summed directly in long double.
long double naive_lse(const std::vector<long double>& h, long double lambda);

/// Lie derivatives of the aggregated barrier by finite differences along the
/// drift and the heading directions.
struct LieReference {
  double h_tilde{0.0};
  double lf{0.0};
  double lf2{0.0};
  RowVectorXd a_row;
};

LieReference finite_difference_lie(const std::vector<AgentStated>& states,
                                   const std::vector<AgentPair>& pairs, double v, double d,
                                   double lambda);

/// Per-pair quantities written out directly from the pair geometry.
struct PairReference {
  double h{0.0};
  double lf{0.0};
  double lf2{0.0};
  double a_first{0.0};
  double a_second{0.0};
  double b{0.0};
};

PairReference pair_reference(const AgentStated& xi, const AgentStated& xj, double v,
                             const BarrierParamsd& params);

/// Projection of `nominal` onto {u : a u >= b} from the KKT linear system.
VectorXd projection_oracle(const VectorXd& nominal, const RowVectorXd& a_row, double b);

/// Maximum of sum beta_i c_i over 0 <= c_i <= d_i, sum c_i <= 1, by
/// enumerating every vertex of the feasible set.
double best_allocation_value(const std::vector<Bid>& bids);

/// Two-bidder welfare optimum from the first-order condition.
double two_agent_share(const ValuationParams& a, const ValuationParams& b);

struct SuiteReport {
  std::string suite;
  int samples{0};
  double worst{0.0};
  double tolerance{0.0};
  bool passed{false};
  std::string detail;
};

SuiteReport lie_suite(int samples, std::uint64_t seed);
SuiteReport lse_suite(int samples, std::uint64_t seed);
SuiteReport auction_suite(int samples, std::uint64_t seed);
SuiteReport mechanism_suite(int samples, std::uint64_t seed);
SuiteReport qp_suite(int samples, std::uint64_t seed);
SuiteReport mapping_suite(int samples, std::uint64_t seed);

/// Suite names accepted by `run_suites`; "all" runs each of them.
const std::vector<std::string>& suite_names();

/// Runs one named suite (or all). Throws InvalidInput for an unknown name.
std::vector<SuiteReport> run_suites(const std::string& name, int samples, std::uint64_t seed);

}  // namespace avcredit::verify
