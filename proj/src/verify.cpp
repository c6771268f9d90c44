#include "avcredit/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "avcredit/allocation.hpp"

namespace avcredit::verify {

int Rng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(engine_() % span);
}

long double naive_lse(const std::vector<long double>& h, long double lambda) {
  long double sum = 0.0L;
  for (long double hk : h) sum += std::exp(-lambda * hk);
  return -std::log(sum) / lambda;
}

namespace {

using LD = long double;

struct Geometry {
  std::vector<LD> x, y, theta;
  std::vector<AgentPair> pairs;
  LD v, d, lambda;

  // Aggregated barrier after flowing along the drift for time s, with the
  // headings replaced by `heading`.
  LD flowed(LD s, const std::vector<LD>& heading) const {
    std::vector<LD> h;
    h.reserve(pairs.size());
    for (const AgentPair& p : pairs) {
      const LD dx = (x[p.first] + s * v * std::cos(heading[p.first])) -
                    (x[p.second] + s * v * std::cos(heading[p.second]));
      const LD dy = (y[p.first] + s * v * std::sin(heading[p.first])) -
                    (y[p.second] + s * v * std::sin(heading[p.second]));
      h.push_back(dx * dx + dy * dy - d * d);
    }
    return naive_lse(h, lambda);
  }

  LD first_derivative(const std::vector<LD>& heading, LD step) const {
    auto central = [&](LD e) { return (flowed(e, heading) - flowed(-e, heading)) / (2 * e); };
    return (4 * central(step / 2) - central(step)) / 3;
  }

  LD second_derivative(LD step) const {
    const LD mid = flowed(0, theta);
    auto central = [&](LD e) { return (flowed(e, theta) - 2 * mid + flowed(-e, theta)) / (e * e); };
    return (4 * central(step / 2) - central(step)) / 3;
  }
};

double rel_err(double value, double reference, double floor) {
  return std::abs(value - reference) / std::max(std::abs(reference), floor);
}

std::vector<AgentStated> random_states(Rng& rng, int n, double half_width) {
  std::vector<AgentStated> states;
  while (static_cast<int>(states.size()) < n) {
    AgentStated s(rng.uniform(-half_width, half_width), rng.uniform(-half_width, half_width),
                  rng.uniform(-std::numbers::pi, std::numbers::pi));
    const bool clear = std::all_of(states.begin(), states.end(), [&](const AgentStated& o) {
      return (o.position() - s.position()).norm() > 0.02;
    });
    if (clear) states.push_back(s);
  }
  return states;
}

SuiteReport finish(SuiteReport r, double worst, int failures, const std::string& extra = {}) {
  r.worst = worst;
  r.passed = failures == 0 && std::isfinite(worst);
  std::ostringstream out;
  out << failures << " failing sample(s)";
  if (!extra.empty()) out << "; " << extra;
  r.detail = out.str();
  return r;
}

std::vector<Bid> random_bids(Rng& rng, int n) {
  std::vector<Bid> bids;
  for (int i = 0; i < n; ++i) {
    Bid b{rng.uniform(0.0, 3.0), rng.uniform(0.0, 1.0)};
    if (i > 0 && rng.uniform() < 0.15) b.beta = bids[static_cast<std::size_t>(rng.integer(0, i - 1))].beta;
    if (rng.uniform() < 0.05) b.demand = 0.0;
    bids.push_back(b);
  }
  return bids;
}

}  // namespace

LieReference finite_difference_lie(const std::vector<AgentStated>& states,
                                   const std::vector<AgentPair>& pairs, double v, double d,
                                   double lambda) {
  Geometry g;
  for (const auto& s : states) {
    g.x.push_back(s.x);
    g.y.push_back(s.y);
    g.theta.push_back(s.theta);
  }
  g.pairs = pairs;
  g.v = v;
  g.d = d;
  g.lambda = lambda;

  const LD time_step = LD(2e-4) / LD(v);
  const LD angle_step = 1e-3L;

  LieReference out;
  out.h_tilde = static_cast<double>(g.flowed(0, g.theta));
  out.lf = static_cast<double>(g.first_derivative(g.theta, time_step));
  out.lf2 = static_cast<double>(g.second_derivative(time_step));
  out.a_row = RowVectorXd::Zero(static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto lf_at = [&](LD shift) {
      std::vector<LD> heading = g.theta;
      heading[i] += shift;
      return g.first_derivative(heading, time_step);
    };
    auto central = [&](LD e) { return (lf_at(e) - lf_at(-e)) / (2 * e); };
    out.a_row(static_cast<Eigen::Index>(i)) =
        static_cast<double>((4 * central(angle_step / 2) - central(angle_step)) / 3);
  }
  return out;
}

PairReference pair_reference(const AgentStated& xi, const AgentStated& xj, double v,
                             const BarrierParamsd& params) {
  const double dx = xi.x - xj.x;
  const double dy = xi.y - xj.y;
  const double dvx = v * std::cos(xi.theta) - v * std::cos(xj.theta);
  const double dvy = v * std::sin(xi.theta) - v * std::sin(xj.theta);
  PairReference r;
  r.h = dx * dx + dy * dy - params.d * params.d;
  r.lf = 2.0 * dx * dvx + 2.0 * dy * dvy;
  r.lf2 = 2.0 * dvx * dvx + 2.0 * dvy * dvy;
  // d/dtheta_i of lf, then d/dtheta_j of lf.
  r.a_first = 2.0 * dx * (-v * std::sin(xi.theta)) + 2.0 * dy * (v * std::cos(xi.theta));
  r.a_second = 2.0 * dx * (v * std::sin(xj.theta)) + 2.0 * dy * (-v * std::cos(xj.theta));
  r.b = -(r.lf2 + (params.kappa1 + params.kappa2) * r.lf + params.kappa1 * params.kappa2 * r.h);
  return r;
}

VectorXd projection_oracle(const VectorXd& nominal, const RowVectorXd& a_row, double b) {
  if (a_row.dot(nominal.transpose()) >= b) return nominal;
  // Stationarity u - nominal - mu a^T = 0 with the constraint active.
  const Eigen::Index n = nominal.size();
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n).setIdentity();
  kkt.topRightCorner(n, 1) = -a_row.transpose();
  kkt.bottomLeftCorner(1, n) = a_row;
  Eigen::VectorXd rhs(n + 1);
  rhs << nominal, b;
  const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  return sol.head(n);
}

double best_allocation_value(const std::vector<Bid>& bids) {
  const std::size_t n = bids.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double used = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        used += bids[i].demand;
        value += bids[i].beta * bids[i].demand;
      }
    }
    if (used > 1.0) continue;
    best = std::max(best, value);
    for (std::size_t r = 0; r < n; ++r) {
      if (mask & (1u << r)) continue;
      const double rest = std::min(1.0 - used, bids[r].demand);
      best = std::max(best, value + bids[r].beta * rest);
    }
  }
  return best;
}

double two_agent_share(const ValuationParams& a, const ValuationParams& b) {
  const double c = 0.5 + std::log((std::pow(a.gamma, a.n) * a.alpha) / (std::pow(b.gamma, b.n) * b.alpha)) /
                             (2.0 * a.k);
  return std::clamp(c, 0.0, 1.0);
}

SuiteReport lie_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"lie", samples, 0.0, 1e-4, false, {}};
  Rng rng(seed);
  double worst = 0.0;
  double worst_pair = 0.0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    const int n = rng.integer(2, 4);
    const auto states = random_states(rng, n, 0.4);
    const double v = rng.uniform(0.05, 0.5);
    const BarrierParamsd params{0.12, rng.uniform(5.0, 100.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const auto pairs = all_pairs(n);
    const auto analytic = assemble_constraint(states, VectorXd(VectorXd::Zero(n)), pairs, v, params);
    const auto fd = finite_difference_lie(states, pairs, v, params.d, params.lambda);

    const double lf_scale = 1e-6;
    double err = std::max({rel_err(analytic.h_tilde, fd.h_tilde, lf_scale),
                           rel_err(analytic.lf_h_tilde, fd.lf, lf_scale),
                           rel_err(analytic.lf2_h_tilde, fd.lf2, lf_scale)});
    for (int i = 0; i < n; ++i) err = std::max(err, rel_err(analytic.a_row(i), fd.a_row(i), lf_scale));
    worst = std::max(worst, err);
    if (!(err <= r.tolerance)) ++failures;

    // One pair: the aggregate collapses to the pair's own condition.
    const AgentPair p{0, 1};
    const auto single = assemble_constraint(states, VectorXd(VectorXd::Zero(n)), {p}, v, params);
    const PairReference ref = pair_reference(states[0], states[1], v, params);
    double pair_err = 0.0;
    for (auto [got, want] : {std::pair{single.h_tilde, ref.h}, {single.lf_h_tilde, ref.lf},
                             {single.lf2_h_tilde, ref.lf2}, {single.a_row(0), ref.a_first},
                             {single.a_row(1), ref.a_second}, {single.b, ref.b}}) {
      pair_err = std::max(pair_err, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    for (int i = 2; i < n; ++i) pair_err = std::max(pair_err, std::abs(single.a_row(i)));
    worst_pair = std::max(worst_pair, pair_err);
    if (!(pair_err <= 1e-9)) ++failures;
  }
  std::ostringstream extra;
  extra << "single-pair worst " << worst_pair << " (tolerance 1e-9)";
  return finish(r, worst, failures, extra.str());
}

SuiteReport lse_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"lse", samples, 0.0, 1e-12, false, {}};
  Rng rng(seed);
  double worst = 0.0;
  double worst_naive = 0.0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    const int m = rng.integer(1, 20);
    const double lambda = rng.uniform(1.0, 200.0);
    VectorXd h(m);
    std::vector<long double> hl;
    for (int k = 0; k < m; ++k) {
      h(k) = rng.uniform(-0.1, 5.0);
      hl.push_back(h(k));
    }
    const double agg = lse_aggregate(h, lambda);
    const double hmin = h.minCoeff();
    const double upper = agg - hmin;
    const double lower = (hmin - agg) - std::log(static_cast<double>(m)) / lambda;
    const double violation = std::max({0.0, upper, lower});
    worst = std::max(worst, violation);
    if (!(violation <= r.tolerance)) ++failures;

    const double naive = static_cast<double>(naive_lse(hl, lambda));
    if (std::isfinite(naive)) {
      const double e = std::abs(naive - agg) / std::max(1.0, std::abs(naive));
      worst_naive = std::max(worst_naive, e);
      if (!(e <= 1e-12)) ++failures;
    }
    const VectorXd w = softmin_weights(h, lambda);
    if (!(std::abs(w.sum() - 1.0) <= 1e-12) || (w.array() < 0.0).any()) ++failures;
  }
  std::ostringstream extra;
  extra << "vs direct long-double sum worst " << worst_naive;
  return finish(r, worst, failures, extra.str());
}

SuiteReport auction_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"auction", samples, 0.0, 1e-3, false, {}};
  Rng rng(seed);
  const AuctionOptions options;
  double worst = 0.0;
  double slowest = 0.0;
  int max_iterations = 0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    const int n = rng.integer(2, 3);
    const double k = rng.uniform(2.0, 8.0);
    const double gamma = rng.uniform(1.0, 8.0);
    std::vector<ValuationParams> vals;
    for (int i = 0; i < n; ++i) {
      ValuationParams p{rng.uniform(0.5, 2.0), gamma, k, rng.integer(0, 2)};
      vals.push_back(p);
    }
    double lo = vals[0].scale(), hi = lo;
    for (const auto& p : vals) {
      lo = std::min(lo, p.scale());
      hi = std::max(hi, p.scale());
    }
    if (hi / lo > 100.0) {
      --s;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    const AuctionOutcome out = run_auction(vals, options);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    max_iterations = std::max(max_iterations, out.iterations);

    const VectorXd ref = welfare_oracle(vals);
    double err = (out.credits - ref).cwiseAbs().maxCoeff();
    if (n == 2) err = std::max(err, std::abs(out.credits(0) - two_agent_share(vals[0], vals[1])));
    worst = std::max(worst, err);
    const double tol = std::max(options.grid_step, r.tolerance);
    if (!out.converged || out.iterations > options.max_rounds || !(err <= tol)) ++failures;
    if (out.credits.sum() > 1.0 + 1e-12 || (out.payments.array() < -1e-12).any()) ++failures;
  }
  std::ostringstream extra;
  extra << "max iterations " << max_iterations << ", slowest auction " << slowest << " s";
  return finish(r, worst, failures, extra.str());
}

SuiteReport mechanism_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"mechanism", samples, 0.0, 1e-6, false, {}};
  Rng rng(seed);
  double worst_alloc = 0.0;
  double worst_ic = 0.0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    // Allocation optimality and payment sign on arbitrary bids.
    const auto bids = random_bids(rng, rng.integer(1, 4));
    const VectorXd c = allocate(bids);
    double value = 0.0;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      value += bids[i].beta * c(e);
      if (c(e) < -1e-15 || c(e) > bids[i].demand + 1e-12) ++failures;
    }
    if (c.sum() > 1.0 + 1e-12) ++failures;
    const double gap = std::abs(best_allocation_value(bids) - value);
    worst_alloc = std::max(worst_alloc, gap);
    if (!(gap <= 1e-12)) ++failures;
    const VectorXd pay = vcg_payments(bids);
    if ((pay.array() < -1e-12).any()) ++failures;
    for (std::size_t i = 0; i < bids.size(); ++i) {
      if (bids.size() < 2 || c(static_cast<Eigen::Index>(i)) != 0.0) continue;
      std::vector<Bid> without = bids;
      without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
      const VectorXd c2 = allocate(without);
      for (std::size_t j = 0, q = 0; j < bids.size(); ++j) {
        if (j == i) continue;
        if (std::abs(c2(static_cast<Eigen::Index>(q++)) - c(static_cast<Eigen::Index>(j))) > 1e-12) ++failures;
      }
      if (std::abs(pay(static_cast<Eigen::Index>(i))) > 1e-12) ++failures;
    }

    // Truthful reply against opponents holding demands on a 0.01 lattice,
    // compared with a 5 x 10 grid of arbitrary (beta, d) deviations.
    const int opponents = rng.integer(1, 2);
    const ValuationParams self{rng.uniform(0.5, 2.0), 8.0, rng.uniform(2.0, 8.0), rng.integer(0, 1)};
    std::vector<Bid> others;
    for (int j = 0; j < opponents; ++j) {
      ValuationParams p{rng.uniform(0.5, 2.0), 8.0, self.k, rng.integer(0, 1)};
      others.push_back(truthful_bid(rng.integer(0, 100) / 100.0, p));
    }
    std::vector<Bid> profile = others;
    profile.push_back(best_response_against(others, self, 1e-4));
    const std::size_t me = profile.size() - 1;
    const double truthful = utility(profile, me, self);
    if (truthful < -1e-9) ++failures;
    const double top_price = marginal_valuation(0.0, self);
    for (int bi = 1; bi <= 5; ++bi) {
      for (int di = 1; di <= 10; ++di) {
        profile[me] = Bid{top_price * bi / 4.0 * rng.uniform(0.5, 1.0), di / 10.0};
        const double dev = utility(profile, me, self) - truthful;
        worst_ic = std::max(worst_ic, dev);
        if (dev > r.tolerance) ++failures;
      }
    }
    // Individual rationality at a fully truthful profile.
    std::vector<Bid> truthful_profile;
    std::vector<ValuationParams> vals;
    for (int j = 0, m = rng.integer(2, 4); j < m; ++j) {
      vals.push_back({rng.uniform(0.5, 2.0), 8.0, 5.0, rng.integer(0, 2)});
      truthful_profile.push_back(truthful_bid(rng.uniform(), vals.back()));
    }
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (utility(truthful_profile, j, vals[j]) < -1e-9) ++failures;
    }
  }
  std::ostringstream extra;
  extra << "allocation value gap worst " << worst_alloc << " (tolerance 1e-12)";
  return finish(r, std::max(worst_ic, 0.0), failures, extra.str());
}

SuiteReport qp_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"qp", samples, 0.0, 1e-6, false, {}};
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    const int n = rng.integer(1, 6);
    VectorXd nominal(n);
    RowVectorXd a(n);
    for (int i = 0; i < n; ++i) {
      nominal(i) = rng.uniform(-2.0, 2.0);
      a(i) = rng.uniform() < 0.1 ? 0.0 : rng.uniform(-2.0, 2.0);
    }
    if (a.norm() < 1e-3) a(0) = 1.0;
    const double b = rng.uniform(-3.0, 3.0);
    const VectorXd u = qp_baseline(nominal, a, b);
    const VectorXd ref = projection_oracle(nominal, a, b);
    const double err = (u - ref).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    if (!(err <= r.tolerance) || a.dot(u.transpose()) < b - 1e-9) ++failures;
  }
  return finish(r, worst, failures);
}

SuiteReport mapping_suite(int samples, std::uint64_t seed) {
  SuiteReport r{"mapping", samples, 0.0, 1e-12, false, {}};
  Rng rng(seed);
  double worst = 0.0;
  double worst_synth = 0.0;
  int failures = 0;
  for (int s = 0; s < samples; ++s) {
    const int n = rng.integer(1, 6);
    VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = -std::log(1.0 - rng.uniform());
    c *= rng.uniform(0.0, 1.0) / c.sum();
    if (rng.uniform() < 0.1) c(rng.integer(0, n - 1)) += 1.0 - c.sum();
    c = c.cwiseMax(0.0).cwiseMin(1.0);
    const double deficit = rng.uniform(0.0, 10.0);
    const VectorXd delta = credit_to_correction(c, deficit);
    const double err = std::abs(delta.sum() - deficit);
    worst = std::max(worst, err);
    if (!(err <= r.tolerance) || (delta.array() < 0.0).any()) ++failures;

    for (int i = 0; i < n; ++i) {
      const double a = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, rng.uniform(-3.0, 1.0));
      const double nominal = rng.uniform(-2.0, 2.0);
      const double u = synthesize_control(nominal, a, delta(i));
      const double e = std::abs(a * (u - nominal) - delta(i));
      worst_synth = std::max(worst_synth, e);
      if (!(e <= 1e-10)) ++failures;
    }
  }
  std::ostringstream extra;
  extra << "synthesis worst " << worst_synth << " (tolerance 1e-10)";
  return finish(r, worst, failures, extra.str());
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"lie", "lse", "auction", "mechanism", "qp", "mapping"};
  return names;
}

std::vector<SuiteReport> run_suites(const std::string& name, int samples, std::uint64_t seed) {
  if (samples <= 0) throw InvalidInput("verify: sample count must be positive");
  auto one = [&](const std::string& s) -> SuiteReport {
    if (s == "lie") return lie_suite(samples, seed);
    if (s == "lse") return lse_suite(samples, seed);
    if (s == "auction") return auction_suite(samples, seed);
    if (s == "mechanism") return mechanism_suite(samples, seed);
    if (s == "qp") return qp_suite(samples, seed);
    if (s == "mapping") return mapping_suite(samples, seed);
    throw InvalidInput("verify: unknown suite '" + s + "'");
  };
  std::vector<SuiteReport> out;
  if (name == "all") {
    for (const auto& s : suite_names()) out.push_back(one(s));
  } else {
    out.push_back(one(name));
  }
  return out;
}

}  // namespace avcredit::verify
