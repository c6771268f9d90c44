#include <doctest.h>

#include <cmath>

#include "avcredit/auction.hpp"
#include "avcredit/verify.hpp"

using namespace avcredit;

TEST_CASE("valuation") {
  const ValuationParams p{1.0, 8.0, 5.0, 0};
  CHECK(valuation(0.0, p) == 0.0);
  CHECK(valuation(1.0, p) == doctest::Approx(0.993262).epsilon(1e-6));
  ValuationParams once = p;
  once.n = 1;
  CHECK(valuation(0.5, once) / valuation(0.5, p) == doctest::Approx(8.0));
  CHECK(marginal_valuation(0.3, p) == doctest::Approx(5.0 * std::exp(-1.5)));
  CHECK_THROWS_AS(valuation(1.1, p), InvalidInput);
  CHECK_THROWS_AS(valuation(-0.1, p), InvalidInput);
  CHECK_THROWS_AS(ValuationParams({1.0, 0.5, 5.0, 0}).validate(), InvalidInput);
}

TEST_CASE("allocation rule") {
  const VectorXd a = allocate({{2, 0.7}, {1, 0.7}});
  CHECK(a(0) == doctest::Approx(0.7));
  CHECK(a(1) == doctest::Approx(0.3));
  CHECK(allocate({{1, 1.0}})(0) == doctest::Approx(1.0));
  const VectorXd tie = allocate({{1, 0.8}, {1, 0.8}});
  CHECK(tie(0) == doctest::Approx(0.5));
  CHECK(tie(1) == doctest::Approx(0.5));
  const VectorXd short_supply = allocate({{1, 0.2}, {3, 0.3}});
  CHECK(short_supply.sum() == doctest::Approx(0.5));
}

TEST_CASE("allocation attains the best declared value") {
  verify::Rng rng(21);
  for (int s = 0; s < 1000; ++s) {
    std::vector<Bid> bids;
    const int n = rng.integer(1, 4);
    for (int i = 0; i < n; ++i) bids.push_back({rng.uniform(0, 2), rng.uniform()});
    const VectorXd c = allocate(bids);
    double value = 0.0;
    for (int i = 0; i < n; ++i) value += bids[i].beta * c(i);
    CHECK(std::abs(value - verify::best_allocation_value(bids)) <= 1e-12);
    CHECK(c.sum() <= 1.0 + 1e-12);
  }
}

TEST_CASE("allocation agrees with a 1e-3 grid enumeration for two and three bidders") {
  verify::Rng rng(22);
  for (int s = 0; s < 40; ++s) {
    const int n = rng.integer(2, 3);
    std::vector<Bid> bids;
    for (int i = 0; i < n; ++i) bids.push_back({rng.uniform(0, 2), rng.integer(0, 1000) / 1000.0});
    double best = 0.0;
    const int steps = 1000;
    for (int a = 0; a <= steps; ++a) {
      const double ca = a / 1000.0;
      if (ca > bids[0].demand) break;
      for (int b = 0; a + b <= steps; ++b) {
        const double cb = b / 1000.0;
        if (cb > bids[1].demand) break;
        double value = bids[0].beta * ca + bids[1].beta * cb;
        if (n == 3) value += bids[2].beta * std::min(bids[2].demand, (steps - a - b) / 1000.0);
        best = std::max(best, value);
      }
    }
    const VectorXd c = allocate(bids);
    double value = 0.0;
    for (int i = 0; i < n; ++i) value += bids[i].beta * c(i);
    CHECK(std::abs(value - best) <= 1e-9);
  }
}

TEST_CASE("VCG payments") {
  const std::vector<Bid> bids{{2, 0.7}, {1, 0.7}};
  CHECK(vcg_payment(bids, 0) == doctest::Approx(0.4));
  CHECK(vcg_payment(bids, 1) == doctest::Approx(0.0));
  CHECK(vcg_payment({{3, 1.0}}, 0) == 0.0);

  verify::Rng rng(23);
  for (int s = 0; s < 500; ++s) {
    std::vector<Bid> b;
    for (int i = 0, n = rng.integer(1, 5); i < n; ++i) b.push_back({rng.uniform(0, 2), rng.uniform()});
    CHECK((vcg_payments(b).array() >= -1e-12).all());
  }
}

TEST_CASE("best response") {
  const ValuationParams p{1.0, 8.0, 5.0, 0};
  SUBCASE("uncontested supply") {
    const Bid b = best_response_against({}, p, 1e-4);
    CHECK(b.demand == 1.0);
    CHECK(b.beta == doctest::Approx(marginal_valuation(1.0, p)));
  }
  SUBCASE("symmetric opponent at its equilibrium bid") {
    const Bid b = best_response_against({truthful_bid(0.5, p)}, p, 1e-4);
    CHECK(std::abs(b.demand - 0.5) <= 1e-4 + 1e-12);
  }
  SUBCASE("repeat encounter against a first-timer") {
    const ValuationParams self{1.0, 8.0, 5.0, 1};
    const double c1 = verify::two_agent_share(self, p);
    const Bid b = best_response_against({truthful_bid(1.0 - c1, p)}, self, 1e-4);
    CHECK(std::abs(b.demand - 0.7079) <= 1e-4 + 1e-4);
  }
  SUBCASE("best_response ignores the bidder's own entry") {
    std::vector<Bid> profile{{5.0, 1.0}, truthful_bid(0.5, p)};
    const Bid a = best_response(profile, 0, p, 1e-3);
    profile[0] = {0.0, 0.0};
    CHECK(best_response(profile, 0, p, 1e-3) == a);
  }
}

TEST_CASE("run_auction reproduces the published splits") {
  const ValuationParams fresh{1.0, 8.0, 5.0, 0};
  ValuationParams once = fresh, twice = fresh;
  once.n = 1;
  twice.n = 2;
  struct Case {
    ValuationParams first;
    double expected;
  };
  for (const Case& c : {Case{fresh, 0.5}, Case{once, 0.7079}, Case{twice, 0.9159}}) {
    const AuctionOutcome out = run_auction({c.first, fresh});
    CHECK(out.converged);
    CHECK(out.iterations <= 200);
    CHECK(std::abs(out.credits(0) - c.expected) <= 1e-3);
    CHECK(std::abs(out.credits(1) - (1 - c.expected)) <= 1e-3);
    CHECK(out.credits.sum() <= 1.0 + 1e-12);
    CHECK((out.payments.array() >= -1e-12).all());
  }
}

TEST_CASE("run_auction is deterministic and reports exhaustion") {
  const std::vector<ValuationParams> v{{1.0, 8.0, 5.0, 1}, {1.3, 8.0, 5.0, 0}, {0.7, 8.0, 5.0, 0}};
  const AuctionOutcome a = run_auction(v), b = run_auction(v);
  CHECK(a.credits == b.credits);
  CHECK(a.bids == b.bids);
  CHECK(a.iterations == b.iterations);

  AuctionOptions tight;
  tight.max_rounds = 1;
  const AuctionOutcome cut = run_auction(v, tight);
  CHECK_FALSE(cut.converged);
  CHECK(cut.iterations == 1);
  CHECK_THROWS_AS(run_auction({v[0]}), InvalidInput);
}

TEST_CASE("welfare oracle") {
  const ValuationParams fresh{1.0, 8.0, 5.0, 0};
  ValuationParams once = fresh, twice = fresh;
  once.n = 1;
  twice.n = 2;
  CHECK(welfare_oracle({once, fresh})(0) == doctest::Approx(0.707944).epsilon(1e-6));
  CHECK(welfare_oracle({twice, fresh})(0) == doctest::Approx(0.915888).epsilon(1e-6));
  const VectorXd even = welfare_oracle({fresh, fresh, fresh, fresh});
  for (int i = 0; i < 4; ++i) CHECK(even(i) == doctest::Approx(0.25));

  SUBCASE("bisection agrees with the closed form and equalises marginals") {
    verify::Rng rng(31);
    for (int s = 0; s < 200; ++s) {
      std::vector<ValuationParams> v;
      const int n = rng.integer(2, 4);
      for (int i = 0; i < n; ++i) v.push_back({rng.uniform(0.5, 2), 8.0, 5.0, rng.integer(0, 2)});
      const VectorXd c = welfare_oracle(v);
      CHECK(c.sum() == doctest::Approx(1.0));
      double interior = -1.0;
      for (int i = 0; i < n; ++i) {
        if (c(i) <= 1e-9 || c(i) >= 1 - 1e-9) continue;
        const double m = marginal_valuation(c(i), v[i]);
        if (interior < 0) interior = m;
        CHECK(m == doctest::Approx(interior).epsilon(1e-9));
      }
      if (n == 2) {
        // Perturb k slightly so the bisection path is exercised instead of the closed form.
        std::vector<ValuationParams> w = v;
        w[1].k = 5.0 + 1e-13;
        CHECK(std::abs(welfare_oracle(w)(0) - verify::two_agent_share(v[0], v[1])) <= 1e-9);
      }
    }
  }
}

TEST_CASE("run_auction converges to the welfare optimum") {
  verify::Rng rng(41);
  for (int s = 0; s < 15; ++s) {
    std::vector<ValuationParams> v;
    const int n = rng.integer(2, 3);
    const double k = rng.uniform(3, 7);
    for (int i = 0; i < n; ++i) v.push_back({rng.uniform(0.5, 2), 8.0, k, rng.integer(0, 1)});
    const AuctionOutcome out = run_auction(v);
    CHECK(out.converged);
    CHECK((out.credits - welfare_oracle(v)).cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("truthful utility is individually rational") {
  verify::Rng rng(51);
  for (int s = 0; s < 300; ++s) {
    std::vector<ValuationParams> v;
    std::vector<Bid> bids;
    for (int i = 0, n = rng.integer(2, 4); i < n; ++i) {
      v.push_back({rng.uniform(0.5, 2), 8.0, 5.0, rng.integer(0, 2)});
      bids.push_back(truthful_bid(rng.uniform(), v.back()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(utility(bids, i, v[i]) >= -1e-9);
  }
}
