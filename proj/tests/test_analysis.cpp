#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "rstar/analysis.hpp"
#include "rstar/error.hpp"

using namespace rstar;

namespace {

PeriodicSet residues(Index period, Index pi, Index a, Index r, Index lo, Index hi) {
  std::vector<Interval> iv;
  for (Index c = lo / pi - 1; c * pi < hi; ++c) {
    Index s = std::max(lo, c * pi + a), e = std::min(hi, c * pi + a + r);
    if (s < e) iv.push_back({s, e - s});
  }
  return PeriodicSet::from_intervals(period, iv);
}

FamilyParams micro(int s, int M = 2) {
  FamilyParams p;
  p.rho = ratio(11, 20);
  p.eps = ratio(9, 100);
  p.M = M;
  p.s = s;
  p.slack.level_offset = 2;
  p.slack.k1_factor = 0;
  p.slack.prime_factor = 0;
  p.slack.block_factor = ratio(3, 2);
  return p;
}

const CheckRecord* find(const std::vector<CheckRecord>& v, const std::string& prefix) {
  for (const auto& c : v)
    if (c.check_id.rfind(prefix, 0) == 0) return &c;
  return nullptr;
}

// Direct transcription of the s=1 definitions: total size of the union of X_{t0} over qualifying t0 at level j.
Index brute_new_points(const Family& f, int j) {
  SupportHierarchy h = f.trace.hierarchy();
  const int n = h.n(), M = f.params.M;
  const Index B0 = h.block(0), Bm = h.block(j - 1), Bj = h.block(j), p = f.period;
  const int kp = f.trace.level_records[static_cast<std::size_t>(j - 1)].k_prime;
  const auto& psi = f.psis.at(kp);
  const auto& spike = f.phis.back();
  Index total = 0;
  for (Index t0 = 0; t0 < p / B0; ++t0) {
    Index x0 = t0 * B0;
    bool ok = true;
    for (Index x : {x0, x0 + B0 - 1}) {
      ok = ok && h.ring_of(x) == j && (x / Bm) % 2 == 0 && mod(x, Bm) >= Bm / 2 && mod(x, Bm) < 3 * Bm / 4;
      if (j < M) ok = ok && (x / Bj) == ((x + 2 * (B0 << kp) + B0 - 1) / Bj);
    }
    if (!ok) continue;
    std::vector<Index> T1;
    for (Index b = (x0 + (B0 << (kp - 1))) / B0; b < (x0 + (B0 << kp)) / B0; ++b) {
      Index y = b * B0, q = y / Bm;
      bool quarter = mod(y, Bm) >= Bm / 2 && mod(y, Bm) < 3 * Bm / 4;
      bool inside = q * Bm + Bm / 2 >= x0 + (B0 << (kp - 1)) && q * Bm + 3 * Bm / 4 <= x0 + (B0 << kp);
      if (quarter && inside && h.in_level(y, j - 1) && spike.eval(y) == Dyadic::pow2(n)) T1.push_back(b);
    }
    for (Index x = x0; x < x0 + B0; ++x) {
      bool hit = false;
      for (Index t1 : T1) hit = hit || !psi.eval(2 * t1 * B0 - x).is_zero();
      total += hit;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("independence: evens and multiples of three") {
  const int n = 12;
  const Index P = 6 << n;
  IndependenceInstance in;
  in.n = n;
  in.t = 0;
  in.X1 = residues(P, 2, 0, 1, 0, P);
  in.X2 = residues(P, 3, 0, 1, 0, P);
  in.pi1 = 2;
  in.pi2 = 3;
  IndependenceReport r = check_independence(in);
  CHECK(r.lhs == 683);  // multiples of 6 below 4096
  CHECK(r.rhs == Rational(2 * 2048 * 1366) / 4096);
  CHECK(r.pass);
  CHECK_FALSE(r.degenerate);
  CHECK(r.L1 == ratio(1, 2));
  CHECK(r.L2 == ratio(1, 3));
  REQUIRE(r.lhs_crt);
  CHECK(*r.lhs_crt == r.lhs);
}

TEST_CASE("independence: degenerate and invalid inputs") {
  IndependenceInstance in;
  in.n = 8;
  in.X1 = PeriodicSet(256);
  in.X2 = residues(256, 3, 0, 1, 0, 256);
  in.pi1 = 2;
  in.pi2 = 3;
  // an empty set has no aligned-period density problem: its density is 0
  IndependenceReport r = check_independence(in);
  CHECK(r.lhs == 0);
  CHECK(r.rhs == 0);
  CHECK_FALSE(r.pass);
  CHECK(r.degenerate);

  in.X1 = residues(256, 4, 0, 1, 0, 256);
  in.pi1 = 4;
  in.pi2 = 6;
  in.X2 = residues(256, 6, 0, 1, 0, 256);
  try {
    check_independence(in);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
}

TEST_CASE("density profile") {
  PeriodicSet a = residues(1 << 12, 5, 1, 2, 0, 1 << 12);
  CHECK(density_profile(a, 5, 0, 1 << 12) == ratio(2, 5));
  CHECK(density_profile(a, 5, 7, 1000) == ratio(2, 5));
  PeriodicSet b = residues(1 << 12, 7, 0, 3, 0, 1 << 12);
  CHECK(density_profile(b, 7, 0, 1 << 12) == ratio(3, 7));
  // a break in the pattern is a hypothesis violation
  PeriodicSet c = unite(a, PeriodicSet::from_intervals(1 << 12, {{503, 1}}));
  CHECK_THROWS_AS(density_profile(c, 5, 0, 1 << 12), Error);
  CHECK(density_profile(c, 5, 0, 500) == ratio(2, 5));
  CHECK_THROWS_AS(density_profile(a, 5, 1, 4), Error);
}

TEST_CASE("independence property: coprime periods, large blocks") {
  std::mt19937_64 rng(20240601);
  int passes = 0, trials = 1000;
  for (int i = 0; i < trials; ++i) {
    Index p1, p2;
    do {
      p1 = 2 + static_cast<Index>(rng() % 63);
      p2 = 2 + static_cast<Index>(rng() % 63);
    } while (std::gcd(p1, p2) != 1);
    int n = 0;
    while ((Index{1} << n) < 1024 * p1 * p2) ++n;
    const Index t = static_cast<Index>(rng() % 3), lo = t << n, hi = (t + 1) << n, P = (t + 2) << n;
    Index th1 = static_cast<Index>(rng() % 50), th2 = static_cast<Index>(rng() % 50);
    Index r1 = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(p1 - 1));
    Index r2 = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(p2 - 1));
    Index a1 = static_cast<Index>(rng() % static_cast<std::uint64_t>(p1));
    Index a2 = static_cast<Index>(rng() % static_cast<std::uint64_t>(p2));
    IndependenceInstance in;
    in.n = n;
    in.t = t;
    in.pi1 = p1;
    in.pi2 = p2;
    in.theta1 = th1;
    in.theta2 = th2;
    // periodic inside the margins, arbitrary (here: full) within them
    in.X1 = unite(residues(P, p1, a1, r1, lo + th1, hi - th2), PeriodicSet::from_intervals(P, {{lo, th1}}));
    in.X2 = unite(residues(P, p2, a2, r2, lo + th1, hi - th2), PeriodicSet::from_intervals(P, {{hi - th2, th2}}));
    IndependenceReport r = check_independence(in);
    REQUIRE(r.lhs_crt);
    CHECK(*r.lhs_crt == r.lhs);
    CHECK(r.L1 == ratio(r1, p1));
    CHECK(r.L2 == ratio(r2, p2));
    passes += r.pass;
  }
  CHECK(passes == trials);
}

TEST_CASE("audit: s=1 micro family passes every record") {
  Family f = construct(micro(1));
  auto recs = audit_trace(f);
  CHECK(recs.size() > 8);
  for (const auto& c : recs) {
    INFO(c.check_id);
    CHECK(c.pass);
  }
  const CheckRecord* rc = find(recs, "j=2 recount of new points");
  REQUIRE(rc);
  CHECK(rc->lhs == brute_new_points(f, 2));
}

TEST_CASE("audit: M=3 micro family") {
  Family f = construct(micro(1, 3));
  auto recs = audit_trace(f);
  for (const char* id : {"j=2 T_1 count", "j=3 T_1 count", "j=2 T* count", "j=3 T* count", "X-bar disjointness",
                         "j=2 union lower bound", "j=3 union lower bound", "X-bar total"}) {
    const CheckRecord* c = find(recs, id);
    REQUIRE_MESSAGE(c, id);
    CHECK_MESSAGE(c->pass, id);
  }
  CHECK(find(recs, "j=3 T_1 count")->lhs == 16);  // (1/2)^3 2^{10-3}
  for (int j : {2, 3}) {
    const CheckRecord* rc = find(recs, "j=" + std::to_string(j) + " recount of new points");
    REQUIRE(rc);
    CHECK(rc->lhs == brute_new_points(f, j));
  }
}

TEST_CASE("audit: s=2 micro family and thread invariance") {
  Family f = construct(micro(2));
  AuditOptions one, three;
  three.threads = 3;
  auto a = audit_trace(f, one), b = audit_trace(f, three);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO(a[i].check_id);
    CHECK(to_json_line(a[i]) == to_json_line(b[i]));
    CHECK(a[i].pass);
  }
  for (const char* id : {"j=2 X'_{t0,k'} disjointness", "j=2 new points avoid old points", "X-bar/old disjointness"})
    CHECK_MESSAGE(find(a, id), id);
}

TEST_CASE("audit refuses families without a usable trace") {
  Family f = construct(micro(1));
  Family bare = f;
  bare.trace = {};
  CHECK_THROWS_AS(audit_trace(bare), Error);
  CHECK_THROWS_AS(audit_trace(rebase_family(f, 8 * f.period)), Error);
}

TEST_CASE("independence campaign is seeded and passes at large block sizes") {
  CampaignOptions o;
  o.seed = 99;
  o.trials = 100;
  CampaignSummary a = independence_campaign(o), b = independence_campaign(o);
  CHECK(a.json() == b.json());
  CHECK(a.trials == 100);
  CHECK(a.pass());
  CHECK(a.crt_checked == 100);
  CHECK(a.max_ratio < 1);
  CHECK(a.json().find("\"seed\":99") != std::string::npos);
  o.seed = 100;
  o.trials = 20;
  CHECK(independence_campaign(o).json() != a.json());
}
