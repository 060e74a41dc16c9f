#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "rstar/error.hpp"
#include "rstar/family.hpp"

using namespace rstar;

namespace {

FamilyParams micro(int s) {
  FamilyParams p;
  p.rho = ratio(11, 20);
  p.eps = ratio(9, 100);
  p.M = 2;
  p.s = s;
  p.slack.level_offset = 2;
  p.slack.k1_factor = 0;
  p.slack.prime_factor = 0;
  p.slack.block_factor = ratio(3, 2);
  return p;
}

Rational mean_sum(const std::vector<PeriodicStepFn>& fs) {
  Rational a = 0;
  for (const auto& f : fs) a += f.mean_integral();
  return a;
}

Rational psi_sum(const Family& f) {
  Rational a = 0;
  for (const auto& [k, g] : f.psis) a += g.mean_integral();
  return a;
}

Index offset_end(const SupportHierarchy& h, const BlockRecord& b) {
  Index e = b.t * h.block(0);
  return e + (std::max(1, h.ring_of(e)) == b.j ? 1 : 0);
}

// (s-1)-family whose measure already exceeds eps = 1/20: spike 64 at 0, psi 1/2 on 1..21, period 256.
Family big_fixture() {
  Family f;
  f.params.M = 2;
  f.params.eps = ratio(1, 20);
  f.params.rho = ratio(3, 5);
  f.n = 1;
  f.period = 256;
  f.alpha = f.omega = 1;
  StepFnBuilder b(256);
  b.push(0, 1, Dyadic(64));
  f.phis.push_back(b.finish());
  StepFnBuilder c(256);
  c.push(1, 21, Dyadic(1, -1));
  f.psis.emplace(1, c.finish());
  return f;
}

}  // namespace

TEST_CASE("params text round trip and validation") {
  FamilyParams p = micro(2);
  FamilyParams q = FamilyParams::parse(p.str());
  CHECK(q.str() == p.str());
  CHECK(FamilyParams::parse("# defaults\n\neps = 0.05\n").eps == ratio(1, 20));
  CHECK_THROWS_AS(FamilyParams::parse("rho = 1/2\n"), Error);
  CHECK_THROWS_AS(FamilyParams::parse("eps = 1/10\n"), Error);
  CHECK_THROWS_AS(FamilyParams::parse("M = 1\n"), Error);
  CHECK_THROWS_AS(FamilyParams::parse("colour = 3\n"), Error);
  CHECK_THROWS_AS(FamilyParams::parse("alpha = x\n"), Error);
}

TEST_CASE("measure bound") {
  FamilyParams p;
  CHECK(measure_bound(p) == ratio(1, 20) * ratio(1, 4) / 2048);
  p.s = 1000000;
  CHECK(measure_bound(p) == p.eps);
}

TEST_CASE("make_check relations") {
  CHECK(make_check("a", "x", 1, "<", 2).pass);
  CHECK_FALSE(make_check("a", "x", 2, "<", 2).pass);
  CHECK(make_check("a", "x", 2, "<=", 2).pass);
  CHECK(make_check("a", "x", ratio(1, 3), "==", ratio(2, 6)).pass);
  CHECK(to_json_line(make_check("c", "r", ratio(1, 3), ">", 0)) ==
        R"({"check_id":"c","eq_ref":"r","lhs_num":"1","lhs_den":"3","relation":">","rhs_num":"0","rhs_den":"1","pass":true})");
}

TEST_CASE("default parameter resolution") {
  FamilyParams p;
  ResolvedParams r = resolve_parameters(p);
  CHECK(r.levels == std::vector<int>{0, 3, 14});
  CHECK(r.k_prime[2] - r.levels[1] == 10);
  CHECK(r.omega == 13);
  CHECK(r.n == 22);
  ResolvedParams again = resolve_parameters(p);
  CHECK(again.n == r.n);
  CHECK(again.primes.table() == r.primes.table());
  for (std::size_t j = 1; j < r.levels.size(); ++j) CHECK(r.levels[j - 1] < r.levels[j]);
}

TEST_CASE("level offset is honoured for larger M") {
  FamilyParams p = micro(1);
  p.M = 3;
  ResolvedParams r = resolve_parameters(p);
  for (int j = 2; j <= 3; ++j) CHECK(r.k_prime[static_cast<std::size_t>(j)] - r.levels[static_cast<std::size_t>(j - 1)] == 2);
  CHECK(r.levels[1] < r.levels[2]);
  CHECK(r.levels[2] < r.levels[3]);
}

TEST_CASE("s=1 default family: exact sandwiches") {
  Family f = construct_s1(FamilyParams{});
  CHECK(f.period == Index{1} << 36);
  CHECK(mean_sum(f.phis) == ratio(1, 4));
  Rational ps = psi_sum(f);
  CHECK(ps > ratio(3, 100));
  CHECK(ps < ratio(1, 20));
  for (std::size_t i = 0; i + 1 < f.phis.size(); ++i) CHECK(f.phis[i].is_zero());
  for (const auto& [k, g] : f.psis)
    if (k != 1 && k != 13) CHECK(g.is_zero());
}

TEST_CASE("s=1 micro family: per-block windows and supports") {
  FamilyParams p = micro(1);
  Family f = construct_s1(p);
  SupportHierarchy h = f.trace.hierarchy();
  REQUIRE(!f.trace.blocks.empty());
  CHECK(f.trace.blocks.size() == static_cast<std::size_t>(f.period / h.block(0)));
  for (const auto& b : f.trace.blocks) {
    int kp = f.trace.level_records[static_cast<std::size_t>(b.j - 1)].k_prime;
    Index lo = (b.t - 1) * h.block(0) + 1, hi = offset_end(h, b);
    Index direct = 0;
    for (Index x = lo; x < hi; ++x) direct += mod(x, b.prime) < b.r ? 1 : 0;
    CHECK(direct == b.count);
    Rational lower = (1 + p.rho) / 2 * p.eps * Rational(h.block(0)) / Rational(BigInt(1) << kp);
    Rational upper = p.eps * Rational(h.block(0)) / Rational(BigInt(1) << kp);
    CHECK(Rational(b.count) > lower);
    CHECK(Rational(b.count) < upper);
    // psi mass of the block equals count * 2^{k'}
    Rational mass = f.psis.at(kp).integral_over(lo, hi);
    CHECK(mass == Rational(b.count) * Rational(BigInt(1) << kp));
  }
  for (int j = 1; j <= p.M; ++j) {
    int kp = f.trace.level_records[static_cast<std::size_t>(j - 1)].k_prime;
    PeriodicSet a = j == 1 ? h.kept(1) : h.annulus(j);
    PeriodicSet supp = f.psis.at(kp).support();
    CHECK(subtract(supp, a).count() == 0);
  }
  for (const auto& [k, g] : f.psis)
    for (Index x = 0; x < f.period; x += 97) CHECK((g.eval(x).is_zero() || g.eval(x) == Dyadic::pow2(k)));
}

TEST_CASE("verification: pass, scaled psi fails low, identity pair fails") {
  Family f = construct_s1(micro(1));
  VerificationReport r = verify_family(f);
  CHECK(r.pass());
  CHECK(r.measure > r.bound);

  Family half = f;
  for (auto& [k, g] : half.psis) g = g.scaled(Dyadic(1, -1));
  VerificationReport rh = verify_family(half);
  CHECK_FALSE(rh.ineq3);
  CHECK(rh.psi_sum <= rh.psi_lo);
  CHECK_FALSE(rh.pass());
  CHECK(rh.json().find("\"pass\": false") != std::string::npos);

  Family id;
  id.params = micro(1);
  id.n = 1;
  id.period = 8;
  id.phis.push_back(PeriodicStepFn::constant(8, Dyadic(1, -2)));
  id.psis.emplace(1, PeriodicStepFn::constant(8, Dyadic(1, -2)));
  VerificationReport ri = verify_family(id);
  CHECK(ri.measure == 0);
  CHECK_FALSE(ri.ineq1);
}

TEST_CASE("strategies agree on the micro family") {
  Family f = construct_s1(micro(1));
  VerifyOptions one, three, smp;
  three.threads = 3;
  smp.strategy = Strategy::sampled;
  smp.samples = 400000;
  auto a = verify_family(f, one), b = verify_family(f, three), c = verify_family(f, smp);
  CHECK(a.json() == b.json());
  CHECK(std::abs(c.measure.get_d() - a.measure.get_d()) <= 4 * c.half_width);
}

TEST_CASE("rebasing") {
  Family f = construct_s1(micro(1));
  const Index p0 = f.period;
  Rational mu0 = verify_family(f).measure;

  Family same = rebase_family(f, p0);
  CHECK(same.trace.rebased_from == 0);
  for (std::size_t i = 0; i < f.phis.size(); ++i) CHECK(same.phis[i] == f.phis[i]);

  for (Index p_new : {8 * p0, 8 * p0 + 3, 11 * p0 + 5}) {
    Family g = rebase_family(f, p_new);
    Rational fac = Rational(BigInt(static_cast<long>((p_new / p0) * p0))) / Rational(BigInt(static_cast<long>(p_new)));
    for (std::size_t i = 0; i < f.phis.size(); ++i) CHECK(g.phis[i].mean_integral() == fac * f.phis[i].mean_integral());
    for (const auto& [k, h] : f.psis) CHECK(g.psis.at(k).mean_integral() == fac * h.mean_integral());
    VerificationReport r = verify_family(g);
    CHECK(r.pass());
    CHECK(r.measure >= mu0 * ratio((p_new / p0 - 2) * p0, p_new));
    CHECK(g.trace.rebased_from == p0);
  }
  CHECK_THROWS_AS(rebase_family(f, p0 / 2), Error);
}

TEST_CASE("s=2 micro family") {
  FamilyParams p = micro(2);
  Family f = construct(p);
  CHECK(f.period == Index{1} << 29);
  CHECK_FALSE(f.trace.early_exit);
  Rational ph = mean_sum(f.phis);
  CHECK(ph > ratio(1, 4));
  CHECK(ph < 1);
  for (const auto& c : f.trace.checks) {
    INFO(c.check_id);
    CHECK(c.pass);
  }
  CHECK(f.trace.subs.size() == 2);
  for (const auto& l : f.trace.level_records) CHECK(f.n > l.sub_n);
  // psi indices outside every level's range stay zero
  for (const auto& [k, g] : f.psis) {
    bool used = false;
    for (const auto& l : f.trace.level_records) used = used || (k >= l.alpha && k <= l.omega);
    if (!used) CHECK(g.is_zero());
  }
  VerificationReport r = verify_family(f);
  CHECK(r.pass());
}

TEST_CASE("s=2 early exit when the sub-family already beats eps") {
  FamilyParams p;
  p.s = 2;
  Family fx = big_fixture();
  fx.params = p;
  fx.params.s = 1;
  VerificationReport r1 = verify_family(fx);
  REQUIRE(r1.pass());
  REQUIRE(r1.measure == ratio(21, 256));
  int calls = 0;
  Family f = construct_step(p, [&](int) {
    ++calls;
    return fx;
  });
  CHECK(calls == 1);
  CHECK(f.trace.early_exit);
  CHECK(f.trace.levels == std::vector<int>{0, 1, 2});
  CHECK(f.n == 6);  // spike period 2^{n+M} must hold the 256-periodic sub-family
  CHECK(f.period == 256);
  CHECK(f.phis.back().mean_integral() == ratio(1, 4));
  VerificationReport r = verify_family(f);
  CHECK(r.pass());
  CHECK(r.measure >= ratio(21, 256));
}

TEST_CASE("infeasible scales are reported") {
  FamilyParams p;
  p.slack.max_log2_period = 30;
  try {
    resolve_parameters(p);
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible);
    CHECK(std::string(e.what()).find("block_factor") != std::string::npos);
  }
  p.slack.block_factor = 0;
  try {
    resolve_parameters(p);
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible);
    CHECK(std::string(e.what()).find("window") != std::string::npos);
  }
  try {
    construct(micro(3));
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible);
  }
}

TEST_CASE("save and load round trip") {
  Family f = construct(micro(2));
  auto dir = std::filesystem::temp_directory_path() / "rstar_family_roundtrip";
  save_family(f, dir.string());
  Family g = load_family(dir.string());
  CHECK(g.params.str() == f.params.str());
  CHECK(g.n == f.n);
  CHECK(g.period == f.period);
  CHECK(g.alpha == f.alpha);
  CHECK(g.omega == f.omega);
  REQUIRE(g.phis.size() == f.phis.size());
  for (std::size_t i = 0; i < f.phis.size(); ++i) CHECK(g.phis[i] == f.phis[i]);
  for (const auto& [k, h] : f.psis) CHECK(g.psis.at(k) == h);
  CHECK(trace_jsonl(g.trace) == trace_jsonl(f.trace));
  CHECK(g.trace.primes.table() == f.trace.primes.table());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_family(dir.string()), Error);
}
