#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "rstar/stepfn.hpp"

using namespace rstar;

namespace {

// Dense oracle: values as rationals on [0,p).
std::vector<Rational> dense(const PeriodicStepFn& f) {
  std::vector<Rational> v(static_cast<std::size_t>(f.period()));
  for (std::size_t i = 0; i < f.run_count(); ++i) {
    Run r = f.run(i);
    for (Index x = r.start; x < r.start + r.length; ++x) v[static_cast<std::size_t>(x)] = f.value(r.id).to_rational();
  }
  return v;
}

std::vector<bool> dense(const PeriodicSet& s) {
  std::vector<bool> v(static_cast<std::size_t>(s.period()), false);
  for (const auto& i : s.intervals())
    for (Index x = i.start; x < i.end(); ++x) v[static_cast<std::size_t>(x)] = true;
  return v;
}

PeriodicStepFn random_fn(std::mt19937_64& rng, Index p, int values = 4) {
  StepFnBuilder b(p);
  Index x = 0;
  while (x < p) {
    Index len = std::min<Index>(p - x, 1 + static_cast<Index>(rng() % 7));
    int e = static_cast<int>(rng() % 5) - 2;
    long m = static_cast<long>(rng() % static_cast<unsigned>(values));
    b.push(x, len, Dyadic(BigInt(m), e));
    x += len;
  }
  return b.finish();
}

PeriodicSet random_set(std::mt19937_64& rng, Index p) {
  std::vector<Interval> iv;
  int n = static_cast<int>(rng() % 6);
  for (int i = 0; i < n; ++i) iv.push_back({static_cast<Index>(rng() % static_cast<std::uint64_t>(p)), 1 + static_cast<Index>(rng() % 9)});
  return PeriodicSet::from_intervals(p, iv);
}

}  // namespace

TEST_CASE("dyadic canonical form and arithmetic") {
  Dyadic a(BigInt(12), 0);
  CHECK(a.mantissa() == 3);
  CHECK(a.exponent() == 2);
  CHECK(Dyadic(0).exponent() == 0);
  CHECK((Dyadic::pow2(-3) + Dyadic::pow2(-3)) == Dyadic::pow2(-2));
  CHECK((Dyadic(3) * Dyadic::pow2(-1)).to_rational() == ratio(3, 2));
  CHECK(max(Dyadic(3), Dyadic::pow2(2)) == Dyadic(4));
  CHECK(to_dyadic(ratio(5, 8)) == Dyadic(BigInt(5), -3));
  CHECK_THROWS(to_dyadic(ratio(1, 3)));
  CHECK(parse_rational("3/5") == ratio(3, 5));
  CHECK(parse_rational("0.05") == ratio(1, 20));
}

TEST_CASE("eval examples") {
  CHECK(PeriodicStepFn(5).eval(17).is_zero());
  StepFnBuilder b(8);
  b.push(0, 1, Dyadic::pow2(4));
  PeriodicStepFn f = b.finish();
  CHECK(f.eval(8) == Dyadic(16));
  StepFnBuilder c(12);
  c.push(0, 3, Dyadic(4));
  PeriodicStepFn g = c.finish();
  CHECK(g.run_count() == 2);
  CHECK(g.eval(-10) == Dyadic(4));
  CHECK(g.eval(-9).is_zero());
}

TEST_CASE("mean_integral examples") {
  StepFnBuilder c(12);
  c.push(0, 3, Dyadic(4));
  CHECK(c.finish().mean_integral() == 1);
  CHECK(PeriodicStepFn(12).mean_integral() == 0);
}

TEST_CASE("tile_truncate examples") {
  std::mt19937_64 rng(1);
  PeriodicStepFn f = random_fn(rng, 8);
  CHECK(tile_truncate(f, 32).mean_integral() == f.mean_integral());
  CHECK(tile_truncate(f, 20).mean_integral() == f.mean_integral() * ratio(16, 20));
  CHECK(tile_truncate(PeriodicStepFn(8), 20).mean_integral() == 0);
  CHECK_THROWS(tile_truncate(f, 7));
  // direct summation oracle
  auto d = dense(tile_truncate(f, 20));
  Rational s = 0;
  for (auto& v : d) s += v;
  CHECK(s / 20 == f.mean_integral() * ratio(16, 20));
}

TEST_CASE("set_ops examples") {
  PeriodicSet evens = PeriodicSet::from_intervals(2, {{0, 1}});
  PeriodicSet threes = PeriodicSet::from_intervals(3, {{0, 1}});
  auto [a, b] = align(evens, threes);
  CHECK(a.period() == 6);
  PeriodicSet i12 = intersect(evens.retile(12), threes.retile(12));
  CHECK(i12.measure() == ratio(2, 12));
  CHECK(i12.contains(0));
  CHECK(i12.contains(6));
  CHECK(intersect(evens.retile(12), evens.retile(12)) == evens.retile(12));
  PeriodicSet s = PeriodicSet::from_intervals(10, {{3, 4}});
  CHECK(s.shift(10) == s);
  CHECK_THROWS(intersect(evens, threes));
  CHECK_THROWS(align(PeriodicSet(Index{1} << 30), PeriodicSet((Index{1} << 30) - 1), 40));
}

TEST_CASE("periodicity and evaluation invariants") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    Index p = 1 + static_cast<Index>(rng() % 60);
    PeriodicStepFn f = random_fn(rng, p);
    auto d = dense(f);
    for (int i = 0; i < 50; ++i) {
      Index x = static_cast<Index>(rng() % 100000) - 50000;
      CHECK(f.eval(x) == f.eval(x + p));
      CHECK(f.eval(x).to_rational() == d[static_cast<std::size_t>(mod(x, p))]);
    }
  }
}

TEST_CASE("mean_integral is linear and integral_over matches dense sums") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    Index p = 1 + static_cast<Index>(rng() % 40);
    PeriodicStepFn f = random_fn(rng, p), g = random_fn(rng, p);
    CHECK(add(f, g).mean_integral() == f.mean_integral() + g.mean_integral());
    auto d = dense(f);
    Index lo = static_cast<Index>(rng() % 200) - 100;
    Index hi = lo + static_cast<Index>(rng() % 150);
    Rational s = 0;
    for (Index x = lo; x < hi; ++x) s += d[static_cast<std::size_t>(mod(x, p))];
    CHECK(f.integral_over(lo, hi) == s);
    PeriodicSet a = random_set(rng, p);
    Rational t = 0;
    auto m = dense(a);
    for (Index x = 0; x < p; ++x)
      if (m[static_cast<std::size_t>(x)]) t += d[static_cast<std::size_t>(x)];
    CHECK(f.integral_on(a) == t);
    CHECK(f.restricted(a).integral() == t);
  }
}

TEST_CASE("tile_truncate sandwich") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    Index p = 1 + static_cast<Index>(rng() % 30);
    Index pn = p + static_cast<Index>(rng() % 200);
    PeriodicStepFn f = random_fn(rng, p, 3);
    Rational m = f.mean_integral(), mt = tile_truncate(f, pn).mean_integral();
    CHECK((1 - ratio(p, pn)) * m <= mt);
    CHECK(mt <= m);
    Rational expect = ratio((pn / p) * p, pn) * m;
    CHECK(mt == expect);
  }
}

TEST_CASE("set algebra: inclusion-exclusion and canonical form") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    Index p = 1 + static_cast<Index>(rng() % 50);
    PeriodicSet a = random_set(rng, p), b = random_set(rng, p);
    CHECK(intersect(a, b).measure() + unite(a, b).measure() == a.measure() + b.measure());
    CHECK(PeriodicSet::from_intervals(p, a.intervals()) == a);
    CHECK(unite(subtract(a, b), intersect(a, b)) == a);
    auto da = dense(a), db = dense(b), di = dense(intersect(a, b));
    for (Index x = 0; x < p; ++x) CHECK(di[static_cast<std::size_t>(x)] == (da[static_cast<std::size_t>(x)] && db[static_cast<std::size_t>(x)]));
    for (std::size_t i = 1; i < a.intervals().size(); ++i) CHECK(a.intervals()[i].start > a.intervals()[i - 1].end());
    Index d = static_cast<Index>(rng() % 100) - 50;
    auto ds = dense(a.shift(d));
    for (Index x = 0; x < p; ++x) CHECK(ds[static_cast<std::size_t>(mod(x + d, p))] == da[static_cast<std::size_t>(x)]);
    Index lo = static_cast<Index>(rng() % 100) - 50, hi = lo + static_cast<Index>(rng() % 120);
    Index c = 0;
    for (Index x = lo; x < hi; ++x) c += da[static_cast<std::size_t>(mod(x, p))];
    CHECK(a.count_in(lo, hi) == c);
    CHECK(a.complement().count() == p - a.count());
  }
}

TEST_CASE("text round trip is bit exact") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    Index p = 1 + static_cast<Index>(rng() % 100);
    PeriodicStepFn f = random_fn(rng, p);
    std::stringstream ss;
    write_fn(ss, f);
    std::string first = ss.str();
    PeriodicStepFn g = read_fn(ss);
    CHECK(g == f);
    std::stringstream again;
    write_fn(again, g);
    CHECK(again.str() == first);
    PeriodicSet s = random_set(rng, p);
    std::stringstream st;
    write_set(st, s);
    CHECK(read_set(st) == s);
  }
}
