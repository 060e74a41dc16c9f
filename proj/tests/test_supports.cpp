#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rstar/supports.hpp"

using namespace rstar;

namespace {

Rational pow_half(int e) { return ratio(1, 1) / Rational(BigInt(1) << e); }

// Independent membership oracle: walk down from level M by block parity.
bool oracle_in_level(const SupportHierarchy& h, Index x, int j) {
  for (int i = h.M() - 1; i >= j; --i) {
    Index B = Index{1} << (h.n() + h.k(i));
    if (((x / B) & 1) == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("measure identities for M=2") {
  SupportHierarchy h(4, {0, 2, 4});
  CHECK(h.kept(1).measure() == ratio(1, 2));
  CHECK(h.kept(0).measure() == ratio(1, 4));
  CHECK(h.kept(2).measure() == 1);
  for (int j = 1; j <= h.M(); ++j) CHECK(h.kept(j).measure() - h.kept(j - 1).measure() == h.kept(j - 1).measure());
}

TEST_CASE("spike function") {
  SupportHierarchy h(4, {0, 2, 4});
  PeriodicStepFn phi = spike_function(h);
  CHECK(phi.period() == 256);
  CHECK(phi.mean_integral() == ratio(1, 4));
  CHECK(phi.support().count() == 4);
  CHECK(phi.support().measure() == ratio(1, 64));
  PeriodicSet spt = phi.support();
  for (const auto& iv : spt.intervals()) {
    CHECK(iv.length == 1);
    CHECK((iv.start >> 4) % 2 == 1);  // left endpoint index odd
    CHECK(h.kept(0).contains(iv.start));
  }
  CHECK_THROWS(SupportHierarchy(4, {0}));
  CHECK_THROWS(SupportHierarchy(4, {0, 3, 2}));
  CHECK_THROWS(SupportHierarchy(4, {1, 3}));
  CHECK_THROWS(SupportHierarchy(30, {0, 5, 12}, 40));
}

TEST_CASE("annulus") {
  SupportHierarchy h(3, {0, 2, 5});
  CHECK(h.annulus(2).measure() == ratio(1, 2));
  CHECK(h.annulus(1).measure() == ratio(1, 4));
  CHECK(intersect(h.annulus(1), h.annulus(2)).empty());
  CHECK_THROWS(h.annulus(0));
  CHECK_THROWS(h.annulus(3));
}

TEST_CASE("component_of") {
  SupportHierarchy h(4, {0, 2, 4});
  // level-1 blocks have length 64; kept ones have odd index
  Interval c = h.component_of(70, 1);
  CHECK(c.start == 64);
  CHECK(c.length == 64);
  c = h.component_of(255, 1);
  CHECK(c.start == 192);
  c = h.component_of(16 + 64, 0);  // level-0 blocks of 16, index 5 inside kept level-1 block
  CHECK(c.start == 80);
  CHECK_THROWS(h.component_of(3, 1));
  CHECK(h.component_of(3, 2).start == 0);
}

TEST_CASE("half-quarter sets and the shift claim") {
  SupportHierarchy h(2, {0, 2, 4});
  for (int j = 1; j <= 2; ++j) {
    PeriodicSet e = h.half_quarter_set(j, true), o = h.half_quarter_set(j, false);
    CHECK(e.measure() + o.measure() == ratio(1, 4));
    CHECK(intersect(e, o).empty());
    Index B = h.block(j - 1);
    for (Index x = 0; x < 2 * h.period(); ++x) {
      if (!e.contains(x)) continue;
      for (Index y = x + 1; y < 3 * h.period(); ++y) {
        if (!o.contains(y)) continue;
        Index l = y - x, z = x + 2 * l;
        CHECK(((z / B) % 2) == 0);
      }
    }
  }
}

TEST_CASE("exact identities over many hierarchies") {
  int checked = 0;
  for (int M = 2; M <= 4; ++M) {
    std::vector<int> k(static_cast<std::size_t>(M + 1), 0);
    // all strictly increasing level sequences with k_M <= 9
    std::function<void(int)> rec = [&](int j) {
      if (j > M) {
        for (int n = 0; n + k.back() <= 24; n += 3) {
          SupportHierarchy h(n, k);
          for (int i = 0; i <= M; ++i) CHECK(h.kept(i).measure() == pow_half(M - i));
          CHECK(spike_function(h).mean_integral() == pow_half(M));
          ++checked;
        }
        return;
      }
      for (int v = k[static_cast<std::size_t>(j - 1)] + 1; v <= 9; ++v) {
        k[static_cast<std::size_t>(j)] = v;
        rec(j + 1);
      }
    };
    rec(1);
  }
  CHECK(checked > 1000);
}

TEST_CASE("membership matches the parity oracle") {
  SupportHierarchy h(2, {0, 1, 3, 6});
  for (int j = 0; j <= h.M(); ++j)
    for (Index x = 0; x < h.period(); ++x) CHECK(h.kept(j).contains(x) == oracle_in_level(h, x, j));
  for (int j = 1; j <= h.M(); ++j) CHECK(subtract(h.kept(j - 1), h.kept(j)).empty());
}

TEST_CASE("margin ratio exceeds one half at the searched gap and is independent of n") {
  std::vector<int> k = {0, 3, 16, 30};
  // level 2 with k' = 13: ratio from direct point scan at two n values
  for (int n : {0, 1}) {
    SupportHierarchy h(n, {0, 3, 16, 17});
    PeriodicSet ann = h.annulus(2);
    Index good = 0, total = 0;
    Index unit = Index{1} << n;
    for (Index t = 0; t * unit < h.period(); ++t) {
      Index a = t * unit;
      if (!ann.contains(a)) continue;
      ++total;
      Index last = a + unit - 1;
      Interval comp = h.component_of(a, 2);
      if (last + (Index{1} << (n + 14)) + unit <= comp.end()) ++good;
    }
    Rational direct(BigInt(static_cast<long>(good)), BigInt(static_cast<long>(total)));
    direct.canonicalize();
    CHECK(margin_ratio(3, {0, 3, 16, 17}, 2, 13, 0) == direct);
  }
  CHECK(margin_ratio(3, {0, 3, 16, 17}, 2, 13, 0) > ratio(1, 2));
  CHECK(margin_ratio(3, {0, 3, 14, 17}, 2, 13, 0) < ratio(1, 2));
  CHECK(margin_ratio(2, {0, 3, 14}, 2, 13, 0) == 1);
}
