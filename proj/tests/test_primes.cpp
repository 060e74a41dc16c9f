#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <sstream>

#include "rstar/primes.hpp"

using namespace rstar;

namespace {

std::vector<Index> sieve(Index limit) {
  std::vector<bool> comp(static_cast<std::size_t>(limit + 1), false);
  std::vector<Index> out;
  for (Index i = 2; i <= limit; ++i) {
    if (comp[static_cast<std::size_t>(i)]) continue;
    out.push_back(i);
    for (Index j = i * i; j <= limit; j += i) comp[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

}  // namespace

TEST_CASE("primality agrees with a sieve") {
  auto ps = sieve(200000);
  std::size_t i = 0;
  for (Index n = 0; n <= 200000; ++n) {
    bool expect = i < ps.size() && ps[i] == n;
    if (expect) ++i;
    CHECK(is_prime(static_cast<std::uint64_t>(n)) == expect);
  }
  CHECK(is_prime(18446744073709551557ULL));
  CHECK(!is_prime(3215031751ULL));  // strong pseudoprime to bases 2,3,5,7
}

TEST_CASE("assign example") {
  auto a = PrimeAssignment::assign(1, {1}, 8);
  CHECK(a.modulus() == 4);
  CHECK(a.prime(0, 1) == 11);
  CHECK(a.prime(1, 1) == 13);
  CHECK(a.prime(2, 1) == 17);
  CHECK(a.prime(3, 1) == 19);
  CHECK(a.max_prime() == 19);
  CHECK(a.prime(5, 1) == a.prime(1, 1));
  CHECK(a.prime(-1, 1) == 19);
  CHECK_THROWS(a.prime(0, 2));
  CHECK_THROWS(PrimeAssignment::assign(1, {1}, 2));
}

TEST_CASE("max_prime lookups") {
  CHECK(PrimeAssignment::assign(0, {1}, 3).max_prime() == 7);
  CHECK(PrimeAssignment::assign(1, {2, 3}, 100).max_prime() == 137);
  CHECK(PrimeAssignment::assign(2, {1}, 1000).max_prime() == 1049);
}

TEST_CASE("pairwise coprime, deterministic, odd and above threshold") {
  auto a = PrimeAssignment::assign(6, {1, 2}, 50);
  auto b = PrimeAssignment::assign(6, {2, 1}, 50);
  CHECK(a.table() == b.table());
  std::vector<Index> all;
  for (const auto& [k, p] : a.table()) {
    CHECK(p > 50);
    CHECK(p % 2 == 1);
    all.push_back(p);
  }
  CHECK(all.size() == 2 * 128);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) CHECK(std::gcd(all[i], all[j]) == 1);
  for (Index t = 0; t < 300; ++t) CHECK(a.prime(t, 2) == a.prime(t + a.modulus(), 2));
  std::stringstream ss;
  a.write(ss);
  CHECK(PrimeAssignment::read(ss, 6, 50).table() == a.table());
}
