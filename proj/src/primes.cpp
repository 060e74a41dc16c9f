#include "rstar/primes.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "rstar/error.hpp"
#include "rstar/stepfn.hpp"

namespace rstar {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These bases are deterministic for all n < 2^64.
  for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

u64 next_prime_above(u64 n) {
  u64 c = n + 1;
  while (!is_prime(c)) ++c;
  return c;
}

PrimeAssignment PrimeAssignment::assign(int k_M, const std::vector<int>& levels, Index threshold) {
  std::vector<Index> all(static_cast<std::size_t>(Index{1} << (k_M + 1)));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return assign_residues(k_M, levels, all, threshold);
}

PrimeAssignment PrimeAssignment::assign_residues(int k_M, const std::vector<int>& levels,
                                                 const std::vector<Index>& residues, Index threshold) {
  require(threshold >= 3, "prime threshold must be at least 3");
  require(k_M >= 0 && k_M < 40, "prime table modulus out of range");
  PrimeAssignment a;
  a.k_M_ = k_M;
  a.threshold_ = threshold;
  std::vector<int> js = levels;
  std::sort(js.begin(), js.end());
  std::vector<Index> rs = residues;
  for (auto& r : rs) r = mod(r, a.modulus());
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  u64 p = static_cast<u64>(threshold);
  for (int j : js)
    for (Index r : rs) {
      p = next_prime_above(p);
      a.table_[{j, r}] = static_cast<Index>(p);
    }
  return a;
}

Index PrimeAssignment::prime(Index t, int j) const {
  auto it = table_.find({j, mod(t, modulus())});
  if (it == table_.end()) fail("no prime assigned for level " + std::to_string(j) + ", residue " + std::to_string(t));
  return it->second;
}

Index PrimeAssignment::max_prime() const {
  Index m = 0;
  for (const auto& [k, v] : table_) m = std::max(m, v);
  return m;
}

void PrimeAssignment::write(std::ostream& os) const {
  for (const auto& [k, v] : table_) os << k.first << ' ' << k.second << ' ' << v << '\n';
}

PrimeAssignment PrimeAssignment::read(std::istream& is, int k_M, Index threshold) {
  PrimeAssignment a;
  a.k_M_ = k_M;
  a.threshold_ = threshold;
  int j;
  Index r, p;
  while (is >> j >> r >> p) a.table_[{j, r}] = p;
  return a;
}

}  // namespace rstar
