#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "rstar/dyadic.hpp"

namespace rstar {

bool is_prime(std::uint64_t n);  // deterministic for 64-bit n
std::uint64_t next_prime_above(std::uint64_t n);

// Prime inner periods keyed by (level j, residue mod 2^{k_M+1}).
class PrimeAssignment {
public:
  PrimeAssignment() = default;
  // Assigns primes to residues 0..2^{k_M+1}-1 for every level in `levels`.
  static PrimeAssignment assign(int k_M, const std::vector<int>& levels, Index threshold);
  // Same, but only for the listed residues (those the construction actually uses).
  static PrimeAssignment assign_residues(int k_M, const std::vector<int>& levels, const std::vector<Index>& residues,
                                         Index threshold);

  Index modulus() const { return Index{1} << (k_M_ + 1); }
  int k_M() const { return k_M_; }
  Index threshold() const { return threshold_; }
  Index prime(Index t, int j) const;  // t reduced mod modulus
  Index max_prime() const;
  const std::map<std::pair<int, Index>, Index>& table() const { return table_; }

  void write(std::ostream& os) const;  // "j residue prime" lines
  static PrimeAssignment read(std::istream& is, int k_M, Index threshold);

private:
  int k_M_ = 0;
  Index threshold_ = 3;
  std::map<std::pair<int, Index>, Index> table_;
};

}  // namespace rstar
