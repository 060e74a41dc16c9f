#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rstar/dyadic.hpp"

namespace rstar {

inline constexpr int kDefaultLog2Cap = 40;

// Floor modulus for possibly negative x.
inline Index mod(Index x, Index p) {
  Index r = x % p;
  return r < 0 ? r + p : r;
}

Index lcm_capped(Index a, Index b, int log2_cap = kDefaultLog2Cap);

struct Interval {
  Index start;
  Index length;
  Index end() const { return start + length; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Union of integer intervals in [0,p), p-periodic. Canonical: sorted, disjoint, non-adjacent.
class PeriodicSet {
public:
  explicit PeriodicSet(Index period = 1);
  // Intervals may be unsorted, overlapping, negative or longer than p; they are reduced mod p.
  static PeriodicSet from_intervals(Index period, std::vector<Interval> iv);
  // Input must already be sorted by start with all intervals inside [0,p); overlaps merged.
  static PeriodicSet from_sorted(Index period, std::vector<Interval> iv);
  static PeriodicSet full(Index period);

  Index period() const { return period_; }
  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }
  Index count() const;
  Rational measure() const;
  bool contains(Index x) const;
  // Number of points of the (periodically extended) set in the lifted range [lo, hi).
  Index count_in(Index lo, Index hi) const;

  PeriodicSet complement() const;
  PeriodicSet shift(Index d) const;
  PeriodicSet retile(Index new_period) const;

  friend bool operator==(const PeriodicSet& a, const PeriodicSet& b) {
    return a.period_ == b.period_ && a.iv_ == b.iv_;
  }

private:
  void index();
  Index prefix(Index r) const;  // points in [0, r), 0 <= r <= p
  Index period_;
  std::vector<Interval> iv_;
  std::vector<Index> cum_;
};

PeriodicSet intersect(const PeriodicSet& a, const PeriodicSet& b);
PeriodicSet unite(const PeriodicSet& a, const PeriodicSet& b);
PeriodicSet subtract(const PeriodicSet& a, const PeriodicSet& b);
// Retile both operands to lcm(periods) (guarded by the cap).
std::pair<PeriodicSet, PeriodicSet> align(const PeriodicSet& a, const PeriodicSet& b,
                                          int log2_cap = kDefaultLog2Cap);

struct Run {
  Index start;
  Index length;
  std::uint32_t id;  // index into the palette
};

// p-periodic step function, run-length encoded over [0,p). Values live in a palette.
class PeriodicStepFn {
public:
  explicit PeriodicStepFn(Index period = 1);  // zero function
  static PeriodicStepFn constant(Index period, const Dyadic& v);
  static PeriodicStepFn indicator(const PeriodicSet& s, const Dyadic& v);

  Index period() const { return period_; }
  std::size_t run_count() const { return starts_.size(); }
  Run run(std::size_t i) const;
  Index run_end(std::size_t i) const { return i + 1 < starts_.size() ? starts_[i + 1] : period_; }
  std::uint32_t run_id(std::size_t i) const { return ids_[i]; }
  const std::vector<Dyadic>& palette() const { return palette_; }
  const Dyadic& value(std::uint32_t id) const { return palette_[id]; }

  std::size_t run_index(Index x) const;  // run containing x mod p
  const Dyadic& eval(Index x) const { return palette_[ids_[run_index(x)]]; }
  bool is_zero() const;
  bool non_negative() const;

  Rational mean_integral() const;
  Rational integral() const;  // over one period
  // Integral over the lifted range [lo, hi).
  Rational integral_over(Index lo, Index hi) const;
  // ∫ over A∩[0,p) (not normalized).
  Rational integral_on(const PeriodicSet& a) const;
  PeriodicSet support() const;

  PeriodicStepFn scaled(const Dyadic& c) const;
  PeriodicStepFn restricted(const PeriodicSet& a) const;
  PeriodicStepFn retile(Index new_period) const;  // new_period must be a multiple

  friend bool operator==(const PeriodicStepFn& a, const PeriodicStepFn& b);

private:
  friend class StepFnBuilder;
  Index period_;
  std::vector<Index> starts_;
  std::vector<std::uint32_t> ids_;
  std::vector<Dyadic> palette_;
};

// Builds a canonical step function from pieces given in increasing position order;
// gaps are filled with zero.
class StepFnBuilder {
public:
  explicit StepFnBuilder(Index period);
  void push(Index start, Index length, const Dyadic& v);
  PeriodicStepFn finish();
  Index cursor() const { return cursor_; }

private:
  std::uint32_t intern(const Dyadic& v);
  void append(Index start, Index length, std::uint32_t id);
  PeriodicStepFn f_;
  Index cursor_ = 0;
  std::map<Dyadic, std::uint32_t> index_;
};

// Copies f on [0, floor(p_new/p)*p) and zero on the remainder.
PeriodicStepFn tile_truncate(const PeriodicStepFn& f, Index p_new);
PeriodicStepFn add(const PeriodicStepFn& a, const PeriodicStepFn& b);
// Pushes the values of g on the lifted range [lo, hi) to builder positions starting at `at`.
void emit_range(StepFnBuilder& b, const PeriodicStepFn& g, Index lo, Index hi, Index at);
PeriodicStepFn sum(std::span<const PeriodicStepFn* const> fs, Index period);

// Text formats: "period p" then "start length mantissa exponent" (functions) or "start length" (sets).
void write_fn(std::ostream& os, const PeriodicStepFn& f);
PeriodicStepFn read_fn(std::istream& is);
void write_set(std::ostream& os, const PeriodicSet& s);
PeriodicSet read_set(std::istream& is);

}  // namespace rstar
