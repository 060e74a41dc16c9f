#pragma once

#include <stdexcept>
#include <string>

namespace rstar {

enum class Errc {
  invalid_argument = 1,
  verification = 2,
  infeasible = 3,
  internal = 4,
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(Errc::invalid_argument, what); }
[[noreturn]] inline void infeasible(const std::string& what) { throw Error(Errc::infeasible, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(what);
}

}  // namespace rstar
