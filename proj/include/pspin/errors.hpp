#pragma once

#include <stdexcept>
#include <string>

namespace pspin {

/// Error categories; the CLI maps these onto process exit codes.
enum class errc {
  invalid_argument,
  infeasible_model,
  non_convergence,
  instability,
  divergence,
  resource_limit,
  horizon_too_short,
  invalid_window,
  io_error,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& msg) { throw error(c, msg); }

inline void require(bool ok, errc c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

}  // namespace pspin
