#pragma once

#include <stdexcept>
#include <string>

namespace atlas {

enum class Errc {
  invalid_model,
  invalid_input,
  invalid_step,
  invalid_measure,
  invalid_bound,
  numerical_failure,
  plan_infeasible,
  invalid_config,
};

inline const char* to_string(Errc e) {
  switch (e) {
    case Errc::invalid_model: return "invalid-model";
    case Errc::invalid_input: return "invalid-input";
    case Errc::invalid_step: return "invalid-step";
    case Errc::invalid_measure: return "invalid-measure";
    case Errc::invalid_bound: return "invalid-bound";
    case Errc::numerical_failure: return "numerical-failure";
    case Errc::plan_infeasible: return "plan-infeasible";
    case Errc::invalid_config: return "invalid-config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the reflection solver when it fails to converge.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double residual)
      : Error(Errc::numerical_failure, what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

namespace detail {
inline void require(bool cond, Errc code, const char* what) {
  if (!cond) throw Error(code, what);
}
}  // namespace detail

}  // namespace atlas
