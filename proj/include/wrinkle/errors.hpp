#pragma once

#include <stdexcept>
#include <string>

namespace wrinkle {

/// Base of every numerical failure raised by the library. `module()` names the
/// component that detected the failure so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), module_(std::move(module)), kind_(std::move(kind)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string module_;
  std::string kind_;
};

#define WRINKLE_DEFINE_ERROR(Name, Module)                                   \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(Module, #Name, what) {}   \
  };

WRINKLE_DEFINE_ERROR(DegenerateMetric, "surface_geometry")
WRINKLE_DEFINE_ERROR(OrderTooHigh, "surface_geometry")
WRINKLE_DEFINE_ERROR(NonPositiveLame, "surface_geometry")
WRINKLE_DEFINE_ERROR(DegenerateWrinkledMetric, "wrinkle_geometry")
WRINKLE_DEFINE_ERROR(InvalidSchedule, "wrinkle_geometry")
WRINKLE_DEFINE_ERROR(TruncationTooSmall, "cell_solver")
WRINKLE_DEFINE_ERROR(NotSPD, "solver")
WRINKLE_DEFINE_ERROR(SingularSystem, "macro_solver")
WRINKLE_DEFINE_ERROR(QuadratureUnderresolved, "quadrature")

#undef WRINKLE_DEFINE_ERROR

/// Configuration problems (CLI exit code 2), distinct from numerical failures.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wrinkle
