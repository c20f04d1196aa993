#pragma once

#include <stdexcept>
#include <string>

namespace hetscreen {

// Every error carries the name of the module that raised it so that the CLI
// can print a single structured line.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string kind, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)), kind_(std::move(kind)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string module_;
  std::string kind_;
};

#define HETSCREEN_DEFINE_ERROR(Name, module_name, kind_name)                    \
  class Name : public Error {                                                   \
   public:                                                                      \
    explicit Name(const std::string& message) : Error(module_name, kind_name, message) {} \
  };

HETSCREEN_DEFINE_ERROR(SchemaError, "data-model", "schema")
HETSCREEN_DEFINE_ERROR(LoadError, "data-model", "load")
HETSCREEN_DEFINE_ERROR(DataError, "data-model", "data")
HETSCREEN_DEFINE_ERROR(UsageError, "subgroup-enumeration", "usage")
HETSCREEN_DEFINE_ERROR(FoldError, "nuisance-learners", "fold")
HETSCREEN_DEFINE_ERROR(LearnerError, "nuisance-learners", "learner")
HETSCREEN_DEFINE_ERROR(PositivityError, "pseudo-outcomes", "positivity")
HETSCREEN_DEFINE_ERROR(DegenerateScaleError, "pseudo-outcomes", "degenerate-scale")
HETSCREEN_DEFINE_ERROR(InferenceError, "inference-engine", "inference")
HETSCREEN_DEFINE_ERROR(LimitError, "inference-engine", "limit")
HETSCREEN_DEFINE_ERROR(CalibrationError, "simulation-harness", "calibration")
HETSCREEN_DEFINE_ERROR(ConfigError, "cli-export", "config")

#undef HETSCREEN_DEFINE_ERROR

}  // namespace hetscreen
