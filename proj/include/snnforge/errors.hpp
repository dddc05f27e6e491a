#pragma once

#include <stdexcept>
#include <string>

namespace snnforge {

// Invalid configuration, flags or arguments. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI maps this to exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values appeared during training. CLI maps this to exit code 4.
struct DivergedError : std::runtime_error {
  explicit DivergedError(std::size_t iteration_)
      : std::runtime_error("training diverged: non-finite values at iteration " +
                           std::to_string(iteration_)),
        iteration(iteration_) {}
  std::size_t iteration;
};

// AUC is undefined when only one class is present.
struct UndefinedAucError : std::runtime_error {
  UndefinedAucError()
      : std::runtime_error("AUC undefined: labels contain a single class") {}
};

}  // namespace snnforge
