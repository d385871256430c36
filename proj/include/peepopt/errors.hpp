#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peepopt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A gate or circuit violates its structural invariants.
class CircuitError : public Error {
  public:
    using Error::Error;
};

/// A block embedding does not map local qubits injectively into the target.
class EmbeddingError : public Error {
  public:
    using Error::Error;
};

/// Two operands have mismatched dimensions.
class DimensionError : public Error {
  public:
    using Error::Error;
};

class PartitionError : public Error {
  public:
    using Error::Error;
};

/// Configuration values outside their documented ranges.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A failure inside `run_pipeline`, tagged with the stage that raised it.
class PipelineError : public Error {
  public:
    PipelineError(std::string stage, std::string const& message)
        : Error{"[" + stage + "] " + message}, stage_{std::move(stage)}
    {}

    [[nodiscard]] auto stage() const noexcept -> std::string const& { return stage_; }

  private:
    std::string stage_;
};

} // namespace peepopt
