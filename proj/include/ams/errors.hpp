#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ams {

/// Invalid argument or configuration (violated precondition).
class input_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Conditioning on a level the model can never exceed (cdf(x) = 1).
class degenerate_conditioning : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A transform (Lambda) evaluated at or beyond the essential supremum.
class infinite_value_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// An AMS run exceeded its iteration cap.
class runaway_error : public std::runtime_error {
public:
  runaway_error(std::int64_t iterations, std::int64_t replication = -1)
      : std::runtime_error("AMS run exceeded max_iterations = " + std::to_string(iterations) +
                           (replication >= 0 ? " (replication " + std::to_string(replication) + ")"
                                             : std::string{})),
        iterations_(iterations),
        replication_(replication) {}

  std::int64_t iterations() const noexcept { return iterations_; }
  std::int64_t replication() const noexcept { return replication_; }

private:
  std::int64_t iterations_;
  std::int64_t replication_;
};

/// Linear system too ill-conditioned to trust (near-degenerate roots).
class conditioning_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical routine failed to converge (root finding, grid refinement).
class convergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ams
