#ifndef CLDMD_ERRORS_HPP
#define CLDMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cldmd {

// Malformed or inconsistent input files / configuration.
class schema_error : public std::runtime_error {
public:
  explicit schema_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A linear system could not be factorized or is numerically singular.
class singular_matrix_error : public std::runtime_error {
public:
  explicit singular_matrix_error(const std::string& msg)
      : std::runtime_error(msg) {}
};

// An algorithm failed to meet its numerical contract (non-convergence,
// residuals out of bounds, non-finite intermediates).
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A simulated or integrated state escaped the admissible region.
class divergence_error : public std::runtime_error {
public:
  divergence_error(const std::string& msg, double last_time)
      : std::runtime_error(msg), time(last_time) {}
  double time;
};

}  // namespace cldmd

#endif
