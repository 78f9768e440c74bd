#pragma once

#include <stdexcept>
#include <string>

namespace polequil {

// Base of every error raised by the library. Subtypes are fine-grained so
// callers can react per failure mode (the CLI maps diagnostic failures to a
// distinct exit code).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- function catalog ---
struct NegativeDensity : Error { using Error::Error; };
struct ZeroMass : Error { using Error::Error; };
struct OutOfSupport : Error { using Error::Error; };
struct BadLambda : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// --- quadrature ---
struct QuadratureFailure : Error { using Error::Error; };

// --- solvers ---
struct Multimodal : Error { using Error::Error; };
struct DegenerateHessian : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct NonUnique : Error { using Error::Error; };

// --- sensitivity ---
struct BoundaryEquilibrium : Error { using Error::Error; };
struct DegenerateDet : Error { using Error::Error; };
struct NotZeroMass : Error { using Error::Error; };
struct EndpointOrderViolation : Error { using Error::Error; };
struct SingularBlock : Error { using Error::Error; };

struct PathBreak : Error {
  PathBreak(const std::string& msg, std::size_t grid_index)
      : Error(msg), index(grid_index) {}
  std::size_t index;
};

// --- Bayesian game ---
struct RadiusTooSmall : Error { using Error::Error; };
struct ZeroEvidence : Error { using Error::Error; };

// --- scenario files ---
struct ParseError : Error {
  ParseError(const std::string& msg, int line_no, int col_no)
      : Error("parse error at line " + std::to_string(line_no) + ", column " +
              std::to_string(col_no) + ": " + msg),
        line(line_no), column(col_no) {}
  int line;
  int column;
};
struct ValidationError : Error { using Error::Error; };

}  // namespace polequil
