#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mhpl {

using Index = std::int64_t;

// Base class for every error the library throws. Each failure mode below is a
// distinct type so callers can catch exactly the condition they care about.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MalformedHeader : public Error {
public:
  explicit MalformedHeader(const std::string& detail)
      : Error("malformed header: " + detail) {}
};

class MalformedFile : public Error {
public:
  explicit MalformedFile(const std::string& detail)
      : Error("malformed file: " + detail) {}
};

class DimensionMismatch : public Error {
public:
  Index row;
  DimensionMismatch(Index row_, const std::string& detail)
      : Error("dimension mismatch at row " + std::to_string(row_) + ": " + detail),
        row(row_) {}
};

class NonFiniteEntry : public Error {
public:
  Index row;
  explicit NonFiniteEntry(Index row_)
      : Error("non-finite feature entry at row " + std::to_string(row_)), row(row_) {}
};

class LabelOutOfRange : public Error {
public:
  Index row;
  int label;
  LabelOutOfRange(Index row_, int label_, int k)
      : Error("label " + std::to_string(label_) + " at row " + std::to_string(row_) +
              " is outside [0, " + std::to_string(k) + ")"),
        row(row_), label(label_) {}
};

class MissingClassCount : public Error {
public:
  MissingClassCount()
      : Error("class count required: file carries no labels and no explicit K was given") {}
};

class EmptySet : public Error {
public:
  EmptySet() : Error("feature set is empty") {}
};

class UnwritablePath : public Error {
public:
  explicit UnwritablePath(const std::string& path)
      : Error("cannot write to path: " + path) {}
};

class QOutOfRange : public Error {
public:
  QOutOfRange(int q, Index n)
      : Error("neighbor count q=" + std::to_string(q) + " outside [1, " +
              std::to_string(n - 1) + "] for n=" + std::to_string(n)) {}
};

class NotNormalized : public Error {
public:
  Index row;
  NotNormalized(Index row_, double norm)
      : Error("row " + std::to_string(row_) + " has L2 norm " + std::to_string(norm) +
              "; expected unit rows (or zero rows)"),
        row(row_) {}
};

class IndexOutOfRange : public Error {
public:
  Index index;
  IndexOutOfRange(Index index_, Index n)
      : Error("index " + std::to_string(index_) + " outside [0, " + std::to_string(n) + ")"),
        index(index_) {}
};

class DegenerateClassMass : public Error {
public:
  int cls;
  explicit DegenerateClassMass(int cls_)
      : Error("probability column for class " + std::to_string(cls_) + " sums to zero"),
        cls(cls_) {}
};

class NonProbabilityInput : public Error {
public:
  explicit NonProbabilityInput(const std::string& detail)
      : Error("not a probability vector: " + detail) {}
};

class BudgetExceedsN : public Error {
public:
  BudgetExceedsN(Index m, Index n)
      : Error("budget m=" + std::to_string(m) + " exceeds sample count n=" + std::to_string(n)) {}
};

class MissingStrategyInput : public Error {
public:
  MissingStrategyInput(const std::string& strategy, const std::string& input)
      : Error("strategy '" + strategy + "' requires " + input) {}
};

class InfeasibleSeparation : public Error {
public:
  explicit InfeasibleSeparation(const std::string& detail)
      : Error("class means cannot be separated: " + detail) {}
};

class NonConvergence : public Error {
public:
  double accuracy;
  NonConvergence(double accuracy_, double threshold, int epochs)
      : Error("source head reached accuracy " + std::to_string(accuracy_) + " < " +
              std::to_string(threshold) + " after " + std::to_string(epochs) + " epochs"),
        accuracy(accuracy_) {}
};

class MissingLabel : public Error {
public:
  Index index;
  explicit MissingLabel(Index index_)
      : Error("no ground-truth label available for selected index " + std::to_string(index_)),
        index(index_) {}
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& detail) : Error("bad config: " + detail) {}
};

}  // namespace mhpl
