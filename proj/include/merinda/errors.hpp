#pragma once

#include <stdexcept>
#include <string>

namespace merinda {

// Integration blew past the overflow guard (or produced non-finite state).
class IntegrationDivergedError : public std::runtime_error {
  public:
    IntegrationDivergedError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const { return step_; }

  private:
    std::size_t step_;
};

class UnknownSystemError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class LibraryTooLargeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class RankDeficientError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class TooShortError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Non-finite gradient; carries the name of the offending parameter block.
class GradientOverflowError : public std::runtime_error {
  public:
    GradientOverflowError(std::string block, const std::string& what)
        : std::runtime_error(what), block_(std::move(block)) {}
    const std::string& block() const { return block_; }

  private:
    std::string block_;
};

class TrainingFailedError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class OverflowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UndefinedCorrelationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace merinda
