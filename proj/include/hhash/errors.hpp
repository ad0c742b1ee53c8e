#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hhash {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

class NotOrthogonalError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class MissingLabelsError : public Error {
 public:
  using Error::Error;
};

class TooManyClassesError : public Error {
 public:
  using Error::Error;
};

/// Iterative numeric routine failed (e.g. SVD did not converge).
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// An embedding row with (numerically) zero norm.
class ZeroRowError : public Error {
 public:
  explicit ZeroRowError(std::size_t row)
      : Error("embedding row " + std::to_string(row) + " has zero norm"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Training produced a NaN/Inf loss.
class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(int epoch, int batch)
      : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

/// Malformed file contents. `offset` is the byte offset where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace hhash
