#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace haptix {

// Base of every library error. DataError and NumericalError split the
// hierarchy so the CLI can map failures onto exit codes 2 and 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line, const std::string& why)
      : DataError("malformed record at line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownFoodItem : public DataError {
 public:
  explicit UnknownFoodItem(std::string name)
      : DataError("unknown food item '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class EmptyDataset : public DataError {
 public:
  EmptyDataset() : DataError("dataset contains no trials") {}
};

class DegenerateStream : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateSeries : public DataError {
 public:
  using DataError::DataError;
};

class NoContact : public DataError {
 public:
  using DataError::DataError;
};

class EmptyTrainingSet : public DataError {
 public:
  EmptyTrainingSet() : DataError("training set is empty") {}
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class MissingClass : public DataError {
 public:
  MissingClass(std::size_t class_index, const std::string& class_name)
      : DataError("no training data for class " + class_name), class_index_(class_index) {}
  std::size_t class_index() const noexcept { return class_index_; }

 private:
  std::size_t class_index_;
};

class SingleClassData : public DataError {
 public:
  SingleClassData() : DataError("training data contains fewer than two classes") {}
};

class TooFewTrials : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteLoss : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateGroups : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Wraps a failure raised while processing one cross-validation fold. The
// original exception is nested (std::throw_with_nested).
class FoldFailure : public Error {
 public:
  FoldFailure(std::size_t fold, const std::string& what)
      : Error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const noexcept { return fold_; }

 private:
  std::size_t fold_;
};

}  // namespace haptix
