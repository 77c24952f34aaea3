#pragma once

#include <stdexcept>
#include <string>

namespace gameblend {

// Exception hierarchy. The three direct subclasses of Error map onto the CLI
// exit codes: UsageError -> 1, DataError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// corpus

class UnknownTile : public DataError {
 public:
  UnknownTile(char symbol, int line, int col)
      : DataError("unknown tile '" + std::string(1, symbol) + "' at line " +
                  std::to_string(line) + ", column " + std::to_string(col)),
        symbol(symbol), line(line), col(col) {}
  char symbol;
  int line;
  int col;
};

class RaggedRows : public DataError {
 public:
  explicit RaggedRows(int line)
      : DataError("row " + std::to_string(line) + " has a different length"), line(line) {}
  int line;
};

class GridTooTall : public DataError {
 public:
  GridTooTall(int rows, int target)
      : DataError("grid has " + std::to_string(rows) + " rows, more than target " +
                  std::to_string(target)) {}
};

class BadShape : public DataError {
 public:
  using DataError::DataError;
};

class EmptyGame : public DataError {
 public:
  explicit EmptyGame(const std::string& game)
      : DataError("game '" + game + "' has no segments"), game(game) {}
  std::string game;
};

class MissingDirectionalLabel : public DataError {
 public:
  explicit MissingDirectionalLabel(int index)
      : DataError("segment " + std::to_string(index) + " has no directional label"),
        index(index) {}
  int index;
};

// numerics / models

class DimMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NonPositiveVariance : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteLoss : public NumericError {
 public:
  explicit NonFiniteLoss(int epoch)
      : NumericError("non-finite loss in epoch " + std::to_string(epoch)), epoch(epoch) {}
  int epoch;
};

class VersionMismatch : public DataError {
 public:
  using DataError::DataError;
};

class CorruptCheckpoint : public DataError {
 public:
  using DataError::DataError;
};

// blending

class AllZeroWeights : public UsageError {
 public:
  AllZeroWeights() : UsageError("blend weights are all zero") {}
};

class FamilyMismatch : public UsageError {
 public:
  using UsageError::UsageError;
};

class MissingDirection : public UsageError {
 public:
  MissingDirection() : UsageError("a directional label is required for this model family") {}
};

// mechanics

class NonTerminating : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateArc : public NumericError {
 public:
  using NumericError::NumericError;
};

// evaluation

class SingleClass : public DataError {
 public:
  SingleClass() : DataError("classifier training data has fewer than two classes") {}
};

class BadLength : public UsageError {
 public:
  using UsageError::UsageError;
};

class EmptySet : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace gameblend
