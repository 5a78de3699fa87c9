#pragma once

#include <stdexcept>
#include <string>

namespace dsmote {

// Error taxonomy maps one-to-one onto the CLI exit codes:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/layer shape violations; always a caller bug or a bad file.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid or missing configuration. `field` is the JSON path of the
// offending entry (e.g. "dataset.train_images").
struct ConfigError : Error {
  std::string field;
  ConfigError(std::string field_path, const std::string& msg)
      : Error(field_path + ": " + msg), field(std::move(field_path)) {}
};

// Unreadable/inconsistent input data (IDX parse failures, infeasible
// sampling requests, checkpoint mismatches).
struct DataError : Error {
  using Error::Error;
};

// NaN/Inf encountered where a finite-output contract holds. Training
// aborts rather than continuing with poisoned state.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace dsmote
