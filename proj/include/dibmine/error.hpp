#pragma once

#include <stdexcept>
#include <string>

namespace dibmine {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File could not be opened or read.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

// Malformed input data (config files, CSV rows, binary model files).
struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error(what) {}
};

// Operation on incompatible physical dimensions.
struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Vocabulary construction failed (empty corpus, empty vocabulary).
struct VocabError : Error {
  explicit VocabError(const std::string& what) : Error(what) {}
};

// Training diverged (non-finite loss).
struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(what) {}
};

}  // namespace dibmine
