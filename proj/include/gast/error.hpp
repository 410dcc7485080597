#pragma once

#include <stdexcept>
#include <string>

namespace gast {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension or shape mismatch between operands; message names the shapes.
struct ShapeError : Error {
  using Error::Error;
};

// Invalid argument value or violated call contract.
struct ValueError : Error {
  using Error::Error;
};

// Malformed input text (corpus, embedding, config files); message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

// Bad experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem failure; message names the path.
struct IoError : Error {
  using Error::Error;
};

}  // namespace gast
