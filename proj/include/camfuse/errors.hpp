#pragma once

#include <stdexcept>
#include <string>

namespace camfuse {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer shape disagreements (reports expected vs actual).
struct ShapeError : Error {
    using Error::Error;
};

// Invalid argument values (percentile out of range, empty input, ...).
struct ValueError : Error {
    using Error::Error;
};

// Malformed or truncated files (bad magic, unsupported encoding, ...).
struct FormatError : Error {
    using Error::Error;
};

// Weight file with a known magic but an unsupported version number.
struct VersionError : Error {
    using Error::Error;
};

// Weight file whose tensor shapes do not match the fixed architecture.
struct ArchitectureError : Error {
    using Error::Error;
};

// Filesystem-level failures (missing file, unwritable directory).
struct IoError : Error {
    using Error::Error;
};

// Bad command-line usage or option validation; the CLI maps this to
// exit code 2.
struct UsageError : Error {
    using Error::Error;
};

}  // namespace camfuse
