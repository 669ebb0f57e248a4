#pragma once

#include <stdexcept>
#include <string>

namespace docpipe {

enum class ErrorKind {
    FileNotFound,
    IoError,
    UnsupportedFormat,
    CorruptImage,
    SchemaError,
    FormatError,
    GridMismatch,
    UnknownBlobId,
    OutOfBounds,
    UnlabeledBlob,
    DimensionMismatch,
    EmptyClass,
    SingleClass,
    EmptyCorpus,
    EmptyTestSet,
    EmptyOriginal,
    PortInUse,
    InvalidArgument,
};

const char* to_string(ErrorKind kind);

// Process exit code used by the command-line tool for each error kind.
// 2 io, 3 unlabeled blob, 4 malformed input, 5 grid mismatch,
// 6 blob edit/bounds, 7 training/evaluation, 8 empty original, 9 port in use.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace docpipe
