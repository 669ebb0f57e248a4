#include "docpipe/error.hpp"

namespace docpipe {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FileNotFound: return "FileNotFound";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::CorruptImage: return "CorruptImage";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::FormatError: return "FormatError";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::UnknownBlobId: return "UnknownBlobId";
        case ErrorKind::OutOfBounds: return "OutOfBounds";
        case ErrorKind::UnlabeledBlob: return "UnlabeledBlob";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::SingleClass: return "SingleClass";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::EmptyTestSet: return "EmptyTestSet";
        case ErrorKind::EmptyOriginal: return "EmptyOriginal";
        case ErrorKind::PortInUse: return "PortInUse";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FileNotFound:
        case ErrorKind::IoError:
            return 2;
        case ErrorKind::UnlabeledBlob:
            return 3;
        case ErrorKind::UnsupportedFormat:
        case ErrorKind::CorruptImage:
        case ErrorKind::SchemaError:
        case ErrorKind::FormatError:
        case ErrorKind::InvalidArgument:
            return 4;
        case ErrorKind::GridMismatch:
            return 5;
        case ErrorKind::UnknownBlobId:
        case ErrorKind::OutOfBounds:
            return 6;
        case ErrorKind::DimensionMismatch:
        case ErrorKind::EmptyClass:
        case ErrorKind::SingleClass:
        case ErrorKind::EmptyCorpus:
        case ErrorKind::EmptyTestSet:
            return 7;
        case ErrorKind::EmptyOriginal:
            return 8;
        case ErrorKind::PortInUse:
            return 9;
    }
    return 1;
}

}  // namespace docpipe
