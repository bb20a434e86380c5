#pragma once

#include <stdexcept>
#include <string>

namespace ecgscreen {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// WFDB parsing / decoding
class FormatError : public Error { public: using Error::Error; };
class UnsupportedFormat : public Error { public: using Error::Error; };
class TruncatedSignal : public Error { public: using Error::Error; };
class CalibrationError : public Error { public: using Error::Error; };

// Metadata catalog
class SchemaError : public Error { public: using Error::Error; };
class RowError : public Error {
public:
    RowError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const { return row_; }
private:
    std::size_t row_;
};
class EmptyCohort : public Error { public: using Error::Error; };

// Preprocessing
class EmptyDataset : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class TooFewExamples : public Error { public: using Error::Error; };
class CorruptCache : public Error { public: using Error::Error; };
class VersionError : public Error { public: using Error::Error; };

// Feature extraction
class TooShort : public Error { public: using Error::Error; };
class NoBeats : public Error { public: using Error::Error; };
class AxisUndefined : public Error { public: using Error::Error; };

// Network training
class ConfigError : public Error { public: using Error::Error; };
class DivergenceError : public Error {
public:
    DivergenceError(int epoch, const std::string& what)
        : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
    int epoch() const { return epoch_; }
private:
    int epoch_;
};

// Metrics
class EmptyInput : public Error { public: using Error::Error; };
class UndefinedRoc : public Error { public: using Error::Error; };

// Filesystem
class IoError : public Error { public: using Error::Error; };

} // namespace ecgscreen
