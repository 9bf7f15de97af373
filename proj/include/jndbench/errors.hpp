#pragma once

#include <stdexcept>
#include <string>

namespace jndbench {

// Base of everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input/output, file schema and parse problems. CLI maps these to exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

// Parse failure tied to a specific row of a CSV/JSON input. row is 1-based
// and counts the header.
class ParseError : public IoError {
public:
    ParseError(const std::string& what, long row) : IoError(what), row_(row) {}
    long row() const noexcept { return row_; }

private:
    long row_ = 0;
};

class DuplicateStimulusError : public ParseError {
public:
    DuplicateStimulusError(const std::string& id, long row)
        : ParseError("duplicate stimulus_id '" + id + "' (row " + std::to_string(row) + ")", row),
          stimulus_id_(id) {}
    const std::string& stimulus_id() const noexcept { return stimulus_id_; }

private:
    std::string stimulus_id_;
};

class NonFiniteScoreError : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyTableError : public IoError {
public:
    using IoError::IoError;
};

class EmptyDatasetError : public IoError {
public:
    using IoError::IoError;
};

class MissingPolarityError : public IoError {
public:
    explicit MissingPolarityError(const std::string& metric)
        : IoError("no polarity declared for metric '" + metric + "'"), metric_(metric) {}
    const std::string& metric() const noexcept { return metric_; }

private:
    std::string metric_;
};

class DecodeError : public IoError {
public:
    using IoError::IoError;
};

// Evaluation-stage problems (math preconditions, degenerate data). CLI maps
// these to exit code 1.
class EvalError : public Error {
public:
    using Error::Error;
};

class EmptySliceError : public EvalError {
public:
    using EvalError::EvalError;
};

class MissingScoreError : public EvalError {
public:
    MissingScoreError(const std::string& metric, const std::string& stimulus)
        : EvalError("no score for metric '" + metric + "' on stimulus '" + stimulus + "'"),
          metric_(metric),
          stimulus_(stimulus) {}
    const std::string& metric() const noexcept { return metric_; }
    const std::string& stimulus() const noexcept { return stimulus_; }

private:
    std::string metric_;
    std::string stimulus_;
};

class MissingVariantError : public EvalError {
public:
    MissingVariantError(const std::string& metric, const std::string& variant)
        : EvalError("metric '" + metric + "' has no '" + variant + "' variant") {}
};

class DimensionMismatchError : public EvalError {
public:
    using EvalError::EvalError;
};

class ImageTooSmallError : public EvalError {
public:
    using EvalError::EvalError;
};

class ConstantSeriesError : public EvalError {
public:
    using EvalError::EvalError;
};

class ConstantPredictorError : public EvalError {
public:
    using EvalError::EvalError;
};

class MisalignedVariantsError : public EvalError {
public:
    using EvalError::EvalError;
};

class NonPositiveSigmaError : public EvalError {
public:
    using EvalError::EvalError;
};

class LengthMismatchError : public EvalError {
public:
    using EvalError::EvalError;
};

class DegenerateGridError : public EvalError {
public:
    using EvalError::EvalError;
};

class DegenerateCorrelationError : public EvalError {
public:
    using EvalError::EvalError;
};

class SampleTooSmallError : public EvalError {
public:
    using EvalError::EvalError;
};

class BandwidthError : public EvalError {
public:
    using EvalError::EvalError;
};

class ConfigError : public IoError {
public:
    using IoError::IoError;
};

}  // namespace jndbench
