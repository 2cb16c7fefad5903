#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bcbench {

// Base of every error raised by the library. Each subclass names one failure
// kind so callers can dispatch on type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BCBENCH_DEFINE_ERROR(Name)                 \
    class Name : public Error {                    \
    public:                                        \
        using Error::Error;                        \
    }

BCBENCH_DEFINE_ERROR(EmptyInput);
BCBENCH_DEFINE_ERROR(MissingDataError);
BCBENCH_DEFINE_ERROR(SourceUnavailable);
BCBENCH_DEFINE_ERROR(InvalidK);
BCBENCH_DEFINE_ERROR(DegenerateAgreement);
BCBENCH_DEFINE_ERROR(InvalidLabels);
BCBENCH_DEFINE_ERROR(EmptySelection);
BCBENCH_DEFINE_ERROR(NumericError);
BCBENCH_DEFINE_ERROR(SchemaError);
BCBENCH_DEFINE_ERROR(StratificationError);
BCBENCH_DEFINE_ERROR(FoldError);
BCBENCH_DEFINE_ERROR(DegenerateAnova);
BCBENCH_DEFINE_ERROR(UnbalancedDesign);
BCBENCH_DEFINE_ERROR(DegenerateEffect);
BCBENCH_DEFINE_ERROR(ConfigError);
BCBENCH_DEFINE_ERROR(ParseError);
BCBENCH_DEFINE_ERROR(IoError);

#undef BCBENCH_DEFINE_ERROR

// Byte-level framing problem in a sensor payload.
class MalformedFrame : public Error {
public:
    MalformedFrame(std::size_t offset, const std::string& what)
        : Error("malformed frame at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A decoded value outside its physical range.
class RangeError : public Error {
public:
    RangeError(std::string channel, double value)
        : Error("channel '" + channel + "' out of range: " + std::to_string(value)),
          channel_(std::move(channel)) {}
    const std::string& channel() const noexcept { return channel_; }

private:
    std::string channel_;
};

class InsufficientNeighbors : public Error {
public:
    InsufficientNeighbors(std::string column, std::size_t observed, std::size_t k)
        : Error("column '" + column + "' has " + std::to_string(observed) +
                " observed rows, fewer than k=" + std::to_string(k)),
          column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

// A learner error raised while processing one cross-validation fold. The
// original exception is nested (std::rethrow_if_nested recovers it).
class FoldFailure : public Error {
public:
    FoldFailure(std::size_t fold, const std::string& what)
        : Error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
    std::size_t fold() const noexcept { return fold_; }

private:
    std::size_t fold_;
};

}  // namespace bcbench
