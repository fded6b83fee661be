#pragma once

#include <stdexcept>
#include <string>

namespace wsi {

// Every error raised by the library derives from Error and carries a short
// machine-readable kind tag used by the CLI's one-line error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define WSI_DEFINE_ERROR(Name, Base, tag)                                   \
    class Name : public Base {                                              \
    public:                                                                 \
        explicit Name(const std::string& message) : Base(tag, message) {}   \
    protected:                                                              \
        Name(std::string kind, const std::string& message)                  \
            : Base(std::move(kind), message) {}                             \
    };

WSI_DEFINE_ERROR(DimensionError, Error, "dimension")
WSI_DEFINE_ERROR(NumericError, Error, "numeric")
WSI_DEFINE_ERROR(InputTooShortError, Error, "input-too-short")
WSI_DEFINE_ERROR(ConfigError, Error, "config")
WSI_DEFINE_ERROR(InputError, Error, "input")
WSI_DEFINE_ERROR(SelectionError, Error, "selection")
WSI_DEFINE_ERROR(QuantizationError, Error, "quantization")
WSI_DEFINE_ERROR(MetricUndefinedError, Error, "metric-undefined")
WSI_DEFINE_ERROR(TraceError, Error, "trace")
WSI_DEFINE_ERROR(UndefinedIntervalError, Error, "undefined-interval")

// Model file errors.
WSI_DEFINE_ERROR(FormatError, Error, "format")
WSI_DEFINE_ERROR(BadMagicError, FormatError, "bad-magic")
WSI_DEFINE_ERROR(VersionMismatchError, FormatError, "version-mismatch")
WSI_DEFINE_ERROR(TruncatedError, FormatError, "truncated")
WSI_DEFINE_ERROR(StructureError, FormatError, "structure")
WSI_DEFINE_ERROR(InconsistentModelError, FormatError, "inconsistent-model")

// Audio ingestion errors.
WSI_DEFINE_ERROR(AudioError, Error, "audio")
WSI_DEFINE_ERROR(ChannelCountError, AudioError, "channel-count")
WSI_DEFINE_ERROR(SampleRateError, AudioError, "sample-rate")
WSI_DEFINE_ERROR(CodecError, AudioError, "codec")

// Text file parsing (configs, scores, traces, scenarios).
WSI_DEFINE_ERROR(ParseError, Error, "parse")
WSI_DEFINE_ERROR(IoError, Error, "io")

#undef WSI_DEFINE_ERROR

}  // namespace wsi
