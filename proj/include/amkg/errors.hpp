#pragma once
// Typed failures. Every error carries a stable code string that the CLI
// prints verbatim, so scripts can match on it.

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace amkg {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define AMKG_ERROR_TYPE(Name)                                    \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& message)                \
            : Error(#Name, message) {}                           \
    }

AMKG_ERROR_TYPE(NameError);
AMKG_ERROR_TYPE(ValidationError);
AMKG_ERROR_TYPE(EndpointError);
AMKG_ERROR_TYPE(NotFoundError);
AMKG_ERROR_TYPE(BackendError);
AMKG_ERROR_TYPE(ChunkOverflowError);
AMKG_ERROR_TYPE(MetricsError);
AMKG_ERROR_TYPE(DimensionError);
AMKG_ERROR_TYPE(MissingEmbeddingError);
AMKG_ERROR_TYPE(QueryError);
AMKG_ERROR_TYPE(RetrievalError);
AMKG_ERROR_TYPE(UnsupportedError);
AMKG_ERROR_TYPE(CompileError);
AMKG_ERROR_TYPE(NoCandidateError);
AMKG_ERROR_TYPE(UncertaintyError);
AMKG_ERROR_TYPE(BootstrapError);
AMKG_ERROR_TYPE(ConfigError);
AMKG_ERROR_TYPE(IoError);

#undef AMKG_ERROR_TYPE

// Parse failure with the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error("ParseError", message + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Unparseable backend output after the retry; keeps the raw response.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& message, std::string raw_response)
        : Error("ExtractionError", message), raw_(std::move(raw_response)) {}
    const std::string& raw_response() const { return raw_; }

private:
    std::string raw_;
};

// Fit failure carrying the last parameter iterate.
class FitError : public Error {
public:
    explicit FitError(const std::string& message, std::vector<double> last = {})
        : Error("FitError", message), last_theta_(std::move(last)) {}
    const std::vector<double>& last_theta() const { return last_theta_; }

private:
    std::vector<double> last_theta_;
};

}  // namespace amkg
