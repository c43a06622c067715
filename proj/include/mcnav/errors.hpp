#ifndef MCNAV_ERRORS_HPP
#define MCNAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mcnav {

/// Base class for all library errors.
struct NavError : std::runtime_error {
    explicit NavError(const std::string& msg) : std::runtime_error(msg) {}
};

// data loading
struct IOError : NavError { using NavError::NavError; };
struct SchemaError : NavError { using NavError::NavError; };
struct InvariantError : NavError { using NavError::NavError; };

// scene queries
struct UnknownViewpoint : NavError { using NavError::NavError; };

// memory map
struct InconsistentObservation : NavError { using NavError::NavError; };

// embeddings / retrieval
struct EmbeddingServiceError : NavError { using NavError::NavError; };
struct ZeroVector : NavError { using NavError::NavError; };
struct DimMismatch : NavError { using NavError::NavError; };
struct EmptyExampleSet : NavError { using NavError::NavError; };
struct MissingRoomType : NavError { using NavError::NavError; };

// llm backends
struct LLMError : NavError { using NavError::NavError; };
struct TransportError : LLMError { using LLMError::LLMError; };
struct ScriptExhausted : LLMError { using LLMError::LLMError; };
struct OracleMissingPath : LLMError { using LLMError::LLMError; };
struct ParseError : NavError { using NavError::NavError; };
struct InvalidAction : NavError { using NavError::NavError; };
struct InvalidObject : NavError { using NavError::NavError; };

// planning / execution
struct NoPath : NavError { using NavError::NavError; };
struct WalkError : NavError { using NavError::NavError; };

// metrics
struct MissingTarget : NavError { using NavError::NavError; };
struct EmptyInput : NavError { using NavError::NavError; };

} // namespace mcnav

#endif
