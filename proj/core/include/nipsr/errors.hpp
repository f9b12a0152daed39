#ifndef NIPSR_ERRORS_HPP
#define NIPSR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nipsr {

// Precondition / shape-contract violations. Messages name the offending
// axis or argument.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad configuration value or unknown config key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File-system level failure (open, read, write).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file content; carries the byte offset where parsing stopped.
struct ParseError : IoError {
    ParseError(const std::string& msg, std::size_t byte_offset)
        : IoError(msg + " (at byte " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

// Non-finite value where a finite one is required (loss blow-up etc.).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Checkpoint file rejected; code() distinguishes the failure class.
struct CheckpointError : std::runtime_error {
    enum class Code { bad_magic, bad_version, truncated, bad_crc, bad_shape };

    CheckpointError(Code c, const std::string& msg)
        : std::runtime_error(msg), code_(c) {}

    Code code() const { return code_; }

  private:
    Code code_;
};

}  // namespace nipsr

#endif
