// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orchestra
{

/// Root of every exception thrown by the library.
class Error: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Input could not be parsed in the declared format.
class FormatError: public Error
{
  public:
    using Error::Error;
};

/// A delimited or markdown row has the wrong number of cells. `row()` is the
/// zero-based body row index (the header is not counted).
class RaggedRowError: public FormatError
{
  public:
    RaggedRowError(std::size_t row, std::size_t expected, std::size_t actual);

    [[nodiscard]] std::size_t row() const noexcept { return _row; }

  private:
    std::size_t _row;
};

/// Model output did not match the expected tagged / fenced layout.
class ParseError: public Error
{
  public:
    using Error::Error;
};

class EmptyAnswerError: public ParseError
{
  public:
    EmptyAnswerError(): ParseError("empty answer") {}
};

/// An API contract was violated by the caller (e.g. pushing code into the
/// logic agent's memory).
class ContractViolation: public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Anything raised while talking to a model backend.
class BackendError: public Error
{
  public:
    using Error::Error;
};

/// Network failure or HTTP status >= 500. Retryable.
class TransportError: public BackendError
{
  public:
    using BackendError::BackendError;
};

/// Request deadline exceeded. Retryable.
class TimeoutError: public BackendError
{
  public:
    using BackendError::BackendError;
};

/// HTTP 4xx. Not retryable.
class ApiError: public BackendError
{
  public:
    ApiError(int status, const std::string& body);

    [[nodiscard]] int status() const noexcept { return _status; }

  private:
    int _status;
};

class ScriptExhaustedError: public BackendError
{
  public:
    using BackendError::BackendError;
};

class ScriptMismatchError: public BackendError
{
  public:
    using BackendError::BackendError;
};

/// The script sandbox executable could not be located or started. This is a
/// configuration problem, never turned into an observation table.
class SandboxUnavailableError: public Error
{
  public:
    using Error::Error;
};

} // namespace orchestra
