// SPDX-License-Identifier: Apache-2.0
#include <orchestra/error.hpp>

namespace orchestra
{

RaggedRowError::RaggedRowError(std::size_t row, std::size_t expected, std::size_t actual):
    FormatError("row " + std::to_string(row) + " has " + std::to_string(actual) + " cells, expected "
                + std::to_string(expected)),
    _row(row)
{
}

ApiError::ApiError(int status, const std::string& body):
    BackendError("HTTP " + std::to_string(status) + ": " + body), _status(status)
{
}

} // namespace orchestra
