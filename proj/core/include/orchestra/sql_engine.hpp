// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/error.hpp>
#include <orchestra/table.hpp>

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

struct sqlite3;

namespace orchestra
{

/// Engine-reported failure; `what()` carries the engine's message verbatim.
class SqlError: public Error
{
  public:
    using Error::Error;
};

/// In-memory SQLite database holding one table.
///
/// Columns are declared without a type, so every cell keeps its own storage
/// class. A cell is stored as INTEGER when it is a canonical decimal integer,
/// as REAL when SQLite renders the parsed double back to the identical text,
/// and as TEXT otherwise. Query results therefore reproduce stored cells
/// exactly while numeric cells compare numerically.
class SqlEngine
{
  public:
    explicit SqlEngine(const Table& table, std::string_view registered_name = "DF");
    ~SqlEngine();
    SqlEngine(const SqlEngine&) = delete;
    SqlEngine& operator=(const SqlEngine&) = delete;
    SqlEngine(SqlEngine&&) noexcept;
    SqlEngine& operator=(SqlEngine&&) noexcept;

    /// Runs one read-only statement. Throws SqlError with the engine message
    /// on syntax or semantic errors, and "statement not allowed" for anything
    /// other than a single SELECT.
    [[nodiscard]] Table query(std::string_view sql, std::chrono::milliseconds budget = std::chrono::seconds(10)) const;

  private:
    sqlite3* _db = nullptr;
};

} // namespace orchestra
