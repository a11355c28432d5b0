// SPDX-License-Identifier: Apache-2.0
#include <orchestra/agents.hpp>
#include <orchestra/sql_engine.hpp>

#include "text_util.hpp"

#include <sqlite3.h>

#include <cerrno>
#include <cstdlib>
#include <limits>

namespace orchestra
{

namespace
{

std::string quote_identifier(std::string_view name)
{
    auto out = std::string("\"");
    for (char c: name)
    {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out += '"';
    return out;
}

bool is_canonical_integer(std::string_view s, sqlite3_int64& value)
{
    auto digits = s;
    if (digits.starts_with('-'))
        digits.remove_prefix(1);
    if (digits.empty() || digits.size() > 19)
        return false;
    if (digits.find_first_not_of("0123456789") != std::string_view::npos)
        return false;
    if (digits.size() > 1 && digits.front() == '0')
        return false;
    if (s.starts_with('-') && digits == "0")
        return false;
    errno = 0;
    auto text = std::string(s);
    char* end = nullptr;
    long long parsed = std::strtoll(text.c_str(), &end, 10);
    if (errno == ERANGE || end != text.c_str() + text.size())
        return false;
    value = parsed;
    return true;
}

bool is_round_trip_real(std::string_view s, double& value)
{
    if (s.empty() || s.size() > 40)
        return false;
    if (s.find_first_not_of("0123456789.-+eE") != std::string_view::npos)
        return false;
    auto text = std::string(s);
    char* end = nullptr;
    value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
        return false;
    char rendered[64];
    sqlite3_snprintf(sizeof rendered, rendered, "%!.15g", value);
    return text == rendered;
}

struct Statement
{
    sqlite3_stmt* handle = nullptr;
    ~Statement() { sqlite3_finalize(handle); }
};

void exec(sqlite3* db, const std::string& sql)
{
    char* message = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &message) != SQLITE_OK)
    {
        auto error = std::string(message ? message : sqlite3_errmsg(db));
        sqlite3_free(message);
        throw SqlError(error);
    }
}

int deny_writes(void*, int action, const char*, const char*, const char*, const char*)
{
    switch (action)
    {
        case SQLITE_SELECT:
        case SQLITE_READ:
        case SQLITE_FUNCTION:
        case SQLITE_RECURSIVE: return SQLITE_OK;
        default: return SQLITE_DENY;
    }
}

struct Deadline
{
    std::chrono::steady_clock::time_point at;
};

int check_deadline(void* data)
{
    const auto* deadline = static_cast<const Deadline*>(data);
    return std::chrono::steady_clock::now() > deadline->at ? 1 : 0;
}

} // namespace

SqlEngine::SqlEngine(const Table& table, std::string_view registered_name)
{
    if (sqlite3_open_v2(":memory:", &_db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX, nullptr)
        != SQLITE_OK)
    {
        auto message = std::string(_db ? sqlite3_errmsg(_db) : "cannot open in-memory database");
        sqlite3_close(_db);
        _db = nullptr;
        throw SqlError(message);
    }

    try
    {
        auto name = quote_identifier(registered_name);
        auto create = "CREATE TABLE " + name + " (";
        auto insert = "INSERT INTO " + name + " VALUES (";
        for (std::size_t i = 0; i < table.column_count(); ++i)
        {
            create += (i ? ", " : "") + quote_identifier(table.columns()[i]);
            insert += i ? ", ?" : "?";
        }
        create += ")";
        insert += ")";
        exec(_db, create);

        exec(_db, "BEGIN");
        auto stmt = Statement {};
        if (sqlite3_prepare_v2(_db, insert.c_str(), -1, &stmt.handle, nullptr) != SQLITE_OK)
            throw SqlError(sqlite3_errmsg(_db));
        for (const auto& row: table.rows())
        {
            for (std::size_t i = 0; i < row.size(); ++i)
            {
                auto index = static_cast<int>(i + 1);
                sqlite3_int64 integer = 0;
                double real = 0.0;
                if (is_canonical_integer(row[i], integer))
                    sqlite3_bind_int64(stmt.handle, index, integer);
                else if (is_round_trip_real(row[i], real))
                    sqlite3_bind_double(stmt.handle, index, real);
                else
                    sqlite3_bind_text(stmt.handle, index, row[i].data(), static_cast<int>(row[i].size()),
                                      SQLITE_TRANSIENT);
            }
            if (sqlite3_step(stmt.handle) != SQLITE_DONE)
                throw SqlError(sqlite3_errmsg(_db));
            sqlite3_reset(stmt.handle);
        }
        exec(_db, "COMMIT");
        sqlite3_set_authorizer(_db, deny_writes, nullptr);
    }
    catch (...)
    {
        sqlite3_close(_db);
        _db = nullptr;
        throw;
    }
}

SqlEngine::~SqlEngine()
{
    sqlite3_close(_db);
}

SqlEngine::SqlEngine(SqlEngine&& other) noexcept: _db(std::exchange(other._db, nullptr)) {}

SqlEngine& SqlEngine::operator=(SqlEngine&& other) noexcept
{
    if (this != &other)
    {
        sqlite3_close(_db);
        _db = std::exchange(other._db, nullptr);
    }
    return *this;
}

Table SqlEngine::query(std::string_view sql, std::chrono::milliseconds budget) const
{
    if (!is_single_select(sql))
        throw SqlError("statement not allowed");

    auto stmt = Statement {};
    const char* tail = nullptr;
    auto code = std::string(text::trim(sql));
    if (sqlite3_prepare_v2(_db, code.c_str(), static_cast<int>(code.size()), &stmt.handle, &tail) != SQLITE_OK)
        throw SqlError(sqlite3_errmsg(_db));
    if (stmt.handle == nullptr || !sqlite3_stmt_readonly(stmt.handle))
        throw SqlError("statement not allowed");
    if (tail != nullptr && std::string_view(tail).find_first_not_of(" \t\r\n;") != std::string_view::npos)
        throw SqlError("statement not allowed");

    auto deadline = Deadline {std::chrono::steady_clock::now() + budget};
    sqlite3_progress_handler(_db, 10000, check_deadline, &deadline);

    int column_count = sqlite3_column_count(stmt.handle);
    auto columns = std::vector<std::string> {};
    for (int i = 0; i < column_count; ++i)
        columns.emplace_back(sqlite3_column_name(stmt.handle, i));

    auto rows = std::vector<Row> {};
    int rc = SQLITE_OK;
    while ((rc = sqlite3_step(stmt.handle)) == SQLITE_ROW)
    {
        auto row = Row {};
        row.reserve(static_cast<std::size_t>(column_count));
        for (int i = 0; i < column_count; ++i)
        {
            if (sqlite3_column_type(stmt.handle, i) == SQLITE_NULL)
            {
                row.emplace_back();
                continue;
            }
            const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt.handle, i));
            row.emplace_back(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt.handle, i)));
        }
        rows.push_back(std::move(row));
    }
    sqlite3_progress_handler(_db, 0, nullptr, nullptr);
    if (rc == SQLITE_INTERRUPT)
        throw SqlError("query exceeded its time budget");
    if (rc != SQLITE_DONE)
        throw SqlError(sqlite3_errmsg(_db));

    return Table("result", std::move(columns), std::move(rows));
}

} // namespace orchestra
