// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace orchestra
{

using Row = std::vector<std::string>;

/// Rectangular grid of text cells with a header row.
///
/// Construction repairs the header: names are trimmed, blank names become
/// `col{i}` (1-based position) and duplicates are suffixed `_2`, `_3`, ...
/// in order of appearance. Every row must have exactly one cell per column.
/// Cells are kept as text; numeric interpretation is left to consumers.
///
/// Instances are immutable once built and safe to share across threads.
class Table
{
  public:
    Table() = default;

    /// Throws RaggedRowError if any row length differs from the column count.
    Table(std::string name, std::vector<std::string> columns, std::vector<Row> rows = {});

    [[nodiscard]] const std::string& name() const noexcept { return _name; }
    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return _columns; }
    [[nodiscard]] const std::vector<Row>& rows() const noexcept { return _rows; }

    [[nodiscard]] std::size_t column_count() const noexcept { return _columns.size(); }
    [[nodiscard]] std::size_t row_count() const noexcept { return _rows.size(); }
    [[nodiscard]] bool empty() const noexcept { return _rows.empty(); }

    /// Same cells under a different identifier.
    [[nodiscard]] Table renamed(std::string name) const;

    /// Equality is structural: columns and cells. The name is a label only.
    friend bool operator==(const Table& lhs, const Table& rhs)
    {
        return lhs._columns == rhs._columns && lhs._rows == rhs._rows;
    }

  private:
    std::string _name;
    std::vector<std::string> _columns;
    std::vector<Row> _rows;
};

/// Applies the header repair rules used by the Table constructor.
std::vector<std::string> repair_column_names(std::vector<std::string> names);

enum class TableFormat
{
    csv,
    tsv,
    json_records,
    markdown,
};

/// Parses "csv", "tsv", "json", "json-records", "md", "markdown".
TableFormat parse_table_format(std::string_view text);

/// Guesses the format from a file extension; defaults to csv.
TableFormat table_format_for_path(std::string_view path);

struct RenderOptions
{
    std::size_t max_rows = 30;
    bool include_row_count_footer = true;
};

/// Line rendered in place of body rows when a table has no rows.
inline constexpr std::string_view kEmptyTableSentinel = "(empty result, 0 rows)";

/// Throws FormatError on unparseable input, RaggedRowError (csv/tsv/markdown)
/// with the offending body row index.
Table load_table(std::string_view source, TableFormat format, std::string name = "DF");

/// Reads a file and dispatches on `format`.
Table load_table_file(const std::string& path, TableFormat format, std::string name = "DF");

/// GitHub-style pipe table. Pipes inside cells are escaped as `\|`; newlines
/// inside cells are rendered as spaces.
std::string render_markdown(const Table& table, const RenderOptions& options = {});

/// CSV uses RFC 4180 quoting and joins records with `\n` (no trailing
/// newline). TSV has no quoting; tabs and newlines in cells become spaces.
std::string table_to_delimited(const Table& table, TableFormat format);

/// Comma-separated header names, used where a prompt needs the schema only.
std::string describe_schema(const Table& table);

} // namespace orchestra
