// SPDX-License-Identifier: Apache-2.0
#include <orchestra/error.hpp>
#include <orchestra/table.hpp>

#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace orchestra
{

std::vector<std::string> repair_column_names(std::vector<std::string> names)
{
    for (std::size_t i = 0; i < names.size(); ++i)
    {
        names[i] = std::string(text::trim(names[i]));
        if (names[i].empty())
            names[i] = "col" + std::to_string(i + 1);
    }

    // A suffixed name must not collide with a name that appears verbatim
    // anywhere in the header, so reserve all originals up front.
    auto taken = std::unordered_set<std::string>(names.begin(), names.end());
    auto seen = std::unordered_set<std::string> {};
    for (auto& name: names)
    {
        if (seen.insert(name).second)
            continue;
        for (int suffix = 2;; ++suffix)
        {
            auto candidate = name + "_" + std::to_string(suffix);
            if (!taken.contains(candidate))
            {
                name = candidate;
                taken.insert(candidate);
                seen.insert(candidate);
                break;
            }
        }
    }
    return names;
}

Table::Table(std::string name, std::vector<std::string> columns, std::vector<Row> rows):
    _name(std::move(name)), _columns(repair_column_names(std::move(columns))), _rows(std::move(rows))
{
    for (std::size_t i = 0; i < _rows.size(); ++i)
        if (_rows[i].size() != _columns.size())
            throw RaggedRowError(i, _columns.size(), _rows[i].size());
}

Table Table::renamed(std::string name) const
{
    auto copy = *this;
    copy._name = std::move(name);
    return copy;
}

TableFormat parse_table_format(std::string_view text)
{
    auto lowered = text::to_lower(text);
    if (lowered == "csv")
        return TableFormat::csv;
    if (lowered == "tsv")
        return TableFormat::tsv;
    if (lowered == "json" || lowered == "json-records" || lowered == "jsonl")
        return TableFormat::json_records;
    if (lowered == "md" || lowered == "markdown")
        return TableFormat::markdown;
    throw FormatError("unknown table format: " + std::string(text));
}

TableFormat table_format_for_path(std::string_view path)
{
    auto dot = path.rfind('.');
    if (dot == std::string_view::npos)
        return TableFormat::csv;
    try
    {
        return parse_table_format(path.substr(dot + 1));
    }
    catch (const FormatError&)
    {
        return TableFormat::csv;
    }
}

namespace
{

std::string_view strip_bom(std::string_view source)
{
    if (source.starts_with("\xEF\xBB\xBF"))
        source.remove_prefix(3);
    return source;
}

Table table_from_records(std::string name, std::vector<Row> records)
{
    if (records.empty())
        throw FormatError("missing header row");
    auto header = std::move(records.front());
    records.erase(records.begin());
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].size() != header.size())
            throw RaggedRowError(i, header.size(), records[i].size());
    return Table(std::move(name), std::move(header), std::move(records));
}

// RFC 4180 with two relaxations: LF line endings are accepted, and lines that
// are completely empty are skipped (writers quote empty single-cell rows).
std::vector<Row> parse_csv_records(std::string_view src)
{
    auto records = std::vector<Row> {};
    auto record = Row {};
    auto field = std::string {};
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&] {
        if (record_has_content)
        {
            end_field();
            records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        field_was_quoted = false;
        record_has_content = false;
    };

    for (std::size_t i = 0; i < src.size(); ++i)
    {
        char c = src[i];
        if (in_quotes)
        {
            if (c == '"')
            {
                if (i + 1 < src.size() && src[i + 1] == '"')
                {
                    field.push_back('"');
                    ++i;
                }
                else
                    in_quotes = false;
            }
            else
                field.push_back(c);
            continue;
        }
        switch (c)
        {
            case '"':
                if (!field.empty() || field_was_quoted)
                    throw FormatError("unexpected quote inside unquoted field at record "
                                      + std::to_string(records.size()));
                in_quotes = true;
                field_was_quoted = true;
                record_has_content = true;
                break;
            case ',':
                end_field();
                record_has_content = true;
                break;
            case '\r':
                if (i + 1 < src.size() && src[i + 1] == '\n')
                    ++i;
                end_record();
                break;
            case '\n': end_record(); break;
            default:
                if (field_was_quoted)
                    throw FormatError("text after closing quote at record " + std::to_string(records.size()));
                field.push_back(c);
                record_has_content = true;
                break;
        }
    }
    if (in_quotes)
        throw FormatError("unterminated quoted field");
    end_record();
    return records;
}

std::vector<Row> parse_tsv_records(std::string_view src)
{
    auto lines = text::split_lines(src);
    // With a single column a blank body line is an empty cell, not noise.
    bool single_column = !lines.empty() && lines.front().find('\t') == std::string_view::npos;
    auto records = std::vector<Row> {};
    for (auto line: lines)
    {
        if (line.empty() && (records.empty() || !single_column))
            continue;
        auto row = Row {};
        for (auto cell: text::split(line, '\t'))
            row.emplace_back(cell);
        records.push_back(std::move(row));
    }
    return records;
}

std::string json_cell(const nlohmann::ordered_json& value, const std::string& key)
{
    switch (value.type())
    {
        case nlohmann::json::value_t::string: return value.get<std::string>();
        case nlohmann::json::value_t::null: return {};
        case nlohmann::json::value_t::boolean: return value.get<bool>() ? "true" : "false";
        case nlohmann::json::value_t::number_integer:
        case nlohmann::json::value_t::number_unsigned:
        case nlohmann::json::value_t::number_float: return value.dump();
        default: throw FormatError("nested value for key '" + key + "' is not allowed in a flat record");
    }
}

Table parse_json_records(std::string_view src, std::string name)
{
    auto ordered = nlohmann::ordered_json {};
    try
    {
        ordered = nlohmann::ordered_json::parse(src);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw FormatError(std::string("invalid JSON: ") + e.what());
    }
    if (!ordered.is_array())
        throw FormatError("JSON records must be an array of objects");
    if (ordered.empty())
        throw FormatError("JSON records array is empty; cannot infer columns");
    if (!ordered.front().is_object())
        throw FormatError("record 0 is not an object");

    auto columns = std::vector<std::string> {};
    for (const auto& item: ordered.front().items())
        columns.push_back(item.key());

    auto rows = std::vector<Row> {};
    for (std::size_t i = 0; i < ordered.size(); ++i)
    {
        const auto& record = ordered[i];
        if (!record.is_object())
            throw FormatError("record " + std::to_string(i) + " is not an object");
        for (const auto& item: record.items())
            if (std::find(columns.begin(), columns.end(), item.key()) == columns.end())
                throw FormatError("record " + std::to_string(i) + " has unknown key '" + item.key() + "'");
        auto row = Row {};
        for (const auto& column: columns)
            row.push_back(record.contains(column) ? json_cell(record.at(column), column) : std::string {});
        rows.push_back(std::move(row));
    }
    return Table(std::move(name), std::move(columns), std::move(rows));
}

bool is_pipe_line(std::string_view line)
{
    return text::trim(line).starts_with('|');
}

std::vector<std::string> split_pipe_cells(std::string_view line)
{
    line = text::trim(line);
    line.remove_prefix(1);
    if (line.ends_with('|') && !line.ends_with("\\|"))
        line.remove_suffix(1);

    auto cells = std::vector<std::string> {};
    auto cell = std::string {};
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|')
        {
            cell.push_back('|');
            ++i;
        }
        else if (line[i] == '|')
        {
            cells.emplace_back(text::trim(cell));
            cell.clear();
        }
        else
            cell.push_back(line[i]);
    }
    cells.emplace_back(text::trim(cell));
    return cells;
}

bool is_separator_row(const std::vector<std::string>& cells)
{
    return std::all_of(cells.begin(), cells.end(), [](const std::string& cell) {
        auto body = std::string_view(cell);
        if (body.starts_with(':'))
            body.remove_prefix(1);
        if (body.ends_with(':'))
            body.remove_suffix(1);
        return !body.empty() && body.find_first_not_of('-') == std::string_view::npos;
    });
}

Table parse_markdown(std::string_view src, std::string name)
{
    auto lines = text::split_lines(src);
    auto it = std::find_if(lines.begin(), lines.end(), is_pipe_line);
    if (it == lines.end())
        throw FormatError("no markdown table found");
    auto header = split_pipe_cells(*it);
    ++it;
    if (it == lines.end() || !is_pipe_line(*it) || !is_separator_row(split_pipe_cells(*it)))
        throw FormatError("markdown table lacks a separator row");
    ++it;

    auto rows = std::vector<Row> {};
    for (; it != lines.end() && is_pipe_line(*it); ++it)
    {
        auto cells = split_pipe_cells(*it);
        if (cells.size() != header.size())
            throw RaggedRowError(rows.size(), header.size(), cells.size());
        rows.push_back(std::move(cells));
    }
    return Table(std::move(name), std::move(header), std::move(rows));
}

std::string markdown_cell(std::string_view cell)
{
    auto out = std::string {};
    out.reserve(cell.size());
    for (char c: cell)
    {
        if (c == '|')
            out += "\\|";
        else if (c == '\n' || c == '\r')
            out.push_back(' ');
        else
            out.push_back(c);
    }
    return out;
}

void append_markdown_row(std::string& out, const std::vector<std::string>& cells)
{
    out += "|";
    for (const auto& cell: cells)
    {
        out += ' ';
        out += markdown_cell(cell);
        out += " |";
    }
}

bool csv_needs_quotes(std::string_view cell)
{
    return cell.find_first_of(",\"\r\n") != std::string_view::npos;
}

std::string csv_cell(std::string_view cell, bool force_quotes)
{
    if (!force_quotes && !csv_needs_quotes(cell))
        return std::string(cell);
    auto out = std::string("\"");
    for (char c: cell)
    {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    out += '"';
    return out;
}

std::string tsv_cell(std::string_view cell)
{
    auto out = std::string(cell);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return out;
}

} // namespace

Table load_table(std::string_view source, TableFormat format, std::string name)
{
    source = strip_bom(source);
    switch (format)
    {
        case TableFormat::csv: return table_from_records(std::move(name), parse_csv_records(source));
        case TableFormat::tsv: return table_from_records(std::move(name), parse_tsv_records(source));
        case TableFormat::json_records: return parse_json_records(source, std::move(name));
        case TableFormat::markdown: return parse_markdown(source, std::move(name));
    }
    throw FormatError("unsupported table format");
}

Table load_table_file(const std::string& path, TableFormat format, std::string name)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open table file: " + path);
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    return load_table(buffer.str(), format, std::move(name));
}

std::string render_markdown(const Table& table, const RenderOptions& options)
{
    auto max_rows = std::max<std::size_t>(options.max_rows, 1);
    auto out = std::string {};
    append_markdown_row(out, table.columns());
    out += "\n|";
    for (std::size_t i = 0; i < table.column_count(); ++i)
        out += " --- |";

    if (table.empty())
    {
        out += '\n';
        out += kEmptyTableSentinel;
        return out;
    }

    auto shown = std::min(table.row_count(), max_rows);
    for (std::size_t i = 0; i < shown; ++i)
    {
        out += '\n';
        append_markdown_row(out, table.rows()[i]);
    }
    if (shown < table.row_count() && options.include_row_count_footer)
        out += "\n... (" + std::to_string(table.row_count()) + " rows total)";
    return out;
}

std::string table_to_delimited(const Table& table, TableFormat format)
{
    if (format != TableFormat::csv && format != TableFormat::tsv)
        throw FormatError("table_to_delimited supports csv and tsv only");

    bool csv = format == TableFormat::csv;
    // A lone empty cell would serialize to a blank line, which csv readers skip.
    bool quote_empty = table.column_count() == 1;

    auto out = std::string {};
    auto append_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i > 0)
                out += csv ? ',' : '\t';
            out += csv ? csv_cell(cells[i], quote_empty && cells[i].empty()) : tsv_cell(cells[i]);
        }
    };
    append_row(table.columns());
    for (const auto& row: table.rows())
    {
        out += '\n';
        append_row(row);
    }
    // Terminate so a trailing empty cell survives the trailing-newline trim.
    if (!csv && quote_empty && !table.rows().empty())
        out += '\n';
    return out;
}

std::string describe_schema(const Table& table)
{
    auto out = std::string {};
    for (std::size_t i = 0; i < table.column_count(); ++i)
    {
        if (i > 0)
            out += ", ";
        out += table.columns()[i];
    }
    return out;
}

} // namespace orchestra
