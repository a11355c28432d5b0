// SPDX-License-Identifier: Apache-2.0
#include <orchestra/bench.hpp>
#include <orchestra/error.hpp>

#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace orchestra
{

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace
{

std::string read_file(const fs::path& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot read " + path.string());
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return buffer.str();
}

std::string cell_text(const json& value)
{
    if (value.is_string())
        return value.get<std::string>();
    if (value.is_null())
        return "";
    if (value.is_boolean())
        return value.get<bool>() ? "true" : "false";
    if (value.is_number())
        return value.dump();
    throw FormatError("nested value in a table cell");
}

Table table_from_json(const json& columns, const json& rows, std::string name = "DF")
{
    if (!columns.is_array() || !rows.is_array())
        throw FormatError("table needs column and row arrays");
    auto names = std::vector<std::string> {};
    for (const auto& c: columns)
        names.push_back(cell_text(c));
    auto body = std::vector<Row> {};
    for (const auto& row: rows)
    {
        if (!row.is_array())
            throw FormatError("table row is not an array");
        auto cells = Row {};
        for (const auto& c: row)
            cells.push_back(cell_text(c));
        body.push_back(std::move(cells));
    }
    return Table(std::move(name), std::move(names), std::move(body));
}

std::vector<std::string> gold_list(const json& gold)
{
    auto out = std::vector<std::string> {};
    if (gold.is_array())
    {
        for (const auto& g: gold)
            out.push_back(cell_text(g));
    }
    else
    {
        out.push_back(cell_text(gold));
    }
    return out;
}

std::string string_field(const json& object, const char* key, bool required = true)
{
    auto it = object.find(key);
    if (it == object.end() || it->is_null())
    {
        if (required)
            throw FormatError(std::string("missing field '") + key + "'");
        return "";
    }
    return cell_text(*it);
}

// Wraps per-line failures with the 1-based line number.
template<typename Fn>
void for_each_json_line(std::string_view source, Fn&& fn)
{
    int line_no = 0;
    for (auto line: text::split_lines(source))
    {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        try
        {
            fn(json::parse(line));
        }
        catch (const json::exception& e)
        {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
        catch (const FormatError& e)
        {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

// Escapes used by the WikiTableQuestions TSV files.
std::string wikitq_unescape(std::string_view s)
{
    auto out = std::string {};
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (s[i] == '\\' && i + 1 < s.size())
        {
            ++i;
            out += s[i] == 'n' ? '\n' : s[i] == 'p' ? '|' : s[i];
        }
        else
        {
            out += s[i];
        }
    }
    return out;
}

Table load_tabfact_table(const fs::path& path)
{
    auto source = read_file(path);
    auto lines = text::split_lines(source);
    if (lines.empty())
        throw FormatError("empty table " + path.string());
    auto header = std::vector<std::string> {};
    for (auto c: text::split(lines.front(), '#'))
        header.emplace_back(c);
    auto rows = std::vector<Row> {};
    for (std::size_t i = 1; i < lines.size(); ++i)
    {
        auto row = Row {};
        for (auto c: text::split(lines[i], '#'))
            row.emplace_back(c);
        rows.push_back(std::move(row));
    }
    return Table("DF", std::move(header), std::move(rows));
}

std::optional<fs::path> first_existing(std::initializer_list<fs::path> candidates)
{
    for (const auto& c: candidates)
        if (fs::exists(c))
            return c;
    return std::nullopt;
}

std::optional<fs::path> first_with_extension(const fs::path& dir, std::string_view ext)
{
    if (!fs::is_directory(dir))
        return std::nullopt;
    auto found = std::vector<fs::path> {};
    for (const auto& entry: fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ext)
            found.push_back(entry.path());
    if (found.empty())
        return std::nullopt;
    std::sort(found.begin(), found.end());
    return found.front();
}

} // namespace

DatasetKind parse_dataset_kind(std::string_view name)
{
    auto lower = text::to_lower(name);
    if (lower == "unified-jsonl" || lower == "unified" || lower == "jsonl")
        return DatasetKind::unified_jsonl;
    if (lower == "wikitq")
        return DatasetKind::wikitq;
    if (lower == "tabfact")
        return DatasetKind::tabfact;
    if (lower == "tablebench")
        return DatasetKind::tablebench;
    throw FormatError("unknown dataset kind: " + std::string(name));
}

std::string_view to_string(DatasetKind kind)
{
    switch (kind)
    {
        case DatasetKind::unified_jsonl: return "unified-jsonl";
        case DatasetKind::wikitq: return "wikitq";
        case DatasetKind::tabfact: return "tabfact";
        case DatasetKind::tablebench: return "tablebench";
    }
    return "unknown";
}

std::vector<TQATask> parse_unified_jsonl(std::string_view source)
{
    auto tasks = std::vector<TQATask> {};
    for_each_json_line(source, [&](const json& line) {
        if (!line.is_object())
            throw FormatError("expected a JSON object");
        auto table = line.find("table");
        if (table == line.end() || !table->is_object())
            throw FormatError("missing field 'table'");
        auto gold = line.find("gold");
        if (gold == line.end())
            throw FormatError("missing field 'gold'");

        auto task = TQATask {
            .id = string_field(line, "id"),
            .table = table_from_json(table->value("columns", json::array()), table->value("rows", json::array())),
            .question = string_field(line, "question"),
            .gold_answers = gold_list(*gold),
        };
        if (text::trim(task.question).empty())
            throw FormatError("empty question");
        auto family = string_field(line, "family", false);
        if (!family.empty())
            task.family = family;
        auto hint = line.find("hint");
        task.answer_format_hint = hint != line.end() && hint->is_string() ? hint->get<std::string>()
                                                                          : std::string(default_answer_hint(task.family));
        tasks.push_back(std::move(task));
    });
    return tasks;
}

std::vector<TQATask> parse_wikitq_tsv(std::string_view source, const fs::path& root)
{
    auto tasks = std::vector<TQATask> {};
    auto lines = text::split_lines(source);
    std::size_t start = !lines.empty() && text::iequals_prefix(lines.front(), "id\t") ? 1 : 0;
    for (std::size_t i = start; i < lines.size(); ++i)
    {
        auto line_no = std::to_string(i + 1);
        if (text::trim(lines[i]).empty())
            continue;
        auto fields = text::split(lines[i], '\t');
        if (fields.size() < 4)
            throw FormatError("line " + line_no + ": expected id, utterance, context, targetValue");
        auto table_path = root / std::string(fields[2]);
        auto table = Table {};
        try
        {
            table = load_table(read_file(table_path), TableFormat::csv);
        }
        catch (const FormatError& e)
        {
            throw FormatError("line " + line_no + ": " + e.what());
        }
        tasks.push_back(TQATask {
            .id = std::string(fields[0]),
            .table = std::move(table),
            .question = wikitq_unescape(fields[1]),
            .gold_answers = {wikitq_unescape(fields[3])},
            .answer_format_hint = std::string(kShortAnswerHint),
            .family = "wikitq",
        });
    }
    return tasks;
}

std::vector<TQATask> parse_tabfact_json(std::string_view source, const fs::path& table_dir)
{
    auto doc = json {};
    try
    {
        doc = json::parse(source);
    }
    catch (const json::exception& e)
    {
        throw FormatError(std::string("tabfact statements: ") + e.what());
    }
    if (!doc.is_object())
        throw FormatError("tabfact statements: expected an object keyed by table id");

    auto tasks = std::vector<TQATask> {};
    for (const auto& [table_id, entry]: doc.items())
    {
        if (!entry.is_array() || entry.size() < 2 || !entry[0].is_array() || !entry[1].is_array()
            || entry[0].size() != entry[1].size())
            throw FormatError("tabfact entry " + table_id + ": expected [statements, labels, ...]");
        auto table = load_tabfact_table(table_dir / table_id);
        for (std::size_t i = 0; i < entry[0].size(); ++i)
        {
            auto label = entry[1][i];
            if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1))
                throw FormatError("tabfact entry " + table_id + ": labels must be 0 or 1");
            tasks.push_back(TQATask {
                .id = table_id + "-" + std::to_string(i),
                .table = table,
                .question = cell_text(entry[0][i]),
                .gold_answers = {label.get<int>() == 1 ? "yes" : "no"},
                .answer_format_hint = std::string(kYesNoAnswerHint),
                .family = "tabfact",
            });
        }
    }
    return tasks;
}

std::vector<TQATask> parse_tablebench_jsonl(std::string_view source)
{
    auto tasks = std::vector<TQATask> {};
    for_each_json_line(source, [&](const json& line) {
        auto table = line.at("table");
        if (table.is_string())
            table = json::parse(table.get<std::string>());
        tasks.push_back(TQATask {
            .id = string_field(line, "id"),
            .table = table_from_json(table.at("columns"), table.at("data")),
            .question = string_field(line, "question"),
            .gold_answers = {string_field(line, "answer")},
            .answer_format_hint = std::string(kShortAnswerHint),
            .family = "tablebench",
        });
    });
    return tasks;
}

std::vector<TQATask> load_dataset(const fs::path& path, DatasetKind kind)
{
    bool is_dir = fs::is_directory(path);
    switch (kind)
    {
        case DatasetKind::unified_jsonl: return parse_unified_jsonl(read_file(path));

        case DatasetKind::wikitq:
        {
            auto file = is_dir ? first_existing({path / "data" / "pristine-unseen-tables.tsv",
                                                 path / "pristine-unseen-tables.tsv"})
                                     .value_or(first_with_extension(path / "data", ".tsv")
                                                   .value_or(first_with_extension(path, ".tsv").value_or(fs::path {})))
                               : path;
            if (file.empty())
                throw FormatError("no WikiTableQuestions TSV under " + path.string());
            auto root = fs::exists(file.parent_path() / "csv") ? file.parent_path() : file.parent_path().parent_path();
            return parse_wikitq_tsv(read_file(file), root);
        }

        case DatasetKind::tabfact:
        {
            auto file = is_dir ? first_existing({path / "tokenized_data" / "test_examples.json",
                                                 path / "test_examples.json", path / "data" / "test_examples.json"})
                                     .value_or(first_with_extension(path, ".json").value_or(fs::path {}))
                               : path;
            if (file.empty())
                throw FormatError("no TabFact statements file under " + path.string());
            auto base = file.parent_path();
            auto tables = first_existing({base / "all_csv", base.parent_path() / "data" / "all_csv",
                                          base.parent_path() / "all_csv"});
            if (!tables)
                throw FormatError("no all_csv table directory next to " + file.string());
            return parse_tabfact_json(read_file(file), *tables);
        }

        case DatasetKind::tablebench:
        {
            auto file = is_dir ? first_existing({path / "TableBench.jsonl"})
                                     .value_or(first_with_extension(path, ".jsonl").value_or(fs::path {}))
                               : path;
            if (file.empty())
                throw FormatError("no TableBench JSONL under " + path.string());
            return parse_tablebench_jsonl(read_file(file));
        }
    }
    throw FormatError("unknown dataset kind");
}

std::string task_to_unified_json(const TQATask& task)
{
    auto line = nlohmann::ordered_json {
        {"id", task.id},
        {"question", task.question},
        {"gold", task.gold_answers},
        {"table", {{"columns", task.table.columns()}, {"rows", task.table.rows()}}},
        {"hint", task.answer_format_hint},
        {"family", task.family},
    };
    return line.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

void write_unified_jsonl(const std::vector<TQATask>& tasks, std::ostream& out)
{
    for (const auto& task: tasks)
        out << task_to_unified_json(task) << '\n';
}

} // namespace orchestra
