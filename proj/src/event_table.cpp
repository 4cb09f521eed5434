#include "multistage/event_table.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace multistage {

namespace {

constexpr std::string_view kHeader = "subject_id,disease,entry_age,exit_age,event";

void append_double(std::string& line, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc())
        throw std::runtime_error("event table: failed to format number");
    line.append(buf, ptr);
}

double parse_double(std::string_view field, const char* what, std::size_t line_no) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::invalid_argument("event table: bad " + std::string(what) + " at line " +
                                    std::to_string(line_no));
    return value;
}

}  // namespace

std::vector<std::string> EventTable::disease_names() const {
    std::vector<std::string> names;
    for (const auto& record : records)
        if (std::find(names.begin(), names.end(), record.disease) == names.end())
            names.push_back(record.disease);
    return names;
}

void write_event_table_csv(const EventTable& table, std::ostream& out) {
    std::string line(kHeader);
    line.push_back('\n');
    out << line;
    for (const auto& record : table.records) {
        line.clear();
        line += std::to_string(record.subject_id);
        line.push_back(',');
        line += record.disease;
        line.push_back(',');
        append_double(line, record.entry_age);
        line.push_back(',');
        append_double(line, record.exit_age);
        line.push_back(',');
        line.push_back(record.event ? '1' : '0');
        line.push_back('\n');
        out << line;
    }
}

void write_event_table_csv(const EventTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_event_table_csv(table, out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

EventTable read_event_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("event table: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw std::invalid_argument("event table: expected header '" + std::string(kHeader) +
                                    "', got '" + line + "'");

    EventTable table;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        std::array<std::string_view, 5> fields;
        std::string_view rest(line);
        for (int i = 0; i < 5; ++i) {
            const auto comma = rest.find(',');
            if (i < 4) {
                if (comma == std::string_view::npos)
                    throw std::invalid_argument("event table: expected 5 fields at line " +
                                                std::to_string(line_no));
                fields[i] = rest.substr(0, comma);
                rest.remove_prefix(comma + 1);
            } else {
                if (comma != std::string_view::npos)
                    throw std::invalid_argument("event table: too many fields at line " +
                                                std::to_string(line_no));
                fields[i] = rest;
            }
        }

        EventRecord record;
        {
            auto [ptr, ec] = std::from_chars(fields[0].data(),
                                             fields[0].data() + fields[0].size(),
                                             record.subject_id);
            if (ec != std::errc() || ptr != fields[0].data() + fields[0].size())
                throw std::invalid_argument("event table: bad subject_id at line " +
                                            std::to_string(line_no));
        }
        if (fields[1].empty())
            throw std::invalid_argument("event table: empty disease name at line " +
                                        std::to_string(line_no));
        record.disease = std::string(fields[1]);
        record.entry_age = parse_double(fields[2], "entry_age", line_no);
        record.exit_age = parse_double(fields[3], "exit_age", line_no);
        if (fields[4] == "1")
            record.event = true;
        else if (fields[4] == "0")
            record.event = false;
        else
            throw std::invalid_argument("event table: event must be 0 or 1 at line " +
                                        std::to_string(line_no));

        if (!(record.entry_age >= 0.0) || !(record.exit_age >= record.entry_age))
            throw std::invalid_argument(
                "event table: requires 0 <= entry_age <= exit_age at line " +
                std::to_string(line_no));

        std::string key = std::to_string(record.subject_id) + '\x1f' + record.disease;
        if (!seen.insert(std::move(key)).second)
            throw std::invalid_argument("event table: duplicate (subject, disease) at line " +
                                        std::to_string(line_no));

        table.records.push_back(std::move(record));
    }
    return table;
}

EventTable read_event_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_event_table_csv(in);
}

}  // namespace multistage
