#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace multistage {

/// One per-subject, per-disease observation interval. entry_age is the
/// left-truncation age (0 in raw cohorts, the conditioning disease's onset
/// age in conditional views); event marks disease onset at exit_age.
struct EventRecord {
    std::int64_t subject_id = 0;
    std::string disease;
    double entry_age = 0.0;
    double exit_age = 0.0;
    bool event = false;
};

struct EventTable {
    std::vector<EventRecord> records;

    std::vector<std::string> disease_names() const;
};

/// CSV with header `subject_id,disease,entry_age,exit_age,event`; ages are
/// written with shortest round-trip formatting.
void write_event_table_csv(const EventTable& table, std::ostream& out);
void write_event_table_csv(const EventTable& table, const std::filesystem::path& path);

EventTable read_event_table_csv(std::istream& in);
EventTable read_event_table_csv(const std::filesystem::path& path);

}  // namespace multistage
