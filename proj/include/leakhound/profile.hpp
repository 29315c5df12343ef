#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "leakhound/pii.hpp"

namespace leakhound {

struct ProfileEvent {
    std::int64_t timestamp = 0;
    std::string app_name;
    AppCategory category = AppCategory::Others;
    PiiCategory pii;
};

// Cross-app aggregation of everything leaked about one subject.
struct ProfileReport {
    std::string subject;
    std::vector<ProfileEvent> timeline;  // sorted by timestamp
    std::map<std::string, std::set<std::string>> merged_attributes;  // subtype -> values
};

// Callers pass the flows already attributed to the subject (for example all
// flows whose findings contain the subject key).
ProfileReport aggregate_profile(const std::vector<LabeledFlow>& flows,
                                const std::string& subject_key);

struct LeakTableRow {
    std::string app;
    AppCategory category = AppCategory::Others;
    std::set<std::string> location;
    std::set<std::string> user_identifiers;
    std::set<std::string> device_identifiers;
};

// One row per (app, category) seen in the input; cells list distinct leaked
// subtypes from positive flows.
std::vector<LeakTableRow> leak_table(const std::vector<LabeledFlow>& flows);

std::string leak_table_csv(const std::vector<LeakTableRow>& rows);
std::string leak_table_text(const std::vector<LeakTableRow>& rows);
std::string profile_report_text(const ProfileReport& report);

}  // namespace leakhound
