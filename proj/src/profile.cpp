#include "leakhound/profile.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace leakhound {
namespace {

PiiClass class_of(const std::string& subtype) {
    if (subtype == "lat_long") return PiiClass::location;
    if (subtype == "android_id" || subtype == "advertising_id" || subtype == "imei")
        return PiiClass::device_identifier;
    return PiiClass::user_identifier;
}

std::string join(const std::set<std::string>& values) {
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ' ';
        out += v;
    }
    return out.empty() ? "-" : out;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

ProfileReport aggregate_profile(const std::vector<LabeledFlow>& flows,
                                const std::string& subject_key) {
    ProfileReport report;
    report.subject = subject_key;
    for (const auto& lf : flows) {
        if (!lf.label) continue;
        for (const auto& f : lf.findings) {
            report.timeline.push_back({lf.flow.timestamp, lf.flow.app_name,
                                       lf.flow.category, f.category});
            report.merged_attributes[f.category.subtype].insert(f.value);
        }
    }
    std::stable_sort(report.timeline.begin(), report.timeline.end(),
                     [](const ProfileEvent& a, const ProfileEvent& b) {
                         return a.timestamp < b.timestamp;
                     });
    return report;
}

std::vector<LeakTableRow> leak_table(const std::vector<LabeledFlow>& flows) {
    std::map<std::pair<std::string, int>, LeakTableRow> rows;
    for (const auto& lf : flows) {
        if (!lf.label) continue;
        auto key = std::make_pair(lf.flow.app_name, static_cast<int>(lf.flow.category));
        auto& row = rows[key];
        row.app = lf.flow.app_name;
        row.category = lf.flow.category;
        for (const auto& f : lf.findings) {
            switch (class_of(f.category.subtype)) {
                case PiiClass::location: row.location.insert(f.category.subtype); break;
                case PiiClass::user_identifier:
                    row.user_identifiers.insert(f.category.subtype);
                    break;
                case PiiClass::device_identifier:
                    row.device_identifiers.insert(f.category.subtype);
                    break;
            }
        }
    }
    std::vector<LeakTableRow> out;
    out.reserve(rows.size());
    for (auto& [_, row] : rows) out.push_back(std::move(row));
    return out;
}

std::string leak_table_csv(const std::vector<LeakTableRow>& rows) {
    std::ostringstream os;
    os << "app,category,location,user_identifiers,device_identifiers\n";
    for (const auto& r : rows) {
        os << csv_escape(r.app) << ',' << to_string(r.category) << ','
           << csv_escape(join(r.location)) << ',' << csv_escape(join(r.user_identifiers))
           << ',' << csv_escape(join(r.device_identifiers)) << '\n';
    }
    return os.str();
}

std::string leak_table_text(const std::vector<LeakTableRow>& rows) {
    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({"app", "category", "location", "user identifiers", "device identifiers"});
    for (const auto& r : rows)
        cells.push_back({r.app, std::string(to_string(r.category)), join(r.location),
                         join(r.user_identifiers), join(r.device_identifiers)});
    std::array<std::size_t, 5> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
    std::ostringstream os;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < 5; ++c) {
            os << cells[i][c];
            if (c + 1 < 5) os << std::string(width[c] - cells[i][c].size() + 2, ' ');
        }
        os << '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < 5; ++c) total += width[c] + (c + 1 < 5 ? 2 : 0);
            os << std::string(total, '-') << '\n';
        }
    }
    return os.str();
}

std::string profile_report_text(const ProfileReport& report) {
    std::ostringstream os;
    os << "subject: " << report.subject << '\n';
    os << "attributes:\n";
    for (const auto& [subtype, values] : report.merged_attributes) {
        os << "  " << subtype << ":";
        for (const auto& v : values) os << ' ' << v;
        os << '\n';
    }
    os << "timeline:\n";
    for (const auto& e : report.timeline)
        os << "  " << e.timestamp << "  " << e.app_name << " (" << to_string(e.category)
           << ")  " << e.pii.subtype << '\n';
    return os.str();
}

}  // namespace leakhound
