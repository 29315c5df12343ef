#include "leakhound/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace leakhound {

namespace {

const char* kPathWords[] = {"v1", "v2", "api", "cart", "view", "home", "feed", "items",
                            "list", "page", "media", "assets", "sync", "search", "detail",
                            "update", "prefs", "session", "events", "catalog"};
// Path vocabulary used only by negative flows, so a threshold on positive
// confidence has something to drop.
const char* kNegativeOnlyWords[] = {"telemetry", "healthcheck", "heartbeat", "metrics",
                                    "diagnostics", "uptime"};
const char* kBenignKeys[] = {"pagev", "sortv", "langv", "theme", "tab", "qty", "pos",
                             "step", "ref", "cachev", "limitv", "modev"};
const char* kBenignValues[] = {"asc", "desc", "dark", "light", "grid", "rows", "yes",
                               "no", "home", "main", "wide", "slim"};
const char* kFirstNames[] = {"arnav", "bela", "chetan", "disha", "eshan", "farah",
                             "gauri", "harsh", "ira", "jatin", "kavya", "lalit"};
const char* kLastNames[] = {"mehra", "nair", "oberoi", "pillai", "qazi", "rana",
                            "sethi", "tiwari", "uppal", "verma", "wadia", "yadav"};
const char* kMailDomains[] = {"mailhub.example", "postbox.example", "inboxly.example"};

enum class Subtype {
    email, phone, dob, gender, lat_long, android_id, advertising_id, imei,
    count
};

struct SubtypeInfo {
    const char* name;
    PiiClass cls;
    std::vector<const char*> keys;
};

const SubtypeInfo& subtype_info(Subtype s) {
    static const SubtypeInfo table[] = {
        {"email", PiiClass::user_identifier, {"email", "mail", "useremail"}},
        {"phone", PiiClass::user_identifier, {"phone", "msisdn", "mobile"}},
        {"dob", PiiClass::user_identifier, {"dob", "birthdate"}},
        {"gender", PiiClass::user_identifier, {"gender", "sex"}},
        {"lat_long", PiiClass::location, {"ll", "latlng", "geoloc"}},
        {"android_id", PiiClass::device_identifier, {"androidid", "aid"}},
        {"advertising_id", PiiClass::device_identifier, {"adid", "gaid", "idfa"}},
        {"imei", PiiClass::device_identifier, {"imei", "deviceid"}},
    };
    return table[static_cast<std::size_t>(s)];
}

template <std::size_t N>
const char* pick(std::mt19937_64& rng, const char* (&arr)[N]) {
    return arr[rng() % N];
}

std::string hex_with_letters(std::mt19937_64& rng, std::size_t len, std::size_t letter_stride) {
    static const char kHex[] = "0123456789abcdef";
    static const char kHexLetters[] = "abcdef";
    std::string s(len, '0');
    for (std::size_t i = 0; i < len; ++i) s[i] = kHex[rng() % 16];
    // Force letters at a fixed stride so the string can never read as a long
    // digit run (keeps the phone rule quiet).
    for (std::size_t i = 0; i < len; i += letter_stride) s[i] = kHexLetters[rng() % 6];
    return s;
}

std::string make_value(std::mt19937_64& rng, Subtype s) {
    char buf[64];
    switch (s) {
        case Subtype::email:
            return std::string(pick(rng, kFirstNames)) + "." + pick(rng, kLastNames) + "@" +
                   pick(rng, kMailDomains);
        case Subtype::phone: {
            std::string digits(10, '0');
            digits[0] = static_cast<char>('6' + rng() % 4);
            for (std::size_t i = 1; i < digits.size(); ++i)
                digits[i] = static_cast<char>('0' + rng() % 10);
            return rng() % 2 ? "+91" + digits : digits;
        }
        case Subtype::dob: {
            int year = 1960 + static_cast<int>(rng() % 45);
            int month = 1 + static_cast<int>(rng() % 12);
            int day = 1 + static_cast<int>(rng() % 28);
            std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
            return buf;
        }
        case Subtype::gender:
            return rng() % 2 ? "female" : "male";
        case Subtype::lat_long: {
            double lat = (static_cast<double>(rng() % 180000000) / 1e6) - 90.0;
            double lon = (static_cast<double>(rng() % 360000000) / 1e6) - 180.0;
            std::snprintf(buf, sizeof buf, "%.6f,%.6f", lat, lon);
            return buf;
        }
        case Subtype::android_id:
            return hex_with_letters(rng, 16, 5);
        case Subtype::advertising_id: {
            std::string u = hex_with_letters(rng, 32, 8);
            return u.substr(0, 8) + "-" + u.substr(8, 4) + "-" + u.substr(12, 4) + "-" +
                   u.substr(16, 4) + "-" + u.substr(20, 12);
        }
        case Subtype::imei: {
            std::string digits(15, '0');
            for (std::size_t i = 0; i < 14; ++i)
                digits[i] = static_cast<char>('0' + rng() % 10);
            // Luhn check digit.
            int sum = 0;
            bool twice = true;  // position 14 (0-based from the right of the full string)
            for (int i = 13; i >= 0; --i) {
                int d = digits[static_cast<std::size_t>(i)] - '0';
                if (twice) {
                    d *= 2;
                    if (d > 9) d -= 9;
                }
                sum += d;
                twice = !twice;
            }
            digits[14] = static_cast<char>('0' + (10 - sum % 10) % 10);
            return digits;
        }
        case Subtype::count: break;
    }
    throw std::logic_error("bad subtype");
}

struct Plant {
    Subtype subtype;
    std::string key;
    std::string value;
    bool in_body;
};

}  // namespace

std::vector<AppProfile> default_app_mix() {
    auto app = [](std::string name, AppCategory cat, OsKind os) {
        AppProfile p;
        p.domains = {"api." + name + ".example", "cdn." + name + ".example"};
        p.name = std::move(name);
        p.category = cat;
        p.os = os;
        return p;
    };
    return {
        app("chattr", AppCategory::Social, OsKind::android),
        app("pingme", AppCategory::Social, OsKind::ios),
        app("quizly", AppCategory::Education, OsKind::android),
        app("lexicond", AppCategory::Education, OsKind::windows),
        app("streambox", AppCategory::Entertainment, OsKind::android),
        app("tunewave", AppCategory::Entertainment, OsKind::ios),
        app("triplanner", AppCategory::Travel, OsKind::android),
        app("farefinder", AppCategory::Travel, OsKind::ios),
        app("cartly", AppCategory::Shopping, OsKind::android),
        app("dealmart", AppCategory::Shopping, OsKind::windows),
        app("pdfpal", AppCategory::Others, OsKind::android),
        app("torchpro", AppCategory::Others, OsKind::android),
    };
}

SynthResult generate_synthetic_corpus(const SynthSpec& spec) {
    if (spec.pii_rate < 0.0 || spec.pii_rate > 1.0)
        throw std::invalid_argument("pii_rate must be in [0, 1]");
    if (spec.app_mix.empty()) throw std::invalid_argument("app_mix must not be empty");

    std::mt19937_64 rng(spec.seed);
    const std::size_t n = spec.n_flows;
    const std::size_t n_positive =
        static_cast<std::size_t>(std::llround(spec.pii_rate * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> positive(n, 0);
    for (std::size_t i = 0; i < n_positive; ++i) positive[order[i]] = 1;

    SynthResult result;
    result.corpus.provenance = "synthetic seed=" + std::to_string(spec.seed) +
                               " n=" + std::to_string(n);
    result.corpus.flows.reserve(n);
    result.labeled.reserve(n);

    char idbuf[32];
    for (std::size_t i = 0; i < n; ++i) {
        const AppProfile& app = spec.app_mix[rng() % spec.app_mix.size()];
        HttpFlow flow;
        std::snprintf(idbuf, sizeof idbuf, "synth-%06zu", i);
        flow.flow_id = idbuf;
        flow.app_name = app.name;
        flow.category = app.category;
        flow.os = app.os;
        flow.domain = app.domains[rng() % app.domains.size()];
        flow.timestamp = 1700000000 + static_cast<std::int64_t>(i) * 13 +
                         static_cast<std::int64_t>(rng() % 7);

        const bool is_positive = positive[i];
        std::vector<Plant> plants;
        if (is_positive) {
            std::size_t n_plants = 1 + rng() % 3;
            std::vector<Subtype> pool;
            for (std::size_t s = 0; s < static_cast<std::size_t>(Subtype::count); ++s)
                pool.push_back(static_cast<Subtype>(s));
            std::shuffle(pool.begin(), pool.end(), rng);
            for (std::size_t p = 0; p < n_plants; ++p) {
                const SubtypeInfo& info = subtype_info(pool[p]);
                Plant plant;
                plant.subtype = pool[p];
                plant.key = info.keys[rng() % info.keys.size()];
                plant.value = make_value(rng, pool[p]);
                plant.in_body = rng() % 2 == 0;
                plants.push_back(std::move(plant));
            }
        }
        const bool any_body_plant =
            std::any_of(plants.begin(), plants.end(), [](const Plant& p) { return p.in_body; });
        const bool is_post = any_body_plant || rng() % 10 < 3;
        flow.method = is_post ? "POST" : "GET";

        // URL: two path segments plus benign query parameters. Negative flows
        // sometimes use path words positives never see.
        auto path_word = [&]() -> const char* {
            if (!is_positive && rng() % 2 == 0) return pick(rng, kNegativeOnlyWords);
            return pick(rng, kPathWords);
        };
        std::string url = std::string("/") + path_word() + "/" + path_word();
        std::size_t n_params = 1 + rng() % 3;
        for (std::size_t p = 0; p < n_params; ++p) {
            url += p == 0 ? '?' : '&';
            url += pick(rng, kBenignKeys);
            url += '=';
            if (rng() % 3 == 0) url += std::to_string(1 + rng() % 99);
            else url += pick(rng, kBenignValues);
        }

        std::string body;
        if (is_post) {
            std::size_t n_pairs = 1 + rng() % 3;
            for (std::size_t p = 0; p < n_pairs; ++p) {
                if (p) body += '&';
                body += pick(rng, kBenignKeys);
                body += '=';
                body += pick(rng, kBenignValues);
            }
        }

        // Append plants last and record exact value offsets.
        LabeledFlow labeled;
        std::vector<std::pair<Plant*, std::size_t>> offsets;
        for (Plant& plant : plants) {
            std::string& target = plant.in_body ? body : url;
            target += '&';
            target += plant.key;
            target += '=';
            offsets.emplace_back(&plant, target.size());
            target += plant.value;
        }

        flow.url = url;
        flow.body = body;
        flow.headers = {{"Host", flow.domain},
                        {"User-Agent", app.name + "/1." + std::to_string(1 + rng() % 9)},
                        {"Accept", "application/json"}};
        if (is_post) flow.headers.emplace_back("Content-Type", "application/x-www-form-urlencoded");

        labeled.flow = flow;
        labeled.label = is_positive;
        labeled.source = LabelSource::external;
        for (auto& [plant, offset] : offsets) {
            PiiFinding finding;
            finding.flow_id = flow.flow_id;
            const SubtypeInfo& info = subtype_info(plant->subtype);
            finding.category = {info.cls, info.name};
            finding.field = plant->in_body ? FlowField::body : FlowField::url;
            finding.begin = offset;
            finding.end = offset + plant->value.size();
            finding.value = plant->value;
            labeled.findings.push_back(std::move(finding));
        }
        std::sort(labeled.findings.begin(), labeled.findings.end(),
                  [](const PiiFinding& a, const PiiFinding& b) {
                      return std::tie(a.field, a.begin) < std::tie(b.field, b.begin);
                  });

        result.corpus.flows.push_back(std::move(flow));
        result.labeled.push_back(std::move(labeled));
    }
    return result;
}

}  // namespace leakhound
