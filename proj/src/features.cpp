#include "leakhound/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "leakhound/errors.hpp"
#include "leakhound/stemmer.hpp"
#include "leakhound/threads.hpp"
#include "leakhound/tokenize.hpp"

namespace leakhound {
namespace {

constexpr std::size_t kNoColumn = std::numeric_limits<std::size_t>::max();

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = ascii_lower(c);
    return out;
}

// One training row: the token bag of a flow plus per-flow bookkeeping.
struct RowStream {
    std::string id;
    int label = 0;
    bool oversampled = false;
    std::vector<std::string> bag;   // all tokens in stream order
    std::vector<std::string> uniq;  // sorted distinct tokens
};

// Token distance to the nearest leaked value within one field's token stream.
// dist 0 = the value itself, dist 1 = the key next to it, and so on.
RowStream make_row(const LabeledFlow& lf, int radius,
                   std::unordered_set<std::string>& leak_union,
                   std::unordered_set<std::string>& key_union) {
    RowStream row;
    row.id = lf.flow.flow_id;
    row.label = lf.label ? 1 : 0;
    row.bag = tokenize(lf.flow.method);
    constexpr int kFar = std::numeric_limits<int>::max();
    for (FlowField field : {FlowField::url, FlowField::header, FlowField::body}) {
        const std::string text = field_text(lf.flow, field);
        auto spans = tokenize_spans(text);
        std::vector<std::pair<std::size_t, std::size_t>> hits;
        for (const auto& f : lf.findings)
            if (f.field == field) hits.emplace_back(f.begin, f.end);
        std::vector<int> dist(spans.size(), kFar);
        if (!hits.empty()) {
            for (std::size_t i = 0; i < spans.size(); ++i)
                for (const auto& [b, e] : hits)
                    if (spans[i].begin < e && b < spans[i].end) {
                        dist[i] = 0;
                        break;
                    }
            for (std::size_t i = 1; i < spans.size(); ++i)
                if (dist[i - 1] != kFar && dist[i - 1] + 1 < dist[i]) dist[i] = dist[i - 1] + 1;
            for (std::size_t i = spans.size(); i-- > 1;)
                if (dist[i] != kFar && dist[i] + 1 < dist[i - 1]) dist[i - 1] = dist[i] + 1;
        }
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (dist[i] <= radius) leak_union.insert(spans[i].token);
            if (dist[i] == 1) key_union.insert(spans[i].token);
            row.bag.push_back(std::move(spans[i].token));
        }
    }
    row.uniq = row.bag;
    std::sort(row.uniq.begin(), row.uniq.end());
    row.uniq.erase(std::unique(row.uniq.begin(), row.uniq.end()), row.uniq.end());
    return row;
}

bool base64ish_high_entropy(const std::string& t) {
    if (t.size() < 20) return false;
    for (unsigned char c : t) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '+' || c == '/' || c == '=';
        if (!ok) return false;
    }
    std::array<std::size_t, 256> count{};
    for (unsigned char c : t) ++count[c];
    double bits = 0.0;
    for (std::size_t k : count) {
        if (!k) continue;
        double q = static_cast<double>(k) / static_cast<double>(t.size());
        bits -= q * std::log2(q);
    }
    return bits >= 3.5;
}

std::vector<std::string> flow_tokens(const HttpFlow& flow) {
    std::vector<std::string> out = tokenize(flow.method);
    for (FlowField field : {FlowField::url, FlowField::header, FlowField::body}) {
        auto toks = tokenize(field_text(flow, field));
        out.insert(out.end(), std::make_move_iterator(toks.begin()),
                   std::make_move_iterator(toks.end()));
    }
    return out;
}

void vectorize_row(const HttpFlow& flow, const Vocabulary& vocab, FeatureMatrix& m,
                   std::size_t r) {
    for (const auto& tok : flow_tokens(flow)) {
        const std::string* key = &tok;
        std::string canon;
        if (vocab.canonical) {
            auto c = canonical_token(tok);
            if (!c) continue;
            canon = std::move(*c);
            key = &canon;
        }
        auto it = vocab.index.find(*key);
        if (it != vocab.index.end()) m.set(r, it->second, 1);
    }
}

template <class GetFlow, class GetLabel, class GetId>
FeatureMatrix vectorize_impl(std::size_t n, GetFlow flow_at, GetLabel label_at, GetId id_at,
                             const Vocabulary& vocab, bool allow_parallel) {
    if (vocab.size() == 0) throw EmptyVocabulary("cannot vectorize with an empty vocabulary");
    FeatureMatrix m;
    m.resize(n, vocab.size());
    for (std::size_t i = 0; i < n; ++i) {
        m.labels[i] = label_at(i);
        m.row_ids[i] = id_at(i);
    }
#ifdef _OPENMP
    if (allow_parallel && parallel_enabled()) {
#pragma omp parallel for schedule(dynamic, 64) num_threads(thread_count())
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            vectorize_row(flow_at(static_cast<std::size_t>(i)), vocab, m,
                          static_cast<std::size_t>(i));
        return m;
    }
#else
    (void)allow_parallel;
#endif
    for (std::size_t i = 0; i < n; ++i) vectorize_row(flow_at(i), vocab, m, i);
    return m;
}

}  // namespace

void Vocabulary::rebuild_index() {
    index.clear();
    index.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) index[tokens[i]] = i;
}

void FeatureMatrix::resize(std::size_t rows, std::size_t cols) {
    n_rows = rows;
    n_cols = cols;
    data.assign(rows * cols, 0);
    labels.assign(rows, 0);
    row_ids.assign(rows, std::string());
    oversampled.assign(rows, 0);
}

std::vector<std::string> default_stop_words() {
    return {"http",          "https",          "www",           "com",
            "net",           "org",            "get",           "post",
            "put",           "delete",         "head",          "options",
            "patch",         "host",           "user-agent",    "accept",
            "accept-encoding", "accept-language", "content-type", "content-length",
            "connection",    "keep-alive",     "cache-control", "no-cache",
            "pragma",        "cookie",         "set-cookie",    "referer",
            "origin",        "authorization",  "text",          "html",
            "json",          "xml",            "charset",       "utf-8",
            "gzip",          "deflate",        "br",            "identity",
            "mozilla",       "windows",        "linux",         "android",
            "applewebkit",   "chrome",         "safari",        "version",
            "mobile",        "okhttp"};
}

std::vector<double> tfidf_scores(const std::vector<std::size_t>& df, std::size_t n) {
    std::vector<double> out;
    out.reserve(df.size());
    for (std::size_t d : df) {
        if (d == 0 || n == 0) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(static_cast<double>(d) *
                      std::log(static_cast<double>(n) / static_cast<double>(d)));
    }
    return out;
}

double percentile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("percentile of an empty value set");
    if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= values.size()) return values.back();
    double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BuildResult build_matrix(const std::vector<LabeledFlow>& flows, const FeatureBuildConfig& cfg) {
    if (cfg.freq_threshold < 1) throw ConfigError("freq_threshold must be at least 1");
    if (cfg.adjacency_radius < 0) throw ConfigError("adjacency_radius must be nonnegative");

    BuildResult out;
    std::unordered_set<std::string> leak_union;
    std::unordered_set<std::string> key_union;
    std::vector<RowStream> rows;
    rows.reserve(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        LabeledFlow randomized = randomize_pii_labeled(flows[i], per_flow_seed(cfg.seed, i));
        rows.push_back(make_row(randomized, cfg.adjacency_radius, leak_union, key_union));
    }

    std::vector<std::string> order;  // first occurrence across row bags
    std::unordered_map<std::string, std::size_t> df;
    std::unordered_map<std::string, std::vector<std::size_t>> rows_of;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const auto& t : rows[i].bag)
            if (df.emplace(t, 0).second) order.push_back(t);
        for (const auto& t : rows[i].uniq) {
            ++df[t];
            rows_of[t].push_back(i);
        }
    }
    out.trace.n_initial = order.size();

    enum class Stage { kept, freq, tfidf, stop, leak };
    std::unordered_map<std::string, Stage> dropped;
    auto kept = [&](const std::string& t) { return dropped.find(t) == dropped.end(); };

    const auto freq_min = static_cast<std::size_t>(cfg.freq_threshold);
    for (const auto& t : order)
        if (df[t] < freq_min && !key_union.count(t)) dropped[t] = Stage::freq;

    // Key tokens below the frequency floor get their flows duplicated until
    // they reach it. Duplicates raise the df of everything they contain.
    std::vector<RowStream> dups;
    std::vector<std::size_t> dup_serial(rows.size(), 0);
    for (const auto& t : order) {
        if (!key_union.count(t)) continue;
        const auto& sources = rows_of[t];
        std::size_t cycle = 0;
        while (df[t] < freq_min) {
            std::size_t src = sources[cycle % sources.size()];
            ++cycle;
            RowStream dup = rows[src];
            dup.id += "#" + std::to_string(++dup_serial[src]);
            dup.oversampled = true;
            for (const auto& u : dup.uniq) ++df[u];
            dups.push_back(std::move(dup));
        }
    }
    out.trace.n_oversampled_rows = dups.size();
    const std::size_t n_total = rows.size() + dups.size();

    std::vector<std::pair<const std::string*, double>> scored;
    std::vector<double> score_values;
    for (const auto& t : order) {
        if (!kept(t)) continue;
        double s = static_cast<double>(df[t]) *
                   std::log(static_cast<double>(n_total) / static_cast<double>(df[t]));
        scored.emplace_back(&t, s);
        score_values.push_back(s);
    }
    double tfidf_cut = cfg.tfidf_threshold;
    if (tfidf_cut < 0.0)
        tfidf_cut = score_values.empty() ? 0.0 : percentile_linear(score_values, 75.0);
    out.trace.tfidf_threshold_used = tfidf_cut;
    for (const auto& [t, s] : scored)
        if (s > tfidf_cut) dropped[*t] = Stage::tfidf;

    std::unordered_set<std::string> stop;
    for (const auto& w : cfg.stop_words.empty() ? default_stop_words() : cfg.stop_words)
        stop.insert(lower(w));
    for (const auto& t : order)
        if (kept(t) && stop.count(lower(t))) dropped[t] = Stage::stop;

    for (const auto& t : order)
        if (kept(t) && leak_union.count(t)) dropped[t] = Stage::leak;

    for (const auto& t : order) {
        if (!kept(t)) continue;
        out.vocab.index.emplace(t, out.vocab.tokens.size());
        out.vocab.tokens.push_back(t);
        out.vocab.doc_freq.push_back(df[t]);
    }
    if (out.vocab.tokens.empty()) throw EmptyVocabulary("no tokens survive feature filtering");
    out.vocab.tfidf = tfidf_scores(out.vocab.doc_freq, n_total);

    out.matrix.resize(n_total, out.vocab.size());
    auto fill = [&](const RowStream& row, std::size_t r) {
        out.matrix.labels[r] = row.label;
        out.matrix.row_ids[r] = row.id;
        out.matrix.oversampled[r] = row.oversampled ? 1 : 0;
        for (const auto& u : row.uniq) {
            auto it = out.vocab.index.find(u);
            if (it != out.vocab.index.end()) out.matrix.set(r, it->second, 1);
        }
    };
    for (std::size_t i = 0; i < rows.size(); ++i) fill(rows[i], i);
    for (std::size_t i = 0; i < dups.size(); ++i) fill(dups[i], rows.size() + i);

    for (const auto& [t, stage] : dropped) {
        switch (stage) {
            case Stage::freq: out.trace.freq_dropped.push_back(t); break;
            case Stage::tfidf: out.trace.tfidf_dropped.push_back(t); break;
            case Stage::stop: out.trace.stop_dropped.push_back(t); break;
            case Stage::leak: out.trace.leak_dropped.push_back(t); break;
            case Stage::kept: break;
        }
    }
    std::sort(out.trace.freq_dropped.begin(), out.trace.freq_dropped.end());
    std::sort(out.trace.tfidf_dropped.begin(), out.trace.tfidf_dropped.end());
    std::sort(out.trace.stop_dropped.begin(), out.trace.stop_dropped.end());
    std::sort(out.trace.leak_dropped.begin(), out.trace.leak_dropped.end());
    return out;
}

std::optional<std::string> canonical_token(const std::string& token) {
    std::string t = lower(token);
    for (int i = 0; i < 8; ++i) {
        std::string s = porter_stem(t);
        if (s == t) break;
        t = std::move(s);
    }
    if (base64ish_high_entropy(t)) return std::nullopt;
    if (t.size() > 70 || t.size() < 2) return std::nullopt;
    return t;
}

CanonicalMap canonicalize_features(const Vocabulary& vocab) {
    CanonicalMap out;
    out.vocab.canonical = true;
    out.old_to_new.assign(vocab.tokens.size(), kNoColumn);
    auto df_of = [&](std::size_t i) {
        return i < vocab.doc_freq.size() ? vocab.doc_freq[i] : std::size_t{0};
    };
    auto tfidf_of = [&](std::size_t i) { return i < vocab.tfidf.size() ? vocab.tfidf[i] : 0.0; };
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        auto c = canonical_token(vocab.tokens[i]);
        if (!c) continue;
        auto it = out.vocab.index.find(*c);
        if (it == out.vocab.index.end()) {
            out.old_to_new[i] = out.vocab.tokens.size();
            out.vocab.index.emplace(*c, out.vocab.tokens.size());
            out.vocab.tokens.push_back(std::move(*c));
            out.vocab.doc_freq.push_back(df_of(i));
            out.vocab.tfidf.push_back(tfidf_of(i));
        } else {
            // Merged variants pool their counts and scores. The counts are an
            // upper bound when variants co-occur in one flow; matrix-level
            // canonicalization recomputes both exactly.
            out.old_to_new[i] = it->second;
            out.vocab.doc_freq[it->second] += df_of(i);
            out.vocab.tfidf[it->second] += tfidf_of(i);
        }
    }
    return out;
}

CanonicalizeResult canonicalize_matrix(const FeatureMatrix& matrix, const Vocabulary& vocab) {
    if (matrix.n_cols != vocab.tokens.size())
        throw DimensionMismatch("matrix and vocabulary disagree on column count");
    CanonicalMap map = canonicalize_features(vocab);
    if (map.vocab.tokens.empty())
        throw EmptyVocabulary("canonicalization removed every feature");
    CanonicalizeResult out;
    out.vocab = std::move(map.vocab);
    out.matrix.resize(matrix.n_rows, out.vocab.size());
    out.matrix.labels = matrix.labels;
    out.matrix.row_ids = matrix.row_ids;
    out.matrix.oversampled = matrix.oversampled;
    for (std::size_t r = 0; r < matrix.n_rows; ++r)
        for (std::size_t c = 0; c < matrix.n_cols; ++c) {
            if (!matrix.at(r, c) || map.old_to_new[c] == kNoColumn) continue;
            out.matrix.set(r, map.old_to_new[c], 1);
        }
    for (std::size_t c = 0; c < vocab.tokens.size(); ++c)
        if (map.old_to_new[c] == kNoColumn) out.removed.push_back(vocab.tokens[c]);
    // Exact counts for the merged columns, replacing the pooled estimates.
    out.vocab.doc_freq.assign(out.vocab.size(), 0);
    for (std::size_t r = 0; r < out.matrix.n_rows; ++r)
        for (std::size_t c = 0; c < out.matrix.n_cols; ++c)
            out.vocab.doc_freq[c] += out.matrix.at(r, c);
    out.vocab.tfidf = tfidf_scores(out.vocab.doc_freq, out.matrix.n_rows);
    return out;
}

std::vector<ConfidenceScore> confidence_scores(const FeatureMatrix& m, const Vocabulary& vocab) {
    if (m.n_cols != vocab.tokens.size())
        throw DimensionMismatch("matrix and vocabulary disagree on column count");
    std::vector<ConfidenceScore> out(m.n_cols);
    for (std::size_t c = 0; c < m.n_cols; ++c) out[c].token = vocab.tokens[c];
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        bool pos = m.labels[r] != 0;
        for (std::size_t c = 0; c < m.n_cols; ++c) {
            if (!m.at(r, c)) continue;
            ++out[c].k_all;
            if (pos) ++out[c].k_pii;
        }
    }
    for (auto& s : out)
        s.p = s.k_all ? static_cast<double>(s.k_pii) / static_cast<double>(s.k_all) : 0.0;
    return out;
}

ConfidenceFilterResult apply_confidence_filter(const FeatureMatrix& m, const Vocabulary& vocab,
                                               double threshold) {
    auto scores = confidence_scores(m, vocab);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < scores.size(); ++c)
        if (scores[c].p > threshold) keep.push_back(c);
    if (keep.empty())
        throw EmptyVocabulary("no features above the confidence threshold");
    ConfidenceFilterResult out;
    out.vocab = slice_vocab(vocab, keep);
    out.matrix = slice_columns(m, keep);
    out.kept.reserve(keep.size());
    for (std::size_t c : keep) out.kept.push_back(scores[c]);
    return out;
}

FeatureMatrix slice_columns(const FeatureMatrix& m, const std::vector<std::size_t>& keep) {
    FeatureMatrix out;
    out.resize(m.n_rows, keep.size());
    out.labels = m.labels;
    out.row_ids = m.row_ids;
    out.oversampled = m.oversampled;
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t j = 0; j < keep.size(); ++j) out.set(r, j, m.at(r, keep[j]));
    return out;
}

Vocabulary slice_vocab(const Vocabulary& vocab, const std::vector<std::size_t>& keep) {
    Vocabulary out;
    out.canonical = vocab.canonical;
    out.tokens.reserve(keep.size());
    for (std::size_t c : keep) {
        out.tokens.push_back(vocab.tokens[c]);
        if (c < vocab.doc_freq.size()) out.doc_freq.push_back(vocab.doc_freq[c]);
        if (c < vocab.tfidf.size()) out.tfidf.push_back(vocab.tfidf[c]);
    }
    out.rebuild_index();
    return out;
}

FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab) {
    return vectorize_impl(
        corpus.flows.size(), [&](std::size_t i) -> const HttpFlow& { return corpus.flows[i]; },
        [](std::size_t) { return 0; },
        [&](std::size_t i) { return corpus.flows[i].flow_id; }, vocab, true);
}

FeatureMatrix vectorize(const std::vector<LabeledFlow>& flows, const Vocabulary& vocab) {
    return vectorize_impl(
        flows.size(), [&](std::size_t i) -> const HttpFlow& { return flows[i].flow; },
        [&](std::size_t i) { return flows[i].label ? 1 : 0; },
        [&](std::size_t i) { return flows[i].flow.flow_id; }, vocab, true);
}

FeatureMatrix vectorize_serial(const Corpus& corpus, const Vocabulary& vocab) {
    return vectorize_impl(
        corpus.flows.size(), [&](std::size_t i) -> const HttpFlow& { return corpus.flows[i]; },
        [](std::size_t) { return 0; },
        [&](std::size_t i) { return corpus.flows[i].flow_id; }, vocab, false);
}

FeatureMatrix vectorize_serial(const std::vector<LabeledFlow>& flows, const Vocabulary& vocab) {
    return vectorize_impl(
        flows.size(), [&](std::size_t i) -> const HttpFlow& { return flows[i].flow; },
        [&](std::size_t i) { return flows[i].label ? 1 : 0; },
        [&](std::size_t i) { return flows[i].flow.flow_id; }, vocab, false);
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UnsupportedFormat("cannot open " + path + " for writing");
    os << "lhvocab 1\n";
    os << "tokens " << vocab.tokens.size() << " canonical " << (vocab.canonical ? 1 : 0) << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        std::size_t df = i < vocab.doc_freq.size() ? vocab.doc_freq[i] : 0;
        double score = i < vocab.tfidf.size() ? vocab.tfidf[i] : 0.0;
        os << vocab.tokens[i] << '\t' << df << '\t' << score << "\n";
    }
    if (!os) throw UnsupportedFormat("write failed for " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UnsupportedFormat("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "lhvocab 1")
        throw UnsupportedFormat("bad vocabulary header in " + path);
    std::string kw1, kw2;
    std::size_t n = 0;
    int canonical = 0;
    if (!std::getline(is, line)) throw UnsupportedFormat("truncated vocabulary in " + path);
    {
        std::istringstream ls(line);
        if (!(ls >> kw1 >> n >> kw2 >> canonical) || kw1 != "tokens" || kw2 != "canonical")
            throw UnsupportedFormat("bad vocabulary size line in " + path);
    }
    Vocabulary out;
    out.canonical = canonical != 0;
    out.tokens.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw UnsupportedFormat("truncated vocabulary in " + path);
        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw UnsupportedFormat("bad vocabulary entry in " + path);
        out.tokens.push_back(line.substr(0, tab1));
        std::string df_text = line.substr(tab1 + 1, tab2 - tab1 - 1);
        std::string score_text = line.substr(tab2 + 1);
        try {
            std::size_t used = 0;
            out.doc_freq.push_back(std::stoull(df_text, &used));
            if (used != df_text.size()) throw std::invalid_argument("trailing");
            out.tfidf.push_back(std::stod(score_text, &used));
            if (used != score_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UnsupportedFormat("bad vocabulary entry in " + path);
        }
    }
    out.rebuild_index();
    if (out.index.size() != out.tokens.size())
        throw UnsupportedFormat("duplicate tokens in " + path);
    return out;
}

// Sparse triplet text format: a header, one metadata line per row (label,
// oversample flag, then the row id, which may contain spaces), then one
// "row col 1" triplet per set bit.
void save_matrix(const FeatureMatrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UnsupportedFormat("cannot open " + path + " for writing");
    std::size_t nnz = 0;
    for (std::uint8_t v : m.data) nnz += v ? 1 : 0;
    os << "lhfm 2\n";
    os << "rows " << m.n_rows << " cols " << m.n_cols << " nnz " << nnz << "\n";
    for (std::size_t r = 0; r < m.n_rows; ++r)
        os << m.labels[r] << ' ' << static_cast<int>(m.oversampled[r]) << ' ' << m.row_ids[r]
           << "\n";
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t c = 0; c < m.n_cols; ++c)
            if (m.at(r, c)) os << r << ' ' << c << " 1\n";
    if (!os) throw UnsupportedFormat("write failed for " + path);
}

FeatureMatrix load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UnsupportedFormat("cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != "lhfm 2")
        throw UnsupportedFormat("bad matrix header in " + path);
    std::string kw1, kw2, kw3;
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!std::getline(is, line)) throw UnsupportedFormat("truncated matrix in " + path);
    {
        std::istringstream ls(line);
        if (!(ls >> kw1 >> rows >> kw2 >> cols >> kw3 >> nnz) || kw1 != "rows" ||
            kw2 != "cols" || kw3 != "nnz")
            throw UnsupportedFormat("bad matrix shape line in " + path);
    }
    FeatureMatrix m;
    m.resize(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(is, line)) throw UnsupportedFormat("truncated matrix in " + path);
        std::istringstream ls(line);
        int label = 0, flag = 0;
        if (!(ls >> label >> flag)) throw UnsupportedFormat("bad matrix row in " + path);
        if (label != 0 && label != 1) throw UnsupportedFormat("bad label in " + path);
        m.labels[r] = label;
        m.oversampled[r] = flag ? 1 : 0;
        std::string id;
        if (ls.get() == ' ') std::getline(ls, id);
        m.row_ids[r] = id;
    }
    for (std::size_t k = 0; k < nnz; ++k) {
        if (!std::getline(is, line)) throw UnsupportedFormat("truncated matrix in " + path);
        std::istringstream ls(line);
        std::size_t r = 0, c = 0;
        int v = 0;
        if (!(ls >> r >> c >> v) || v != 1 || r >= rows || c >= cols)
            throw UnsupportedFormat("bad matrix triplet in " + path);
        m.set(r, c, 1);
    }
    return m;
}

}  // namespace leakhound
