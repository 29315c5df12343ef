#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "leakhound/pii.hpp"

namespace leakhound {

struct Vocabulary {
    std::vector<std::string> tokens;      // column order
    std::vector<std::size_t> doc_freq;    // flows containing the token at build time
    std::vector<double> tfidf;            // df * ln(n/df) at build time
    bool canonical = false;               // true once canonicalize_features ran
    std::unordered_map<std::string, std::size_t> index;

    void rebuild_index();
    std::size_t size() const { return tokens.size(); }
};

// Binary bag-of-words presence matrix, row major.
struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::uint8_t> data;
    std::vector<int> labels;             // 0/1 per row
    std::vector<std::string> row_ids;    // flow ids, duplicates get a "#k" suffix
    std::vector<std::uint8_t> oversampled;

    void resize(std::size_t rows, std::size_t cols);
    std::uint8_t at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
    void set(std::size_t r, std::size_t c, std::uint8_t v) { data[r * n_cols + c] = v; }
};

struct FeatureBuildConfig {
    int freq_threshold = 3;         // drop tokens seen in fewer flows, keys exempt
    double tfidf_threshold = -1.0;  // negative selects the automatic percentile cut
    int adjacency_radius = 0;       // token distance around leaked values to remove
    std::uint64_t seed = 1;         // value randomization seed
    std::vector<std::string> stop_words;  // empty selects default_stop_words()
};

// What each pipeline stage removed, for inspection and reports.
struct FilterTrace {
    std::size_t n_initial = 0;  // distinct tokens before any filtering
    std::vector<std::string> freq_dropped;
    std::vector<std::string> tfidf_dropped;
    std::vector<std::string> stop_dropped;
    std::vector<std::string> leak_dropped;
    double tfidf_threshold_used = 0.0;
    std::size_t n_oversampled_rows = 0;
};

struct BuildResult {
    Vocabulary vocab;
    FeatureMatrix matrix;
    FilterTrace trace;
};

// Training-time pipeline: randomize leaked values, tokenize method/url/
// headers/body, frequency-filter, oversample rare key tokens by duplicating
// their flows, score-filter, drop stop words, drop tokens at the leak sites,
// then emit the presence matrix over the surviving vocabulary.
BuildResult build_matrix(const std::vector<LabeledFlow>& flows, const FeatureBuildConfig& cfg);

std::vector<std::string> default_stop_words();

// df_j * ln(n / df_j) for every df entry; n is the number of rows.
std::vector<double> tfidf_scores(const std::vector<std::size_t>& df, std::size_t n);

// Linear-interpolation percentile, p in [0, 100].
double percentile_linear(std::vector<double> values, double p);

// Lowercase, stem to a fixed point, drop base64-looking high-entropy blobs
// and extreme lengths. nullopt means the token is removed.
std::optional<std::string> canonical_token(const std::string& token);

struct CanonicalMap {
    Vocabulary vocab;                     // canonical == true
    std::vector<std::size_t> old_to_new;  // SIZE_MAX marks a removed column
};

CanonicalMap canonicalize_features(const Vocabulary& vocab);

struct CanonicalizeResult {
    Vocabulary vocab;
    FeatureMatrix matrix;  // merged columns are OR-ed
    std::vector<std::string> removed;
};

CanonicalizeResult canonicalize_matrix(const FeatureMatrix& matrix, const Vocabulary& vocab);

struct ConfidenceScore {
    std::string token;
    std::size_t k_pii = 0;  // rows with the bit set and label 1
    std::size_t k_all = 0;  // rows with the bit set
    double p = 0.0;         // k_pii / k_all
};

std::vector<ConfidenceScore> confidence_scores(const FeatureMatrix& m, const Vocabulary& vocab);

struct ConfidenceFilterResult {
    Vocabulary vocab;
    FeatureMatrix matrix;
    std::vector<ConfidenceScore> kept;
};

// Keeps columns whose fraction of positive carriers is strictly above the
// threshold.
ConfidenceFilterResult apply_confidence_filter(const FeatureMatrix& m, const Vocabulary& vocab,
                                               double threshold);

FeatureMatrix slice_columns(const FeatureMatrix& m, const std::vector<std::size_t>& keep);
Vocabulary slice_vocab(const Vocabulary& vocab, const std::vector<std::size_t>& keep);

// Map unseen flows onto an existing vocabulary. No filtering, no
// randomization; canonical vocabularies canonicalize each token first.
FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab);
FeatureMatrix vectorize(const std::vector<LabeledFlow>& flows, const Vocabulary& vocab);
FeatureMatrix vectorize_serial(const Corpus& corpus, const Vocabulary& vocab);
FeatureMatrix vectorize_serial(const std::vector<LabeledFlow>& flows, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);
void save_matrix(const FeatureMatrix& m, const std::string& path);
FeatureMatrix load_matrix(const std::string& path);

}  // namespace leakhound
