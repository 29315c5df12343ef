// Command line front end: ingest/generate/label/featurize/train/prune/
// explain-select/detect/report. Exit codes: 0 ok, 1 unexpected, 2 usage or
// validation (bad flags, unreadable or malformed inputs, mismatched
// artifacts), 3 empty vocabulary, 4 training divergence, 5 empty selection.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <type_traits>
#include <unordered_set>

#include <CLI11.hpp>

#include "leakhound/config.hpp"
#include "leakhound/errors.hpp"
#include "leakhound/features.hpp"
#include "leakhound/flowlines.hpp"
#include "leakhound/lime.hpp"
#include "leakhound/metrics.hpp"
#include "leakhound/mlp.hpp"
#include "leakhound/model_io.hpp"
#include "leakhound/pii.hpp"
#include "leakhound/profile.hpp"
#include "leakhound/select.hpp"
#include "leakhound/split.hpp"
#include "leakhound/synth.hpp"
#include "leakhound/threads.hpp"
#include "leakhound/tree.hpp"

namespace lh = leakhound;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw lh::UnsupportedFormat("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw lh::UnsupportedFormat("cannot open " + path + " for writing");
    os << content;
    if (!os) throw lh::UnsupportedFormat("write failed for " + path);
}

lh::Corpus load_corpus(const std::string& path, const std::string& format) {
    auto fmt = lh::parse_format_name(format);
    if (!fmt) throw lh::ConfigError("unknown flow log format: " + format);
    auto result = lh::parse_flow_log(read_file(path), *fmt);
    if (result.n_skipped)
        std::cerr << "note: skipped " << result.n_skipped << " malformed record(s)\n";
    return std::move(result.corpus);
}

std::vector<lh::PiiRule> load_rules_arg(const std::string& rules_path) {
    if (rules_path.empty()) return lh::default_rules();
    return lh::load_rules(read_file(rules_path));
}

std::vector<lh::LabeledFlow> load_labeled(const std::string& corpus_path,
                                          const std::string& format,
                                          const std::string& labels_path,
                                          const std::string& rules_path) {
    lh::Corpus corpus = load_corpus(corpus_path, format);
    if (!labels_path.empty()) return lh::attach_labels(corpus, read_file(labels_path));
    std::cerr << "note: no label file given, scanning with detection rules\n";
    return lh::label_corpus(corpus, load_rules_arg(rules_path));
}

// Config file values fill in options the user did not pass on the command
// line; explicit flags always win.
struct ConfigMerge {
    const lh::KeyValues& cfg;
    CLI::App* sub;
    std::string section;

    bool flag_given(const std::string& flag) const { return sub->count(flag) > 0; }
    std::string key(const std::string& name) const { return section + "." + name; }

    void merge(const std::string& flag, const std::string& name, double& var) const {
        if (!flag_given(flag) && cfg.get(key(name))) var = cfg.get_double(key(name), var);
    }
    template <class T>
        requires std::is_integral_v<T> && (!std::is_same_v<T, bool>)
    void merge(const std::string& flag, const std::string& name, T& var) const {
        if (!flag_given(flag) && cfg.get(key(name)))
            var = static_cast<T>(cfg.get_int(key(name), static_cast<std::int64_t>(var)));
    }
    void merge(const std::string& flag, const std::string& name, std::string& var) const {
        if (!flag_given(flag) && cfg.get(key(name))) var = cfg.get_string(key(name), var);
    }
    void merge(const std::string& flag, const std::string& name, bool& var) const {
        if (!flag_given(flag) && cfg.get(key(name))) var = cfg.get_int(key(name), var ? 1 : 0) != 0;
    }
};

std::string metrics_line(const lh::Metrics& m) {
    std::ostringstream os;
    os << "accuracy=" << m.accuracy << " precision=" << m.precision << " recall=" << m.recall
       << " f1=" << m.f1;
    return os.str();
}

std::vector<double> predict_any(const std::string& model_path, const lh::FeatureMatrix& m) {
    if (lh::peek_model_kind(model_path) == lh::ModelKind::tree) {
        lh::DecisionTree tree = lh::load_tree(model_path);
        return lh::batch_predict(tree, m.data.data(), m.n_rows, m.n_cols);
    }
    lh::MlpModel net = lh::load_network(model_path);
    return lh::batch_predict(net, m.data.data(), m.n_rows, m.n_cols);
}

// ---- subcommand state ----

struct IngestArgs {
    std::string input, output = "corpus.fl", format = "flowlines";
};

struct GenerateArgs {
    std::size_t count = 1000;
    double pii_rate = 0.3;
    std::uint64_t seed = 1;
    std::string output = "corpus.fl", labels = "labels.jsonl";
};

struct LabelArgs {
    std::string input, format = "flowlines", rules, output = "labels.jsonl";
};

struct FeaturizeArgs {
    std::string input, format = "flowlines", labels, rules, out_dir = ".";
    int freq_threshold = 3;
    double tfidf_threshold = -1.0;
    int adjacency_radius = 0;
    std::uint64_t seed = 1;
    double confidence_threshold = 0.2;
    double test_fraction = 0.25;
    std::uint64_t split_seed = 7;
    bool canonicalize = true;
    bool group_by_domain = true;
    std::string stop_words_path;
    std::string train_domains, test_domains;  // comma-separated explicit split
};

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string part;
    while (std::getline(is, part, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

struct TrainArgs {
    std::string train, test, vocab, model = "tree", arch = "reduced", hidden;
    std::string output, text_output, report;
    std::size_t epochs = 50, batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
};

struct PruneArgs {
    std::string model, train, test, output = "pruning_curve.csv", best_model;
};

struct ExplainArgs {
    std::string model, train, test, vocab, strategy = "top-vote";
    std::string output = "selection.txt", retrain_model, explanations;
    std::size_t samples = 0;  // 0 = min(200, rows)
    std::size_t lime_samples = 5000;
    std::uint64_t seed = 1;
    double kernel_width = -1.0, ridge_lambda = 1e-3;
    double percentile = 75.0, top_fraction = 0.2, support = 0.75;
    std::size_t epochs = 50, batch_size = 64;
    double learning_rate = 1e-3;
};

struct DetectArgs {
    std::string model, vocab, input, format = "flowlines";
    std::string output = "predictions.csv", leak_table = "leak_table.csv", rules, labels;
    double threshold = 0.5;
    std::string profile_subject, profile_output = "profile.txt";
};

struct ReportArgs {
    std::string input, format = "flowlines", labels, rules;
    std::string output = "leak_table.csv", text;
};

int cmd_ingest(const IngestArgs& a) {
    lh::Corpus corpus = load_corpus(a.input, a.format);
    if (corpus.flows.empty()) std::cerr << "warning: input contained no flows\n";
    write_file(a.output, lh::to_flowlines(corpus));
    std::cout << "wrote " << corpus.flows.size() << " flow(s) to " << a.output << "\n";
    return 0;
}

int cmd_generate(const GenerateArgs& a) {
    lh::SynthSpec spec;
    spec.n_flows = a.count;
    spec.pii_rate = a.pii_rate;
    spec.seed = a.seed;
    lh::SynthResult result = lh::generate_synthetic_corpus(spec);
    write_file(a.output, lh::to_flowlines(result.corpus));
    write_file(a.labels, lh::labels_to_jsonl(result.labeled));
    std::size_t positives = 0;
    for (const auto& lf : result.labeled) positives += lf.label ? 1 : 0;
    std::cout << "wrote " << result.corpus.flows.size() << " flow(s) (" << positives
              << " positive) to " << a.output << " and " << a.labels << "\n";
    return 0;
}

int cmd_label(const LabelArgs& a) {
    lh::Corpus corpus = load_corpus(a.input, a.format);
    auto labeled = lh::label_corpus(corpus, load_rules_arg(a.rules));
    write_file(a.output, lh::labels_to_jsonl(labeled));
    std::size_t positives = 0;
    for (const auto& lf : labeled) positives += lf.label ? 1 : 0;
    std::cout << "labeled " << labeled.size() << " flow(s), " << positives << " positive\n";
    return 0;
}

int cmd_featurize(const FeaturizeArgs& a) {
    auto labeled = load_labeled(a.input, a.format, a.labels, "");

    std::vector<lh::LabeledFlow> train_flows, test_flows;
    if (!a.train_domains.empty() || !a.test_domains.empty()) {
        auto train_list = split_csv_list(a.train_domains);
        auto test_list = split_csv_list(a.test_domains);
        if (test_list.empty())
            throw lh::ConfigError("--test-domains is required when splitting by explicit lists");
        std::unordered_set<std::string> test_set(test_list.begin(), test_list.end());
        for (const auto& d : train_list)
            if (test_set.count(d))
                throw lh::ConfigError("domain " + d + " appears in both split lists");
        for (const auto& lf : labeled)
            (test_set.count(lf.flow.domain) ? test_flows : train_flows).push_back(lf);
    } else if (a.group_by_domain) {
        auto split = lh::split_by_domain(labeled, a.test_fraction, a.split_seed);
        train_flows = std::move(split.train);
        test_flows = std::move(split.test);
    } else {
        std::vector<std::size_t> idx(labeled.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::mt19937_64 rng(a.split_seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_test = static_cast<std::size_t>(a.test_fraction *
                                               static_cast<double>(labeled.size()));
        std::vector<char> is_test(labeled.size(), 0);
        for (std::size_t i = 0; i < n_test && i < idx.size(); ++i) is_test[idx[i]] = 1;
        for (std::size_t i = 0; i < labeled.size(); ++i)
            (is_test[i] ? test_flows : train_flows).push_back(labeled[i]);
    }
    if (train_flows.empty() || test_flows.empty())
        throw lh::ConfigError("split produced an empty side; adjust test_fraction");

    lh::FeatureBuildConfig cfg;
    cfg.freq_threshold = a.freq_threshold;
    cfg.tfidf_threshold = a.tfidf_threshold;
    cfg.adjacency_radius = a.adjacency_radius;
    cfg.seed = a.seed;
    if (!a.stop_words_path.empty()) {
        std::istringstream is(read_file(a.stop_words_path));
        std::string line;
        while (std::getline(is, line))
            if (!line.empty()) cfg.stop_words.push_back(line);
    }

    lh::BuildResult built = lh::build_matrix(train_flows, cfg);
    std::cout << "initial tokens: " << built.trace.n_initial << "\n"
              << "dropped by frequency: " << built.trace.freq_dropped.size() << "\n"
              << "dropped by score: " << built.trace.tfidf_dropped.size()
              << " (threshold " << built.trace.tfidf_threshold_used << ")\n"
              << "dropped stop words: " << built.trace.stop_dropped.size() << "\n"
              << "dropped at leak sites: " << built.trace.leak_dropped.size() << "\n"
              << "oversampled rows: " << built.trace.n_oversampled_rows << "\n";

    lh::Vocabulary vocab = std::move(built.vocab);
    lh::FeatureMatrix train_m = std::move(built.matrix);
    if (a.canonicalize) {
        auto canon = lh::canonicalize_matrix(train_m, vocab);
        std::cout << "canonicalization removed " << canon.removed.size() << " token(s), merged "
                  << (vocab.size() - canon.removed.size() - canon.vocab.size())
                  << ", vocabulary " << vocab.size() << " -> " << canon.vocab.size() << "\n";
        vocab = std::move(canon.vocab);
        train_m = std::move(canon.matrix);
    }
    if (a.confidence_threshold >= 0.0) {
        auto filtered = lh::apply_confidence_filter(train_m, vocab, a.confidence_threshold);
        std::cout << "confidence filter kept " << filtered.vocab.size() << " of "
                  << vocab.size() << " feature(s)\n";
        vocab = std::move(filtered.vocab);
        train_m = std::move(filtered.matrix);
    }

    lh::FeatureMatrix test_m = lh::vectorize(test_flows, vocab);

    std::string dir = a.out_dir.empty() ? "." : a.out_dir;
    lh::save_vocabulary(vocab, dir + "/vocab.tsv");
    lh::save_matrix(train_m, dir + "/train_matrix.txt");
    lh::save_matrix(test_m, dir + "/test_matrix.txt");
    std::cout << "train rows: " << train_m.n_rows << ", test rows: " << test_m.n_rows
              << ", features: " << vocab.size() << "\n";
    return 0;
}

int cmd_train(const TrainArgs& a) {
    lh::FeatureMatrix train_m = lh::load_matrix(a.train);
    lh::Vocabulary vocab = lh::load_vocabulary(a.vocab);
    if (vocab.size() != train_m.n_cols)
        throw lh::DimensionMismatch("vocabulary and training matrix disagree");

    std::string out = a.output;
    auto t0 = std::chrono::steady_clock::now();
    lh::Metrics train_metrics;
    std::vector<double> train_pred;

    if (a.model == "tree") {
        if (out.empty()) out = "model_tree.bin";
        lh::DecisionTree tree = lh::dt_fit(train_m);
        auto t1 = std::chrono::steady_clock::now();
        train_pred = lh::dt_predict(tree, train_m);
        lh::save_model(tree, out);
        if (!a.text_output.empty()) write_file(a.text_output, lh::model_to_text(tree));
        train_metrics = lh::evaluate(train_pred, train_m.labels);
        train_metrics.train_time_seconds = std::chrono::duration<double>(t1 - t0).count();
        train_metrics.n_features = train_m.n_cols;
        std::cout << "tree nodes: " << lh::dt_node_count(tree)
                  << ", leaves: " << lh::dt_leaf_count(tree) << "\n";
    } else if (a.model == "net") {
        if (out.empty()) out = "model_net.bin";
        std::vector<std::size_t> hidden;
        if (!a.hidden.empty()) {
            std::istringstream is(a.hidden);
            std::string part;
            while (std::getline(is, part, ','))
                hidden.push_back(static_cast<std::size_t>(std::stoull(part)));
        } else {
            hidden = lh::arch_preset(a.arch);
        }
        lh::MlpModel net = lh::mlp_init(train_m.n_cols, hidden, a.seed);
        lh::MlpConfig cfg;
        cfg.hidden = hidden;
        cfg.epochs = a.epochs;
        cfg.batch_size = a.batch_size;
        cfg.learning_rate = a.learning_rate;
        cfg.seed = a.seed;
        lh::FitResult fit = lh::nn_fit(net, train_m, cfg);
        auto t1 = std::chrono::steady_clock::now();
        train_pred = lh::nn_predict(net, train_m);
        lh::save_model(net, out);
        if (!a.text_output.empty()) write_file(a.text_output, lh::model_to_text(net));
        train_metrics = lh::evaluate(train_pred, train_m.labels);
        train_metrics.train_time_seconds = std::chrono::duration<double>(t1 - t0).count();
        train_metrics.n_features = train_m.n_cols;
        std::cout << "epoch losses:";
        for (double l : fit.epoch_losses) std::cout << " " << l;
        std::cout << "\n";
    } else {
        throw lh::ConfigError("--model must be tree or net");
    }

    char time_buf[64];
    std::snprintf(time_buf, sizeof(time_buf), "%.3f", train_metrics.train_time_seconds);
    std::ostringstream report;
    report << "model " << a.model << "\n";
    report << "features " << train_m.n_cols << "\n";
    report << "train rows " << train_m.n_rows << "\n";
    report << "train " << metrics_line(train_metrics) << "\n";
    report << "train_time_seconds " << time_buf << "\n";
    std::cout << "train " << metrics_line(train_metrics) << "\n";

    if (!a.test.empty()) {
        lh::FeatureMatrix test_m = lh::load_matrix(a.test);
        std::vector<double> test_pred = predict_any(out, test_m);
        lh::Metrics test_metrics = lh::evaluate(test_pred, test_m.labels);
        report << "test rows " << test_m.n_rows << "\n";
        report << "test " << metrics_line(test_metrics) << "\n";
        std::cout << "test " << metrics_line(test_metrics) << "\n";
    }
    if (!a.report.empty()) write_file(a.report, report.str());
    std::cout << "saved model to " << out << "\n";
    return 0;
}

int cmd_prune(const PruneArgs& a) {
    lh::DecisionTree tree = lh::load_tree(a.model);
    lh::FeatureMatrix train_m = lh::load_matrix(a.train);
    lh::FeatureMatrix test_m = lh::load_matrix(a.test);
    lh::PruningPath path = lh::ccp_path(tree);

    std::ostringstream csv;
    csv << "alpha,n_nodes,train_accuracy,test_accuracy\n";
    double best_acc = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < path.alphas.size(); ++k) {
        lh::Metrics tr = lh::evaluate(lh::dt_predict(path.trees[k], train_m), train_m.labels);
        lh::Metrics te = lh::evaluate(lh::dt_predict(path.trees[k], test_m), test_m.labels);
        csv << path.alphas[k] << ',' << path.n_nodes[k] << ',' << tr.accuracy << ','
            << te.accuracy << "\n";
        if (te.accuracy > best_acc) {
            best_acc = te.accuracy;
            best_k = k;
        }
    }
    write_file(a.output, csv.str());
    std::cout << "pruning path has " << path.alphas.size() << " step(s); best test accuracy "
              << best_acc << " at alpha " << path.alphas[best_k] << " ("
              << path.n_nodes[best_k] << " nodes)\n";
    if (!a.best_model.empty()) lh::save_model(path.trees[best_k], a.best_model);
    return 0;
}

int cmd_explain(const ExplainArgs& a) {
    lh::FeatureMatrix train_m = lh::load_matrix(a.train);
    lh::Vocabulary vocab = lh::load_vocabulary(a.vocab);
    if (vocab.size() != train_m.n_cols)
        throw lh::DimensionMismatch("vocabulary and training matrix disagree");

    lh::ModelKind kind = lh::peek_model_kind(a.model);
    lh::DecisionTree tree;
    lh::MlpModel net;
    lh::PredictFn predict;
    if (kind == lh::ModelKind::tree) {
        tree = lh::load_tree(a.model);
        predict = lh::make_predict_fn(tree);
    } else {
        net = lh::load_network(a.model);
        predict = lh::make_predict_fn(net);
    }

    std::vector<std::size_t> rows(train_m.n_rows);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::mt19937_64 rng(a.seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::size_t n_explain = a.samples ? a.samples : std::min<std::size_t>(200, rows.size());
    if (n_explain == 0) throw lh::ConfigError("nothing to explain");
    if (n_explain > rows.size())
        throw lh::ConfigError("--samples exceeds the " + std::to_string(rows.size()) +
                              " available row(s)");
    rows.resize(n_explain);

    std::vector<double> rates = lh::activation_rates(train_m);
    std::vector<std::vector<double>> importances;
    importances.reserve(n_explain);
    std::ostringstream expl_csv;
    expl_csv << "instance_id,feature,importance\n";
    for (std::size_t i = 0; i < n_explain; ++i) {
        lh::LimeConfig lc;
        lc.n_samples = a.lime_samples;
        lc.seed = lh::per_flow_seed(a.seed, rows[i]);
        lc.kernel_width = a.kernel_width;
        lc.ridge_lambda = a.ridge_lambda;
        auto expl = lh::lime_explain(train_m.data.data() + rows[i] * train_m.n_cols,
                                     train_m.n_cols, predict, rates, lc);
        if (!a.explanations.empty()) {
            expl_csv.precision(10);
            for (std::size_t j = 0; j < expl.coef.size(); ++j)
                expl_csv << train_m.row_ids[rows[i]] << ',' << vocab.tokens[j] << ','
                         << expl.coef[j] << "\n";
        }
        importances.push_back(std::move(expl.coef));
    }
    if (!a.explanations.empty()) write_file(a.explanations, expl_csv.str());

    lh::SelectionResult sel;
    if (a.strategy == "intersection")
        sel = lh::select_intersection(importances, a.percentile);
    else if (a.strategy == "top-vote")
        sel = lh::select_top_vote(importances, a.top_fraction, a.support);
    else
        throw lh::ConfigError("--strategy must be intersection or top-vote");

    std::ostringstream out;
    out << "strategy " << a.strategy << "\n";
    out << "explained " << n_explain << " row(s) with " << a.lime_samples
        << " perturbation(s) each\n";
    if (sel.degenerate) {
        out << "kept 0\n";
        write_file(a.output, out.str());
        std::cerr << "selection is degenerate: no feature qualified\n";
        return 5;
    }
    out << "kept " << sel.kept.size() << "\n";
    for (std::size_t j : sel.kept) out << vocab.tokens[j] << " " << j << "\n";

    auto [sub_train, sub_vocab] = lh::retrain_selected(train_m, vocab, sel.kept);

    lh::FeatureMatrix test_m;
    bool have_test = !a.test.empty();
    if (have_test) {
        test_m = lh::load_matrix(a.test);
        if (test_m.n_cols != train_m.n_cols)
            throw lh::DimensionMismatch("test matrix width differs from train");
    }

    auto report_model = [&](const std::string& tag, const std::function<std::vector<double>(
                                                        const lh::FeatureMatrix&)>& pred,
                            const lh::FeatureMatrix& tr, const lh::FeatureMatrix& te) {
        lh::Metrics m_tr = lh::evaluate(pred(tr), tr.labels);
        out << tag << " train " << metrics_line(m_tr) << "\n";
        std::cout << tag << " train " << metrics_line(m_tr) << "\n";
        if (have_test) {
            lh::Metrics m_te = lh::evaluate(pred(te), te.labels);
            out << tag << " test " << metrics_line(m_te) << "\n";
            std::cout << tag << " test " << metrics_line(m_te) << "\n";
        }
    };

    lh::FeatureMatrix sub_test = have_test ? lh::slice_columns(test_m, sel.kept)
                                           : lh::FeatureMatrix{};

    if (kind == lh::ModelKind::tree) {
        report_model("before", [&](const lh::FeatureMatrix& m) { return lh::dt_predict(tree, m); },
                     train_m, test_m);
        lh::DecisionTree tree2 = lh::dt_fit(sub_train);
        report_model("after",
                     [&](const lh::FeatureMatrix& m) { return lh::dt_predict(tree2, m); },
                     sub_train, sub_test);
        if (!a.retrain_model.empty()) lh::save_model(tree2, a.retrain_model);
    } else {
        report_model("before", [&](const lh::FeatureMatrix& m) { return lh::nn_predict(net, m); },
                     train_m, test_m);
        std::vector<std::size_t> hidden(net.dims.begin() + 1, net.dims.end() - 1);
        lh::MlpModel net2 = lh::mlp_init(sub_train.n_cols, hidden, a.seed);
        lh::MlpConfig cfg;
        cfg.hidden = hidden;
        cfg.epochs = a.epochs;
        cfg.batch_size = a.batch_size;
        cfg.learning_rate = a.learning_rate;
        cfg.seed = a.seed;
        lh::nn_fit(net2, sub_train, cfg);
        report_model("after",
                     [&](const lh::FeatureMatrix& m) { return lh::nn_predict(net2, m); },
                     sub_train, sub_test);
        if (!a.retrain_model.empty()) lh::save_model(net2, a.retrain_model);
    }

    write_file(a.output, out.str());
    std::cout << "kept " << sel.kept.size() << " of " << vocab.size() << " feature(s)\n";
    return 0;
}

int cmd_detect(const DetectArgs& a) {
    lh::Corpus corpus = load_corpus(a.input, a.format);
    lh::Vocabulary vocab = lh::load_vocabulary(a.vocab);
    lh::FeatureMatrix m = lh::vectorize(corpus, vocab);
    std::vector<double> prob = predict_any(a.model, m);

    std::vector<int> truth;
    if (!a.labels.empty()) {
        auto with_truth = lh::attach_labels(corpus, read_file(a.labels));
        truth.reserve(with_truth.size());
        for (const auto& lf : with_truth) truth.push_back(lf.label ? 1 : 0);
    }

    std::ostringstream csv;
    csv << "flow_id,probability,predicted_label" << (truth.empty() ? "" : ",true_label") << "\n";
    char buf[64];
    std::size_t positives = 0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        bool hit = prob[i] >= a.threshold;
        positives += hit ? 1 : 0;
        std::snprintf(buf, sizeof(buf), "%.6f", prob[i]);
        csv << m.row_ids[i] << ',' << buf << ',' << (hit ? 1 : 0);
        if (!truth.empty()) csv << ',' << truth[i];
        csv << "\n";
    }
    write_file(a.output, csv.str());
    std::cout << "flagged " << positives << " of " << prob.size() << " flow(s)\n";

    // The leak table and profile both need findings, so flagged flows get a
    // rule scan even when predictions came from the model alone.
    auto labeled = lh::label_corpus(corpus, load_rules_arg(a.rules));
    std::vector<lh::LabeledFlow> flagged;
    for (std::size_t i = 0; i < labeled.size(); ++i)
        if (prob[i] >= a.threshold) flagged.push_back(labeled[i]);
    if (!a.leak_table.empty()) {
        auto rows = lh::leak_table(flagged);
        write_file(a.leak_table, lh::leak_table_csv(rows));
        std::cout << "leak table has " << rows.size() << " row(s), written to " << a.leak_table
                  << "\n";
    }

    if (!a.profile_subject.empty()) {
        std::vector<lh::LabeledFlow> subject_flows;
        for (const auto& lf : flagged) {
            bool has_subject = false;
            for (const auto& f : lf.findings)
                if (f.value == a.profile_subject) {
                    has_subject = true;
                    break;
                }
            if (has_subject) subject_flows.push_back(lf);
        }
        lh::ProfileReport report = lh::aggregate_profile(subject_flows, a.profile_subject);
        write_file(a.profile_output, lh::profile_report_text(report));
        std::cout << "profile for " << a.profile_subject << ": " << report.timeline.size()
                  << " event(s) across " << report.merged_attributes.size()
                  << " attribute(s), written to " << a.profile_output << "\n";
    }
    return 0;
}

int cmd_report(const ReportArgs& a) {
    auto labeled = load_labeled(a.input, a.format, a.labels, a.rules);
    auto rows = lh::leak_table(labeled);
    write_file(a.output, lh::leak_table_csv(rows));
    if (!a.text.empty()) write_file(a.text, lh::leak_table_text(rows));
    std::cout << "leak table has " << rows.size() << " row(s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PII exposure detection over captured HTTP flows"};
    app.require_subcommand(1);

    int threads = 1;
    std::string config_path;
    app.add_option("--threads", threads, "worker threads for parallel stages")
        ->capture_default_str();
    app.add_option("--config", config_path, "INI-style defaults, flags still win");

    IngestArgs ingest;
    auto* sub_ingest = app.add_subcommand("ingest", "convert a flow log to flowlines");
    sub_ingest->fallthrough();
    sub_ingest->add_option("input,--input", ingest.input, "flow log path")->required();
    sub_ingest->add_option("--format", ingest.format, "flowlines, har or recon");
    sub_ingest->add_option("-o,--output", ingest.output, "output path");

    GenerateArgs gen;
    auto* sub_gen = app.add_subcommand("generate", "emit a synthetic labeled corpus");
    sub_gen->fallthrough();
    sub_gen->add_option("--count", gen.count, "number of flows");
    sub_gen->add_option("--pii-rate", gen.pii_rate, "fraction of positive flows");
    sub_gen->add_option("--seed", gen.seed, "generator seed");
    sub_gen->add_option("--output", gen.output, "corpus output path");
    sub_gen->add_option("--labels", gen.labels, "ground truth output path");

    LabelArgs label;
    auto* sub_label = app.add_subcommand("label", "scan a corpus with detection rules");
    sub_label->fallthrough();
    sub_label->add_option("--input", label.input, "corpus path")->required();
    sub_label->add_option("--format", label.format, "input format");
    sub_label->add_option("--rules", label.rules, "rules file (TSV), default built-ins");
    sub_label->add_option("--output", label.output, "labels output path");

    FeaturizeArgs feat;
    auto* sub_feat = app.add_subcommand("featurize", "build train/test matrices");
    sub_feat->fallthrough();
    sub_feat->add_option("--input", feat.input, "corpus path")->required();
    sub_feat->add_option("--format", feat.format, "input format");
    sub_feat->add_option("--labels", feat.labels, "labels path (default: scan)");
    sub_feat->add_option("--output-dir", feat.out_dir, "directory for artifacts");
    sub_feat->add_option("--freq-threshold", feat.freq_threshold, "min flows per token");
    sub_feat->add_option("--tfidf-threshold", feat.tfidf_threshold,
                         "score cut, negative = auto percentile");
    sub_feat->add_option("--adjacency-radius", feat.adjacency_radius,
                         "token distance removed around leaks");
    sub_feat->add_option("--seed", feat.seed, "value randomization seed");
    sub_feat->add_option("--confidence-threshold", feat.confidence_threshold,
                         "positive-carrier cut, negative disables");
    sub_feat->add_option("--test-fraction", feat.test_fraction, "held-out share");
    sub_feat->add_option("--split-seed", feat.split_seed, "split shuffle seed");
    sub_feat->add_flag("--canonicalize,!--no-canonicalize", feat.canonicalize,
                       "merge case/stem variants");
    sub_feat->add_flag("--group-by-domain,!--no-group-by-domain", feat.group_by_domain,
                       "split on whole domains");
    sub_feat->add_option("--train-domains", feat.train_domains,
                         "explicit train domain list, comma separated");
    sub_feat->add_option("--test-domains", feat.test_domains,
                         "explicit test domain list; unlisted domains train");
    sub_feat->add_option("--stop-words", feat.stop_words_path, "extra stop word file");

    TrainArgs train;
    auto* sub_train = app.add_subcommand("train", "fit a classifier on a matrix");
    sub_train->fallthrough();
    sub_train->add_option("--train", train.train, "training matrix")->required();
    sub_train->add_option("--test", train.test, "held-out matrix");
    sub_train->add_option("--vocab", train.vocab, "vocabulary path")->required();
    sub_train->add_option("--model", train.model, "tree or net")->required();
    sub_train->add_option("--arch", train.arch, "net preset: reduced or deep");
    sub_train->add_option("--hidden", train.hidden, "net widths, e.g. 64,32");
    sub_train->add_option("--epochs", train.epochs, "training epochs");
    sub_train->add_option("--batch-size", train.batch_size, "minibatch size");
    sub_train->add_option("--learning-rate", train.learning_rate, "step size");
    sub_train->add_option("--seed", train.seed, "init seed");
    sub_train->add_option("--output", train.output, "model output path");
    sub_train->add_option("--text-model", train.text_output, "readable dump path");
    sub_train->add_option("--report", train.report, "metrics report path");

    PruneArgs prune;
    auto* sub_prune = app.add_subcommand("prune", "cost-complexity pruning curve");
    sub_prune->fallthrough();
    sub_prune->add_option("--model", prune.model, "tree model path")->required();
    sub_prune->add_option("--train", prune.train, "training matrix")->required();
    sub_prune->add_option("--test", prune.test, "held-out matrix")->required();
    sub_prune->add_option("--output", prune.output, "curve CSV path");
    sub_prune->add_option("--best-model", prune.best_model, "save best-test tree here");

    ExplainArgs expl;
    auto* sub_expl = app.add_subcommand("explain-select",
                                        "select features from local explanations and retrain");
    sub_expl->fallthrough();
    sub_expl->add_option("--model", expl.model, "model path")->required();
    sub_expl->add_option("--train", expl.train, "training matrix")->required();
    sub_expl->add_option("--test", expl.test, "held-out matrix");
    sub_expl->add_option("--vocab", expl.vocab, "vocabulary path")->required();
    sub_expl->add_option("--strategy", expl.strategy, "intersection or top-vote");
    sub_expl->add_option("--samples", expl.samples, "rows to explain, 0 = min(200, rows)");
    sub_expl->add_option("--lime-samples", expl.lime_samples, "perturbations per row");
    sub_expl->add_option("--explanations", expl.explanations, "per-feature importance CSV path");
    sub_expl->add_option("--seed", expl.seed, "sampling seed");
    sub_expl->add_option("--kernel-width", expl.kernel_width, "proximity kernel width");
    sub_expl->add_option("--ridge-lambda", expl.ridge_lambda, "ridge penalty");
    sub_expl->add_option("--percentile", expl.percentile, "intersection cut");
    sub_expl->add_option("--top-fraction", expl.top_fraction, "top-vote list size share");
    sub_expl->add_option("--support", expl.support, "top-vote vote share");
    sub_expl->add_option("--epochs", expl.epochs, "retrain epochs (net)");
    sub_expl->add_option("--batch-size", expl.batch_size, "retrain batch size (net)");
    sub_expl->add_option("--learning-rate", expl.learning_rate, "retrain step size (net)");
    sub_expl->add_option("--output", expl.output, "selection report path");
    sub_expl->add_option("--retrain-model", expl.retrain_model, "save retrained model here");

    DetectArgs det;
    auto* sub_det = app.add_subcommand("detect", "score a corpus with a trained model");
    sub_det->fallthrough();
    sub_det->add_option("--model", det.model, "model path")->required();
    sub_det->add_option("--vocab", det.vocab, "vocabulary path")->required();
    sub_det->add_option("--input", det.input, "corpus path")->required();
    sub_det->add_option("--format", det.format, "input format");
    sub_det->add_option("--output", det.output, "predictions CSV path");
    sub_det->add_option("--leak-table", det.leak_table,
                        "leak table CSV path, empty string disables");
    sub_det->add_option("--labels", det.labels, "known labels, adds a true_label column");
    sub_det->add_option("--threshold", det.threshold, "positive cutoff");
    sub_det->add_option("--profile", det.profile_subject,
                        "aggregate flagged flows carrying this value");
    sub_det->add_option("--profile-output", det.profile_output, "profile report path");
    sub_det->add_option("--rules", det.rules, "rules for profile scanning");

    ReportArgs rep;
    auto* sub_rep = app.add_subcommand("report", "leak table per app and category");
    sub_rep->fallthrough();
    sub_rep->add_option("--input", rep.input, "corpus path")->required();
    sub_rep->add_option("--format", rep.format, "input format");
    sub_rep->add_option("--labels", rep.labels, "labels path (default: scan)");
    sub_rep->add_option("--rules", rep.rules, "rules file when scanning");
    sub_rep->add_option("--output", rep.output, "CSV output path");
    sub_rep->add_option("--text", rep.text, "aligned text output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        lh::KeyValues cfg;
        if (!config_path.empty()) cfg = lh::load_config(config_path);
        if (!app.count("--threads") && cfg.get("threads"))
            threads = static_cast<int>(cfg.get_int("threads", threads));
        if (threads < 1) throw lh::ConfigError("--threads must be at least 1");
        lh::set_thread_count(threads);

        if (*sub_feat) {
            ConfigMerge mg{cfg, sub_feat, "featurize"};
            mg.merge("--freq-threshold", "freq_threshold", feat.freq_threshold);
            mg.merge("--tfidf-threshold", "tfidf_threshold", feat.tfidf_threshold);
            mg.merge("--adjacency-radius", "adjacency_radius", feat.adjacency_radius);
            mg.merge("--seed", "seed", feat.seed);
            mg.merge("--confidence-threshold", "confidence_threshold",
                     feat.confidence_threshold);
            mg.merge("--test-fraction", "test_fraction", feat.test_fraction);
            mg.merge("--split-seed", "split_seed", feat.split_seed);
            mg.merge("--canonicalize", "canonicalize", feat.canonicalize);
            mg.merge("--group-by-domain", "group_by_domain", feat.group_by_domain);
        }
        if (*sub_train) {
            ConfigMerge mg{cfg, sub_train, "train"};
            mg.merge("--arch", "arch", train.arch);
            mg.merge("--epochs", "epochs", train.epochs);
            mg.merge("--batch-size", "batch_size", train.batch_size);
            mg.merge("--learning-rate", "learning_rate", train.learning_rate);
            mg.merge("--seed", "seed", train.seed);
        }
        if (*sub_expl) {
            ConfigMerge mg{cfg, sub_expl, "explain-select"};
            mg.merge("--strategy", "strategy", expl.strategy);
            mg.merge("--samples", "samples", expl.samples);
            mg.merge("--lime-samples", "lime_samples", expl.lime_samples);
            mg.merge("--seed", "seed", expl.seed);
            mg.merge("--percentile", "percentile", expl.percentile);
            mg.merge("--top-fraction", "top_fraction", expl.top_fraction);
            mg.merge("--support", "support", expl.support);
        }
        if (*sub_gen) {
            ConfigMerge mg{cfg, sub_gen, "generate"};
            mg.merge("--count", "count", gen.count);
            mg.merge("--pii-rate", "pii_rate", gen.pii_rate);
            mg.merge("--seed", "seed", gen.seed);
        }

        if (*sub_ingest) return cmd_ingest(ingest);
        if (*sub_gen) return cmd_generate(gen);
        if (*sub_label) return cmd_label(label);
        if (*sub_feat) return cmd_featurize(feat);
        if (*sub_train) return cmd_train(train);
        if (*sub_prune) return cmd_prune(prune);
        if (*sub_expl) return cmd_explain(expl);
        if (*sub_det) return cmd_detect(det);
        if (*sub_rep) return cmd_report(rep);
        return 2;
    } catch (const lh::EmptyVocabulary& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const lh::NonFiniteLoss& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const lh::EmptySelection& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const lh::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::TooManyMalformed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::UnsupportedFormat& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::OverlappingSpans& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::DegenerateLabels& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const lh::SingularSystem& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
