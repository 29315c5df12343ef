// Times the serial reference implementations against the thread-parallel
// kernels on a synthetic corpus and verifies both produce identical results.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "leakhound/features.hpp"
#include "leakhound/flowlines.hpp"
#include "leakhound/lime.hpp"
#include "leakhound/mlp.hpp"
#include "leakhound/pii.hpp"
#include "leakhound/synth.hpp"
#include "leakhound/threads.hpp"

namespace lh = leakhound;

namespace {

template <class F>
double time_seconds(F&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

void print_row(const std::string& name, double serial, double parallel, bool equal) {
    std::printf("%-16s %10.4fs %10.4fs %8.2fx  %s\n", name.c_str(), serial, parallel,
                parallel > 0 ? serial / parallel : 0.0, equal ? "outputs match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel kernel benchmark"};
    std::size_t count = 20000;
    std::uint64_t seed = 1;
    int threads = lh::thread_count();
    app.add_option("--count", count, "synthetic flows");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--threads", threads, "threads for the parallel side");
    CLI11_PARSE(app, argc, argv);

#ifndef _OPENMP
    std::cout << "built without OpenMP; the parallel side runs serially\n";
#endif
    if (threads < 1) threads = 1;

    lh::SynthSpec spec;
    spec.n_flows = count;
    spec.pii_rate = 0.3;
    spec.seed = seed;
    lh::SynthResult synth = lh::generate_synthetic_corpus(spec);
    std::string fl = lh::to_flowlines(synth.corpus);
    std::cout << "corpus: " << count << " flows, " << fl.size() << " bytes, threads "
              << threads << "\n\n";
    std::printf("%-16s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

    bool all_equal = true;

    // parse
    lh::set_thread_count(1);
    lh::ParseResult ser_parse;
    double t_ser = time_seconds([&] { ser_parse = lh::parse_flowlines_serial(fl); });
    lh::set_thread_count(threads);
    lh::ParseResult par_parse;
    double t_par =
        time_seconds([&] { par_parse = lh::parse_flow_log(fl, lh::FlowLogFormat::flowlines); });
    bool eq = ser_parse.corpus.flows == par_parse.corpus.flows;
    all_equal = all_equal && eq;
    print_row("parse", t_ser, t_par, eq);

    // scan + label
    const auto& rules = lh::default_rules();
    lh::set_thread_count(1);
    std::vector<lh::LabeledFlow> ser_lab;
    t_ser = time_seconds([&] { ser_lab = lh::label_corpus_serial(synth.corpus, rules); });
    lh::set_thread_count(threads);
    std::vector<lh::LabeledFlow> par_lab;
    t_par = time_seconds([&] { par_lab = lh::label_corpus(synth.corpus, rules); });
    eq = ser_lab.size() == par_lab.size();
    for (std::size_t i = 0; eq && i < ser_lab.size(); ++i)
        eq = ser_lab[i].label == par_lab[i].label && ser_lab[i].findings == par_lab[i].findings;
    all_equal = all_equal && eq;
    print_row("label", t_ser, t_par, eq);

    // vectorize over a small trained vocabulary
    lh::FeatureBuildConfig fcfg;
    fcfg.tfidf_threshold = 1e18;  // keep everything; this run only needs a vocabulary
    lh::BuildResult built = lh::build_matrix(synth.labeled, fcfg);
    lh::set_thread_count(1);
    lh::FeatureMatrix ser_vec;
    t_ser = time_seconds([&] { ser_vec = lh::vectorize_serial(synth.corpus, built.vocab); });
    lh::set_thread_count(threads);
    lh::FeatureMatrix par_vec;
    t_par = time_seconds([&] { par_vec = lh::vectorize(synth.corpus, built.vocab); });
    eq = ser_vec.data == par_vec.data;
    all_equal = all_equal && eq;
    print_row("vectorize", t_ser, t_par, eq);

    // batch predict with a small net
    lh::MlpModel net = lh::mlp_init(built.vocab.size(), {64, 32}, seed);
    lh::set_thread_count(1);
    std::vector<double> ser_pred;
    t_ser = time_seconds([&] {
        ser_pred = lh::batch_predict_serial(net, ser_vec.data.data(), ser_vec.n_rows,
                                            ser_vec.n_cols);
    });
    lh::set_thread_count(threads);
    std::vector<double> par_pred;
    t_par = time_seconds(
        [&] { par_pred = lh::batch_predict(net, par_vec.data.data(), par_vec.n_rows,
                                           par_vec.n_cols); });
    eq = ser_pred == par_pred;
    all_equal = all_equal && eq;
    print_row("predict", t_ser, t_par, eq);

    if (!all_equal) {
        std::cerr << "\nserial and parallel kernels disagree\n";
        return 1;
    }
    std::cout << "\nall kernels agree bit for bit\n";
    return 0;
}
