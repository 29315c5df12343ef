#include "leakhound/model_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "leakhound/errors.hpp"

namespace leakhound {
namespace {

constexpr char kMagic[4] = {'L', 'H', 'M', 'D'};
constexpr std::uint32_t kVersion = 1;

// All integers are written little endian regardless of host order.
template <class T>
void put_uint(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_uint(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw UnsupportedFormat("truncated model file");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

void put_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    put_uint<std::uint64_t>(os, bits);
}

double get_f64(std::istream& is) {
    std::uint64_t bits = get_uint<std::uint64_t>(is);
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
}

void put_header(std::ostream& os, ModelKind kind, std::uint64_t n_features) {
    os.write(kMagic, 4);
    put_uint<std::uint32_t>(os, kVersion);
    put_uint<std::uint8_t>(os, static_cast<std::uint8_t>(kind));
    put_uint<std::uint64_t>(os, n_features);
}

ModelKind read_header(std::istream& is, std::uint64_t& n_features) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw UnsupportedFormat("not a model file");
    if (get_uint<std::uint32_t>(is) != kVersion)
        throw UnsupportedFormat("unsupported model version");
    auto kind = get_uint<std::uint8_t>(is);
    if (kind != 1 && kind != 2) throw UnsupportedFormat("unknown model kind");
    n_features = get_uint<std::uint64_t>(is);
    return static_cast<ModelKind>(kind);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UnsupportedFormat("cannot open " + path + " for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UnsupportedFormat("cannot open " + path);
    return is;
}

}  // namespace

void save_model(const DecisionTree& tree, const std::string& path) {
    auto os = open_out(path);
    put_header(os, ModelKind::tree, tree.n_features);
    put_uint<std::uint64_t>(os, tree.nodes.size());
    for (const auto& nd : tree.nodes) {
        put_uint<std::uint32_t>(os, static_cast<std::uint32_t>(nd.feature_index + 1));
        put_uint<std::uint64_t>(os, nd.left == kNoChild ? 0 : nd.left + 1);
        put_uint<std::uint64_t>(os, nd.right == kNoChild ? 0 : nd.right + 1);
        put_f64(os, nd.gini);
        put_uint<std::uint64_t>(os, nd.n_samples);
        put_uint<std::uint64_t>(os, nd.n_positive);
        put_f64(os, nd.positive_fraction);
    }
    if (!os) throw UnsupportedFormat("write failed for " + path);
}

void save_model(const MlpModel& model, const std::string& path) {
    auto os = open_out(path);
    put_header(os, ModelKind::network, model.n_inputs());
    put_uint<std::uint64_t>(os, model.dims.size());
    for (std::size_t d : model.dims) put_uint<std::uint64_t>(os, d);
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        for (double w : model.W[l]) put_f64(os, w);
        for (double b : model.b[l]) put_f64(os, b);
    }
    if (!os) throw UnsupportedFormat("write failed for " + path);
}

ModelKind peek_model_kind(const std::string& path) {
    auto is = open_in(path);
    std::uint64_t n_features = 0;
    return read_header(is, n_features);
}

DecisionTree load_tree(const std::string& path) {
    auto is = open_in(path);
    std::uint64_t n_features = 0;
    if (read_header(is, n_features) != ModelKind::tree)
        throw UnsupportedFormat(path + " does not hold a tree model");
    DecisionTree tree;
    tree.n_features = n_features;
    auto n_nodes = get_uint<std::uint64_t>(is);
    if (n_nodes == 0) throw UnsupportedFormat("tree model has no nodes");
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes) {
        nd.feature_index = static_cast<int>(get_uint<std::uint32_t>(is)) - 1;
        auto left = get_uint<std::uint64_t>(is);
        auto right = get_uint<std::uint64_t>(is);
        nd.left = left == 0 ? kNoChild : left - 1;
        nd.right = right == 0 ? kNoChild : right - 1;
        nd.gini = get_f64(is);
        nd.n_samples = get_uint<std::uint64_t>(is);
        nd.n_positive = get_uint<std::uint64_t>(is);
        nd.positive_fraction = get_f64(is);
        bool internal = nd.feature_index >= 0;
        if (internal && (nd.left >= n_nodes || nd.right >= n_nodes))
            throw UnsupportedFormat("tree model has a dangling child link");
        if (internal && static_cast<std::uint64_t>(nd.feature_index) >= n_features)
            throw UnsupportedFormat("tree model splits on an out-of-range feature");
    }
    return tree;
}

MlpModel load_network(const std::string& path) {
    auto is = open_in(path);
    std::uint64_t n_features = 0;
    if (read_header(is, n_features) != ModelKind::network)
        throw UnsupportedFormat(path + " does not hold a network model");
    auto n_dims = get_uint<std::uint64_t>(is);
    if (n_dims < 2) throw UnsupportedFormat("network model needs at least two layer sizes");
    MlpModel model;
    model.dims.resize(n_dims);
    for (auto& d : model.dims) {
        d = get_uint<std::uint64_t>(is);
        if (d == 0) throw UnsupportedFormat("network model has a zero-width layer");
    }
    if (model.dims.front() != n_features || model.dims.back() != 1)
        throw UnsupportedFormat("network model has inconsistent layer sizes");
    for (std::size_t l = 0; l + 1 < n_dims; ++l) {
        std::size_t in = model.dims[l], out = model.dims[l + 1];
        std::vector<double> W(out * in);
        for (double& w : W) w = get_f64(is);
        std::vector<double> b(out);
        for (double& v : b) v = get_f64(is);
        model.W.push_back(std::move(W));
        model.b.push_back(std::move(b));
    }
    return model;
}

std::string model_to_text(const DecisionTree& tree) {
    std::ostringstream os;
    os << "tree features=" << tree.n_features << " nodes=" << tree.nodes.size() << "\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& nd = tree.nodes[i];
        os << i << " ";
        if (nd.feature_index >= 0)
            os << "split feature=" << nd.feature_index << " left=" << nd.left
               << " right=" << nd.right;
        else
            os << "leaf";
        os << " gini=" << nd.gini << " n=" << nd.n_samples << " pos=" << nd.n_positive
           << " p=" << nd.positive_fraction << "\n";
    }
    return os.str();
}

std::string model_to_text(const MlpModel& model) {
    std::ostringstream os;
    os << "network dims=";
    for (std::size_t i = 0; i < model.dims.size(); ++i)
        os << (i ? "x" : "") << model.dims[i];
    os << "\n";
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        os << "layer " << l << " W " << model.dims[l + 1] << "x" << model.dims[l] << "\n";
        for (std::size_t r = 0; r < model.dims[l + 1]; ++r) {
            for (std::size_t c = 0; c < model.dims[l]; ++c)
                os << (c ? " " : "") << model.W[l][r * model.dims[l] + c];
            os << "\n";
        }
        os << "layer " << l << " b\n";
        for (std::size_t r = 0; r < model.dims[l + 1]; ++r)
            os << (r ? " " : "") << model.b[l][r];
        os << "\n";
    }
    return os.str();
}

}  // namespace leakhound
