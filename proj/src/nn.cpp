#include "fosls/nn.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fosls::nn {

const char* to_string(Act a) {
    switch (a) {
        case Act::Id: return "id";
        case Act::ReLU: return "relu";
        case Act::BiSU: return "bisu";
    }
    return "?";
}

Act act_from(const std::string& s) {
    if (s == "id") return Act::Id;
    if (s == "relu") return Act::ReLU;
    if (s == "bisu") return Act::BiSU;
    throw std::invalid_argument("unknown activation: " + s);
}

NeuralNet::NeuralNet(int input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("NeuralNet: needs at least one layer");
    int prev = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& ly = layers_[l];
        if (ly.cols() != prev)
            throw std::invalid_argument("NeuralNet: layer dimension chain broken");
        if (static_cast<int>(ly.b.size()) != ly.rows() ||
            static_cast<int>(ly.act.size()) != ly.rows())
            throw std::invalid_argument("NeuralNet: bias/activation length mismatch");
        prev = ly.rows();
    }
    for (Act a : layers_.back().act)
        if (a != Act::Id)
            throw std::invalid_argument("NeuralNet: last layer activation must be identity");
}

std::vector<double> NeuralNet::realize(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim_)
        throw std::invalid_argument("realize: input dimension mismatch");
    std::vector<double> cur(x.begin(), x.end()), next;
    for (const Layer& ly : layers_) {
        next.assign(ly.rows(), 0.0);
        kernels::spmv(ly.A, cur, next);
        for (int i = 0; i < ly.rows(); ++i) next[i] += ly.b[i];
        // apply activations over runs of equal kind
        int i = 0;
        while (i < ly.rows()) {
            int j = i;
            while (j < ly.rows() && ly.act[j] == ly.act[i]) ++j;
            const std::size_t n = static_cast<std::size_t>(j - i);
            if (ly.act[i] == Act::ReLU)
                kernels::active().relu(next.data() + i, n);
            else if (ly.act[i] == Act::BiSU)
                kernels::active().bisu(next.data() + i, n);
            i = j;
        }
        cur.swap(next);
    }
    return cur;
}

std::vector<double> NeuralNet::realize2(double x, double y) const {
    const double p[2] = {x, y};
    return realize(std::span<const double>(p, 2));
}

NnStats nn_stats(const NeuralNet& net) {
    NnStats st;
    st.depth = net.depth();
    for (const Layer& ly : net.layers()) {
        std::size_t m = 0;
        for (double v : ly.A.vals)
            if (v != 0.0) ++m;
        for (double v : ly.b)
            if (v != 0.0) ++m;
        st.layer_sizes.push_back(m);
        st.widths.push_back(ly.rows());
        st.size += m;
    }
    return st;
}

namespace {

using Triplet = std::tuple<int, int, double>;

void append_block(std::vector<Triplet>& out, const kernels::Csr& m, int row0, int col0) {
    for (int r = 0; r < m.rows; ++r)
        for (int k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k)
            out.emplace_back(row0 + r, col0 + m.colidx[k], m.vals[k]);
}

Layer stack_layer(const Layer& t, const Layer& u, bool share_input) {
    std::vector<Triplet> trip;
    append_block(trip, t.A, 0, 0);
    append_block(trip, u.A, t.rows(), share_input ? 0 : t.cols());
    Layer out;
    out.A = kernels::Csr::from_triplets(t.rows() + u.rows(),
                                        share_input ? t.cols() : t.cols() + u.cols(),
                                        std::move(trip));
    out.b = t.b;
    out.b.insert(out.b.end(), u.b.begin(), u.b.end());
    out.act = t.act;
    out.act.insert(out.act.end(), u.act.begin(), u.act.end());
    return out;
}

}  // namespace

NeuralNet parallelize(const NeuralNet& a, const NeuralNet& b) {
    if (a.input_dim() != b.input_dim())
        throw std::invalid_argument("parallelize: input dimensions differ");
    if (a.depth() != b.depth()) throw std::invalid_argument("parallelize: depths differ");
    std::vector<Layer> layers;
    for (int l = 0; l < a.depth(); ++l)
        layers.push_back(stack_layer(a.layer(l), b.layer(l), l == 0));
    return NeuralNet(a.input_dim(), std::move(layers));
}

NeuralNet parallelize(const std::vector<NeuralNet>& nets) {
    if (nets.empty()) throw std::invalid_argument("parallelize: no nets");
    NeuralNet acc = nets.front();
    for (std::size_t i = 1; i < nets.size(); ++i) acc = parallelize(acc, nets[i]);
    return acc;
}

NeuralNet sum_nn(const NeuralNet& a, const NeuralNet& b) {
    if (a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim())
        throw std::invalid_argument("sum_nn: dimensions differ");
    if (a.depth() != b.depth()) throw std::invalid_argument("sum_nn: depths differ");
    const int L = a.depth();
    if (L == 1) {
        // affine nets: sum weights directly
        std::vector<Triplet> trip;
        append_block(trip, a.layer(0).A, 0, 0);
        append_block(trip, b.layer(0).A, 0, 0);
        Layer out;
        out.A = kernels::Csr::from_triplets(a.output_dim(), a.input_dim(), std::move(trip));
        out.b = a.layer(0).b;
        for (int i = 0; i < a.output_dim(); ++i) out.b[i] += b.layer(0).b[i];
        out.act.assign(a.output_dim(), Act::Id);
        return NeuralNet(a.input_dim(), {std::move(out)});
    }
    std::vector<Layer> layers;
    for (int l = 0; l < L - 1; ++l)
        layers.push_back(stack_layer(a.layer(l), b.layer(l), l == 0));
    // merging output layer: [A_L^(1) A_L^(2)], biases added
    std::vector<Triplet> trip;
    append_block(trip, a.layer(L - 1).A, 0, 0);
    append_block(trip, b.layer(L - 1).A, 0, a.layer(L - 1).cols());
    Layer out;
    out.A = kernels::Csr::from_triplets(a.output_dim(),
                                        a.layer(L - 1).cols() + b.layer(L - 1).cols(),
                                        std::move(trip));
    out.b = a.layer(L - 1).b;
    for (int i = 0; i < a.output_dim(); ++i) out.b[i] += b.layer(L - 1).b[i];
    out.act.assign(a.output_dim(), Act::Id);
    layers.push_back(std::move(out));
    return NeuralNet(a.input_dim(), std::move(layers));
}

NeuralNet concat(const NeuralNet& outer, const NeuralNet& inner) {
    if (outer.input_dim() != inner.output_dim())
        throw std::invalid_argument("concat: inner output does not match outer input");
    std::vector<Layer> layers;
    for (int l = 0; l < inner.depth() - 1; ++l) layers.push_back(inner.layer(l));
    // merged layer: A = A1_1 * A2_L, b = A1_1 * b2_L + b1_1
    const Layer& li = inner.layer(inner.depth() - 1);
    const Layer& lo = outer.layer(0);
    std::vector<Triplet> trip;
    for (int r = 0; r < lo.A.rows; ++r)
        for (int k = lo.A.rowptr[r]; k < lo.A.rowptr[r + 1]; ++k) {
            const int mid = lo.A.colidx[k];
            const double w = lo.A.vals[k];
            for (int k2 = li.A.rowptr[mid]; k2 < li.A.rowptr[mid + 1]; ++k2)
                trip.emplace_back(r, li.A.colidx[k2], w * li.A.vals[k2]);
        }
    Layer merged;
    merged.A = kernels::Csr::from_triplets(lo.rows(), li.cols(), std::move(trip));
    merged.b = lo.b;
    for (int r = 0; r < lo.A.rows; ++r)
        for (int k = lo.A.rowptr[r]; k < lo.A.rowptr[r + 1]; ++k)
            merged.b[r] += lo.A.vals[k] * li.b[lo.A.colidx[k]];
    merged.act = lo.act;
    layers.push_back(std::move(merged));
    for (int l = 1; l < outer.depth(); ++l) layers.push_back(outer.layer(l));
    return NeuralNet(inner.input_dim(), std::move(layers));
}

std::string export_nn(const NeuralNet& net) {
    nlohmann::json j;
    j["input_dim"] = net.input_dim();
    auto& jl = j["layers"] = nlohmann::json::array();
    for (const Layer& ly : net.layers()) {
        nlohmann::json l;
        l["A"]["rows"] = ly.A.rows;
        l["A"]["cols"] = ly.A.cols;
        auto& t = l["A"]["triplets"] = nlohmann::json::array();
        for (int r = 0; r < ly.A.rows; ++r)
            for (int k = ly.A.rowptr[r]; k < ly.A.rowptr[r + 1]; ++k)
                t.push_back({r, ly.A.colidx[k], ly.A.vals[k]});
        l["b"] = ly.b;
        auto& acts = l["act"] = nlohmann::json::array();
        for (Act a : ly.act) acts.push_back(to_string(a));
        jl.push_back(std::move(l));
    }
    return j.dump();
}

void export_nn(const NeuralNet& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("export_nn: cannot open " + path);
    f << export_nn(net);
}

NeuralNet import_nn_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("import_nn: malformed JSON: ") + e.what());
    }
    try {
        const int input_dim = j.at("input_dim");
        std::vector<Layer> layers;
        for (const auto& l : j.at("layers")) {
            const int rows = l.at("A").at("rows");
            const int cols = l.at("A").at("cols");
            std::vector<std::tuple<int, int, double>> trip;
            for (const auto& t : l.at("A").at("triplets"))
                trip.emplace_back(t.at(0), t.at(1), t.at(2));
            Layer ly;
            ly.A = kernels::Csr::from_triplets(rows, cols, std::move(trip));
            ly.b = l.at("b").get<std::vector<double>>();
            for (const auto& a : l.at("act")) ly.act.push_back(act_from(a));
            layers.push_back(std::move(ly));
        }
        return NeuralNet(input_dim, std::move(layers));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("import_nn: invalid schema: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw std::runtime_error(std::string("import_nn: bad triplet index: ") + e.what());
    }
}

NeuralNet import_nn(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("import_nn: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return import_nn_text(ss.str());
}

}  // namespace fosls::nn
