#pragma once

// Layered neural networks with per-neuron ReLU/BiSU/Id activations, the
// calculus used to combine them (parallelization, sum, concatenation), size
// and depth accounting, and a JSON wire format.  Nets are immutable after
// construction; realize is pure.

#include <cstdint>
#include <string>
#include <vector>

#include "fosls/kernels.hpp"

namespace fosls::nn {

enum class Act : uint8_t { Id, ReLU, BiSU };

const char* to_string(Act);
Act act_from(const std::string&);

struct Layer {
    kernels::Csr A;
    std::vector<double> b;
    std::vector<Act> act;
    int rows() const { return A.rows; }
    int cols() const { return A.cols; }
};

class NeuralNet {
  public:
    NeuralNet(int input_dim, std::vector<Layer> layers);

    int input_dim() const { return input_dim_; }
    int output_dim() const { return layers_.back().rows(); }
    int depth() const { return static_cast<int>(layers_.size()); }
    const std::vector<Layer>& layers() const { return layers_; }
    const Layer& layer(int l) const { return layers_[l]; }

    std::vector<double> realize(std::span<const double> x) const;
    std::vector<double> realize2(double x, double y) const;

  private:
    int input_dim_;
    std::vector<Layer> layers_;
};

struct NnStats {
    int depth = 0;
    std::size_t size = 0;             // M: nonzeros of all A_l and b_l
    std::vector<std::size_t> layer_sizes;  // M_l
    std::vector<int> widths;          // N_l
};

NnStats nn_stats(const NeuralNet&);

// realization (R(phi1)(x), R(phi2)(x)); equal input dims and depths
NeuralNet parallelize(const NeuralNet&, const NeuralNet&);
NeuralNet parallelize(const std::vector<NeuralNet>&);

// realization R(phi1)(x) + R(phi2)(x); equal input/output dims and depths
NeuralNet sum_nn(const NeuralNet&, const NeuralNet&);

// realization R(phi1) o R(phi2); depth L1 + L2 - 1
NeuralNet concat(const NeuralNet& outer, const NeuralNet& inner);

std::string export_nn(const NeuralNet&);
void export_nn(const NeuralNet&, const std::string& path);
NeuralNet import_nn_text(const std::string& json_text);
NeuralNet import_nn(const std::string& path);

}  // namespace fosls::nn
