#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drljrm/rng.hpp"

namespace drljrm {

enum class Act { kIdentity, kRelu, kSigmoid };

struct TensorShape {
    int c = 1, h = 1, w = 1;
    int len() const { return c * h * w; }
    bool operator==(const TensorShape& o) const { return c == o.c && h == o.h && w == o.w; }
};

// Flat value array with a same-shape gradient buffer.
struct Tensor {
    TensorShape shape;
    std::vector<double> data;
    std::vector<double> grad;

    Tensor() = default;
    explicit Tensor(int n) : shape{1, 1, n}, data(n, 0.0), grad(n, 0.0) {}
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
    size_t size() const { return data.size(); }
};

struct Layer {
    enum class Kind { kFc, kGroupedFc, kResBlock, kConv, kMaxPool, kFlatten };
    Kind kind = Kind::kFc;
    int n_in = 0, n_out = 0;    // fc
    Act act = Act::kIdentity;   // fc / grouped fc / conv
    std::vector<int> group_in;  // grouped fc: per-group input widths
    int group_out = 0;          // grouped fc: output width per group
    int width = 0;              // resblock
    int in_c = 0, out_c = 0, kernel = 0;  // conv
    int window = 0;             // maxpool

    static Layer fc(int n_in, int n_out, Act act);
    static Layer grouped_fc(std::vector<int> group_in, int group_out, Act act);
    static Layer resblock(int width);
    static Layer conv(int in_c, int out_c, int kernel, Act act);
    static Layer maxpool(int window);
    static Layer flatten();

    size_t param_count() const;
};

struct NetworkSpec {
    TensorShape input;
    std::vector<Layer> layers;

    void validate() const;  // throws std::invalid_argument unless shapes compose
    TensorShape shape_after(int layer_idx) const;  // shape after layers[0..layer_idx]
    TensorShape output_shape() const;
    int output_len() const { return output_shape().len(); }
    size_t param_count() const;
    uint64_t count_macs() const;  // one forward pass, weight multiplies only
    std::string describe() const;
    uint64_t hash() const;  // FNV-1a over describe()
};

struct ForwardCache {
    std::vector<std::vector<double>> x;    // x[0] = input, x[i+1] = output of layer i
    std::vector<std::vector<double>> aux;  // resblock inner activation, else empty
};

class Network {
  public:
    explicit Network(NetworkSpec spec);

    void init(Rng& rng);  // Glorot-uniform weights, zero biases

    const NetworkSpec& spec() const { return spec_; }
    Tensor& params() { return params_; }
    const Tensor& params() const { return params_; }

    std::vector<double> forward(const std::vector<double>& input) const;
    std::vector<double> forward(const std::vector<double>& input, ForwardCache& cache) const;

    // Accumulates dL/dparam into params().grad; returns dL/dinput.
    std::vector<double> backward(const ForwardCache& cache, const std::vector<double>& upstream);

    uint64_t forward_macs() const { return forward_macs_; }
    uint64_t backward_macs() const { return backward_macs_; }
    void reset_mac_counters() {
        forward_macs_ = 0;
        backward_macs_ = 0;
    }

  private:
    NetworkSpec spec_;
    Tensor params_;
    std::vector<size_t> offsets_;  // per-layer start into the flat parameter vector
    mutable uint64_t forward_macs_ = 0;
    uint64_t backward_macs_ = 0;
};

struct RmsProp {
    double lr = 1e-3;
    double rho = 0.9;
    double eps = 1e-8;
    std::vector<double> acc;

    explicit RmsProp(double lr_) : lr(lr_) {}
    void step(Tensor& params);  // consumes params.grad; does not clear it
};

void soft_update(Tensor& target, const Tensor& online, double tau);

// Central-finite-difference check of backward() against numeric gradients of a
// fixed random linear readout loss. Returns the max relative error over all
// parameters and inputs.
double gradient_check(Network& net, uint64_t seed, int probes = 0);

// Checkpoint file: named blocks of (spec hash, flat vector).
struct CheckpointBlock {
    std::string name;
    uint64_t hash = 0;
    std::vector<double> values;
};
void save_checkpoint(const std::string& path, const std::vector<CheckpointBlock>& blocks);
std::vector<CheckpointBlock> load_checkpoint(const std::string& path);
// Lookup that enforces the stored hash; throws on mismatch or absence.
const CheckpointBlock& checkpoint_block(const std::vector<CheckpointBlock>& blocks, const std::string& name,
                                        uint64_t expected_hash);

}  // namespace drljrm
