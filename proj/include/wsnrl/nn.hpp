#pragma once

#include <random>
#include <string>
#include <vector>

#include "wsnrl/config.hpp"

namespace wsnrl {

// Node-scalable actor-critic network. Each node's state row becomes an
// h x 1 single-channel map (h = 3 or 4 features) that runs through a stack
// of 3x3 convolutions with zero padding 2 (each layer grows the map by 2 in
// both dims: 4x1 -> 20x17 after 8 layers), leaky-rectifier activations, and
// constant channel width = feature_size. Global average pooling plus one
// linear layer produce a per-node feature vector; weights are shared across
// nodes, so nodes ride the batch axis. The action head maps each node's
// feature to 3 logits, the value head maps the node-mean feature to one
// scalar. Everything is double precision with hand-written backward passes
// on top of the kernels layer.
class PolicyNet {
  public:
    PolicyNet(int obs_features, int feature_size, int conv_layers, double leaky_slope,
              std::mt19937_64& init_rng);

    struct Cache {
        int nodes = 0;
        std::vector<std::vector<double>> conv_pre;   // per layer, [nodes*px, F]
        std::vector<std::vector<double>> conv_post;  // after leaky relu
        std::vector<double> pooled;                  // [nodes, F]
        std::vector<double> trunk_pre, trunk_post;   // [nodes, F]
        std::vector<double> act_pre, act_post;       // [nodes, F]
        std::vector<double> logits;                  // [nodes, 3]
        std::vector<double> value_pooled;            // [F]
        std::vector<double> val_pre, val_post;       // [F]
        double value = 0.0;
        const double* obs = nullptr;  // borrowed; valid until the next forward

        // scratch buffers reused across calls
        std::vector<double> padded, patches, dpre, dpost_prev, dpatches, dpadded, dtrunk;
    };

    // obs is row-major [nodes x features]. Throws ShapeError on a feature
    // mismatch with the parameters.
    void forward(const double* obs, int nodes, int features, Cache& cache) const;

    // Accumulates parameter gradients into grad (size param_count()) given
    // upstream gradients for the logits and the value.
    void backward(const Cache& cache, const double* dlogits, double dvalue,
                  std::vector<double>& grad) const;

    int obs_features() const { return obs_features_; }
    int feature_size() const { return feature_; }
    int conv_layers() const { return layers_; }
    double leaky_slope() const { return slope_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // (h, w) of the final conv feature map: (features + 2L, 1 + 2L).
    std::pair<int, int> conv_output_shape() const;

    struct TensorInfo {
        std::string name;
        int rows = 0;
        int cols = 0;
        std::size_t offset = 0;
    };
    const std::vector<TensorInfo>& layout() const { return layout_; }

  private:
    struct ConvDims {
        int in_h, in_w, in_ch, out_h, out_w;
    };

    int obs_features_;
    int feature_;
    int layers_;
    double slope_;
    std::vector<ConvDims> dims_;
    std::vector<TensorInfo> layout_;
    std::vector<double> params_;

    const double* tensor(int idx) const { return params_.data() + layout_[idx].offset; }
    double* grad_tensor(std::vector<double>& g, int idx) const {
        return g.data() + layout_[idx].offset;
    }
    // layout indices
    int conv_w(int l) const { return 2 * l; }
    int conv_b(int l) const { return 2 * l + 1; }
    int trunk_w() const { return 2 * layers_; }
    int trunk_b() const { return 2 * layers_ + 1; }
    int act1_w() const { return 2 * layers_ + 2; }
    int act1_b() const { return 2 * layers_ + 3; }
    int act2_w() const { return 2 * layers_ + 4; }
    int act2_b() const { return 2 * layers_ + 5; }
    int val1_w() const { return 2 * layers_ + 6; }
    int val1_b() const { return 2 * layers_ + 7; }
    int val2_w() const { return 2 * layers_ + 8; }
    int val2_b() const { return 2 * layers_ + 9; }

    void im2col(const double* input, int node_count, const ConvDims& d,
                std::vector<double>& padded, std::vector<double>& patches) const;
};

// Feature size rule from the paper cases: smallest power of two >= node
// count (32/64/128 for 16/56/112), unless the config pins a value.
PolicyNet make_policy(int obs_features, const AgentConfig& agent, int node_count,
                      std::mt19937_64& init_rng);

}  // namespace wsnrl
