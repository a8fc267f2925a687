#include "wsnrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wsnrl/errors.hpp"
#include "wsnrl/kernels.hpp"

namespace wsnrl {
namespace {

constexpr int kKernel = 3;
constexpr int kPad = 2;

// Orthogonal-style init: gaussian matrix, Gram-Schmidt along the shorter
// dimension, scaled by gain.
void orthogonal_init(double* w, int rows, int cols, double gain, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool by_rows = rows <= cols;
    const int vecs = by_rows ? rows : cols;
    const int dim = by_rows ? cols : rows;
    std::vector<std::vector<double>> basis(static_cast<std::size_t>(vecs),
                                           std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& v : basis)
        for (double& x : v) x = normal(rng);
    for (int i = 0; i < vecs; ++i) {
        auto& vi = basis[static_cast<std::size_t>(i)];
        for (int j = 0; j < i; ++j) {
            const auto& vj = basis[static_cast<std::size_t>(j)];
            double proj = 0.0;
            for (int k = 0; k < dim; ++k) proj += vi[static_cast<std::size_t>(k)] * vj[static_cast<std::size_t>(k)];
            for (int k = 0; k < dim; ++k) vi[static_cast<std::size_t>(k)] -= proj * vj[static_cast<std::size_t>(k)];
        }
        double norm = 0.0;
        for (double x : vi) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            for (double& x : vi) x = normal(rng);
            norm = 0.0;
            for (double x : vi) norm += x * x;
            norm = std::sqrt(norm);
        }
        for (double& x : vi) x /= norm;
    }
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double v = by_rows ? basis[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                               : basis[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
            w[static_cast<std::size_t>(r) * cols + c] = gain * v;
        }
}

void add_bias(double* x, std::size_t m, int n, const double* b) {
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) x[i * n + j] += b[j];
}

void bias_grad(const double* dy, std::size_t m, int n, double* db) {
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) db[j] += dy[i * n + j];
}

void tanh_forward(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

// dx = dy * (1 - y^2), y already tanh(x)
void tanh_backward(const double* y, const double* dy, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
}

}  // namespace

PolicyNet::PolicyNet(int obs_features, int feature_size, int conv_layers, double leaky_slope,
                     std::mt19937_64& init_rng)
    : obs_features_(obs_features), feature_(feature_size), layers_(conv_layers),
      slope_(leaky_slope) {
    if (obs_features < 1) throw ConfigError("policy needs at least 1 observation feature");
    if (feature_size < 1) throw ConfigError("feature_size must be >= 1");
    if (conv_layers < 1) throw ConfigError("conv_layers must be >= 1");

    int h = obs_features_, w = 1;
    for (int l = 0; l < layers_; ++l) {
        ConvDims d;
        d.in_h = h;
        d.in_w = w;
        d.in_ch = l == 0 ? 1 : feature_;
        d.out_h = h + 2;
        d.out_w = w + 2;
        dims_.push_back(d);
        h += 2;
        w += 2;
    }

    std::size_t offset = 0;
    auto add = [&](const std::string& name, int rows, int cols) {
        layout_.push_back({name, rows, cols, offset});
        offset += static_cast<std::size_t>(rows) * cols;
    };
    for (int l = 0; l < layers_; ++l) {
        add("conv" + std::to_string(l) + ".w", feature_, kKernel * kKernel * dims_[static_cast<std::size_t>(l)].in_ch);
        add("conv" + std::to_string(l) + ".b", 1, feature_);
    }
    add("trunk.w", feature_, feature_);
    add("trunk.b", 1, feature_);
    add("action1.w", feature_, feature_);
    add("action1.b", 1, feature_);
    add("action2.w", 3, feature_);
    add("action2.b", 1, 3);
    add("value1.w", feature_, feature_);
    add("value1.b", 1, feature_);
    add("value2.w", 1, feature_);
    add("value2.b", 1, 1);
    params_.assign(offset, 0.0);

    const double root2 = std::sqrt(2.0);
    for (int l = 0; l < layers_; ++l) {
        const TensorInfo& t = layout_[static_cast<std::size_t>(conv_w(l))];
        orthogonal_init(params_.data() + t.offset, t.rows, t.cols, root2, init_rng);
    }
    auto init_linear = [&](int idx, double gain) {
        const TensorInfo& t = layout_[static_cast<std::size_t>(idx)];
        orthogonal_init(params_.data() + t.offset, t.rows, t.cols, gain, init_rng);
    };
    init_linear(trunk_w(), 1.0);
    init_linear(act1_w(), 1.0);
    init_linear(act2_w(), 0.01);  // near-uniform initial policy
    init_linear(val1_w(), 1.0);
    init_linear(val2_w(), 1.0);
}

std::pair<int, int> PolicyNet::conv_output_shape() const {
    return {obs_features_ + 2 * layers_, 1 + 2 * layers_};
}

void PolicyNet::im2col(const double* input, int node_count, const ConvDims& d,
                       std::vector<double>& padded, std::vector<double>& patches) const {
    const int ph = d.in_h + 2 * kPad;
    const int pw = d.in_w + 2 * kPad;
    const int k = kKernel * kKernel * d.in_ch;
    const std::size_t out_px = static_cast<std::size_t>(d.out_h) * d.out_w;
    padded.assign(static_cast<std::size_t>(ph) * pw * d.in_ch, 0.0);
    patches.resize(static_cast<std::size_t>(node_count) * out_px * k);

    const std::size_t in_stride = static_cast<std::size_t>(d.in_h) * d.in_w * d.in_ch;
    for (int n = 0; n < node_count; ++n) {
        const double* src = input + static_cast<std::size_t>(n) * in_stride;
        // center the map in the padded canvas (HWC)
        for (int y = 0; y < d.in_h; ++y)
            std::memcpy(padded.data() + ((static_cast<std::size_t>(y + kPad) * pw) + kPad) * d.in_ch,
                        src + static_cast<std::size_t>(y) * d.in_w * d.in_ch,
                        static_cast<std::size_t>(d.in_w) * d.in_ch * sizeof(double));
        double* rows = patches.data() + static_cast<std::size_t>(n) * out_px * k;
        for (int y = 0; y < d.out_h; ++y) {
            for (int x = 0; x < d.out_w; ++x) {
                double* row = rows + (static_cast<std::size_t>(y) * d.out_w + x) * k;
                for (int ky = 0; ky < kKernel; ++ky)
                    std::memcpy(row + static_cast<std::size_t>(ky) * kKernel * d.in_ch,
                                padded.data() + (static_cast<std::size_t>(y + ky) * pw + x) * d.in_ch,
                                static_cast<std::size_t>(kKernel) * d.in_ch * sizeof(double));
            }
        }
    }
}

void PolicyNet::forward(const double* obs, int nodes, int features, Cache& cache) const {
    if (features != obs_features_)
        throw ShapeError("observation has " + std::to_string(features) +
                         " features but the network expects " + std::to_string(obs_features_));
    if (nodes < 1) throw ShapeError("forward needs at least one node row");

    namespace kn = kernels;
    const int F = feature_;
    cache.nodes = nodes;
    cache.obs = obs;
    cache.conv_pre.resize(static_cast<std::size_t>(layers_));
    cache.conv_post.resize(static_cast<std::size_t>(layers_));

    const double* input = obs;
    for (int l = 0; l < layers_; ++l) {
        const ConvDims& d = dims_[static_cast<std::size_t>(l)];
        const std::size_t out_px = static_cast<std::size_t>(d.out_h) * d.out_w;
        const std::size_t m = static_cast<std::size_t>(nodes) * out_px;
        const int k = kKernel * kKernel * d.in_ch;
        im2col(input, nodes, d, cache.padded, cache.patches);
        auto& pre = cache.conv_pre[static_cast<std::size_t>(l)];
        auto& post = cache.conv_post[static_cast<std::size_t>(l)];
        pre.assign(m * F, 0.0);
        post.resize(m * F);
        kn::gemm_nt(m, static_cast<std::size_t>(F), static_cast<std::size_t>(k),
                    cache.patches.data(), tensor(conv_w(l)), pre.data());
        add_bias(pre.data(), m, F, tensor(conv_b(l)));
        kn::leaky_relu(m * F, slope_, pre.data(), post.data());
        input = post.data();
    }

    // global average pooling over the final map
    const ConvDims& last = dims_.back();
    const std::size_t px = static_cast<std::size_t>(last.out_h) * last.out_w;
    cache.pooled.assign(static_cast<std::size_t>(nodes) * F, 0.0);
    const double inv_px = 1.0 / static_cast<double>(px);
    const double* final_post = cache.conv_post.back().data();
    for (int n = 0; n < nodes; ++n) {
        double* out = cache.pooled.data() + static_cast<std::size_t>(n) * F;
        const double* maps = final_post + static_cast<std::size_t>(n) * px * F;
        for (std::size_t p = 0; p < px; ++p)
            kn::axpy(static_cast<std::size_t>(F), inv_px, maps + p * F, out);
    }

    const std::size_t nf = static_cast<std::size_t>(nodes) * F;
    cache.trunk_pre.assign(nf, 0.0);
    cache.trunk_post.resize(nf);
    kn::gemm_nt(static_cast<std::size_t>(nodes), static_cast<std::size_t>(F),
                static_cast<std::size_t>(F), cache.pooled.data(), tensor(trunk_w()),
                cache.trunk_pre.data());
    add_bias(cache.trunk_pre.data(), static_cast<std::size_t>(nodes), F, tensor(trunk_b()));
    tanh_forward(cache.trunk_pre.data(), cache.trunk_post.data(), nf);

    cache.act_pre.assign(nf, 0.0);
    cache.act_post.resize(nf);
    kn::gemm_nt(static_cast<std::size_t>(nodes), static_cast<std::size_t>(F),
                static_cast<std::size_t>(F), cache.trunk_post.data(), tensor(act1_w()),
                cache.act_pre.data());
    add_bias(cache.act_pre.data(), static_cast<std::size_t>(nodes), F, tensor(act1_b()));
    tanh_forward(cache.act_pre.data(), cache.act_post.data(), nf);

    cache.logits.assign(static_cast<std::size_t>(nodes) * 3, 0.0);
    kn::gemm_nt(static_cast<std::size_t>(nodes), 3, static_cast<std::size_t>(F),
                cache.act_post.data(), tensor(act2_w()), cache.logits.data());
    add_bias(cache.logits.data(), static_cast<std::size_t>(nodes), 3, tensor(act2_b()));

    // node-mean pooling with a canonical (sorted) summation order, so the
    // value is exactly invariant under node permutations
    cache.value_pooled.assign(static_cast<std::size_t>(F), 0.0);
    {
        std::vector<double> column(static_cast<std::size_t>(nodes));
        const double inv_nodes = 1.0 / static_cast<double>(nodes);
        for (int f = 0; f < F; ++f) {
            for (int n = 0; n < nodes; ++n)
                column[static_cast<std::size_t>(n)] =
                    cache.trunk_post[static_cast<std::size_t>(n) * F + f];
            std::sort(column.begin(), column.end());
            double acc = 0.0;
            for (double x : column) acc += x;
            cache.value_pooled[static_cast<std::size_t>(f)] = acc * inv_nodes;
        }
    }
    cache.val_pre.assign(static_cast<std::size_t>(F), 0.0);
    cache.val_post.resize(static_cast<std::size_t>(F));
    kn::gemm_nt(1, static_cast<std::size_t>(F), static_cast<std::size_t>(F),
                cache.value_pooled.data(), tensor(val1_w()), cache.val_pre.data());
    add_bias(cache.val_pre.data(), 1, F, tensor(val1_b()));
    tanh_forward(cache.val_pre.data(), cache.val_post.data(), static_cast<std::size_t>(F));
    cache.value = kn::dot(static_cast<std::size_t>(F), tensor(val2_w()), cache.val_post.data()) +
                  *tensor(val2_b());
}

void PolicyNet::backward(const Cache& cache, const double* dlogits, double dvalue,
                         std::vector<double>& grad) const {
    namespace kn = kernels;
    if (grad.size() != params_.size()) throw ShapeError("gradient buffer has wrong size");
    const int F = feature_;
    const int nodes = cache.nodes;
    const std::size_t nf = static_cast<std::size_t>(nodes) * F;

    // scratch (sized for the widest use)
    std::vector<double>& dtrunk = const_cast<Cache&>(cache).dtrunk;
    dtrunk.assign(nf, 0.0);

    // value head
    {
        std::vector<double> dval_post(static_cast<std::size_t>(F));
        for (int f = 0; f < F; ++f) dval_post[static_cast<std::size_t>(f)] = dvalue * tensor(val2_w())[f];
        kn::axpy(static_cast<std::size_t>(F), dvalue, cache.val_post.data(),
                 grad_tensor(grad, val2_w()));
        grad_tensor(grad, val2_b())[0] += dvalue;

        std::vector<double> dval_pre(static_cast<std::size_t>(F));
        tanh_backward(cache.val_post.data(), dval_post.data(), dval_pre.data(),
                      static_cast<std::size_t>(F));
        kn::gemm_tn(static_cast<std::size_t>(F), static_cast<std::size_t>(F), 1, dval_pre.data(),
                    cache.value_pooled.data(), grad_tensor(grad, val1_w()));
        bias_grad(dval_pre.data(), 1, F, grad_tensor(grad, val1_b()));

        std::vector<double> dpool(static_cast<std::size_t>(F), 0.0);
        kn::gemm_nn(1, static_cast<std::size_t>(F), static_cast<std::size_t>(F), dval_pre.data(),
                    tensor(val1_w()), dpool.data());
        const double inv_nodes = 1.0 / static_cast<double>(nodes);
        for (int n = 0; n < nodes; ++n)
            kn::axpy(static_cast<std::size_t>(F), inv_nodes, dpool.data(),
                     dtrunk.data() + static_cast<std::size_t>(n) * F);
    }

    // action head
    {
        std::vector<double> dact_post(nf, 0.0);
        kn::gemm_nn(static_cast<std::size_t>(nodes), static_cast<std::size_t>(F), 3, dlogits,
                    tensor(act2_w()), dact_post.data());
        kn::gemm_tn(3, static_cast<std::size_t>(F), static_cast<std::size_t>(nodes), dlogits,
                    cache.act_post.data(), grad_tensor(grad, act2_w()));
        bias_grad(dlogits, static_cast<std::size_t>(nodes), 3, grad_tensor(grad, act2_b()));

        std::vector<double> dact_pre(nf);
        tanh_backward(cache.act_post.data(), dact_post.data(), dact_pre.data(), nf);
        kn::gemm_tn(static_cast<std::size_t>(F), static_cast<std::size_t>(F),
                    static_cast<std::size_t>(nodes), dact_pre.data(), cache.trunk_post.data(),
                    grad_tensor(grad, act1_w()));
        bias_grad(dact_pre.data(), static_cast<std::size_t>(nodes), F, grad_tensor(grad, act1_b()));
        kn::gemm_nn(static_cast<std::size_t>(nodes), static_cast<std::size_t>(F),
                    static_cast<std::size_t>(F), dact_pre.data(), tensor(act1_w()), dtrunk.data());
    }

    // trunk
    std::vector<double> dtrunk_pre(nf);
    tanh_backward(cache.trunk_post.data(), dtrunk.data(), dtrunk_pre.data(), nf);
    kn::gemm_tn(static_cast<std::size_t>(F), static_cast<std::size_t>(F),
                static_cast<std::size_t>(nodes), dtrunk_pre.data(), cache.pooled.data(),
                grad_tensor(grad, trunk_w()));
    bias_grad(dtrunk_pre.data(), static_cast<std::size_t>(nodes), F, grad_tensor(grad, trunk_b()));
    std::vector<double> dpooled(nf, 0.0);
    kn::gemm_nn(static_cast<std::size_t>(nodes), static_cast<std::size_t>(F),
                static_cast<std::size_t>(F), dtrunk_pre.data(), tensor(trunk_w()), dpooled.data());

    // GAP backward into the last conv map
    Cache& c = const_cast<Cache&>(cache);
    const ConvDims& last = dims_.back();
    const std::size_t last_px = static_cast<std::size_t>(last.out_h) * last.out_w;
    c.dpost_prev.assign(static_cast<std::size_t>(nodes) * last_px * F, 0.0);
    const double inv_px = 1.0 / static_cast<double>(last_px);
    for (int n = 0; n < nodes; ++n) {
        const double* src = dpooled.data() + static_cast<std::size_t>(n) * F;
        double* dst = c.dpost_prev.data() + static_cast<std::size_t>(n) * last_px * F;
        for (std::size_t p = 0; p < last_px; ++p)
            kn::axpy(static_cast<std::size_t>(F), inv_px, src, dst + p * F);
    }

    // conv stack, last layer to first
    for (int l = layers_ - 1; l >= 0; --l) {
        const ConvDims& d = dims_[static_cast<std::size_t>(l)];
        const std::size_t out_px = static_cast<std::size_t>(d.out_h) * d.out_w;
        const std::size_t m = static_cast<std::size_t>(nodes) * out_px;
        const int k = kKernel * kKernel * d.in_ch;

        c.dpre.resize(m * F);
        kn::leaky_relu_grad(m * F, slope_, cache.conv_pre[static_cast<std::size_t>(l)].data(),
                            c.dpost_prev.data(), c.dpre.data());
        bias_grad(c.dpre.data(), m, F, grad_tensor(grad, conv_b(l)));

        const double* input =
            l == 0 ? cache.obs : cache.conv_post[static_cast<std::size_t>(l - 1)].data();
        im2col(input, nodes, d, c.padded, c.patches);
        kn::gemm_tn(static_cast<std::size_t>(F), static_cast<std::size_t>(k), m, c.dpre.data(),
                    c.patches.data(), grad_tensor(grad, conv_w(l)));

        if (l == 0) break;
        c.dpatches.assign(m * static_cast<std::size_t>(k), 0.0);
        kn::gemm_nn(m, static_cast<std::size_t>(k), static_cast<std::size_t>(F), c.dpre.data(),
                    tensor(conv_w(l)), c.dpatches.data());

        // col2im scatter-add, then crop the padding
        const int ph = d.in_h + 2 * kPad;
        const int pw = d.in_w + 2 * kPad;
        std::vector<double> dinput(static_cast<std::size_t>(nodes) * d.in_h * d.in_w * d.in_ch);
        for (int n = 0; n < nodes; ++n) {
            c.dpadded.assign(static_cast<std::size_t>(ph) * pw * d.in_ch, 0.0);
            const double* rows =
                c.dpatches.data() + static_cast<std::size_t>(n) * out_px * static_cast<std::size_t>(k);
            for (int y = 0; y < d.out_h; ++y)
                for (int x = 0; x < d.out_w; ++x) {
                    const double* row = rows + (static_cast<std::size_t>(y) * d.out_w + x) *
                                                   static_cast<std::size_t>(k);
                    for (int ky = 0; ky < kKernel; ++ky)
                        kn::axpy(static_cast<std::size_t>(kKernel) * d.in_ch, 1.0,
                                 row + static_cast<std::size_t>(ky) * kKernel * d.in_ch,
                                 c.dpadded.data() +
                                     (static_cast<std::size_t>(y + ky) * pw + x) * d.in_ch);
                }
            double* out = dinput.data() + static_cast<std::size_t>(n) * d.in_h * d.in_w * d.in_ch;
            for (int y = 0; y < d.in_h; ++y)
                std::memcpy(out + static_cast<std::size_t>(y) * d.in_w * d.in_ch,
                            c.dpadded.data() +
                                ((static_cast<std::size_t>(y + kPad) * pw) + kPad) * d.in_ch,
                            static_cast<std::size_t>(d.in_w) * d.in_ch * sizeof(double));
        }
        c.dpost_prev = std::move(dinput);
    }
}

PolicyNet make_policy(int obs_features, const AgentConfig& agent, int node_count,
                      std::mt19937_64& init_rng) {
    return PolicyNet(obs_features, agent.resolved_feature_size(node_count), agent.conv_layers,
                     agent.leaky_slope, init_rng);
}

}  // namespace wsnrl
