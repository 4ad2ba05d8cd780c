#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nodseg/adam.hpp"
#include "nodseg/ops.hpp"
#include "nodseg/rng.hpp"
#include "nodseg/tensor.hpp"

namespace nodseg {

struct UNetConfig {
    int levels = 5;
    int base_channels = 64;
    int in_channels = 1;
    int out_channels = 1;

    void validate() const {
        if (levels < 2) throw std::invalid_argument("unet: levels must be >= 2");
        if (base_channels < 1) throw std::invalid_argument("unet: base_channels must be >= 1");
        if (in_channels < 1 || out_channels < 1)
            throw std::invalid_argument("unet: channel counts must be >= 1");
    }

    // channels at resolution level i; doubles per level
    int channels(int level) const { return base_channels << level; }
    // required divisor of the input spatial dims
    int spatial_divisor() const { return 1 << (levels - 1); }

    bool operator==(const UNetConfig&) const = default;
};

template <class T>
struct ConvParam {
    Parameter<T> w;
    Parameter<T> b;
};

// Encoder-decoder with skip connections. Every level is a double 3x3
// convolution with ReLU; encoder levels are joined by 2x2 max-pooling, decoder
// levels by a 2x2 stride-2 transposed convolution followed by channel
// concatenation with the matching encoder output. Head: 1x1 conv + sigmoid.
template <class T>
struct UNet {
    UNetConfig cfg;
    std::vector<ConvParam<T>> enc1, enc2; // per level, 0..levels-1
    std::vector<Parameter<T>> up;         // per decoder level, 0..levels-2
    std::vector<ConvParam<T>> dec1, dec2; // per decoder level
    ConvParam<T> head;

    // Visits parameters in the canonical (checkpoint) order.
    template <class F>
    void for_each_param(F&& f) {
        for (int i = 0; i < cfg.levels; ++i) {
            f(enc1[i].w);
            f(enc1[i].b);
            f(enc2[i].w);
            f(enc2[i].b);
        }
        for (int i = cfg.levels - 2; i >= 0; --i) {
            f(up[i]);
            f(dec1[i].w);
            f(dec1[i].b);
            f(dec2[i].w);
            f(dec2[i].b);
        }
        f(head.w);
        f(head.b);
    }

    size_t parameter_count() {
        size_t total = 0;
        for_each_param([&](Parameter<T>& p) { total += p.value.numel(); });
        return total;
    }
};

using UNetF = UNet<float>;
using UNetD = UNet<double>;

namespace detail {

// fan-in scaled uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)), biases zero
template <class T>
Parameter<T> init_conv_weight(const std::string& name, int cout_dim, int cin_dim, int kh, int kw,
                              int fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / double(fan_in));
    Tensor<T> t(cout_dim, cin_dim, kh, kw);
    for (auto& v : t.data) v = T(rng.next_uniform(-bound, bound));
    return Parameter<T>(name, std::move(t));
}

} // namespace detail

template <class T>
UNet<T> build_unet(const UNetConfig& cfg, uint64_t seed) {
    cfg.validate();
    UNet<T> m;
    m.cfg = cfg;
    Rng rng(mix_seed(seed, 0x756e6574)); // one stream, parameters drawn in canonical order
    const int L = cfg.levels;

    m.enc1.resize(L);
    m.enc2.resize(L);
    m.up.resize(L - 1);
    m.dec1.resize(L - 1);
    m.dec2.resize(L - 1);

    for (int i = 0; i < L; ++i) {
        const int cin = i == 0 ? cfg.in_channels : cfg.channels(i - 1);
        const int ch = cfg.channels(i);
        const std::string base = "enc" + std::to_string(i);
        m.enc1[i].w = detail::init_conv_weight<T>(base + ".conv1.weight", ch, cin, 3, 3, cin * 9, rng);
        m.enc1[i].b = Parameter<T>(base + ".conv1.bias", Tensor<T>(ch, 1, 1, 1));
        m.enc2[i].w = detail::init_conv_weight<T>(base + ".conv2.weight", ch, ch, 3, 3, ch * 9, rng);
        m.enc2[i].b = Parameter<T>(base + ".conv2.bias", Tensor<T>(ch, 1, 1, 1));
    }
    for (int i = L - 2; i >= 0; --i) {
        const int ch = cfg.channels(i);
        const int coarse = cfg.channels(i + 1);
        const std::string base = "dec" + std::to_string(i);
        // transposed conv weight is stored (Cin, Cout, 2, 2)
        m.up[i] = detail::init_conv_weight<T>("up" + std::to_string(i) + ".weight", coarse, ch, 2, 2,
                                              coarse * 4, rng);
        m.dec1[i].w =
            detail::init_conv_weight<T>(base + ".conv1.weight", ch, 2 * ch, 3, 3, 2 * ch * 9, rng);
        m.dec1[i].b = Parameter<T>(base + ".conv1.bias", Tensor<T>(ch, 1, 1, 1));
        m.dec2[i].w = detail::init_conv_weight<T>(base + ".conv2.weight", ch, ch, 3, 3, ch * 9, rng);
        m.dec2[i].b = Parameter<T>(base + ".conv2.bias", Tensor<T>(ch, 1, 1, 1));
    }
    m.head.w = detail::init_conv_weight<T>("head.weight", cfg.out_channels, cfg.channels(0), 1, 1,
                                           cfg.channels(0), rng);
    m.head.b = Parameter<T>("head.bias", Tensor<T>(cfg.out_channels, 1, 1, 1));
    return m;
}

// Activations retained by a training forward pass for the backward walk.
template <class T>
struct UNetTrace {
    struct EncLevel {
        Tensor<T> in, mid, out;        // conv1 input, relu(conv1), relu(conv2)
        std::vector<uint8_t> pool_arg; // argmax of the pool applied to `out`
    };
    struct DecLevel {
        Tensor<T> cat, mid, out;
    };
    std::vector<EncLevel> enc;
    std::vector<DecLevel> dec; // indexed by decoder level (0 = finest)
    Tensor<T> probs;
};

template <class T>
void check_unet_input(const UNet<T>& m, const Tensor<T>& x) {
    if (x.c() != m.cfg.in_channels)
        throw std::invalid_argument("unet: input has " + std::to_string(x.c()) +
                                    " channels, expected " + std::to_string(m.cfg.in_channels));
    const int div = m.cfg.spatial_divisor();
    if (x.h() % div != 0 || x.w() % div != 0)
        throw std::invalid_argument("unet: input spatial dims " + std::to_string(x.h()) + "x" +
                                    std::to_string(x.w()) + " must be divisible by " +
                                    std::to_string(div));
}

// Forward pass; pass a trace to retain activations for backward, or nullptr
// for inference. Output has the input's spatial size, values in (0,1).
template <class T>
Tensor<T> unet_forward(const UNet<T>& m, const Tensor<T>& x, UNetTrace<T>* trace = nullptr) {
    check_unet_input(m, x);
    const int L = m.cfg.levels;
    if (trace) {
        trace->enc.assign(size_t(L), {});
        trace->dec.assign(size_t(L - 1), {});
    }

    std::vector<Tensor<T>> skips(static_cast<size_t>(L)); // encoder outputs
    Tensor<T> cur = x;
    for (int i = 0; i < L; ++i) {
        Tensor<T> in = std::move(cur);
        Tensor<T> mid = relu_forward(conv2d_forward(in, m.enc1[i].w.value, m.enc1[i].b.value));
        Tensor<T> out = relu_forward(conv2d_forward(mid, m.enc2[i].w.value, m.enc2[i].b.value));
        if (i < L - 1) {
            auto pooled = maxpool2x2_forward(out);
            cur = std::move(pooled.out);
            if (trace) trace->enc[i].pool_arg = std::move(pooled.argmax);
        } else {
            cur = out;
        }
        if (trace) {
            trace->enc[i].in = std::move(in);
            trace->enc[i].mid = std::move(mid);
        }
        skips[i] = std::move(out);
    }

    for (int i = L - 2; i >= 0; --i) {
        Tensor<T> up_out = conv_transpose2d_forward(cur, m.up[i].value);
        if (up_out.h() != skips[i].h() || up_out.w() != skips[i].w())
            throw std::logic_error("unet: skip/decoder size mismatch at level " + std::to_string(i));
        Tensor<T> cat = concat_channels(skips[i], up_out);
        up_out = Tensor<T>();
        if (!trace) skips[i] = Tensor<T>();
        Tensor<T> mid = relu_forward(conv2d_forward(cat, m.dec1[i].w.value, m.dec1[i].b.value));
        Tensor<T> out = relu_forward(conv2d_forward(mid, m.dec2[i].w.value, m.dec2[i].b.value));
        if (trace) {
            trace->enc[i].out = std::move(skips[i]);
            trace->dec[i].cat = std::move(cat);
            trace->dec[i].mid = std::move(mid);
            trace->dec[i].out = out;
        }
        cur = std::move(out);
    }
    if (trace) trace->enc[L - 1].out = std::move(skips[L - 1]);

    Tensor<T> probs = sigmoid_forward(conv2d_forward(cur, m.head.w.value, m.head.b.value));
    if (trace) trace->probs = probs;
    return probs;
}

// Backward pass from d(loss)/d(probs); assigns parameter gradients and
// returns d(loss)/d(input).
template <class T>
Tensor<T> unet_backward(UNet<T>& m, const UNetTrace<T>& trace, const Tensor<T>& grad_probs) {
    const int L = m.cfg.levels;

    // head
    Tensor<T> g = sigmoid_backward(trace.probs, grad_probs);
    const Tensor<T>& head_in = L >= 2 ? trace.dec[0].out : trace.enc[L - 1].out;
    {
        auto hg = conv2d_backward(head_in, m.head.w.value, g);
        m.head.w.grad = std::move(hg.weight);
        m.head.b.grad = std::move(hg.bias);
        g = std::move(hg.input);
    }

    // decoder, fine to coarse; d(up input) feeds the next coarser stage
    std::vector<Tensor<T>> skip_grad(static_cast<size_t>(L)); // grads w.r.t. encoder outputs
    for (int i = 0; i <= L - 2; ++i) {
        g = relu_backward(trace.dec[i].out, g);
        {
            auto cg = conv2d_backward(trace.dec[i].mid, m.dec2[i].w.value, g);
            m.dec2[i].w.grad = std::move(cg.weight);
            m.dec2[i].b.grad = std::move(cg.bias);
            g = std::move(cg.input);
        }
        g = relu_backward(trace.dec[i].mid, g);
        {
            auto cg = conv2d_backward(trace.dec[i].cat, m.dec1[i].w.value, g);
            m.dec1[i].w.grad = std::move(cg.weight);
            m.dec1[i].b.grad = std::move(cg.bias);
            g = std::move(cg.input);
        }
        auto parts = split_channels(g, m.cfg.channels(i));
        skip_grad[i] = std::move(parts.first);
        const Tensor<T>& up_in = i == L - 2 ? trace.enc[L - 1].out : trace.dec[i + 1].out;
        auto ug = conv_transpose2d_backward(up_in, m.up[i].value, parts.second);
        m.up[i].grad = std::move(ug.weight);
        g = std::move(ug.input);
    }
    skip_grad[L - 1] = std::move(g);

    // encoder, coarse to fine
    Tensor<T> grad_in;
    for (int i = L - 1; i >= 0; --i) {
        Tensor<T> go = std::move(skip_grad[i]);
        g = relu_backward(trace.enc[i].out, go);
        {
            auto cg = conv2d_backward(trace.enc[i].mid, m.enc2[i].w.value, g);
            m.enc2[i].w.grad = std::move(cg.weight);
            m.enc2[i].b.grad = std::move(cg.bias);
            g = std::move(cg.input);
        }
        g = relu_backward(trace.enc[i].mid, g);
        {
            auto cg = conv2d_backward(trace.enc[i].in, m.enc1[i].w.value, g);
            m.enc1[i].w.grad = std::move(cg.weight);
            m.enc1[i].b.grad = std::move(cg.bias);
            g = std::move(cg.input);
        }
        if (i > 0) {
            // g is d(pooled enc_out[i-1]); route through the pool and add the skip part
            Tensor<T> through_pool =
                maxpool2x2_backward(g, trace.enc[i - 1].pool_arg, 2 * g.h(), 2 * g.w());
            for (size_t k = 0; k < through_pool.data.size(); ++k)
                skip_grad[i - 1].data[k] += through_pool.data[k];
        } else {
            grad_in = std::move(g);
        }
    }
    return grad_in;
}

// Checkpoint I/O (32-bit float payload; see docs/checkpoint_format.md).
void save_checkpoint(UNetF& model, const std::string& path);
UNetF load_checkpoint(const std::string& path, const UNetConfig* expected = nullptr);

uint32_t crc32_ieee(const void* data, size_t len, uint32_t seed = 0);

} // namespace nodseg
