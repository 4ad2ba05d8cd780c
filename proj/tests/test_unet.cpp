#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "nodseg/unet.hpp"

using namespace nodseg;

namespace {

TensorF random_input(int n, int c, int h, int w, uint64_t seed) {
    TensorF x(n, c, h, w);
    Rng rng(seed);
    for (auto& v : x.data) v = float(rng.next_double());
    return x;
}

// Closed-form parameter count for the architecture: per encoder level two 3x3
// convs with bias; per decoder level a bias-free 2x2 transposed conv plus two
// 3x3 convs with bias on the concatenated input; 1x1 conv head with bias.
size_t expected_param_count(int levels, int base, int in_ch = 1, int out_ch = 1) {
    auto ch = [&](int i) { return size_t(base) << i; };
    size_t total = 0;
    for (int i = 0; i < levels; ++i) {
        const size_t cin = i == 0 ? size_t(in_ch) : ch(i - 1);
        total += ch(i) * cin * 9 + ch(i);  // conv1
        total += ch(i) * ch(i) * 9 + ch(i); // conv2
    }
    for (int i = 0; i < levels - 1; ++i) {
        total += ch(i + 1) * ch(i) * 4;          // transposed conv, no bias
        total += ch(i) * (2 * ch(i)) * 9 + ch(i); // conv1 on concat
        total += ch(i) * ch(i) * 9 + ch(i);       // conv2
    }
    total += size_t(out_ch) * ch(0) * 1 + size_t(out_ch); // head
    return total;
}

} // namespace

TEST_CASE("forward produces input-sized probabilities strictly inside (0,1)") {
    UNetConfig cfg;
    cfg.levels = 3;
    cfg.base_channels = 4;
    UNetF m = build_unet<float>(cfg, 7);

    const TensorF x = random_input(2, 1, 16, 16, 1);
    const TensorF y = unet_forward(m, x);
    CHECK(y.shape == std::array<int, 4>{2, 1, 16, 16});
    for (float v : y.data) {
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
    }
}

TEST_CASE("input dimensions must divide by 2^(levels-1)") {
    UNetConfig cfg;
    cfg.levels = 4; // divisor 8
    cfg.base_channels = 2;
    UNetF m = build_unet<float>(cfg, 0);

    CHECK_NOTHROW(unet_forward(m, random_input(1, 1, 16, 24, 2)));
    CHECK_THROWS_WITH_AS(unet_forward(m, random_input(1, 1, 12, 16, 2)),
                         doctest::Contains("divisible"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(unet_forward(m, random_input(1, 2, 16, 16, 2)),
                         doctest::Contains("channels"), std::invalid_argument);
}

TEST_CASE("config validation") {
    UNetConfig cfg;
    cfg.levels = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = UNetConfig{};
    cfg.base_channels = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = UNetConfig{};
    CHECK(cfg.channels(0) == 64);
    CHECK(cfg.channels(4) == 1024);
    CHECK(cfg.spatial_divisor() == 16);
}

TEST_CASE("initialization: biases zero, weights fan-in bounded and spread") {
    UNetConfig cfg;
    cfg.levels = 3;
    cfg.base_channels = 8;
    UNetF m = build_unet<float>(cfg, 123);

    m.for_each_param([&](Parameter<float>& p) {
        REQUIRE(p.value.numel() > 0);
        if (p.name.find("bias") != std::string::npos) {
            for (float v : p.value.data) CHECK(v == 0.0f);
            return;
        }
        // fan-in: first dim for the transposed convs (stored Cin-major),
        // second dim for ordinary convs
        const bool transposed = p.name.rfind("up", 0) == 0;
        const int fan = (transposed ? p.value.shape[0] : p.value.shape[1]) *
                        p.value.shape[2] * p.value.shape[3];
        const double bound = std::sqrt(6.0 / double(fan));
        float max_abs = 0;
        for (float v : p.value.data) {
            CHECK(std::abs(v) <= bound);
            max_abs = std::max(max_abs, std::abs(v));
        }
        // with hundreds of draws the max should approach the bound
        CHECK(max_abs > 0.5 * bound);
    });
}

TEST_CASE("parameter count matches the closed form, including the full-scale config") {
    for (auto [levels, base] : {std::pair{2, 2}, {3, 4}, {4, 8}}) {
        UNetConfig cfg;
        cfg.levels = levels;
        cfg.base_channels = base;
        UNetF m = build_unet<float>(cfg, 1);
        CHECK(m.parameter_count() == expected_param_count(levels, base));
    }
    // 5 levels, 64 base channels: the published architecture's ~31M parameters
    CHECK(expected_param_count(5, 64) == 31029633);
}

TEST_CASE("the same seed builds the same network; different seeds differ") {
    UNetConfig cfg;
    cfg.levels = 2;
    cfg.base_channels = 4;
    UNetF a = build_unet<float>(cfg, 42);
    UNetF b = build_unet<float>(cfg, 42);
    UNetF c = build_unet<float>(cfg, 43);

    std::vector<float> flat_a, flat_b, flat_c;
    a.for_each_param([&](Parameter<float>& p) {
        flat_a.insert(flat_a.end(), p.value.data.begin(), p.value.data.end());
    });
    b.for_each_param([&](Parameter<float>& p) {
        flat_b.insert(flat_b.end(), p.value.data.begin(), p.value.data.end());
    });
    c.for_each_param([&](Parameter<float>& p) {
        flat_c.insert(flat_c.end(), p.value.data.begin(), p.value.data.end());
    });
    CHECK(flat_a == flat_b);
    CHECK(flat_a != flat_c);
}

TEST_CASE("parameter names are unique and visit in a stable order") {
    UNetConfig cfg;
    cfg.levels = 3;
    cfg.base_channels = 2;
    UNetF m = build_unet<float>(cfg, 5);

    std::vector<std::string> names;
    m.for_each_param([&](Parameter<float>& p) { names.push_back(p.name); });
    // 4 per encoder level, 5 per decoder level, 2 for the head
    CHECK(names.size() == size_t(4 * 3 + 5 * 2 + 2));
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    CHECK(names.front() == "enc0.conv1.weight");
    CHECK(names.back() == "head.bias");

    std::vector<std::string> again;
    m.for_each_param([&](Parameter<float>& p) { again.push_back(p.name); });
    CHECK(names == again);
}

TEST_CASE("tracing the forward pass does not change its output") {
    UNetConfig cfg;
    cfg.levels = 3;
    cfg.base_channels = 4;
    UNetF m = build_unet<float>(cfg, 11);
    const TensorF x = random_input(2, 1, 8, 8, 3);

    const TensorF plain = unet_forward(m, x);
    UNetTrace<float> trace;
    const TensorF traced = unet_forward(m, x, &trace);
    CHECK(plain.data == traced.data);
    CHECK(trace.probs.data == plain.data);

    // and the forward is deterministic
    CHECK(unet_forward(m, x).data == plain.data);
}

TEST_CASE("backward fills every parameter gradient and returns an input-shaped grad") {
    UNetConfig cfg;
    cfg.levels = 2;
    cfg.base_channels = 2;
    UNetD m = build_unet<double>(cfg, 9);

    TensorD x(1, 1, 8, 8);
    Rng rng(4);
    for (auto& v : x.data) v = rng.next_double();

    UNetTrace<double> trace;
    const TensorD probs = unet_forward(m, x, &trace);
    TensorD upstream = TensorD::zeros_like(probs);
    for (auto& v : upstream.data) v = 1.0 / double(upstream.numel());

    const TensorD grad_in = unet_backward(m, trace, upstream);
    CHECK(grad_in.shape == x.shape);
    CHECK(grad_in.all_finite());

    size_t nonzero_grads = 0;
    m.for_each_param([&](Parameter<double>& p) {
        REQUIRE(p.grad.shape == p.value.shape);
        CHECK(p.grad.all_finite());
        for (double g : p.grad.data)
            if (g != 0.0) {
                ++nonzero_grads;
                break;
            }
    });
    // every parameter tensor should receive some signal on a random input
    CHECK(nonzero_grads == size_t(4 * 2 + 5 * 1 + 2));
}
