#include "nodseg/gradcheck.hpp"

#include "nodseg/dice.hpp"
#include "nodseg/ops.hpp"
#include "nodseg/unet.hpp"

namespace nodseg {

namespace {

TensorD rand_tensor(int n, int c, int h, int w, double lo, double hi, Rng& rng) {
    return TensorD::uniform(n, c, h, w, lo, hi, rng);
}

double weighted_sum(const TensorD& t, const TensorD& r) {
    double s = 0;
    for (size_t i = 0; i < t.data.size(); ++i) s += t.data[i] * r.data[i];
    return s;
}

GradSuiteEntry entry(const std::string& name, const GradCheckResult& res, double tol) {
    return {name, res.max_rel_err, tol, res.skipped.size(), res.passed(tol)};
}

} // namespace

std::vector<GradSuiteEntry> run_gradient_suite(uint64_t seed) {
    std::vector<GradSuiteEntry> out;
    Rng rng(mix_seed(seed, 0x67726164));
    const double eps = 1e-5;

    // conv2d: d/d input, d/d weight, d/d bias
    {
        TensorD x = rand_tensor(1, 2, 6, 6, -1, 1, rng);
        TensorD w = rand_tensor(3, 2, 3, 3, -1, 1, rng);
        TensorD b = rand_tensor(3, 1, 1, 1, -0.5, 0.5, rng);
        TensorD r = rand_tensor(1, 3, 6, 6, -1, 1, rng);
        auto grads = conv2d_backward(x, w, r);
        out.push_back(entry("conv2d/input",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(conv2d_forward(t, w, b), r);
                            }, x, grads.input, eps),
                            1e-6));
        out.push_back(entry("conv2d/weight",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(conv2d_forward(x, t, b), r);
                            }, w, grads.weight, eps),
                            1e-6));
        out.push_back(entry("conv2d/bias",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(conv2d_forward(x, w, t), r);
                            }, b, grads.bias, eps),
                            1e-6));
    }

    // conv_transpose2d: d/d input, d/d weight
    {
        TensorD x = rand_tensor(1, 3, 5, 6, -1, 1, rng);
        TensorD w = rand_tensor(3, 2, 2, 2, -1, 1, rng);
        TensorD r = rand_tensor(1, 2, 10, 12, -1, 1, rng);
        auto grads = conv_transpose2d_backward(x, w, r);
        out.push_back(entry("conv_transpose2d/input",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(conv_transpose2d_forward(t, w), r);
                            }, x, grads.input, eps),
                            1e-6));
        out.push_back(entry("conv_transpose2d/weight",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(conv_transpose2d_forward(x, t), r);
                            }, w, grads.weight, eps),
                            1e-6));
    }

    // maxpool away from ties: distinct values spaced well beyond eps
    {
        TensorD x(1, 2, 6, 6);
        std::vector<size_t> order(x.numel());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle(order, rng);
        for (size_t i = 0; i < x.numel(); ++i) x.data[order[i]] = 0.01 * double(i) - 0.3;
        TensorD r = rand_tensor(1, 2, 3, 3, -1, 1, rng);
        auto fwd = maxpool2x2_forward(x);
        TensorD gi = maxpool2x2_backward(r, fwd.argmax, x.h(), x.w());
        out.push_back(entry("maxpool2x2/input",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(maxpool2x2_forward(t).out, r);
                            }, x, gi, eps),
                            1e-6));
    }

    // relu away from the kink
    {
        TensorD x = rand_tensor(1, 1, 4, 4, 0.1, 1.0, rng);
        for (size_t i = 0; i < x.numel(); i += 2) x.data[i] = -x.data[i];
        TensorD r = rand_tensor(1, 1, 4, 4, -1, 1, rng);
        TensorD gi = relu_backward(x, r);
        out.push_back(entry("relu/input",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(relu_forward(t), r);
                            }, x, gi, eps),
                            1e-6));
    }

    // sigmoid
    {
        TensorD x = rand_tensor(1, 1, 4, 4, -3, 3, rng);
        TensorD r = rand_tensor(1, 1, 4, 4, -1, 1, rng);
        TensorD gi = sigmoid_backward(sigmoid_forward(x), r);
        out.push_back(entry("sigmoid/input",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(sigmoid_forward(t), r);
                            }, x, gi, eps),
                            1e-6));
    }

    // concat: gradient splits
    {
        TensorD a = rand_tensor(1, 2, 4, 4, -1, 1, rng);
        TensorD b = rand_tensor(1, 3, 4, 4, -1, 1, rng);
        TensorD r = rand_tensor(1, 5, 4, 4, -1, 1, rng);
        auto parts = split_channels(r, a.c());
        out.push_back(entry("concat/a",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(concat_channels(t, b), r);
                            }, a, parts.first, eps),
                            1e-6));
        out.push_back(entry("concat/b",
                            grad_check([&](const TensorD& t) {
                                return weighted_sum(concat_channels(a, t), r);
                            }, b, parts.second, eps),
                            1e-6));
    }

    // dice loss on random probabilities
    {
        TensorD p = rand_tensor(2, 1, 4, 4, 0.05, 0.95, rng);
        TensorD g(2, 1, 4, 4);
        for (auto& v : g.data) v = rng.next_bool(0.4) ? 1.0 : 0.0;
        TensorD analytic = dice_loss_backward(p, g, 1.0);
        out.push_back(entry("dice_loss/pred",
                            grad_check([&](const TensorD& t) {
                                return dice_loss(t, g, 1.0);
                            }, p, analytic, eps),
                            1e-6));
    }

    // full tiny model end-to-end: input path and one weight path
    {
        UNetConfig cfg;
        cfg.levels = 2;
        cfg.base_channels = 2;
        UNetD model = build_unet<double>(cfg, seed + 1);
        TensorD x = rand_tensor(1, 1, 8, 8, 0.1, 0.9, rng);
        TensorD target(1, 1, 8, 8);
        for (auto& v : target.data) v = rng.next_bool(0.3) ? 1.0 : 0.0;

        UNetTrace<double> trace;
        TensorD probs = unet_forward(model, x, &trace);
        TensorD dprobs = dice_loss_backward(probs, target, 1.0);
        TensorD dinput = unet_backward(model, trace, dprobs);

        out.push_back(entry("unet/input",
                            grad_check([&](const TensorD& t) {
                                return dice_loss(unet_forward(model, t), target, 1.0);
                            }, x, dinput, eps),
                            1e-5));
        out.push_back(entry("unet/enc0.conv1.weight",
                            grad_check([&](const TensorD& t) {
                                UNetD m2 = model;
                                m2.enc1[0].w.value = t;
                                return dice_loss(unet_forward(m2, x), target, 1.0);
                            }, model.enc1[0].w.value, model.enc1[0].w.grad, eps),
                            1e-5));
        out.push_back(entry("unet/up0.weight",
                            grad_check([&](const TensorD& t) {
                                UNetD m2 = model;
                                m2.up[0].value = t;
                                return dice_loss(unet_forward(m2, x), target, 1.0);
                            }, model.up[0].value, model.up[0].grad, eps),
                            1e-5));
    }

    return out;
}

} // namespace nodseg
