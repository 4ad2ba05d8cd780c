#pragma once

#include <stdexcept>

#include "nodseg/tensor.hpp"

namespace nodseg {

// Soft Dice loss over a batch of probability maps.
// Per sample: L = 1 - (2*sum(p*g) + s) / (sum(p) + sum(g) + s), smoothing s in
// numerator and denominator; the batch loss is the mean of the per-sample
// losses. Differentiable everywhere for s > 0.
template <class T>
void check_dice_args(const Tensor<T>& pred, const Tensor<T>& target, double smooth) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("dice_loss: shape mismatch, " + pred.shape_str() + " vs " +
                                    target.shape_str());
    if (!(smooth > 0)) throw std::invalid_argument("dice_loss: smooth must be > 0");
    for (T v : pred.data)
        if (!(v >= T(0) && v <= T(1)))
            throw std::invalid_argument("dice_loss: prediction outside [0,1]");
}

template <class T>
double dice_loss(const Tensor<T>& pred, const Tensor<T>& target, double smooth = 1.0) {
    check_dice_args(pred, target, smooth);
    const int N = pred.n();
    const size_t per = pred.numel() / size_t(N ? N : 1);
    double total = 0.0;
    for (int n = 0; n < N; ++n) {
        const T* p = pred.data.data() + size_t(n) * per;
        const T* g = target.data.data() + size_t(n) * per;
        double inter = 0.0, psum = 0.0, gsum = 0.0;
        for (size_t i = 0; i < per; ++i) {
            inter += double(p[i]) * double(g[i]);
            psum += double(p[i]);
            gsum += double(g[i]);
        }
        total += 1.0 - (2.0 * inter + smooth) / (psum + gsum + smooth);
    }
    return total / double(N);
}

// Gradient of the batch-mean soft Dice loss w.r.t. the predictions.
template <class T>
Tensor<T> dice_loss_backward(const Tensor<T>& pred, const Tensor<T>& target, double smooth = 1.0) {
    check_dice_args(pred, target, smooth);
    const int N = pred.n();
    const size_t per = pred.numel() / size_t(N ? N : 1);
    Tensor<T> grad = Tensor<T>::zeros_like(pred);
    for (int n = 0; n < N; ++n) {
        const T* p = pred.data.data() + size_t(n) * per;
        const T* g = target.data.data() + size_t(n) * per;
        T* gp = grad.data.data() + size_t(n) * per;
        double inter = 0.0, psum = 0.0, gsum = 0.0;
        for (size_t i = 0; i < per; ++i) {
            inter += double(p[i]) * double(g[i]);
            psum += double(p[i]);
            gsum += double(g[i]);
        }
        const double A = 2.0 * inter + smooth;
        const double B = psum + gsum + smooth;
        const double invB2 = 1.0 / (B * B);
        for (size_t i = 0; i < per; ++i)
            gp[i] = T(-(2.0 * double(g[i]) * B - A) * invB2 / double(N));
    }
    return grad;
}

} // namespace nodseg
