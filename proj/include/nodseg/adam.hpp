#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "nodseg/tensor.hpp"

namespace nodseg {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (!(lr >= 0)) throw std::invalid_argument("adam: lr must be >= 0");
        if (beta1 < 0 || beta1 >= 1) throw std::invalid_argument("adam: beta1 must be in [0,1)");
        if (beta2 < 0 || beta2 >= 1) throw std::invalid_argument("adam: beta2 must be in [0,1)");
        if (!(eps > 0)) throw std::invalid_argument("adam: eps must be > 0");
    }
};

// Learnable tensor with its gradient and Adam moment buffers.
template <class T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> adam_m;
    Tensor<T> adam_v;
    int64_t step_count = 0;

    Parameter() = default;
    Parameter(std::string name_, Tensor<T> init)
        : name(std::move(name_)),
          value(std::move(init)),
          grad(Tensor<T>::zeros_like(value)),
          adam_m(Tensor<T>::zeros_like(value)),
          adam_v(Tensor<T>::zeros_like(value)) {}

    void zero_grad() { grad.fill(T(0)); }

    void reset_optimizer_state() {
        adam_m.fill(T(0));
        adam_v.fill(T(0));
        step_count = 0;
    }
};

// One Adam update with bias correction:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   value <- value - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
template <class T>
void adam_step(Parameter<T>& p, const AdamConfig& cfg) {
    cfg.validate();
    if (!p.grad.all_finite())
        throw std::runtime_error("adam: non-finite gradient in parameter '" + p.name + "'");
    p.step_count += 1;
    const T b1 = T(cfg.beta1), b2 = T(cfg.beta2);
    const T corr1 = T(1) - T(std::pow(cfg.beta1, double(p.step_count)));
    const T corr2 = T(1) - T(std::pow(cfg.beta2, double(p.step_count)));
    const T lr = T(cfg.lr), eps = T(cfg.eps);
    for (size_t i = 0; i < p.value.data.size(); ++i) {
        const T g = p.grad.data[i];
        T& m = p.adam_m.data[i];
        T& v = p.adam_v.data[i];
        m = b1 * m + (T(1) - b1) * g;
        v = b2 * v + (T(1) - b2) * g * g;
        const T mhat = m / corr1;
        const T vhat = v / corr2;
        p.value.data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

} // namespace nodseg
