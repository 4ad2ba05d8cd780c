#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nodseg/rng.hpp"

namespace nodseg {

// Dense row-major (N, C, H, W) tensor. Scalar type is float for training and
// double for gradient checking; both instantiations share every kernel.
template <class T>
struct Tensor {
    std::array<int, 4> shape{0, 0, 0, 0}; // n, c, h, w
    std::vector<T> data;

    Tensor() = default;
    Tensor(int n, int c, int h, int w) : shape{n, c, h, w} {
        if (n < 0 || c < 0 || h < 0 || w < 0)
            throw std::invalid_argument("tensor: negative dimension");
        data.assign(size_t(n) * c * h * w, T(0));
    }

    static Tensor zeros_like(const Tensor& o) { return Tensor(o.n(), o.c(), o.h(), o.w()); }

    static Tensor full(int n, int c, int h, int w, T v) {
        Tensor t(n, c, h, w);
        t.data.assign(t.data.size(), v);
        return t;
    }

    static Tensor uniform(int n, int c, int h, int w, T lo, T hi, Rng& rng) {
        Tensor t(n, c, h, w);
        for (auto& v : t.data) v = T(rng.next_uniform(double(lo), double(hi)));
        return t;
    }

    int n() const { return shape[0]; }
    int c() const { return shape[1]; }
    int h() const { return shape[2]; }
    int w() const { return shape[3]; }
    size_t numel() const { return data.size(); }

    T& at(int n_, int c_, int y, int x) {
        return data[((size_t(n_) * shape[1] + c_) * shape[2] + y) * shape[3] + x];
    }
    T at(int n_, int c_, int y, int x) const {
        return data[((size_t(n_) * shape[1] + c_) * shape[2] + y) * shape[3] + x];
    }

    // pointer to the start of one (n, c) plane
    T* plane(int n_, int c_) { return data.data() + (size_t(n_) * shape[1] + c_) * shape[2] * shape[3]; }
    const T* plane(int n_, int c_) const {
        return data.data() + (size_t(n_) * shape[1] + c_) * shape[2] * shape[3];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    void fill(T v) { data.assign(data.size(), v); }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(double(v))) return false;
        return true;
    }

    std::string shape_str() const {
        return "(" + std::to_string(shape[0]) + "," + std::to_string(shape[1]) + "," +
               std::to_string(shape[2]) + "," + std::to_string(shape[3]) + ")";
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> out(shape[0], shape[1], shape[2], shape[3]);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
        return out;
    }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

} // namespace nodseg
