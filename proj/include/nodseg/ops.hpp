#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "nodseg/parallel.hpp"
#include "nodseg/tensor.hpp"

namespace nodseg {

// ---------------------------------------------------------------------------
// conv2d: stride 1, odd kernel, SAME zero padding, cross-correlation.
// input (N,Cin,H,W), weight (Cout,Cin,kh,kw), bias (Cout,1,1,1) -> (N,Cout,H,W)
// ---------------------------------------------------------------------------

template <class T>
void check_conv2d_args(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b) {
    if (w.c() != in.c())
        throw std::invalid_argument("conv2d: channel mismatch, input has " + std::to_string(in.c()) +
                                    " channels but weight expects " + std::to_string(w.c()));
    if (w.h() % 2 == 0 || w.w() % 2 == 0)
        throw std::invalid_argument("conv2d: kernel size must be odd, got " + std::to_string(w.h()) +
                                    "x" + std::to_string(w.w()));
    if (b.n() != w.n())
        throw std::invalid_argument("conv2d: bias size " + std::to_string(b.n()) +
                                    " does not match output channels " + std::to_string(w.n()));
}

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b) {
    check_conv2d_args(in, w, b);
    const int N = in.n(), Cin = in.c(), H = in.h(), W = in.w();
    const int Cout = w.n(), kh = w.h(), kw = w.w();
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    Tensor<T> out(N, Cout, H, W);

    parallel_for(int64_t(N) * Cout, [&](int64_t idx) {
        const int n = int(idx / Cout), co = int(idx % Cout);
        T* outp = out.plane(n, co);
        const T bias = b.data[size_t(co)];
        std::fill(outp, outp + size_t(H) * W, bias);
        for (int ci = 0; ci < Cin; ++ci) {
            const T* inp = in.plane(n, ci);
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ph;
                const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                for (int kx = 0; kx < kw; ++kx) {
                    const int dx = kx - pw;
                    const T wv = w.at(co, ci, ky, kx);
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    for (int y = y0; y < y1; ++y) {
                        const T* src = inp + size_t(y + dy) * W + (x0 + dx);
                        T* dst = outp + size_t(y) * W + x0;
                        for (int i = 0; i < x1 - x0; ++i) dst[i] += wv * src[i];
                    }
                }
            }
        }
    });
    return out;
}

template <class T>
struct Conv2dGrads {
    Tensor<T> input;
    Tensor<T> weight;
    Tensor<T> bias;
};

template <class T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& grad_out) {
    const int N = in.n(), Cin = in.c(), H = in.h(), W = in.w();
    const int Cout = w.n(), kh = w.h(), kw = w.w();
    const int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
    if (grad_out.n() != N || grad_out.c() != Cout || grad_out.h() != H || grad_out.w() != W)
        throw std::invalid_argument("conv2d backward: upstream gradient shape " + grad_out.shape_str() +
                                    " does not match output");

    Conv2dGrads<T> g{Tensor<T>(N, Cin, H, W), Tensor<T>(Cout, Cin, kh, kw), Tensor<T>(Cout, 1, 1, 1)};

    // d/d input: correlate grad_out with the flipped kernel
    parallel_for(int64_t(N) * Cin, [&](int64_t idx) {
        const int n = int(idx / Cin), ci = int(idx % Cin);
        T* gip = g.input.plane(n, ci);
        for (int co = 0; co < Cout; ++co) {
            const T* gop = grad_out.plane(n, co);
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ph;
                const int y0 = std::max(0, dy), y1 = std::min(H, H + dy);
                for (int kx = 0; kx < kw; ++kx) {
                    const int dx = kx - pw;
                    const T wv = w.at(co, ci, ky, kx);
                    const int x0 = std::max(0, dx), x1 = std::min(W, W + dx);
                    for (int y = y0; y < y1; ++y) {
                        const T* src = gop + size_t(y - dy) * W + (x0 - dx);
                        T* dst = gip + size_t(y) * W + x0;
                        for (int i = 0; i < x1 - x0; ++i) dst[i] += wv * src[i];
                    }
                }
            }
        }
    });

    // d/d weight: per output channel, dot products of shifted input planes
    parallel_for(Cout, [&](int64_t co) {
        for (int ci = 0; ci < Cin; ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ph;
                for (int kx = 0; kx < kw; ++kx) {
                    const int dx = kx - pw;
                    T acc = 0;
                    for (int n = 0; n < N; ++n) {
                        const T* inp = in.plane(n, ci);
                        const T* gop = grad_out.plane(n, int(co));
                        const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                        const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                        for (int y = y0; y < y1; ++y) {
                            const T* a = inp + size_t(y + dy) * W + (x0 + dx);
                            const T* bptr = gop + size_t(y) * W + x0;
                            for (int i = 0; i < x1 - x0; ++i) acc += a[i] * bptr[i];
                        }
                    }
                    g.weight.at(int(co), ci, ky, kx) = acc;
                }
            }
        }
        T bacc = 0;
        for (int n = 0; n < N; ++n) {
            const T* gop = grad_out.plane(n, int(co));
            for (size_t i = 0; i < size_t(H) * W; ++i) bacc += gop[i];
        }
        g.bias.data[size_t(co)] = bacc;
    });

    return g;
}

// ---------------------------------------------------------------------------
// maxpool 2x2, stride 2. Ties go to the first element in row-major window
// order; the backward routes each upstream gradient to that argmax.
// ---------------------------------------------------------------------------

template <class T>
struct MaxPoolResult {
    Tensor<T> out;
    std::vector<uint8_t> argmax; // window position 0..3, one per output element
};

template <class T>
MaxPoolResult<T> maxpool2x2_forward(const Tensor<T>& in) {
    const int N = in.n(), C = in.c(), H = in.h(), W = in.w();
    if (H % 2 != 0 || W % 2 != 0)
        throw std::invalid_argument("maxpool2x2: spatial dims must be even, got " +
                                    std::to_string(H) + "x" + std::to_string(W));
    MaxPoolResult<T> r{Tensor<T>(N, C, H / 2, W / 2), {}};
    r.argmax.assign(r.out.numel(), 0);
    const int Ho = H / 2, Wo = W / 2;
    parallel_for(int64_t(N) * C, [&](int64_t idx) {
        const int n = int(idx / C), c = int(idx % C);
        const T* inp = in.plane(n, c);
        T* outp = r.out.plane(n, c);
        uint8_t* argp = r.argmax.data() + (size_t(n) * C + c) * Ho * Wo;
        for (int y = 0; y < Ho; ++y) {
            for (int x = 0; x < Wo; ++x) {
                const T* base = inp + size_t(2 * y) * W + 2 * x;
                const T cand[4] = {base[0], base[1], base[W], base[W + 1]};
                int best = 0;
                for (int k = 1; k < 4; ++k)
                    if (cand[k] > cand[best]) best = k;
                outp[size_t(y) * Wo + x] = cand[best];
                argp[size_t(y) * Wo + x] = uint8_t(best);
            }
        }
    });
    return r;
}

template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out, const std::vector<uint8_t>& argmax,
                              int in_h, int in_w) {
    const int N = grad_out.n(), C = grad_out.c(), Ho = grad_out.h(), Wo = grad_out.w();
    if (in_h != 2 * Ho || in_w != 2 * Wo || argmax.size() != grad_out.numel())
        throw std::invalid_argument("maxpool2x2 backward: shape mismatch");
    Tensor<T> gi(N, C, in_h, in_w);
    parallel_for(int64_t(N) * C, [&](int64_t idx) {
        const int n = int(idx / C), c = int(idx % C);
        const T* gop = grad_out.plane(n, c);
        const uint8_t* argp = argmax.data() + (size_t(n) * C + c) * Ho * Wo;
        T* gip = gi.plane(n, c);
        for (int y = 0; y < Ho; ++y) {
            for (int x = 0; x < Wo; ++x) {
                const int k = argp[size_t(y) * Wo + x];
                const int iy = 2 * y + k / 2, ix = 2 * x + k % 2;
                gip[size_t(iy) * in_w + ix] = gop[size_t(y) * Wo + x];
            }
        }
    });
    return gi;
}

// ---------------------------------------------------------------------------
// conv_transpose2d: 2x2 kernel, stride 2, no bias. weight (Cin,Cout,2,2),
// input (N,Cin,H,W) -> (N,Cout,2H,2W). Adjoint of the stride-2 2x2 conv;
// kernel == stride, so each output element has exactly one source pixel.
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> conv_transpose2d_forward(const Tensor<T>& in, const Tensor<T>& w) {
    if (w.h() != 2 || w.w() != 2)
        throw std::invalid_argument("conv_transpose2d: kernel must be 2x2");
    if (w.n() != in.c())
        throw std::invalid_argument("conv_transpose2d: weight expects " + std::to_string(w.n()) +
                                    " input channels, got " + std::to_string(in.c()));
    const int N = in.n(), Cin = in.c(), H = in.h(), W = in.w();
    const int Cout = w.c();
    Tensor<T> out(N, Cout, 2 * H, 2 * W);
    parallel_for(int64_t(N) * Cout, [&](int64_t idx) {
        const int n = int(idx / Cout), co = int(idx % Cout);
        T* outp = out.plane(n, co);
        for (int ci = 0; ci < Cin; ++ci) {
            const T* inp = in.plane(n, ci);
            const T w00 = w.at(ci, co, 0, 0), w01 = w.at(ci, co, 0, 1);
            const T w10 = w.at(ci, co, 1, 0), w11 = w.at(ci, co, 1, 1);
            for (int y = 0; y < H; ++y) {
                const T* src = inp + size_t(y) * W;
                T* d0 = outp + size_t(2 * y) * 2 * W;
                T* d1 = d0 + size_t(2) * W;
                for (int x = 0; x < W; ++x) {
                    const T v = src[x];
                    d0[2 * x] += w00 * v;
                    d0[2 * x + 1] += w01 * v;
                    d1[2 * x] += w10 * v;
                    d1[2 * x + 1] += w11 * v;
                }
            }
        }
    });
    return out;
}

template <class T>
struct ConvTranspose2dGrads {
    Tensor<T> input;
    Tensor<T> weight;
};

template <class T>
ConvTranspose2dGrads<T> conv_transpose2d_backward(const Tensor<T>& in, const Tensor<T>& w,
                                                  const Tensor<T>& grad_out) {
    const int N = in.n(), Cin = in.c(), H = in.h(), W = in.w();
    const int Cout = w.c();
    if (grad_out.n() != N || grad_out.c() != Cout || grad_out.h() != 2 * H || grad_out.w() != 2 * W)
        throw std::invalid_argument("conv_transpose2d backward: upstream gradient shape " +
                                    grad_out.shape_str() + " does not match output");
    ConvTranspose2dGrads<T> g{Tensor<T>(N, Cin, H, W), Tensor<T>(Cin, Cout, 2, 2)};

    parallel_for(int64_t(N) * Cin, [&](int64_t idx) {
        const int n = int(idx / Cin), ci = int(idx % Cin);
        T* gip = g.input.plane(n, ci);
        for (int co = 0; co < Cout; ++co) {
            const T* gop = grad_out.plane(n, co);
            const T w00 = w.at(ci, co, 0, 0), w01 = w.at(ci, co, 0, 1);
            const T w10 = w.at(ci, co, 1, 0), w11 = w.at(ci, co, 1, 1);
            for (int y = 0; y < H; ++y) {
                const T* s0 = gop + size_t(2 * y) * 2 * W;
                const T* s1 = s0 + size_t(2) * W;
                T* dst = gip + size_t(y) * W;
                for (int x = 0; x < W; ++x)
                    dst[x] += w00 * s0[2 * x] + w01 * s0[2 * x + 1] + w10 * s1[2 * x] + w11 * s1[2 * x + 1];
            }
        }
    });

    parallel_for(Cin, [&](int64_t ci) {
        for (int co = 0; co < Cout; ++co) {
            T acc[4] = {0, 0, 0, 0};
            for (int n = 0; n < N; ++n) {
                const T* inp = in.plane(n, int(ci));
                const T* gop = grad_out.plane(n, co);
                for (int y = 0; y < H; ++y) {
                    const T* src = inp + size_t(y) * W;
                    const T* s0 = gop + size_t(2 * y) * 2 * W;
                    const T* s1 = s0 + size_t(2) * W;
                    for (int x = 0; x < W; ++x) {
                        const T v = src[x];
                        acc[0] += v * s0[2 * x];
                        acc[1] += v * s0[2 * x + 1];
                        acc[2] += v * s1[2 * x];
                        acc[3] += v * s1[2 * x + 1];
                    }
                }
            }
            for (int k = 0; k < 4; ++k) g.weight.at(int(ci), co, k / 2, k % 2) = acc[k];
        }
    });

    return g;
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> relu_forward(const Tensor<T>& in) {
    Tensor<T> out = in;
    for (auto& v : out.data)
        if (v < T(0)) v = T(0);
    return out;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& in, const Tensor<T>& grad_out) {
    if (!in.same_shape(grad_out)) throw std::invalid_argument("relu backward: shape mismatch");
    Tensor<T> gi = Tensor<T>::zeros_like(in);
    for (size_t i = 0; i < in.data.size(); ++i)
        gi.data[i] = in.data[i] > T(0) ? grad_out.data[i] : T(0);
    return gi;
}

template <class T>
T sigmoid_scalar(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
}

template <class T>
Tensor<T> sigmoid_forward(const Tensor<T>& in) {
    Tensor<T> out = in;
    for (auto& v : out.data) v = sigmoid_scalar(v);
    return out;
}

// takes the forward output, d sigmoid = s(1-s)
template <class T>
Tensor<T> sigmoid_backward(const Tensor<T>& out, const Tensor<T>& grad_out) {
    if (!out.same_shape(grad_out)) throw std::invalid_argument("sigmoid backward: shape mismatch");
    Tensor<T> gi = Tensor<T>::zeros_like(out);
    for (size_t i = 0; i < out.data.size(); ++i)
        gi.data[i] = out.data[i] * (T(1) - out.data[i]) * grad_out.data[i];
    return gi;
}

// ---------------------------------------------------------------------------
// channel concatenation; channels of a precede channels of b
// ---------------------------------------------------------------------------

template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw std::invalid_argument("concat_channels: batch/spatial mismatch, " + a.shape_str() +
                                    " vs " + b.shape_str());
    Tensor<T> out(a.n(), a.c() + b.c(), a.h(), a.w());
    const size_t plane = size_t(a.h()) * a.w();
    for (int n = 0; n < a.n(); ++n) {
        std::copy(a.plane(n, 0), a.plane(n, 0) + size_t(a.c()) * plane, out.plane(n, 0));
        std::copy(b.plane(n, 0), b.plane(n, 0) + size_t(b.c()) * plane, out.plane(n, a.c()));
    }
    return out;
}

// inverse of concat_channels: splits after ca channels
template <class T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& t, int ca) {
    if (ca <= 0 || ca >= t.c()) throw std::invalid_argument("split_channels: bad split point");
    Tensor<T> a(t.n(), ca, t.h(), t.w()), b(t.n(), t.c() - ca, t.h(), t.w());
    const size_t plane = size_t(t.h()) * t.w();
    for (int n = 0; n < t.n(); ++n) {
        std::copy(t.plane(n, 0), t.plane(n, 0) + size_t(ca) * plane, a.plane(n, 0));
        std::copy(t.plane(n, ca), t.plane(n, ca) + size_t(t.c() - ca) * plane, b.plane(n, 0));
    }
    return {std::move(a), std::move(b)};
}

} // namespace nodseg
