#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "nodseg/dice.hpp"
#include "nodseg/gradcheck.hpp"

using namespace nodseg;

TEST_CASE("perfect prediction scores zero loss") {
    TensorD g(1, 1, 4, 4);
    for (int i = 0; i < 5; ++i) g.data[size_t(i)] = 1.0;
    CHECK(dice_loss(g, g, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("all-zero prediction against 10 foreground pixels") {
    TensorD p(1, 1, 4, 5);
    TensorD g(1, 1, 4, 5);
    for (int i = 0; i < 10; ++i) g.data[size_t(i)] = 1.0;
    // L = 1 - (0 + 1)/(0 + 10 + 1) = 1 - 1/11
    CHECK(dice_loss(p, g, 1.0) == doctest::Approx(1.0 - 1.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("hand-computed 4-pixel case") {
    TensorD p = TensorD::full(1, 1, 2, 2, 0.5);
    TensorD g(1, 1, 2, 2);
    g.data = {1.0, 1.0, 0.0, 0.0};
    // inter = 1, psum = 2, gsum = 2 -> L = 1 - 3/5
    CHECK(dice_loss(p, g, 1.0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("batch loss is the mean of per-sample losses") {
    TensorD p(2, 1, 2, 2);
    TensorD g(2, 1, 2, 2);
    // sample 0: perfect (loss 0); sample 1: all-zero pred vs 2 fg pixels
    p.data = {1, 1, 0, 0, 0, 0, 0, 0};
    g.data = {1, 1, 0, 0, 1, 1, 0, 0};
    const double l1 = 1.0 - 1.0 / 3.0; // (0+1)/(0+2+1)
    CHECK(dice_loss(p, g, 1.0) == doctest::Approx(l1 / 2.0).epsilon(1e-12));
}

TEST_CASE("loss is within [0,1) and permutation-invariant") {
    Rng rng(21);
    TensorD p = TensorD::uniform(1, 1, 4, 4, 0.0, 1.0, rng);
    TensorD g(1, 1, 4, 4);
    for (auto& v : g.data) v = rng.next_bool(0.5) ? 1.0 : 0.0;
    const double loss = dice_loss(p, g, 1.0);
    CHECK(loss >= 0.0);
    CHECK(loss < 1.0);

    // apply the same permutation to both tensors
    std::vector<size_t> perm(p.numel());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    shuffle(perm, rng);
    TensorD p2 = p, g2 = g;
    for (size_t i = 0; i < perm.size(); ++i) {
        p2.data[i] = p.data[perm[i]];
        g2.data[i] = g.data[perm[i]];
    }
    CHECK(dice_loss(p2, g2, 1.0) == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("argument validation") {
    TensorD p(1, 1, 2, 2), g(1, 1, 2, 3);
    CHECK_THROWS_WITH_AS(dice_loss(p, g, 1.0), doctest::Contains("shape mismatch"),
                         std::invalid_argument);

    TensorD g2(1, 1, 2, 2);
    CHECK_THROWS_WITH_AS(dice_loss(p, g2, 0.0), doctest::Contains("smooth"),
                         std::invalid_argument);

    TensorD bad = TensorD::full(1, 1, 2, 2, 1.5);
    CHECK_THROWS_WITH_AS(dice_loss(bad, g2, 1.0), doctest::Contains("outside [0,1]"),
                         std::invalid_argument);
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(22);
    TensorD p = TensorD::uniform(2, 1, 4, 4, 0.05, 0.95, rng);
    TensorD g(2, 1, 4, 4);
    for (auto& v : g.data) v = rng.next_bool(0.4) ? 1.0 : 0.0;
    TensorD analytic = dice_loss_backward(p, g, 1.0);
    auto res = grad_check([&](const TensorD& t) { return dice_loss(t, g, 1.0); }, p, analytic);
    CHECK(res.checked == p.numel());
    CHECK(res.max_rel_err < 1e-6);
}
