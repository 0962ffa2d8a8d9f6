#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikegrid/neuron.hpp"
#include "spikegrid/rng.hpp"

using namespace spikegrid;

namespace {

// Scalar reference trace of the membrane update, kept independent of the
// library's vectorized path.
struct ScalarLifOracle {
    float v;
    const LifConfig cfg;

    explicit ScalarLifOracle(const LifConfig& c) : v(c.v_rest), cfg(c) {}

    bool step(float current) {
        const float charged = cfg.v_rest + cfg.decay * (v - cfg.v_rest) + current;
        if (charged >= cfg.v_threshold) {
            v = cfg.v_rest;
            return true;
        }
        v = charged;
        return false;
    }
};

Tensor scalar(float x) { return Tensor({1}, {x}); }

}  // namespace

TEST_CASE("lif_step integrates, leaks and fires on the documented trace") {
    LifConfig cfg;  // threshold 1, rest 0, decay 0.5
    LifState state = LifState::resting({1}, cfg);

    auto [s1, st1] = lif_step(state, scalar(0.6f), cfg);
    CHECK(s1[0] == 0.0f);
    CHECK(st1.v[0] == doctest::Approx(0.6f));

    auto [s2, st2] = lif_step(st1, scalar(0.6f), cfg);
    CHECK(s2[0] == 0.0f);
    CHECK(st2.v[0] == doctest::Approx(0.9f));

    auto [s3, st3] = lif_step(st2, scalar(0.6f), cfg);
    CHECK(s3[0] == 1.0f);        // 0.45 + 0.6 = 1.05 >= threshold
    CHECK(st3.v[0] == 0.0f);     // hard reset to rest
}

TEST_CASE("lif_step decays toward rest without input") {
    LifConfig cfg;
    LifState state{scalar(0.8f)};
    float expected = 0.8f;
    for (int i = 0; i < 6; ++i) {
        auto [s, next] = lif_step(state, scalar(0.0f), cfg);
        expected *= 0.5f;
        CHECK(s[0] == 0.0f);
        CHECK(next.v[0] == doctest::Approx(expected));
        state = next;
    }
}

TEST_CASE("threshold comparison is inclusive") {
    LifConfig cfg;
    LifState state = LifState::resting({1}, cfg);
    auto [s, next] = lif_step(state, scalar(1.0f), cfg);  // lands exactly on threshold
    CHECK(s[0] == 1.0f);
    CHECK(next.v[0] == 0.0f);
}

TEST_CASE("lif_step raises on shape mismatch") {
    LifConfig cfg;
    LifState state = LifState::resting({2}, cfg);
    CHECK_THROWS_AS(lif_step(state, Tensor::zeros({3}), cfg), ShapeError);
}

TEST_CASE("engine spike trains equal the scalar oracle on random drive") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        LifConfig cfg;
        cfg.decay = static_cast<float>(rng.uniform(0.05, 1.0));
        cfg.v_threshold = static_cast<float>(rng.uniform(0.3, 2.0));
        cfg.v_rest = static_cast<float>(rng.uniform(-0.5, cfg.v_threshold - 0.2));
        ScalarLifOracle oracle(cfg);
        LifState state = LifState::resting({1}, cfg);
        for (int t = 0; t < 50; ++t) {
            const float current = static_cast<float>(rng.uniform(-0.5, 1.5));
            const bool want = oracle.step(current);
            auto [got, next] = lif_step(state, scalar(current), cfg);
            CHECK((got[0] == 1.0f) == want);
            CHECK(next.v[0] == oracle.v);
            state = next;
        }
    }
}

TEST_CASE("spikes stay binary and reset is exact over random tensors") {
    Rng rng(103);
    LifConfig cfg;
    LifState state = LifState::resting({4, 3, 3}, cfg);
    for (int t = 0; t < 30; ++t) {
        Tensor current = Tensor::zeros({4, 3, 3});
        for (auto& v : current.data) v = static_cast<float>(rng.uniform(-1.0, 1.5));
        auto [spikes, next] = lif_step(state, current, cfg);
        for (std::size_t i = 0; i < spikes.data.size(); ++i) {
            CHECK((spikes.data[i] == 0.0f || spikes.data[i] == 1.0f));
            if (spikes.data[i] == 1.0f) CHECK(next.v.data[i] == cfg.v_rest);
        }
        state = next;
    }
}

TEST_CASE("sub-threshold constant drive never fires") {
    Rng rng(107);
    for (int trial = 0; trial < 50; ++trial) {
        LifConfig cfg;
        cfg.decay = static_cast<float>(rng.uniform(0.1, 0.95));
        cfg.v_threshold = static_cast<float>(rng.uniform(0.5, 2.0));
        cfg.v_rest = static_cast<float>(rng.uniform(-0.5, 0.4));
        // Steady state sits at I / (1 - decay) above rest; stay 1% below.
        const float current = 0.99f * (1.0f - cfg.decay) * (cfg.v_threshold - cfg.v_rest);
        LifState state = LifState::resting({1}, cfg);
        for (int t = 0; t < 1000; ++t) {
            auto [s, next] = lif_step(state, scalar(current), cfg);
            CHECK(s[0] == 0.0f);
            state = next;
        }
    }
}

TEST_CASE("heaviside is inclusive at zero") {
    Tensor x({3}, {0.2f, -0.2f, 0.0f});
    Tensor h = heaviside(x);
    CHECK(h[0] == 1.0f);
    CHECK(h[1] == 0.0f);
    CHECK(h[2] == 1.0f);
}

TEST_CASE("surrogate peak and named values") {
    SurrogateSpec arcsin{SurrogateKind::AadArcsin, 1.0f};
    CHECK(surrogate_grad_scalar(0.0f, arcsin) == 1.0f);

    // 1 - arcsin(0.5) = 1 - pi/6
    CHECK(surrogate_grad_scalar(0.5f, arcsin) == doctest::Approx(1.0 - 3.14159265358979 / 6.0).epsilon(1e-6));

    CHECK(surrogate_grad_scalar(1.5f, arcsin) == 0.0f);
    SurrogateSpec rect{SurrogateKind::Rectangular, 1.0f};
    CHECK(surrogate_grad_scalar(1.5f, rect) == 0.0f);
    SurrogateSpec arccos{SurrogateKind::AadArccos, 1.0f};
    CHECK(surrogate_grad_scalar(0.0f, arccos) == 1.0f);
    CHECK(surrogate_grad_scalar(1.5f, arccos) == 0.0f);

    // Rectangular plateau height 1/(2 lambda).
    SurrogateSpec rect_half{SurrogateKind::Rectangular, 0.5f};
    CHECK(surrogate_grad_scalar(0.2f, rect_half) == doctest::Approx(1.0f));
}

TEST_CASE("arcsin and arccos forms agree everywhere") {
    Rng rng(109);
    SurrogateSpec a{SurrogateKind::AadArcsin, 1.0f};
    SurrogateSpec c{SurrogateKind::AadArccos, 1.0f};
    CHECK(std::abs(surrogate_grad_scalar(0.3f, a) - surrogate_grad_scalar(0.3f, c)) < 1e-6);
    for (int i = 0; i < 2000; ++i) {
        const float x = static_cast<float>(rng.uniform(-2.0, 2.0));
        CHECK(std::abs(surrogate_grad_scalar(x, a) - surrogate_grad_scalar(x, c)) < 1e-6);
    }
}

TEST_CASE("surrogate is even and vanishes outside its window") {
    Rng rng(113);
    for (SurrogateKind kind : {SurrogateKind::AadArcsin, SurrogateKind::AadArccos, SurrogateKind::Rectangular}) {
        for (float lambda : {0.3f, 0.8f, 1.0f}) {
            SurrogateSpec spec{kind, lambda};
            for (int i = 0; i < 500; ++i) {
                const float x = static_cast<float>(rng.uniform(-2.0, 2.0));
                CHECK(surrogate_grad_scalar(x, spec) == surrogate_grad_scalar(-x, spec));
                if (std::abs(x) >= lambda) CHECK(surrogate_grad_scalar(x, spec) == 0.0f);
            }
        }
    }
}

TEST_CASE("AAD bump is non-increasing until the arcsine leaves [0,1]") {
    // |1 - |arcsin x|| falls from 1 to 0 on [0, sin 1] and turns back up
    // beyond it, so monotonicity is asserted on the falling range only.
    const float turn = std::sin(1.0f);
    for (SurrogateKind kind : {SurrogateKind::AadArcsin, SurrogateKind::AadArccos}) {
        for (float lambda : {0.5f, 0.8f, 1.0f}) {
            SurrogateSpec spec{kind, lambda};
            CHECK(surrogate_grad_scalar(0.0f, spec) == 1.0f);
            const float hi = std::min(lambda, turn);
            float prev = surrogate_grad_scalar(0.0f, spec);
            for (int i = 1; i <= 200; ++i) {
                const float x = hi * static_cast<float>(i) / 200.0f;
                const float cur = surrogate_grad_scalar(x, spec);
                CHECK(cur <= prev + 1e-6f);
                prev = cur;
            }
        }
    }
}

TEST_CASE("tensor-level surrogate matches the scalar path") {
    SurrogateSpec spec{SurrogateKind::AadArcsin, 0.7f};
    Tensor x({4}, {0.0f, 0.5f, -0.65f, 0.9f});
    Tensor g = surrogate_grad(x, spec);
    for (int i = 0; i < 4; ++i) CHECK(g[i] == surrogate_grad_scalar(x[i], spec));
}

TEST_CASE("configuration validation") {
    LifConfig bad;
    bad.decay = 0.0f;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = LifConfig{};
    bad.v_rest = 2.0f;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    SurrogateSpec s{SurrogateKind::AadArcsin, 0.0f};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.lambda = 1.5f;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}
