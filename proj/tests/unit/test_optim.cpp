#include "doctest.h"

#include <cmath>

#include "da/optim.hpp"

using namespace da;
using namespace da::nn;

TEST_CASE("wd_schedule linear warmup") {
    CHECK(wd_schedule(0, 0.08, 400) == 0.0);
    CHECK(wd_schedule(200, 0.08, 400) == 0.04);
    CHECK(wd_schedule(400, 0.08, 400) == 0.08);
    CHECK(wd_schedule(999, 0.08, 400) == 0.08);
    CHECK(wd_schedule(5, 0.08, 0) == 0.08);  // no warmup
}

TEST_CASE("adamw matches a hand-rolled scalar oracle for 100 steps") {
    // single parameter, quadratic loss 0.5*(p - 3)^2, gradient p - 3
    TensorT<double> p({1}), g({1});
    p[0] = 0.0;
    ParamSet<double> ps;
    ps.add("w", &p, &g, /*decay=*/true);
    AdamW<double> opt(ps);

    const double lr = 0.05, wd = 0.01;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double op = 0.0, om = 0.0, ov = 0.0;  // oracle state
    for (int t = 1; t <= 100; ++t) {
        g[0] = p[0] - 3.0;
        opt.step(ps, lr, lr, wd);

        const double og = op - 3.0;
        om = beta1 * om + (1 - beta1) * og;
        ov = beta2 * ov + (1 - beta2) * og * og;
        const double mhat = om / (1 - std::pow(beta1, t));
        const double vhat = ov / (1 - std::pow(beta2, t));
        op = op - lr * wd * op - lr * mhat / (std::sqrt(vhat) + eps);

        CHECK(std::abs(p[0] - op) < 1e-12);
    }
    CHECK(p[0] == doctest::Approx(3.0).epsilon(0.2));  // converged towards the minimum
}

TEST_CASE("decoupled decay contracts by exactly (1 - lr*wd) under zero gradient") {
    TensorT<float> p({4}), g({4});
    for (int i = 0; i < 4; ++i) p[i] = 1.0f + i;
    TensorT<float> before = p;
    ParamSet<float> ps;
    ps.add("w", &p, &g, /*decay=*/true);
    AdamW<float> opt(ps);
    const float lr = 2e-3f, wd = 0.08f;
    opt.step(ps, lr, lr, wd);
    for (int i = 0; i < 4; ++i) CHECK(p[i] == before[i] * (1.0f - lr * wd));

    // non-decay params are untouched by wd
    TensorT<float> b({2}), gb({2});
    b[0] = 5.0f;
    b[1] = -2.0f;
    ParamSet<float> ps2;
    ps2.add("bias", &b, &gb, /*decay=*/false);
    AdamW<float> opt2(ps2);
    opt2.step(ps2, lr, lr, wd);
    CHECK(b[0] == 5.0f);
    CHECK(b[1] == -2.0f);
}

TEST_CASE("mlp-flagged params use the low learning rate") {
    TensorT<double> a({1}), ga({1}), m({1}), gm({1});
    a[0] = m[0] = 0.0;
    ga[0] = gm[0] = 1.0;
    ParamSet<double> ps;
    ps.add("main.w", &a, &ga, false, /*mlp=*/false);
    ps.add("mlp.w", &m, &gm, false, /*mlp=*/true);
    AdamW<double> opt(ps);
    opt.step(ps, 2e-3, 2e-4, 0.0);
    // first Adam step moves by exactly lr (bias-corrected mhat/sqrt(vhat) = sign(g))
    CHECK(a[0] == doctest::Approx(-2e-3).epsilon(1e-6));
    CHECK(m[0] == doctest::Approx(-2e-4).epsilon(1e-6));
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
    TensorT<float> p({3}), g({3});
    p[0] = 1.5f;
    p[1] = -0.25f;
    p[2] = 7.0f;
    g.fill(2.0f);
    TensorT<float> before = p;
    ParamSet<float> ps;
    ps.add("w", &p, &g, /*decay=*/true);
    AdamW<float> opt(ps);
    for (int i = 0; i < 5; ++i) opt.step(ps, 0.0f, 0.0f, 0.08f);
    CHECK(p.v == before.v);
}

TEST_CASE("ema closed form") {
    TensorT<double> p({1}), g({1});
    p[0] = 1.0;
    ParamSet<double> ps;
    ps.add("w", &p, &g, false);
    Ema<double> ema(ps);
    ema.shadows()[0][0] = 0.0;  // start the shadow at zero
    ema.update(ps, 0.99995);
    CHECK(ema.shadows()[0][0] == doctest::Approx(5e-5).epsilon(1e-9));

    // n constant updates: s0*d^n + p*(1-d^n)
    const double s0 = 0.25, pv = -1.5, d = 0.999;
    p[0] = pv;
    ema.shadows()[0][0] = s0;
    const int n = 500;
    for (int i = 0; i < n; ++i) ema.update(ps, d);
    const double closed = s0 * std::pow(d, n) + pv * (1.0 - std::pow(d, n));
    CHECK(std::abs(ema.shadows()[0][0] - closed) < 1e-10);

    // decay 0: shadow snaps to the params
    ema.update(ps, 0.0);
    CHECK(ema.shadows()[0][0] == pv);
}

TEST_CASE("ema starts from the initial parameters") {
    TensorT<float> p({2}), g({2});
    p[0] = 3.0f;
    p[1] = -1.0f;
    ParamSet<float> ps;
    ps.add("w", &p, &g, false);
    Ema<float> ema(ps);
    CHECK(ema.shadows()[0][0] == 3.0f);
    CHECK(ema.shadows()[0][1] == -1.0f);
}
