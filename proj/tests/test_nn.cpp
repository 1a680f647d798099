#include <cmath>

#include "doctest.h"
#include "lagco/checkpoint.hpp"
#include "lagco/nn.hpp"
#include "lagco/rng.hpp"

using namespace lagco;
using namespace lagco::nn;

TEST_CASE("adam fixed point: zero gradient and zero weight decay") {
    ParamStore params;
    params.create("w", {2}) = ad::Tensor({2}, {1.5, -0.5});
    AdamConfig cfg;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    opt.step(params, {{"w", {0.0, 0.0}}});
    CHECK(params.at("w").data() == std::vector<double>{1.5, -0.5});
}

TEST_CASE("adam first step moves a scalar by about lr") {
    ParamStore params;
    params.create("w", {1}) = ad::Tensor({1}, {1.0});
    AdamConfig cfg;
    cfg.lr = 0.001;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    opt.step(params, {{"w", {1.0}}});
    // bias-corrected m-hat = v-hat = 1 at step 1, so the update is lr/(1+eps)
    CHECK(params.at("w").data()[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-6));
}

TEST_CASE("adam minimizes x^2 from 5 within 10k steps at lr 0.01") {
    ParamStore params;
    params.create("x", {1}) = ad::Tensor({1}, {5.0});
    AdamConfig cfg;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    Adam opt(cfg);
    for (int i = 0; i < 10000; ++i) {
        double x = params.at("x").data()[0];
        opt.step(params, {{"x", {2.0 * x}}});
        if (std::abs(params.at("x").data()[0]) < 0.1) break;
    }
    CHECK(std::abs(params.at("x").data()[0]) < 0.1);
}

TEST_CASE("adam rejects shape mismatch") {
    ParamStore params;
    params.create("w", {2}) = ad::Tensor({2}, {1.0, 2.0});
    Adam opt;
    CHECK_THROWS_AS(opt.step(params, {{"w", {1.0}}}), std::invalid_argument);
}

TEST_CASE("mlp learns a linear map") {
    Rng rng(3);
    ParamStore params;
    MlpSpec spec{2, {8}, 1, Activation::ReLU, false};
    mlp_init(params, "net", spec, rng);
    AdamConfig cfg;
    cfg.lr = 0.01;
    Adam opt(cfg);
    // target: y = x0 - 2*x1
    std::vector<double> xs, ys;
    for (int i = 0; i < 64; ++i) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        xs.push_back(a);
        xs.push_back(b);
        ys.push_back(a - 2 * b);
    }
    ad::Tensor x = ad::Tensor::matrix(64, 2, xs);
    ad::Tensor y = ad::Tensor::matrix(64, 1, ys);
    double last = 0.0;
    for (int epoch = 0; epoch < 300; ++epoch) {
        ad::Tape tape;
        ParamContext pc(tape, params);
        ad::Tensor pred = mlp_forward(pc, "net", spec, x);
        ad::Tensor loss = ad::mse_loss(pred, y);
        last = loss.value();
        auto grads = pc.named_grads(tape.backward(loss));
        opt.step(params, grads);
    }
    CHECK(last < 0.01);
}

TEST_CASE("grad norm clipping scales the global norm") {
    std::unordered_map<std::string, std::vector<double>> grads{{"a", {3.0, 4.0}}};
    double norm = clip_grad_norm(grads, 0.5);
    CHECK(norm == doctest::Approx(5.0));
    double after = std::sqrt(grads["a"][0] * grads["a"][0] + grads["a"][1] * grads["a"][1]);
    CHECK(after == doctest::Approx(0.5));
}

TEST_CASE("checkpoint round-trips parameters and metadata") {
    Rng rng(17);
    ParamStore params;
    MlpSpec spec{3, {4}, 2, Activation::ReLU, false};
    mlp_init(params, "m", spec, rng);
    std::string path = "ckpt_roundtrip_test.bin";
    save_checkpoint(path, params, "{\"arch\":\"m\"}");
    ParamStore loaded = load_checkpoint(path);
    REQUIRE(loaded.names() == params.names());
    for (const auto& name : params.names()) {
        CHECK(loaded.at(name).shape() == params.at(name).shape());
        CHECK(loaded.at(name).data() == params.at(name).data());
    }
    CHECK(load_checkpoint_metadata(path).find("arch") != std::string::npos);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
