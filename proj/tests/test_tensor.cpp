#include <cmath>
#include <functional>

#include "doctest.h"
#include "lagco/rng.hpp"
#include "lagco/tensor.hpp"

using namespace lagco;
using namespace lagco::ad;

namespace {

// Central finite differences of a scalar-valued function of one input tensor.
std::vector<double> finite_diff(const std::function<double(const Tensor&)>& f, Tensor x,
                                double h = 1e-5) {
    std::vector<double> grad(x.data().size());
    for (size_t i = 0; i < grad.size(); ++i) {
        double orig = x.data()[i];
        x.data()[i] = orig + h;
        double up = f(x);
        x.data()[i] = orig - h;
        double down = f(x);
        x.data()[i] = orig;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double rel_tol) {
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
        CHECK(std::abs(a[i] - b[i]) / scale < rel_tol);
    }
}

Tensor random_matrix(Rng& rng, int r, int c) {
    std::vector<double> data(static_cast<size_t>(r) * c);
    for (auto& v : data) v = rng.uniform(-1.0, 1.0);
    return Tensor::matrix(r, c, std::move(data));
}

// Checks the tape gradient of loss_fn w.r.t. x against finite differences.
void grad_check(const std::function<Tensor(Tape&, const Tensor&)>& loss_fn, const Tensor& x,
                double rel_tol = 1e-4) {
    Tape tape;
    Tensor watched = tape.watch(x);
    Tensor loss = loss_fn(tape, watched);
    auto grads = tape.backward(loss);
    REQUIRE(grads.count(watched.node()) == 1);
    auto numeric = finite_diff(
        [&](const Tensor& t) {
            Tape tmp;
            return loss_fn(tmp, tmp.watch(t)).value();
        },
        x);
    check_close(grads.at(watched.node()), numeric, rel_tol);
}

}  // namespace

TEST_CASE("matmul identity") {
    Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
    Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
    Tensor c = matmul(a, eye);
    CHECK(c.data() == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("reduce_mean over axis 0") {
    Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
    Tensor m = reduce_axis(a, Reduce::Mean, 0);
    CHECK(m.data() == std::vector<double>{2, 3});
}

TEST_CASE("bce with logits at zero logit, target one") {
    Tensor x = Tensor::scalar(0.0);
    Tensor y = Tensor::scalar(1.0);
    CHECK(bce_with_logits_loss(x, y).value() == doctest::Approx(0.6931471805599453).epsilon(1e-9));
}

TEST_CASE("shape mismatch raises a structured error") {
    Tensor a = Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    Tensor b = Tensor::matrix(2, 2, {1, 0, 0, 1});
    CHECK_THROWS_WITH_AS(matmul(a, b), "matmul: incompatible shapes [2,3] x [2,2]", TensorError);
    CHECK_THROWS_AS(add(a, b), TensorError);
}

TEST_CASE("non-finite values rejected at creation") {
    CHECK_THROWS_AS(Tensor::scalar(std::nan("")), TensorError);
    CHECK_THROWS_AS(Tensor({2}, {1.0, INFINITY}), TensorError);
}

TEST_CASE("d/dx x^2 at x=3 is 6") {
    Tape tape;
    Tensor x = tape.watch(Tensor::scalar(3.0));
    Tensor loss = mul(x, x);
    auto grads = tape.backward(loss);
    CHECK(grads.at(x.node())[0] == doctest::Approx(6.0));
}

TEST_CASE("backward requires scalar loss and a fresh tape") {
    Tape tape;
    Tensor x = tape.watch(Tensor::matrix(1, 2, {1, 2}));
    Tensor y = scale(x, 2.0);
    CHECK_THROWS_AS(tape.backward(y), TensorError);
    Tensor s = reduce_sum(y);
    tape.backward(s);
    CHECK_THROWS_AS(tape.backward(s), TensorError);
}

TEST_CASE("mse gradient matches finite differences on random 4x4") {
    Rng rng(7);
    Tensor w = random_matrix(rng, 4, 4);
    Tensor x = random_matrix(rng, 4, 1);
    Tensor y = random_matrix(rng, 4, 1);
    grad_check(
        [&](Tape&, const Tensor& wt) { return mse_loss(matmul(wt, x), y); }, w, 1e-5);
}

TEST_CASE("composed relu(Wx)+b gradient matches finite differences") {
    Rng rng(11);
    Tensor w = random_matrix(rng, 3, 4);
    Tensor x = random_matrix(rng, 4, 2);
    Tensor y = random_matrix(rng, 3, 2);
    grad_check(
        [&](Tape& t, const Tensor& wt) {
            Tensor b = t.watch(Tensor::matrix(3, 2, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6}));
            return mse_loss(add(relu(matmul(wt, x)), b), y);
        },
        w, 1e-5);
}

TEST_CASE("gradients of all differentiable ops match finite differences") {
    Rng rng(23);
    Tensor x = random_matrix(rng, 3, 4);
    Tensor other = random_matrix(rng, 3, 4);
    Tensor target = random_matrix(rng, 3, 4);

    using Fn = std::function<Tensor(Tape&, const Tensor&)>;
    std::vector<std::pair<const char*, Fn>> cases = {
        {"exp", [&](Tape&, const Tensor& t) { return reduce_sum(exp(scale(t, 0.3))); }},
        {"log", [&](Tape&, const Tensor& t) {
             return reduce_sum(log(add(mul(t, t), Tensor::full({3, 4}, 0.5))));
         }},
        {"sigmoid", [&](Tape&, const Tensor& t) { return reduce_sum(sigmoid(t)); }},
        {"leaky_relu", [&](Tape&, const Tensor& t) { return reduce_sum(leaky_relu(t)); }},
        {"softmax", [&](Tape&, const Tensor& t) { return mse_loss(softmax_rows(t), target); }},
        {"log_softmax",
         [&](Tape&, const Tensor& t) { return mse_loss(log_softmax_rows(t), target); }},
        {"l2_normalize",
         [&](Tape&, const Tensor& t) { return mse_loss(l2_normalize_rows(t), target); }},
        {"transpose",
         [&](Tape&, const Tensor& t) { return reduce_sum(mul(transpose(t), transpose(other))); }},
        {"concat_cols",
         [&](Tape&, const Tensor& t) { return reduce_mean(concat(t, other, 1)); }},
        {"concat_rows",
         [&](Tape&, const Tensor& t) { return reduce_mean(mul(concat(t, t, 0), concat(other, other, 0))); }},
        {"slice", [&](Tape&, const Tensor& t) {
             return reduce_sum(mul(slice_cols(t, 1, 3), slice_cols(other, 1, 3)));
         }},
        {"gather", [&](Tape&, const Tensor& t) {
             return reduce_sum(mul(gather_rows(t, {2, 0, 2}), Tensor::full({3, 4}, 0.7)));
         }},
        {"reduce_mean_axis1",
         [&](Tape&, const Tensor& t) { return reduce_sum(mul(reduce_axis(t, Reduce::Mean, 1),
                                                             Tensor::row_vector({1, 2, 3}))); }},
        {"reduce_max", [&](Tape&, const Tensor& t) { return reduce_max(t); }},
        {"reduce_min_axis0", [&](Tape&, const Tensor& t) {
             return reduce_sum(reduce_axis(t, Reduce::Min, 0));
         }},
        {"add_rowwise", [&](Tape& tp, const Tensor& t) {
             Tensor bias = tp.watch(Tensor::row_vector({0.1, 0.2, 0.3, 0.4}));
             return mse_loss(add_rowwise(t, bias), target);
         }},
        {"add_colwise", [&](Tape& tp, const Tensor& t) {
             Tensor col = tp.watch(Tensor::row_vector({0.3, -0.1, 0.2}));
             return mse_loss(add_colwise(t, col), target);
         }},
        {"minimum", [&](Tape&, const Tensor& t) { return reduce_sum(minimum(t, other)); }},
        {"clamp", [&](Tape&, const Tensor& t) { return reduce_sum(clamp(t, -0.5, 0.5)); }},
        {"huber", [&](Tape&, const Tensor& t) { return huber_loss(t, target, 0.4); }},
        {"bce", [&](Tape&, const Tensor& t) {
             return bce_with_logits_loss(t, Tensor::full({3, 4}, 0.25));
         }},
        {"cross_entropy",
         [&](Tape&, const Tensor& t) { return cross_entropy_loss(t, {1, 0, 3}); }},
    };
    for (auto& [name, fn] : cases) {
        CAPTURE(name);
        grad_check(fn, x, 1e-4);
    }
}

TEST_CASE("backward of a sum of losses equals sum of backwards") {
    Rng rng(5);
    Tensor x = random_matrix(rng, 2, 3);
    Tensor t1 = random_matrix(rng, 2, 3);
    Tensor t2 = random_matrix(rng, 2, 3);

    Tape tape_a;
    Tensor xa = tape_a.watch(x);
    auto ga = tape_a.backward(add(mse_loss(xa, t1), bce_with_logits_loss(xa, Tensor::full({2, 3}, 1.0))));

    Tape tape_b;
    Tensor xb = tape_b.watch(x);
    auto gb = tape_b.backward(mse_loss(xb, t1));
    Tape tape_c;
    Tensor xc = tape_c.watch(x);
    auto gc = tape_c.backward(bce_with_logits_loss(xc, Tensor::full({2, 3}, 1.0)));

    for (size_t i = 0; i < x.data().size(); ++i)
        CHECK(ga.at(xa.node())[i] ==
              doctest::Approx(gb.at(xb.node())[i] + gc.at(xc.node())[i]).epsilon(1e-12));
    (void)t2;
}

TEST_CASE("forward ops are deterministic") {
    Rng rng(99);
    Tensor a = random_matrix(rng, 4, 4);
    Tensor b = random_matrix(rng, 4, 4);
    Tensor c1 = matmul(softmax_rows(a), sigmoid(b));
    Tensor c2 = matmul(softmax_rows(a), sigmoid(b));
    CHECK(c1.data() == c2.data());
}
