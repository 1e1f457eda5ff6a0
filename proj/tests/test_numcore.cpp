#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ecgssl/checkpoint.hpp"
#include "ecgssl/optim.hpp"
#include "ecgssl/tape.hpp"
#include "oracles.hpp"

using ecgssl::ConfigError;
using ecgssl::DataError;
using ecgssl::Rng;
using ecgssl::ShapeError;
using ecgssl::TrainError;
using namespace ecgssl::numcore;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true, double lo = -1.0,
                     double hi = 1.0) {
    std::vector<double> vals(shape_numel(shape));
    for (double& v : vals) v = rng.uniform(lo, hi);
    return Tensor::from_vector(std::move(shape), std::move(vals), requires_grad);
}

// random linear contraction to a scalar so gradient structure is exercised
Tensor contract(Tape& tape, const Tensor& t, Rng& rng) {
    std::vector<double> w(t.size());
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    Tensor weights = Tensor::from_vector(t.shape(), std::move(w));
    return tape.sum_all(tape.mul(t, weights));
}

}  // namespace

TEST_CASE("d/dx (x*x) at x=3 is 6") {
    Tensor x = Tensor::scalar(3.0, true);
    Tape tape;
    Tensor y = tape.mul(x, x);
    tape.backward(y);
    CHECK(x.grad()[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("every primitive matches central finite differences") {
    Rng rng(2024);
    auto run = [&](const char* name, Shape shape,
                   std::function<Tensor(Tape&, const Tensor&)> op, double lo = -1.0,
                   double hi = 1.0) {
        CAPTURE(name);
        for (int rep = 0; rep < 3; ++rep) {
            Tensor x = random_tensor(shape, rng, true, lo, hi);
            Rng wrng = rng.child(static_cast<std::uint64_t>(rep) + 17);
            auto res = oracles::check_gradients(
                {x}, [&](Tape& t) { Rng r2 = wrng; return contract(t, op(t, x), r2); });
            CHECK_MESSAGE(res.ok, name, ": ", res.note);
        }
    };

    run("relu", {4, 5}, [](Tape& t, const Tensor& x) { return t.relu(x); });
    run("sigmoid", {4, 5}, [](Tape& t, const Tensor& x) { return t.sigmoid(x); });
    run("exp", {4, 5}, [](Tape& t, const Tensor& x) { return t.exp(x); });
    run("log", {4, 5}, [](Tape& t, const Tensor& x) { return t.log(x); }, 0.2, 2.0);
    run("sqrt", {4, 5}, [](Tape& t, const Tensor& x) { return t.sqrt(x); }, 0.2, 2.0);
    run("clamp", {4, 5}, [](Tape& t, const Tensor& x) { return t.clamp(x, -0.9, 0.9); });
    run("scale", {4, 5}, [](Tape& t, const Tensor& x) { return t.scale(x, -2.5); });
    run("add_const", {4, 5}, [](Tape& t, const Tensor& x) { return t.add_const(x, 0.7); });
    run("softmax_rows", {3, 6}, [](Tape& t, const Tensor& x) { return t.softmax_rows(x); });
    run("l2_normalize_rows", {3, 6},
        [](Tape& t, const Tensor& x) { return t.l2_normalize_rows(x); });
    run("sum_all", {3, 4}, [](Tape& t, const Tensor& x) { return t.sum_all(x); });
    run("mean_all", {3, 4}, [](Tape& t, const Tensor& x) { return t.mean_all(x); });
    run("sum_last_axis 2d", {3, 4}, [](Tape& t, const Tensor& x) { return t.sum_last_axis(x); });
    run("sum_last_axis 3d", {2, 3, 4},
        [](Tape& t, const Tensor& x) { return t.sum_last_axis(x); });
    run("mean_last_axis", {2, 3, 4},
        [](Tape& t, const Tensor& x) { return t.mean_last_axis(x); });
    run("slice_rows", {5, 3}, [](Tape& t, const Tensor& x) { return t.slice_rows(x, 1, 4); });
    run("gather_rows", {5, 3},
        [](Tape& t, const Tensor& x) { return t.gather_rows(x, {4, 0, 2, 2}); });
    run("transpose", {3, 4}, [](Tape& t, const Tensor& x) { return t.transpose(x); });
    run("reshape", {3, 4}, [](Tape& t, const Tensor& x) { return t.reshape(x, {2, 6}); });

    // binary ops
    Rng brng(77);
    for (int rep = 0; rep < 3; ++rep) {
        Tensor a = random_tensor({3, 4}, brng);
        Tensor b = random_tensor({3, 4}, brng);
        Tensor v = random_tensor({4}, brng);
        Rng wrng = brng.child(static_cast<std::uint64_t>(rep));
        auto res = oracles::check_gradients({a, b, v}, [&](Tape& t) {
            Rng r2 = wrng;
            Tensor s1 = t.add(a, b);
            Tensor s2 = t.sub(s1, b);
            Tensor s3 = t.mul(s2, a);
            Tensor s4 = t.add_rowvec(s3, v);
            return contract(t, s4, r2);
        });
        CHECK_MESSAGE(res.ok, "binary ops: ", res.note);
    }
    for (int rep = 0; rep < 3; ++rep) {
        Tensor a = random_tensor({3, 4}, brng);
        Tensor b = random_tensor({4, 5}, brng);
        Rng wrng = brng.child(static_cast<std::uint64_t>(rep) + 100);
        auto res = oracles::check_gradients({a, b}, [&](Tape& t) {
            Rng r2 = wrng;
            return contract(t, t.matmul(a, b), r2);
        });
        CHECK_MESSAGE(res.ok, "matmul: ", res.note);
    }
    for (int rep = 0; rep < 3; ++rep) {
        Tensor a = random_tensor({2, 4}, brng);
        Tensor b = random_tensor({3, 4}, brng);
        Rng wrng = brng.child(static_cast<std::uint64_t>(rep) + 200);
        auto res = oracles::check_gradients({a, b}, [&](Tape& t) {
            Rng r2 = wrng;
            return contract(t, t.concat_rows(a, b), r2);
        });
        CHECK_MESSAGE(res.ok, "concat_rows: ", res.note);
    }
    // conv1d: plain, strided, padded
    struct ConvCase {
        int stride, padding;
    };
    for (ConvCase cc : {ConvCase{1, 0}, ConvCase{2, 3}, ConvCase{3, 1}}) {
        Tensor x = random_tensor({2, 3, 12}, brng);
        Tensor w = random_tensor({4, 3, 5}, brng);
        Tensor bias = random_tensor({4}, brng);
        Rng wrng = brng.child(static_cast<std::uint64_t>(cc.stride) * 31 +
                              static_cast<std::uint64_t>(cc.padding));
        auto res = oracles::check_gradients({x, w, bias}, [&](Tape& t) {
            Rng r2 = wrng;
            return contract(t, t.conv1d(x, w, bias, cc.stride, cc.padding), r2);
        });
        CHECK_MESSAGE(res.ok, "conv1d stride ", cc.stride, " pad ", cc.padding, ": ", res.note);
    }
}

TEST_CASE("conv1d with identity kernel reproduces the input") {
    Tensor x = Tensor::from_vector({1, 1, 5}, {1.0, -2.0, 3.0, 0.5, 4.0});
    Tensor w = Tensor::from_vector({1, 1, 1}, {1.0});
    Tensor b = Tensor::from_vector({1}, {0.0});
    Tape tape;
    Tensor y = tape.conv1d(x, w, b, 1, 0);
    REQUIRE(y.shape() == Shape{1, 1, 5});
    for (int i = 0; i < 5; ++i) CHECK(y.values()[i] == doctest::Approx(x.values()[i]));
}

TEST_CASE("shape errors name both shapes") {
    Tensor a = Tensor::zeros({2, 3});
    Tensor b = Tensor::zeros({4, 5});
    Tape tape;
    try {
        tape.matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[2,3]") != std::string::npos);
        CHECK(msg.find("[4,5]") != std::string::npos);
    }
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(5);
    Tensor x = random_tensor({4, 7}, rng, false, -3.0, 3.0);
    Tape tape;
    Tensor s = tape.softmax_rows(x);
    for (int i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 7; ++j) sum += s.values()[i * 7 + j];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("detach blocks gradient flow") {
    Tensor x = Tensor::scalar(2.0, true);
    Tape tape;
    Tensor y = tape.mul(tape.detach(tape.mul(x, x)), x);  // (x^2 detached) * x
    tape.backward(y);
    CHECK(x.grad()[0] == doctest::Approx(4.0));  // d/dx of c*x with c = 4
}

TEST_CASE("backward of a sum of losses equals the sum of backwards") {
    Rng rng(99);
    Tensor x = random_tensor({3, 3}, rng);

    auto build_a = [&](Tape& t) { return t.mean_all(t.mul(x, x)); };
    auto build_b = [&](Tape& t) { return t.sum_all(t.relu(x)); };

    x.zero_grad();
    {
        Tape t;
        t.backward(t.add(build_a(t), build_b(t)));
    }
    std::vector<double> combined(x.grad().begin(), x.grad().end());

    x.zero_grad();
    {
        Tape t;
        t.backward(build_a(t));
    }
    std::vector<double> ga(x.grad().begin(), x.grad().end());
    x.zero_grad();
    {
        Tape t;
        t.backward(build_b(t));
    }
    for (std::size_t i = 0; i < combined.size(); ++i)
        CHECK(combined[i] == doctest::Approx(ga[i] + x.grad()[i]).epsilon(1e-12));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    Tensor p = Tensor::from_vector({3}, {1.0, -2.0, 0.5}, true);
    Adam adam({p});
    p.zero_grad();
    adam.step(0.1);
    CHECK(p.values()[0] == doctest::Approx(1.0));
    CHECK(p.values()[1] == doctest::Approx(-2.0));
    CHECK(p.values()[2] == doctest::Approx(0.5));
}

TEST_CASE("adam: first-step hand evaluation") {
    // p = 1, g = 0.5, lr = 0.1 -> p' = 1 - 0.1 * 0.5/sqrt(0.25) = 0.9
    Tensor p = Tensor::scalar(1.0, true);
    Adam adam({p});
    p.grad()[0] = 0.5;
    adam.step(0.1);
    CHECK(p.values()[0] == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adam: non-finite gradient raises a training error with the step") {
    Tensor p = Tensor::scalar(1.0, true);
    Adam adam({p});
    p.grad()[0] = std::nan("");
    try {
        adam.step(0.1);
        FAIL("expected TrainError");
    } catch (const TrainError& e) {
        CHECK(std::string(e.what()).find("step 1") != std::string::npos);
    }
}

TEST_CASE("adam: identical runs produce identical trajectories") {
    auto run = [] {
        Rng rng(31);
        Tensor p = random_tensor({4}, rng);
        Adam adam({p});
        std::vector<double> trace;
        for (int step = 0; step < 20; ++step) {
            Tape tape;
            Tensor loss = tape.mean_all(tape.mul(p, p));
            tape.backward(loss);
            adam.step(1e-2);
            trace.push_back(loss.item());
        }
        return trace;
    };
    auto a = run();
    auto b = run();
    CHECK(a == b);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
    CosineSchedule s{1e-3, 0.0, 100};
    CHECK(s.lr_at(0) == doctest::Approx(1e-3));
    CHECK(s.lr_at(100) == doctest::Approx(0.0));
    CHECK(s.lr_at(50) == doctest::Approx(5e-4).epsilon(1e-9));
    CHECK(s.lr_at(1000) == doctest::Approx(0.0));
}

TEST_CASE("early stopper traces") {
    {
        EarlyStopper es(2);
        CHECK(es.update(1.0));
        CHECK(es.update(0.9));
        CHECK(es.update(0.8));
        CHECK_FALSE(es.stopped());
    }
    {
        EarlyStopper es(2);
        CHECK(es.update(1.0));
        CHECK(es.update(1.1));
        CHECK_FALSE(es.update(1.2));
        CHECK(es.stopped());
    }
    {
        EarlyStopper es(3);
        CHECK(es.update(1.0));
        CHECK(es.update(0.9));
        CHECK(es.update(0.95));
        CHECK(es.update(0.94));
        CHECK_FALSE(es.update(0.93));
        CHECK(es.stopped());
        CHECK(es.epoch() == 5);
        CHECK(es.best_epoch() == 2);
        CHECK(es.best_loss() == doctest::Approx(0.9));
    }
}

TEST_CASE("gradient clipping scales to the requested norm") {
    Tensor p = Tensor::from_vector({2}, {0.0, 0.0}, true);
    p.grad()[0] = 3.0;
    p.grad()[1] = 4.0;
    std::vector<Tensor> params{p};
    const double pre = clip_grad_norm(params, 2.5);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(p.grad()[0] == doctest::Approx(1.5));
    CHECK(p.grad()[1] == doctest::Approx(2.0));
}

TEST_CASE("checkpoint round-trip preserves shapes and values byte-for-byte") {
    Rng rng(123);
    std::vector<Tensor> params{random_tensor({3, 4}, rng), random_tensor({7}, rng),
                               random_tensor({2, 1, 5}, rng)};
    const auto bytes = serialize_params(params);
    const auto bytes2 = serialize_params(params);
    CHECK(bytes == bytes2);

    auto restored = deserialize_params(bytes);
    REQUIRE(restored.size() == params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(restored[i].shape() == params[i].shape());
        for (std::size_t j = 0; j < params[i].size(); ++j)
            CHECK(restored[i].values()[j] == params[i].values()[j]);
    }
}

TEST_CASE("checkpoint rejects corrupt input") {
    Rng rng(5);
    auto bytes = serialize_params({random_tensor({2, 2}, rng)});
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(deserialize_params(bytes), DataError);
    std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    CHECK_THROWS_AS(deserialize_params(junk), DataError);
}
