#include <omp.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "eegssl/checkpoint.hpp"
#include "eegssl/kernels/conv1d.hpp"
#include "eegssl/model.hpp"
#include "eegssl/ops.hpp"
#include "eegssl/optim.hpp"
#include "eegssl/rng.hpp"
#include "gradcheck.hpp"

using namespace eegssl;
namespace k = eegssl::kernels;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, std::uint64_t seed, double sd = 1.0) {
  Tensor<T> t(std::move(shape));
  RngStream rng(seed, {17});
  for (auto& v : t.values()) v = static_cast<T>(rng.normal(0.0, sd));
  return t;
}

Tensor<double> conv_eval(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b,
                         std::size_t stride) {
  Graph<double> g;
  const auto y = conv1d(g, g.constant(x), g.constant(w), g.constant(b), stride);
  return g.value(y);
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("nn_core") {

TEST_CASE("conv1d worked examples") {
  const Tensor<double> x({1, 1, 4}, {1, 2, 3, 4});
  CHECK(conv_eval(x, Tensor<double>({1, 1, 1}, {1}), Tensor<double>({1}), 1).values()[3] == 4.0);
  const auto y = conv_eval(x, Tensor<double>({1, 1, 2}, {1, 1}), Tensor<double>({1}), 1);
  CHECK(std::vector<double>(y.values().begin(), y.values().end()) == std::vector<double>{3, 5, 7, 4});
  const auto id = conv_eval(x, Tensor<double>({1, 1, 1}, {1}), Tensor<double>({1}), 1);
  CHECK(id == x);
  for (std::size_t len : {4u, 5u, 9u, 3072u}) {
    const auto s = conv_eval(Tensor<double>({1, 1, len}, 1.0), Tensor<double>({1, 1, 3}, 1.0), Tensor<double>({1}), 2);
    CHECK(s.dim(2) == (len + 1) / 2);
  }
  Graph<double> g;
  CHECK_THROWS_AS(conv1d(g, g.constant(Tensor<double>({1, 2, 4})), g.constant(Tensor<double>({1, 1, 2})),
                         g.constant(Tensor<double>({1})), 1),
                  Error);
}

TEST_CASE("OpenMP kernels match the serial reference") {
  RngStream rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    k::Conv1dGeometry geo;
    geo.batch = static_cast<std::size_t>(rng.uniform_int(1, 3));
    geo.in_channels = static_cast<std::size_t>(rng.uniform_int(1, 5));
    geo.out_channels = static_cast<std::size_t>(rng.uniform_int(1, 5));
    geo.in_length = static_cast<std::size_t>(rng.uniform_int(1, 70));
    geo.kernel = static_cast<std::size_t>(rng.uniform_int(1, 33));
    geo.stride = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto L = geo.out_length();
    const auto x = random_tensor<double>({geo.batch, geo.in_channels, geo.in_length}, 3 * trial);
    const auto w = random_tensor<double>({geo.out_channels, geo.in_channels, geo.kernel}, 3 * trial + 1);
    const auto b = random_tensor<double>({geo.out_channels}, 3 * trial + 2);
    const auto dy = random_tensor<double>({geo.batch, geo.out_channels, L}, 3 * trial + 5);

    Tensor<double> y1({geo.batch, geo.out_channels, L}), y2 = y1;
    k::reference::conv1d_forward(geo, x.data(), w.data(), b.data(), y1.data());
    k::omp::conv1d_forward(geo, x.data(), w.data(), b.data(), y2.data());
    CHECK(max_diff(y1.values(), y2.values()) < 1e-12);

    Tensor<double> dx1(x.shape()), dx2(x.shape(), 5.0);
    k::reference::conv1d_backward_input(geo, dy.data(), w.data(), dx1.data());
    k::omp::conv1d_backward_input(geo, dy.data(), w.data(), dx2.data());
    CHECK(max_diff(dx1.values(), dx2.values()) < 1e-12);

    Tensor<double> dw1(w.shape()), dw2(w.shape(), 5.0), db1(b.shape()), db2(b.shape(), 5.0);
    k::reference::conv1d_backward_params(geo, x.data(), dy.data(), dw1.data(), db1.data());
    k::omp::conv1d_backward_params(geo, x.data(), dy.data(), dw2.data(), db2.data());
    CHECK(max_diff(dw1.values(), dw2.values()) < 1e-12);
    CHECK(max_diff(db1.values(), db2.values()) < 1e-12);
  }
}

TEST_CASE("OpenMP kernels are bitwise independent of the thread count") {
  k::Conv1dGeometry geo{4, 6, 8, 500, 32, 2};
  const auto x = random_tensor<float>({4, 6, 500}, 1);
  const auto w = random_tensor<float>({8, 6, 32}, 2);
  const auto b = random_tensor<float>({8}, 3);
  const auto dy = random_tensor<float>({4, 8, geo.out_length()}, 4);
  const auto run = [&](int threads) {
    omp_set_num_threads(threads);
    Tensor<float> y({4, 8, geo.out_length()}), dx(x.shape()), dw(w.shape()), db(b.shape());
    k::omp::conv1d_forward(geo, x.data(), w.data(), b.data(), y.data());
    k::omp::conv1d_backward_input(geo, dy.data(), w.data(), dx.data());
    k::omp::conv1d_backward_params(geo, x.data(), dy.data(), dw.data(), db.data());
    return std::vector<Tensor<float>>{y, dx, dw, db};
  };
  const int saved = omp_get_max_threads();
  const auto one = run(1);
  const auto four = run(4);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("relu, dropout and batch norm forward contracts") {
  Graph<double> g;
  const auto r = relu(g, g.constant(Tensor<double>({3}, {-1, 0, 2})));
  CHECK(g.value(r) == Tensor<double>({3}, {0, 0, 2}));

  const auto x = random_tensor<double>({2, 3, 10}, 5);
  RngStream rng(1);
  for (auto mode : {Mode::Train, Mode::Eval}) {
    Graph<double> gd;
    CHECK(gd.value(dropout(gd, gd.constant(x), 0.0, &rng, mode)) == x);
  }
  Graph<double> ge;
  CHECK(ge.value(dropout(ge, ge.constant(x), 0.5, &rng, Mode::Eval)) == x);
  Graph<double> gt;
  const auto& dropped = gt.value(dropout(gt, gt.constant(x), 0.5, &rng, Mode::Train));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK((dropped[i] == 0.0 || std::abs(dropped[i] - 2 * x[i]) < 1e-15));

  Tensor<double> biased = random_tensor<double>({4, 2, 50}, 6, 3.0);
  for (std::size_t i = 0; i < biased.size(); ++i) biased[i] += (i / 50) % 2 ? 7.0 : -2.0;
  Tensor<double> rm({2}), rv({2}, 1.0);
  Graph<double> gb;
  const auto y = batch_norm(gb, gb.constant(biased), gb.constant(Tensor<double>({2}, 1.0)),
                            gb.constant(Tensor<double>({2})), BatchNormState<double>{&rm, &rv}, Mode::Train);
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0, ss = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t l = 0; l < 50; ++l) {
        const double v = gb.value(y)[(b * 2 + c) * 50 + l];
        s += v;
        ss += v * v;
      }
    }
    CHECK(std::abs(s / 200) < 1e-5);
    CHECK(std::abs(ss / 200 - 1.0) < 1e-5);
  }
  CHECK(rm[1] != 0.0);  // running statistics moved
}

TEST_CASE("softmax cross-entropy") {
  const Tensor<double> uniform({2, 5});
  const std::vector<int> labels{0, 3};
  CHECK(softmax_cross_entropy(uniform, labels).loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  double prev = 1e9;
  for (double margin : {1.0, 10.0}) {
    Tensor<double> l({1, 3});
    l[1] = margin;
    const double loss = softmax_cross_entropy(l, std::vector<int>{1}).loss;
    CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-4);
  const auto logits = random_tensor<double>({4, 3}, 8, 2.0);
  const std::vector<int> y{2, 0, 1, 1};
  double oracle = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 3; ++j) z += std::exp(logits[i * 3 + j]);
    oracle += -(logits[i * 3 + static_cast<std::size_t>(y[i])] - std::log(z));
  }
  CHECK(std::abs(softmax_cross_entropy(logits, y).loss - oracle / 4) < 1e-10);
  Tensor<double> huge({1, 2}, {1e4, -1e4});
  CHECK(std::isfinite(softmax_cross_entropy(huge, std::vector<int>{1}).loss));
}

TEST_CASE("layer gradients match central differences") {
  using gradcheck::Params;
  const auto run = [](Params params, const gradcheck::Build& build) {
    const auto r = gradcheck::check(params, build);
    INFO(r.worst);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.checked > 0);
  };
  const auto proj = [](Graph<double>& g, NodeId n, std::uint64_t seed) {
    return weighted_sum(g, n, random_tensor<double>(g.value(n).shape(), seed));
  };

  for (std::size_t stride : {1u, 2u, 3u}) {
    run({{"x", random_tensor<double>({2, 3, 11}, 1)}, {"w", random_tensor<double>({4, 3, 5}, 2)},
         {"b", random_tensor<double>({4}, 3)}},
        [&](Graph<double>& g, Params& p) {
          const auto y = conv1d(g, g.parameter("x", p.at("x")), g.parameter("w", p.at("w")),
                                g.parameter("b", p.at("b")), stride);
          return proj(g, y, 4);
        });
  }
  run({{"x", random_tensor<double>({3, 6}, 5)}, {"w", random_tensor<double>({4, 6}, 6)}, {"b", random_tensor<double>({4}, 7)}},
      [&](Graph<double>& g, Params& p) {
        return proj(g, dense(g, g.parameter("x", p.at("x")), g.parameter("w", p.at("w")), g.parameter("b", p.at("b"))), 8);
      });
  for (const Shape& shape : {Shape{3, 2, 7}, Shape{5, 3}}) {
    run({{"x", random_tensor<double>(shape, 9)}, {"s", random_tensor<double>({shape[1]}, 10)},
         {"t", random_tensor<double>({shape[1]}, 11)}},
        [&](Graph<double>& g, Params& p) {
          Tensor<double> rm({shape[1]}), rv({shape[1]}, 1.0);
          const auto y = batch_norm(g, g.parameter("x", p.at("x")), g.parameter("s", p.at("s")),
                                    g.parameter("t", p.at("t")), BatchNormState<double>{&rm, &rv}, Mode::Train);
          return proj(g, y, 12);
        });
  }
  run({{"x", random_tensor<double>({2, 3, 8}, 13)}, {"y", random_tensor<double>({2, 3, 8}, 14)}},
      [&](Graph<double>& g, Params& p) {
        const auto s = add(g, relu(g, g.parameter("x", p.at("x"))), g.parameter("y", p.at("y")));
        return proj(g, global_avg_pool(g, s), 15);
      });
  run({{"x", random_tensor<double>({2, 3, 9}, 16)}}, [&](Graph<double>& g, Params& p) {
    return proj(g, shortcut(g, g.parameter("x", p.at("x")), 5, 2), 17);
  });
  run({{"x", random_tensor<double>({2, 3, 9}, 18)}}, [&](Graph<double>& g, Params& p) {
    RngStream rng(3);
    return proj(g, dropout(g, g.parameter("x", p.at("x")), 0.3, &rng, Mode::Train), 19);
  });
  const std::vector<int> labels{1, 0, 2};
  run({{"z", random_tensor<double>({3, 3}, 20)}}, [&](Graph<double>& g, Params& p) {
    return softmax_cross_entropy(g, g.parameter("z", p.at("z")), labels).loss;
  });
  for (auto mode : {LossMode::Paper, LossMode::Symmetric}) {
    run({{"e", random_tensor<double>({8, 5}, 21)}}, [&](Graph<double>& g, Params& p) {
      return contrastive_loss(g, g.parameter("e", p.at("e")), 0.5, mode);
    });
  }
}

TEST_CASE("backward bookkeeping") {
  Graph<double> g;
  const auto w = g.parameter("w", Tensor<double>({3}, 2.0));
  const auto c = g.constant(Tensor<double>({1}, 4.0));
  (void)w;
  g.backward(c);
  CHECK(g.parameter_gradients().at("w") == Tensor<double>({3}));
  CHECK_THROWS_AS(g.record(Tensor<double>({1}), {NodeId{5}}, nullptr), Error);
  try {
    g.record(Tensor<double>({1}), {NodeId{g.size()}}, nullptr);
    FAIL("expected GraphCycle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GraphCycle);
  }
}

TEST_CASE("sgd with momentum") {
  Tensor<double> p({2}, {1.0, -2.0}), v({2});
  sgd_momentum_step(p, Tensor<double>({2}), v, 0.1, {0.9, 0.0});
  CHECK(p == Tensor<double>({2}, {1.0, -2.0}));

  Tensor<double> q({1}, {3.0}), vq({1});
  sgd_momentum_step(q, Tensor<double>({1}, {0.5}), vq, 0.1, {0.9, 1e-4});
  CHECK(q[0] == doctest::Approx(3.0 - 0.1 * (0.5 + 1e-4 * 3.0)).epsilon(1e-15));

  // f(x) = 0.5 a x^2, two steps against a scalar simulation
  const double a = 3.0, lr = 0.05, m = 0.9, l2 = 1e-4;
  Tensor<double> x({1}, {2.0}), vx({1});
  double xs = 2.0, vs = 0.0;
  for (int step = 0; step < 2; ++step) {
    sgd_momentum_step(x, Tensor<double>({1}, {a * x[0]}), vx, lr, {m, l2});
    vs = m * vs + (a * xs + l2 * xs);
    xs -= lr * vs;
  }
  CHECK(std::abs(x[0] - xs) < 1e-12);
}

TEST_CASE("lr schedule endpoints") {
  CHECK(std::abs(lr_schedule(5, 70, 0.1, 5) - 0.1) < 1e-12);
  CHECK(std::abs(lr_schedule(70, 70, 0.1, 5)) < 1e-12);
  CHECK(std::abs(lr_schedule(37.5, 70, 0.1, 5) - 0.05) < 1e-12);
  CHECK(lr_schedule(0, 70, 0.1, 5) == 0.0);
  CHECK(std::abs(lr_schedule(2.5, 70, 0.1, 5) - 0.05) < 1e-12);
  double prev = 1.0;
  for (double e = 5; e <= 70; e += 0.5) {
    const double lr = lr_schedule(e, 70, 0.1, 5);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("model presets") {
  const auto paper = ModelConfig::paper18();
  CHECK(paper.conv_layer_count() == 18);
  const auto params = init_parameters<float>(paper, 1);
  int convs = 0;
  for (const auto& [name, t] : params.tensors()) {
    if (t.rank() == 3 && name.ends_with(".weight")) ++convs;
  }
  CHECK(convs == 18);
  CHECK(paper.conv_kernel == 32);
  CHECK(paper.classifier_hidden == std::vector<int>{384, 192, 96});
  CHECK(paper.dropout_rate == 0.2);
  CHECK(ModelConfig::from_text(paper.to_text()) == paper);
  CHECK(ModelConfig::from_text(ModelConfig::tiny().to_text()) == ModelConfig::tiny());
  CHECK_THROWS_AS(ModelConfig::from_text("preset=tiny\nwidth=3\n"), Error);
}

TEST_CASE("backbone and classifier shapes") {
  const auto cfg = ModelConfig::tiny();
  auto params = init_parameters<float>(cfg, 3);
  Graph<float> g;
  const auto x = g.constant(random_tensor<float>({2, 1, 3072}, 4));
  const auto emb = forward_backbone(g, params, cfg, x, Mode::Eval, nullptr);
  CHECK(g.value(emb).shape() == Shape{2, 16});
  CHECK(g.value(emb).all_finite());
  const auto logits = forward_classifier(g, params, cfg, emb);
  CHECK(g.value(logits).shape() == Shape{2, 5});

  Graph<float> g2;
  const auto emb2 = forward_backbone(g2, params, cfg, g2.constant(random_tensor<float>({2, 1, 3072}, 4)), Mode::Eval,
                                     nullptr);
  CHECK(g2.value(emb2) == g.value(emb));

  Graph<float> gz;
  RngStream drop(5);
  const auto ez = forward_backbone(gz, params, cfg, gz.constant(Tensor<float>({2, 1, 3072})), Mode::Train, &drop);
  for (float v : gz.value(ez).values()) CHECK(v == 0.0f);
  auto zero_cls = params;
  for (auto& [name, t] : zero_cls.tensors()) {
    if (name.starts_with("classifier.") && name.ends_with(".bias")) t.fill(0.0f);
  }
  const auto lz = forward_classifier(gz, zero_cls, cfg, ez);
  const auto ce = softmax_cross_entropy(gz.value(lz), std::vector<int>{0, 4});
  for (float p : ce.probabilities.values()) CHECK(p == doctest::Approx(0.2f));

  Graph<float> gb;
  CHECK_THROWS_AS(forward_backbone(gb, params, cfg, gb.constant(Tensor<float>({2, 3, 64})), Mode::Eval, nullptr), Error);
}

TEST_CASE("paper18 forward on a full-length epoch") {
  const auto cfg = ModelConfig::paper18();
  auto params = init_parameters<float>(cfg, 5);
  Graph<float> g;
  const auto emb =
      forward_backbone(g, params, cfg, g.constant(random_tensor<float>({1, 1, 3072}, 6)), Mode::Eval, nullptr);
  CHECK(g.value(emb).shape() == Shape{1, 256});
  CHECK(g.value(emb).all_finite());
}

TEST_CASE("checkpoint round trip") {
  const auto cfg = ModelConfig::tiny();
  const auto params = init_parameters<float>(cfg, 9);
  const auto bytes = encode_checkpoint(cfg, params);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "SSLCKPT1");
  const auto ck = decode_checkpoint(bytes);
  CHECK(ck.config == cfg);
  CHECK(ck.params == params);
  CHECK(encode_checkpoint(ck.config, ck.params) == bytes);

  auto other = ModelConfig::tiny();
  other.embedding_dim = 8;
  auto target = init_parameters<float>(other, 0);
  try {
    load_into(target, params);
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CheckpointShapeMismatch);
  }
  auto bad = bytes;
  bad[8] = 7;
  try {
    decode_checkpoint(bad);
    FAIL("expected a version error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VersionMismatch);
  }
  CHECK_THROWS_AS(decode_checkpoint(std::span(bytes).first(bytes.size() - 4)), Error);
}

}  // TEST_SUITE
