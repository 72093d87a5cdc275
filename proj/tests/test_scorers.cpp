#include <cmath>
#include <random>

#include "doctest.h"
#include "setcover/error.hpp"
#include "setcover/scorer.hpp"
#include "support.hpp"

using namespace setcover;

namespace {

Scorer random_mlp(std::size_t d, int labels, std::size_t hidden, Rng& rng) {
  Scorer s = Scorer::mlp(d, labels, hidden, rng);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& p : s.params()) p = n(rng);
  return s;
}

Scorer random_linear(std::size_t d, int labels, Rng& rng) {
  Scorer s = Scorer::linear(d, labels);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& p : s.params()) p = n(rng);
  return s;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Hidden pre-activations computed directly from the parameter layout.
std::vector<double> hidden_pre(const Scorer& s, const std::vector<double>& x) {
  const auto p = s.params();
  const std::size_t d = s.dim(), h = s.hidden();
  std::vector<double> pre(h);
  for (std::size_t j = 0; j < h; ++j) {
    double acc = p[h * d + j];
    for (std::size_t k = 0; k < d; ++k) acc += p[j * d + k] * x[k];
    pre[j] = acc;
  }
  return pre;
}

}  // namespace

TEST_CASE("linear score examples") {
  Scorer s = Scorer::linear(3, 2);
  s.output_biases()[0] = 0.5;
  s.output_biases()[1] = -1.5;
  for (const auto& x : {std::vector<double>{1, 2, 3}, std::vector<double>{-7, 0, 4}}) {
    CHECK(score(s, x) == std::vector<double>{0.5, -1.5});
  }
  Scorer e = Scorer::linear(3, 2);
  e.output_weights()[0] = 1.0;  // w_0 = e_1
  CHECK(score(e, std::vector<double>{3, 0, 0})[0] == 3.0);
  CHECK_THROWS_AS(score(e, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("hand-evaluated MLP forward pass") {
  Scorer s = Scorer::mlp_zero(2, 2, 2);
  auto w1 = s.hidden_weights();
  w1[0] = 1; w1[1] = 0;   // unit 0 reads x0
  w1[2] = 0; w1[3] = 1;   // unit 1 reads x1
  s.hidden_biases()[0] = 0.0;
  s.hidden_biases()[1] = -1.0;
  auto w2 = s.output_weights();
  w2[0] = 2; w2[1] = -1;
  w2[2] = 0.5; w2[3] = 3;
  s.output_biases()[0] = 0.25;
  s.output_biases()[1] = -0.5;
  // x = (1.5, 0.5): hidden = relu(1.5, -0.5) = (1.5, 0)
  const auto out = score(s, std::vector<double>{1.5, 0.5});
  CHECK(out[0] == doctest::Approx(2 * 1.5 + 0.25));
  CHECK(out[1] == doctest::Approx(0.5 * 1.5 - 0.5));
  // x = (-1, 3): hidden = (0, 2)
  const auto out2 = score(s, std::vector<double>{-1, 3});
  CHECK(out2[0] == doctest::Approx(-2 + 0.25));
  CHECK(out2[1] == doctest::Approx(6 - 0.5));
}

TEST_CASE("prediction set rule") {
  CHECK(set_from_scores(std::vector<double>{-0.5, 0.0, 2.0}) == LabelSet::of(3, {1, 2}));
  CHECK(set_from_scores(std::vector<double>{-1, -2}).empty());
  Scorer s = Scorer::linear(4, 3);
  for (auto& b : s.output_biases()) b = 1.0;
  CHECK(predict_set(s, std::vector<double>{9, 9, 9, 9}) == LabelSet::full(3));

  Rng rng = make_rng(5, 0);
  for (int t = 0; t < 200; ++t) {
    const Scorer m = random_mlp(3, 4, 4, rng);
    const auto x = random_vec(3, rng);
    const auto sc = score(m, x);
    const auto set = predict_set(m, x);
    for (int y = 0; y < 4; ++y) CHECK(set.contains(y) == (sc[static_cast<std::size_t>(y)] >= 0.0));
  }
}

TEST_CASE("positive scaling keeps linear prediction sets") {
  Rng rng = make_rng(6, 0);
  for (int t = 0; t < 100; ++t) {
    Scorer s = random_linear(5, 3, rng);
    const auto x = random_vec(5, rng);
    const auto before = predict_set(s, x);
    for (auto& p : s.params()) p *= 3.7;
    CHECK(predict_set(s, x) == before);
  }
}

TEST_CASE("grad_params closed form for linear scorers") {
  Scorer s = Scorer::linear(3, 2);
  const std::vector<double> x{1, -2, 5};
  const auto g = grad_params(s, x, 1, 1.0);
  // Layout: W (2 x 3) then b (2).
  const std::vector<double> want{0, 0, 0, 1, -2, 5, 0, 1};
  CHECK(g == want);
  for (double v : grad_params(s, x, 0, 0.0)) CHECK(v == 0.0);
}

TEST_CASE("grad_params matches finite differences") {
  Rng rng = make_rng(11, 0);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const bool mlp = t % 2 == 0;
    const Scorer s = mlp ? random_mlp(4, 3, 5, rng) : random_linear(4, 3, rng);
    const auto x = random_vec(4, rng);
    if (mlp) {
      bool near_kink = false;
      for (double v : hidden_pre(s, x)) near_kink |= std::abs(v) < 1e-3;
      if (near_kink) continue;
    }
    const int y = t % 3;
    const double up = 0.7;
    const auto g = grad_params(s, x, y, up);
    auto f = [&](const std::vector<double>& p) {
      Scorer c = s;
      std::copy(p.begin(), p.end(), c.params().begin());
      return up * score(c, x)[static_cast<std::size_t>(y)];
    };
    const auto fd = testing::numeric_gradient(f, {s.params().begin(), s.params().end()});
    CHECK(testing::relative_error(g, fd) < 1e-4);
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("softmax loss examples") {
  MultiDomainDataset d(2, LabelSpace(3));
  d.add_domain(testing::make_block(0, {{1, 2}, {3, 4}}, {0, 2}));
  const auto all = d.all_instances();
  Scorer s = Scorer::linear(2, 3);
  CHECK(softmax_loss_and_grad(s, d, all).loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  MultiDomainDataset one(1, LabelSpace(2));
  one.add_domain(testing::make_block(0, {{0}}, {1}));
  Scorer b = Scorer::linear(1, 2);
  double last = 1e9;
  for (double margin : {1.0, 5.0, 20.0, 60.0}) {
    b.output_biases()[1] = margin;
    const double loss = softmax_loss_and_grad(b, one, one.all_instances()).loss;
    CHECK(loss < last);
    last = loss;
  }
  CHECK(last < 1e-20);
  // Stable for huge logits.
  b.output_biases()[0] = 1e4;
  b.output_biases()[1] = -1e4;
  CHECK(std::isfinite(softmax_loss_and_grad(b, one, one.all_instances()).loss));
}

TEST_CASE("softmax gradient matches finite differences") {
  Rng rng = make_rng(12, 0);
  for (int t = 0; t < 20; ++t) {
    const bool mlp = t % 2 == 1;
    MultiDomainDataset d(3, LabelSpace(3));
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      rows.push_back(random_vec(3, rng));
      labels.push_back(i % 3);
    }
    d.add_domain(testing::make_block(0, rows, labels));
    const Scorer s = mlp ? random_mlp(3, 3, 4, rng) : random_linear(3, 3, rng);
    if (mlp) {
      bool near = false;
      for (const auto& r : rows) {
        for (double v : hidden_pre(s, r)) near |= std::abs(v) < 1e-3;
      }
      if (near) continue;
    }
    const auto batch = d.all_instances();
    const auto lg = softmax_loss_and_grad(s, d, batch);
    auto f = [&](const std::vector<double>& p) {
      Scorer c = s;
      std::copy(p.begin(), p.end(), c.params().begin());
      return softmax_loss_and_grad(c, d, batch).loss;
    };
    const auto fd = testing::numeric_gradient(f, {s.params().begin(), s.params().end()});
    CHECK(testing::relative_error(lg.grad, fd) < 1e-4);
  }
}

TEST_CASE("singleton prediction and ties") {
  CHECK(argmax_first(std::vector<double>{2, 1, 1}) == 0);
  CHECK(argmax_first(std::vector<double>{1, 1, 1}) == 0);
  CHECK(argmax_first(std::vector<double>{0, 3, 3}) == 1);
  Rng rng = make_rng(13, 0);
  for (int t = 0; t < 100; ++t) {
    const Scorer s = random_mlp(3, 5, 4, rng);
    const auto x = random_vec(3, rng);
    const auto logits = score(s, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
      if (logits[i] > logits[best]) best = i;
    }
    CHECK(erm_predict_singleton(SoftmaxClassifier{s}, x) == static_cast<int>(best));
  }
}

TEST_CASE("initialization ranges") {
  Rng rng = make_rng(14, 0);
  Scorer s = Scorer::mlp(16, 3, 4, rng);
  for (double w : s.hidden_weights()) CHECK(std::abs(w) <= 0.25);
  for (double w : s.output_weights()) CHECK(std::abs(w) <= 0.5);
  const Scorer zero = Scorer::linear(4, 2);
  for (double p : zero.params()) CHECK(p == 0.0);
  CHECK(default_hidden(10) == 5);
  CHECK(default_hidden(50) == 25);
  CHECK(default_hidden(4) == 5);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng = make_rng(15, 0);
  testing::TempDir tmp;
  for (const Scorer& s : {random_mlp(7, 3, 5, rng), random_linear(4, 2, rng)}) {
    CHECK(scorer_from_json(scorer_to_json(s)) == s);
    save_scorer(s, tmp / "m.json");
    CHECK(load_scorer(tmp / "m.json") == s);
  }
  auto j = scorer_to_json(Scorer::linear(2, 2));
  j["architecture"] = "cnn";
  CHECK_THROWS(scorer_from_json(j));
}
