#include "setcover/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "setcover/error.hpp"

namespace setcover {

std::string to_string(Architecture arch) {
  return arch == Architecture::linear ? "linear" : "mlp";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "linear") return Architecture::linear;
  if (name == "mlp") return Architecture::mlp;
  throw ConfigError("unknown architecture '" + name + "' (expected linear or mlp)");
}

std::size_t default_hidden(std::size_t dim) { return std::max<std::size_t>(5, dim / 2); }

Scorer::Scorer(Architecture arch, std::size_t dim, int num_labels, std::size_t hidden)
    : arch_(arch), dim_(dim), num_labels_(num_labels), hidden_(hidden) {
  if (dim == 0) throw ConfigError("scorer input dimension must be positive");
  if (num_labels < 2) throw ConfigError("scorer needs at least 2 labels");
  const auto L = static_cast<std::size_t>(num_labels);
  if (arch == Architecture::linear) {
    hidden_ = 0;
    params_.assign(L * dim + L, 0.0);
  } else {
    if (hidden == 0) throw ConfigError("MLP hidden width must be at least 1");
    params_.assign(hidden * dim + hidden + L * hidden + L, 0.0);
  }
}

Scorer Scorer::linear(std::size_t dim, int num_labels) {
  return Scorer(Architecture::linear, dim, num_labels, 0);
}

Scorer Scorer::mlp_zero(std::size_t dim, int num_labels, std::size_t hidden) {
  return Scorer(Architecture::mlp, dim, num_labels, hidden);
}

Scorer Scorer::mlp(std::size_t dim, int num_labels, std::size_t hidden, Rng& rng) {
  Scorer s(Architecture::mlp, dim, num_labels, hidden);
  const double b1 = 1.0 / std::sqrt(static_cast<double>(dim));
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> first(-b1, b1);
  std::uniform_real_distribution<double> second(-b2, b2);
  const std::size_t first_size = hidden * dim + hidden;
  for (std::size_t i = 0; i < s.params_.size(); ++i) {
    s.params_[i] = i < first_size ? first(rng) : second(rng);
  }
  return s;
}

std::span<double> Scorer::output_weights() {
  const auto L = static_cast<std::size_t>(num_labels_);
  if (arch_ == Architecture::linear) return {params_.data(), L * dim_};
  return {params_.data() + hidden_ * dim_ + hidden_, L * hidden_};
}

std::span<double> Scorer::output_biases() {
  const auto L = static_cast<std::size_t>(num_labels_);
  return {params_.data() + params_.size() - L, L};
}

std::span<const double> Scorer::output_biases() const {
  const auto L = static_cast<std::size_t>(num_labels_);
  return {params_.data() + params_.size() - L, L};
}

std::span<double> Scorer::hidden_weights() {
  if (arch_ != Architecture::mlp) throw ConfigError("linear scorer has no hidden layer");
  return {params_.data(), hidden_ * dim_};
}

std::span<double> Scorer::hidden_biases() {
  if (arch_ != Architecture::mlp) throw ConfigError("linear scorer has no hidden layer");
  return {params_.data() + hidden_ * dim_, hidden_};
}

void Scorer::check_input(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw DataError("input has " + std::to_string(x.size()) + " features, scorer expects " +
                    std::to_string(dim_));
  }
}

void Scorer::forward(std::span<const double> x, std::span<double> out,
                     ScorerWorkspace& ws) const {
  check_input(x);
  const auto L = static_cast<std::size_t>(num_labels_);
  const double* p = params_.data();
  if (arch_ == Architecture::linear) {
    const double* b = p + L * dim_;
    for (std::size_t y = 0; y < L; ++y) {
      const double* w = p + y * dim_;
      double s = b[y];
      for (std::size_t k = 0; k < dim_; ++k) s += w[k] * x[k];
      out[y] = s;
    }
    return;
  }
  const std::size_t H = hidden_;
  ws.pre.resize(H);
  ws.act.resize(H);
  const double* w1 = p;
  const double* b1 = p + H * dim_;
  const double* w2 = b1 + H;
  const double* b2 = w2 + L * H;
  for (std::size_t h = 0; h < H; ++h) {
    double s = b1[h];
    const double* w = w1 + h * dim_;
    for (std::size_t k = 0; k < dim_; ++k) s += w[k] * x[k];
    ws.pre[h] = s;
    ws.act[h] = s > 0.0 ? s : 0.0;
  }
  for (std::size_t y = 0; y < L; ++y) {
    double s = b2[y];
    const double* w = w2 + y * H;
    for (std::size_t h = 0; h < H; ++h) s += w[h] * ws.act[h];
    out[y] = s;
  }
}

void Scorer::backward(std::span<const double> x, std::span<const double> upstream,
                      std::span<double> grad, ScorerWorkspace& ws) const {
  check_input(x);
  const auto L = static_cast<std::size_t>(num_labels_);
  double* g = grad.data();
  if (arch_ == Architecture::linear) {
    double* gb = g + L * dim_;
    for (std::size_t y = 0; y < L; ++y) {
      const double u = upstream[y];
      if (u == 0.0) continue;
      double* gw = g + y * dim_;
      for (std::size_t k = 0; k < dim_; ++k) gw[k] += u * x[k];
      gb[y] += u;
    }
    return;
  }
  const std::size_t H = hidden_;
  const double* w2 = params_.data() + H * dim_ + H;
  double* gw1 = g;
  double* gb1 = g + H * dim_;
  double* gw2 = gb1 + H;
  double* gb2 = gw2 + L * H;
  ws.delta.assign(H, 0.0);
  for (std::size_t y = 0; y < L; ++y) {
    const double u = upstream[y];
    if (u == 0.0) continue;
    gb2[y] += u;
    const double* w = w2 + y * H;
    double* gw = gw2 + y * H;
    for (std::size_t h = 0; h < H; ++h) {
      gw[h] += u * ws.act[h];
      ws.delta[h] += u * w[h];
    }
  }
  for (std::size_t h = 0; h < H; ++h) {
    if (!(ws.pre[h] > 0.0)) continue;
    const double d = ws.delta[h];
    if (d == 0.0) continue;
    gb1[h] += d;
    double* gw = gw1 + h * dim_;
    for (std::size_t k = 0; k < dim_; ++k) gw[k] += d * x[k];
  }
}

bool Scorer::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> score(const Scorer& scorer, std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(scorer.num_labels()));
  ScorerWorkspace ws;
  scorer.forward(x, out, ws);
  return out;
}

LabelSet set_from_scores(std::span<const double> scores) {
  LabelSet s(static_cast<int>(scores.size()));
  for (std::size_t y = 0; y < scores.size(); ++y) {
    if (scores[y] >= 0.0) s.insert(static_cast<int>(y));
  }
  return s;
}

LabelSet predict_set(const Scorer& scorer, std::span<const double> x) {
  return set_from_scores(score(scorer, x));
}

std::vector<double> grad_params(const Scorer& scorer, std::span<const double> x, int label,
                                double upstream) {
  if (label < 0 || label >= scorer.num_labels()) {
    throw DataError("label " + std::to_string(label) + " out of range");
  }
  std::vector<double> grad(scorer.num_params(), 0.0);
  std::vector<double> out(static_cast<std::size_t>(scorer.num_labels()));
  std::vector<double> up(out.size(), 0.0);
  up[static_cast<std::size_t>(label)] = upstream;
  ScorerWorkspace ws;
  scorer.forward(x, out, ws);
  scorer.backward(x, up, grad, ws);
  return grad;
}

LossAndGrad softmax_loss_and_grad(const Scorer& scorer, const MultiDomainDataset& data,
                                  std::span<const InstanceRef> batch) {
  if (batch.empty()) throw DataError("softmax loss needs a non-empty batch");
  const auto L = static_cast<std::size_t>(scorer.num_labels());
  LossAndGrad result;
  result.grad.assign(scorer.num_params(), 0.0);
  std::vector<double> logits(L);
  std::vector<double> upstream(L);
  ScorerWorkspace ws;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& ref : batch) {
    const auto inst = data.instance(ref);
    scorer.forward(inst.features, logits, ws);
    const double top = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t y = 0; y < L; ++y) {
      upstream[y] = std::exp(logits[y] - top);
      z += upstream[y];
    }
    const auto truth = static_cast<std::size_t>(inst.label);
    result.loss += (std::log(z) - (logits[truth] - top)) * inv_b;
    for (std::size_t y = 0; y < L; ++y) {
      upstream[y] = (upstream[y] / z - (y == truth ? 1.0 : 0.0)) * inv_b;
    }
    scorer.backward(inst.features, upstream, result.grad, ws);
  }
  return result;
}

int argmax_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

int erm_predict_singleton(const SoftmaxClassifier& classifier, std::span<const double> x) {
  return argmax_first(classifier.logits(x));
}

nlohmann::json scorer_to_json(const Scorer& scorer) {
  nlohmann::json j;
  j["format"] = "setcover-scorer";
  j["version"] = 1;
  j["architecture"] = to_string(scorer.architecture());
  j["dim"] = scorer.dim();
  j["num_labels"] = scorer.num_labels();
  const auto p = scorer.params();
  const auto L = static_cast<std::size_t>(scorer.num_labels());
  const std::size_t d = scorer.dim();
  auto slice = [&](std::size_t from, std::size_t count) {
    return std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(from),
                               p.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  if (scorer.architecture() == Architecture::linear) {
    j["weights"] = slice(0, L * d);
    j["biases"] = slice(L * d, L);
  } else {
    const std::size_t H = scorer.hidden();
    j["hidden"] = H;
    j["layer1_weights"] = slice(0, H * d);
    j["layer1_biases"] = slice(H * d, H);
    j["layer2_weights"] = slice(H * d + H, L * H);
    j["layer2_biases"] = slice(H * d + H + L * H, L);
  }
  return j;
}

Scorer scorer_from_json(const nlohmann::json& j) {
  try {
    const auto arch = parse_architecture(j.at("architecture").get<std::string>());
    const auto d = j.at("dim").get<std::size_t>();
    const auto L = j.at("num_labels").get<int>();
    Scorer s;
    std::vector<std::pair<const char*, std::size_t>> parts;
    if (arch == Architecture::linear) {
      s = Scorer::linear(d, L);
      parts = {{"weights", static_cast<std::size_t>(L) * d}, {"biases", static_cast<std::size_t>(L)}};
    } else {
      const auto H = j.at("hidden").get<std::size_t>();
      s = Scorer::mlp_zero(d, L, H);
      parts = {{"layer1_weights", H * d},
               {"layer1_biases", H},
               {"layer2_weights", static_cast<std::size_t>(L) * H},
               {"layer2_biases", static_cast<std::size_t>(L)}};
    }
    auto out = s.params().begin();
    for (const auto& [key, count] : parts) {
      const auto values = j.at(key).get<std::vector<double>>();
      if (values.size() != count) {
        throw DataError(std::string("checkpoint array '") + key + "' has wrong length");
      }
      out = std::copy(values.begin(), values.end(), out);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed scorer checkpoint: ") + e.what());
  }
}

void save_scorer(const Scorer& scorer, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << scorer_to_json(scorer).dump(1) << '\n';
}

Scorer load_scorer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  try {
    return scorer_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace setcover
