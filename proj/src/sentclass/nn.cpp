#include "sentiaug/sentclass/nn.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/numerics/autograd.hpp"
#include "sentiaug/numerics/checkpoint.hpp"
#include "sentiaug/numerics/ops.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::clf {

namespace {

constexpr const char* kFormat = "sentiaug-clf";
constexpr int kFormatVersion = 1;
constexpr std::size_t kPredictChunk = 256;

Tensor uniform_param(num::Shape shape, num::Rng& rng, double scale) {
  std::vector<double> v(num::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(v), true);
}

std::size_t gate_count(NNArch a) {
  switch (a) {
    case NNArch::rnn: return 1;
    case NNArch::gru: return 3;
    case NNArch::bilstm: return 4;
    case NNArch::cnn: return 0;
  }
  return 0;
}

std::vector<std::vector<int>> token_lists(const std::vector<const corpus::Record*>& records) {
  std::vector<std::vector<int>> out;
  out.reserve(records.size());
  for (const auto* r : records) out.push_back(r->tokens);
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

}  // namespace

std::string to_string(NNArch a) {
  switch (a) {
    case NNArch::rnn: return "rnn";
    case NNArch::gru: return "gru";
    case NNArch::bilstm: return "bilstm";
    case NNArch::cnn: return "cnn";
  }
  return "?";
}

NNArch parse_nn_arch(const std::string& s) {
  for (NNArch a : {NNArch::rnn, NNArch::gru, NNArch::bilstm, NNArch::cnn})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown neural architecture: " + s);
}

void NNHyper::validate() const {
  if (d_emb == 0 || d_h == 0 || filters == 0 || max_len == 0) throw std::invalid_argument("NNHyper: sizes must be positive");
  if (widths.empty() || *std::min_element(widths.begin(), widths.end()) == 0) throw std::invalid_argument("NNHyper: need positive filter widths");
  if (max_epochs == 0 || batch_size == 0 || patience == 0) throw std::invalid_argument("NNHyper: epochs, batch size and patience must be positive");
  if (!(lr > 0.0) || !(init_scale > 0.0)) throw std::invalid_argument("NNHyper: lr and init_scale must be positive");
}

void to_json(nlohmann::json& j, const NNHyper& h) {
  j = nlohmann::json{{"d_emb", h.d_emb},         {"d_h", h.d_h},
                     {"filters", h.filters},     {"widths", h.widths},
                     {"max_len", h.max_len},     {"max_epochs", h.max_epochs},
                     {"batch_size", h.batch_size}, {"patience", h.patience},
                     {"lr", h.lr},               {"init_scale", h.init_scale},
                     {"max_grad_norm", h.max_grad_norm}, {"seed", h.seed}};
}

void from_json(const nlohmann::json& j, NNHyper& h) {
  NNHyper d;
  h.d_emb = j.value("d_emb", d.d_emb);
  h.d_h = j.value("d_h", d.d_h);
  h.filters = j.value("filters", d.filters);
  h.widths = j.value("widths", d.widths);
  h.max_len = j.value("max_len", d.max_len);
  h.max_epochs = j.value("max_epochs", d.max_epochs);
  h.batch_size = j.value("batch_size", d.batch_size);
  h.patience = j.value("patience", d.patience);
  h.lr = j.value("lr", d.lr);
  h.init_scale = j.value("init_scale", d.init_scale);
  h.max_grad_norm = j.value("max_grad_norm", d.max_grad_norm);
  h.seed = j.value("seed", d.seed);
  h.validate();
}

NNModel::NNModel(NNArch arch, std::size_t vocab_size, std::size_t num_categories, NNHyper hyper, std::uint64_t init_seed)
    : arch_(arch), vocab_size_(vocab_size), k_(num_categories), hyper_(std::move(hyper)) {
  hyper_.validate();
  if (vocab_size_ <= corpus::kReserved) throw std::invalid_argument("NNModel: vocabulary too small");
  if (k_ < 2) throw std::invalid_argument("NNModel: need at least two categories");
  const std::size_t widest = *std::max_element(hyper_.widths.begin(), hyper_.widths.end());
  if (arch_ == NNArch::cnn && hyper_.max_len < widest) throw std::invalid_argument("NNModel: max_len shorter than the widest filter");

  num::Rng rng(init_seed);
  const double s = hyper_.init_scale;
  const std::size_t E = hyper_.d_emb, H = hyper_.d_h;
  emb_ = uniform_param({vocab_size_, E}, rng, s);
  std::size_t features = 0;
  if (arch_ == NNArch::cnn) {
    for (std::size_t w : hyper_.widths) {
      conv_w_.push_back(uniform_param({w * E, hyper_.filters}, rng, s));
      conv_b_.push_back(uniform_param({hyper_.filters}, rng, s));
    }
    features = hyper_.filters * hyper_.widths.size();
  } else {
    const std::size_t G = gate_count(arch_) * H;
    fwd_ = {uniform_param({E, G}, rng, s), uniform_param({H, G}, rng, s), uniform_param({G}, rng, s)};
    if (arch_ == NNArch::gru) gru_bh_ = uniform_param({G}, rng, s);
    if (arch_ == NNArch::bilstm) bwd_ = {uniform_param({E, G}, rng, s), uniform_param({H, G}, rng, s), uniform_param({G}, rng, s)};
    features = arch_ == NNArch::bilstm ? 2 * H : H;
  }
  out_w_ = uniform_param({features, k_}, rng, s);
  out_b_ = uniform_param({k_}, rng, s);
}

ParameterList NNModel::parameters(const std::string& prefix) const {
  ParameterList out = {{prefix + "emb", emb_}};
  if (arch_ == NNArch::cnn) {
    for (std::size_t i = 0; i < conv_w_.size(); ++i) {
      const std::string w = std::to_string(hyper_.widths[i]);
      out.push_back({prefix + "conv" + w + "/w", conv_w_[i]});
      out.push_back({prefix + "conv" + w + "/b", conv_b_[i]});
    }
  } else {
    out.push_back({prefix + "fwd/wx", fwd_.wx});
    out.push_back({prefix + "fwd/wh", fwd_.wh});
    out.push_back({prefix + "fwd/b", fwd_.b});
    if (arch_ == NNArch::gru) out.push_back({prefix + "fwd/bh", gru_bh_});
    if (arch_ == NNArch::bilstm) {
      out.push_back({prefix + "bwd/wx", bwd_.wx});
      out.push_back({prefix + "bwd/wh", bwd_.wh});
      out.push_back({prefix + "bwd/b", bwd_.b});
    }
  }
  out.push_back({prefix + "out/w", out_w_});
  out.push_back({prefix + "out/b", out_b_});
  return out;
}

NNModel NNModel::clone() const {
  NNModel m = *this;
  auto dup = [](Tensor& t) {
    if (t.defined()) t = t.clone();
  };
  dup(m.emb_);
  for (Cell* c : {&m.fwd_, &m.bwd_}) {
    dup(c->wx);
    dup(c->wh);
    dup(c->b);
  }
  dup(m.gru_bh_);
  for (auto& t : m.conv_w_) dup(t);
  for (auto& t : m.conv_b_) dup(t);
  dup(m.out_w_);
  dup(m.out_b_);
  return m;
}

Tensor NNModel::final_state(const Cell& cell, std::size_t gates, const std::vector<std::vector<int>>& seqs) const {
  const std::size_t B = seqs.size(), H = hyper_.d_h;
  std::size_t T = 1;
  for (const auto& s : seqs) T = std::max(T, s.size());
  Tensor h = Tensor::zeros({B, H});
  Tensor c = Tensor::zeros({B, H});
  std::vector<int> ids(B);
  std::vector<double> mask(B);
  for (std::size_t t = 0; t < T; ++t) {
    bool all_active = true;
    for (std::size_t b = 0; b < B; ++b) {
      const bool active = t < seqs[b].size() || (t == 0 && seqs[b].empty());
      ids[b] = t < seqs[b].size() ? seqs[b][t] : corpus::kPad;
      mask[b] = active ? 1.0 : 0.0;
      all_active = all_active && active;
    }
    const Tensor xg = num::add(num::matmul(num::embedding_lookup(emb_, ids), cell.wx), cell.b);
    Tensor hg = num::matmul(h, cell.wh);
    Tensor h_next, c_next;
    if (gates == 1) {
      h_next = num::tanh(num::add(xg, hg));
    } else if (gates == 3) {
      hg = num::add(hg, gru_bh_);
      const Tensor r = num::sigmoid(num::add(num::slice_last(xg, 0, H), num::slice_last(hg, 0, H)));
      const Tensor z = num::sigmoid(num::add(num::slice_last(xg, H, H), num::slice_last(hg, H, H)));
      const Tensor n = num::tanh(num::add(num::slice_last(xg, 2 * H, H), num::mul(r, num::slice_last(hg, 2 * H, H))));
      h_next = num::add(n, num::mul(z, num::sub(h, n)));
    } else {
      const Tensor g = num::add(xg, hg);
      const Tensor i = num::sigmoid(num::slice_last(g, 0, H));
      const Tensor f = num::sigmoid(num::slice_last(g, H, H));
      const Tensor u = num::tanh(num::slice_last(g, 2 * H, H));
      const Tensor o = num::sigmoid(num::slice_last(g, 3 * H, H));
      c_next = num::add(num::mul(f, c), num::mul(i, u));
      h_next = num::mul(o, num::tanh(c_next));
    }
    if (all_active) {
      h = h_next;
      if (c_next.defined()) c = c_next;
    } else {
      const Tensor m = Tensor::from({B, 1}, mask);
      h = num::add(h, num::mul(m, num::sub(h_next, h)));
      if (c_next.defined()) c = num::add(c, num::mul(m, num::sub(c_next, c)));
    }
  }
  return h;
}

Tensor NNModel::conv_features(const std::vector<std::vector<int>>& seqs) const {
  const std::size_t B = seqs.size(), T = hyper_.max_len, E = hyper_.d_emb;
  std::vector<int> ids(B * T, corpus::kPad);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < std::min(T, seqs[b].size()); ++t) ids[b * T + t] = seqs[b][t];
  const Tensor x = num::reshape(num::embedding_lookup(emb_, ids), {B, T, E});
  std::vector<Tensor> pooled;
  for (std::size_t i = 0; i < conv_w_.size(); ++i) {
    pooled.push_back(num::max_pool_over_time(num::relu(num::conv1d(x, conv_w_[i], conv_b_[i]))));
  }
  return pooled.size() == 1 ? pooled.front() : num::concat(pooled);
}

Tensor NNModel::logits(const std::vector<std::vector<int>>& seqs) const {
  if (seqs.empty()) throw std::invalid_argument("NNModel::logits: empty batch");
  Tensor features;
  if (arch_ == NNArch::cnn) {
    features = conv_features(seqs);
  } else {
    std::vector<std::vector<int>> clipped;
    clipped.reserve(seqs.size());
    for (const auto& s : seqs) clipped.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min(s.size(), hyper_.max_len)));
    features = final_state(fwd_, gate_count(arch_), clipped);
    if (arch_ == NNArch::bilstm) {
      for (auto& s : clipped) std::reverse(s.begin(), s.end());
      features = num::concat({features, final_state(bwd_, 4, clipped)});
    }
  }
  return num::add(num::matmul(features, out_w_), out_b_);
}

std::vector<int> NNModel::predict(const std::vector<std::vector<int>>& seqs) const {
  num::NoGradGuard no_grad;
  std::vector<int> out;
  out.reserve(seqs.size());
  for (std::size_t start = 0; start < seqs.size(); start += kPredictChunk) {
    const std::size_t end = std::min(seqs.size(), start + kPredictChunk);
    const std::vector<std::vector<int>> chunk(seqs.begin() + static_cast<std::ptrdiff_t>(start),
                                              seqs.begin() + static_cast<std::ptrdiff_t>(end));
    const Tensor l = logits(chunk);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      auto row = l.data().subspan(b * k_, k_);
      out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  }
  return out;
}

std::vector<int> NNModel::predict(const std::vector<const corpus::Record*>& records) const {
  return predict(token_lists(records));
}

void NNModel::save(const std::filesystem::path& path) const {
  num::save_checkpoint(path, parameters());
  nlohmann::json meta = {{"format", kFormat},
                         {"version", kFormatVersion},
                         {"arch", to_string(arch_)},
                         {"vocab_size", vocab_size_},
                         {"num_categories", k_},
                         {"hyper", hyper_}};
  std::ofstream out(sidecar(path));
  if (!out) throw num::CheckpointError("cannot write " + sidecar(path).string());
  out << meta.dump(2) << '\n';
}

NNModel NNModel::load(const std::filesystem::path& path) {
  std::ifstream in(sidecar(path));
  if (!in) throw num::CheckpointError("missing model description " + sidecar(path).string());
  try {
    const auto meta = nlohmann::json::parse(in);
    if (meta.at("format").get<std::string>() != kFormat || meta.at("version").get<int>() != kFormatVersion) {
      throw num::CheckpointError("unsupported classifier format in " + sidecar(path).string());
    }
    NNModel m(parse_nn_arch(meta.at("arch").get<std::string>()), meta.at("vocab_size").get<std::size_t>(),
              meta.at("num_categories").get<std::size_t>(), meta.at("hyper").get<NNHyper>(), 0);
    num::restore_parameters(num::load_checkpoint(path), m.parameters());
    return m;
  } catch (const num::CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw num::CheckpointError("corrupt classifier description " + sidecar(path).string() + ": " + e.what());
  }
}

void to_json(nlohmann::json& j, const LearningCurve& c) {
  j = nlohmann::json{{"train_loss", c.train_loss},
                     {"val_accuracy", c.val_accuracy},
                     {"val_macro_f1", c.val_macro_f1},
                     {"best_epoch", c.best_epoch},
                     {"stopped_early", c.stopped_early}};
}

NNTrainResult train_nn(NNArch arch, const std::vector<const corpus::Record*>& train,
                       const std::vector<const corpus::Record*>& val, std::size_t vocab_size,
                       std::size_t num_categories, const NNHyper& hyper) {
  if (train.empty()) throw std::invalid_argument("train_nn: empty training slice");
  require_real_slice(val, "train_nn validation");
  NNModel model(arch, vocab_size, num_categories, hyper, num::derive_seed(hyper.seed, 0xc1f));
  num::Adam opt(model.parameters(), {.lr = hyper.lr, .max_grad_norm = hyper.max_grad_norm});

  std::vector<int> val_truth;
  for (const auto* r : val) val_truth.push_back(r->label);
  const auto val_tokens = token_lists(val);

  LearningCurve curve;
  NNModel best = model.clone();
  double best_f1 = -1.0;
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < hyper.max_epochs; ++epoch) {
    num::Rng rng(num::derive_seed(hyper.seed, 0xc20, epoch));
    std::shuffle(order.begin(), order.end(), rng.engine());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      std::vector<std::vector<int>> seqs;
      std::vector<int> labels;
      for (std::size_t i = start; i < end; ++i) {
        seqs.push_back(train[order[i]]->tokens);
        labels.push_back(train[order[i]]->label);
      }
      const Tensor loss = num::cross_entropy(model.logits(seqs), labels);
      loss_sum += loss.item() * static_cast<double>(end - start);
      num::backward(loss);
      opt.step();
    }
    curve.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    const ClsMetrics m = compute_metrics(val_truth, model.predict(val_tokens), num_categories);
    curve.val_accuracy.push_back(m.accuracy);
    curve.val_macro_f1.push_back(m.macro_f1);
    if (m.macro_f1 > best_f1) {
      best_f1 = m.macro_f1;
      best = model.clone();
      curve.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      curve.stopped_early = epoch + 1 < hyper.max_epochs;
      break;
    }
  }
  return {std::move(best), std::move(curve)};
}

ClsMetrics evaluate(const NNModel& model, const std::vector<const corpus::Record*>& test) {
  require_real_slice(test, "evaluate");
  std::vector<int> truth;
  for (const auto* r : test) truth.push_back(r->label);
  return compute_metrics(truth, model.predict(test), model.num_categories());
}

}  // namespace sentiaug::clf
