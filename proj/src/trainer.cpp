// SPDX-License-Identifier: Apache-2.0
#include "trainer.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "report.hpp"
#include "rng.hpp"

namespace canweave {

Adam::Adam(const Model &model) {
  for (const auto &p : model.parameters()) {
    state_.first.emplace_back(p.tensor.size(), 0.0);
    state_.second.emplace_back(p.tensor.size(), 0.0);
  }
}

void Adam::step(const std::vector<NamedParameter> &params, double learning_rate) {
  if (params.size() != state_.first.size()) throw InvalidArgument("optimizer does not match parameters");
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double correction1 = 1.0 - std::pow(state_.beta1, t);
  const double correction2 = 1.0 - std::pow(state_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor tensor = params[i].tensor;
    const std::vector<double> grad = tensor.grad();
    auto values = tensor.mutable_values();
    auto &m = state_.first[i];
    auto &v = state_.second[i];
    for (std::size_t j = 0; j < grad.size(); ++j) {
      m[j] = state_.beta1 * m[j] + (1.0 - state_.beta1) * grad[j];
      v[j] = state_.beta2 * v[j] + (1.0 - state_.beta2) * grad[j] * grad[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + state_.epsilon);
    }
  }
}

double clip_gradients(const std::vector<NamedParameter> &params, double max_norm) {
  double sq = 0.0;
  for (const auto &p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  const double total = std::sqrt(sq);
  if (max_norm > 0.0 && total > max_norm) {
    const double factor = max_norm / total;
    for (const auto &p : params) {
      if (!p.tensor.has_grad()) continue;
      Tensor t = p.tensor;
      for (double &g : t.mutable_grad()) g *= factor;
    }
  }
  return total;
}

namespace {

struct BatchForward {
  std::vector<Tensor> probabilities;
  std::vector<Tensor> features;
  std::vector<AttentionMass> masses;
  std::vector<int> labels;
};

BatchForward forward_batch(const Model &model, std::span<const Sample> batch, bool need_labels) {
  BatchForward out;
  for (const Sample &s : batch) {
    SampleForward f = forward(model, s);
    out.probabilities.push_back(f.classification.probabilities);
    out.features.push_back(f.classification.features);
    const auto &w = f.attention.weights;
    out.masses.push_back({sum_rows(w[kPositive]), sum_rows(w[kNegative])});
    if (need_labels) {
      if (!s.label) throw InvalidArgument("train_step: source sample without label");
      out.labels.push_back(*s.label);
    }
  }
  return out;
}

}  // namespace

BatchLoss batch_loss(const Model &model, std::span<const Sample> source_batch, std::span<const Sample> target_batch,
                     const TrainConfig &config) {
  if (source_batch.empty() || target_batch.empty()) throw InvalidArgument("batch_loss: empty batch");
  const BatchForward source = forward_batch(model, source_batch, true);
  BatchForward target;
  if (config.alpha == 0.0 && config.beta == 0.0) {
    NoGradGuard no_grad;
    target = forward_batch(model, target_batch, false);
  } else {
    target = forward_batch(model, target_batch, false);
  }
  BatchLoss out;
  out.l_c = supervised_loss(source.probabilities, source.labels);
  out.l_d = distribution_loss(source.masses, target.masses, config.top_k);
  out.l_i = mmd_loss(source.features, target.features);
  out.total = combine(out.l_c, out.l_d, out.l_i, config.alpha, config.beta);
  return out;
}

LossBreakdown train_step(Model &model, Adam &optimizer, std::span<const Sample> source_batch,
                         std::span<const Sample> target_batch, const TrainConfig &config) {
  const auto params = model.parameters();
  for (const auto &p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
  current_tape().clear();

  const BatchLoss loss = batch_loss(model, source_batch, target_batch, config);
  const Tensor &total = loss.total;
  LossBreakdown breakdown{loss.l_c.item(), loss.l_d.item(), loss.l_i.item(), total.item()};
  if (!std::isfinite(breakdown.total)) {
    throw NumericError("non-finite loss: l_c=" + format_double(breakdown.l_c) + " l_d=" +
                       format_double(breakdown.l_d) + " l_i=" + format_double(breakdown.l_i));
  }

  backward(total);
  model.embeddings.zero_pad_grad();
  clip_gradients(params, config.clip_norm);
  optimizer.step(params, config.learning_rate);
  model.embeddings.zero_pad_row();
  return breakdown;
}

std::size_t select_best_epoch(std::span<const double> validation_accuracies) {
  if (validation_accuracies.empty()) throw InvalidArgument("no epochs to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < validation_accuracies.size(); ++i)
    if (validation_accuracies[i] > validation_accuracies[best]) best = i;
  return best + 1;
}

ValidationSplit split_validation(std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("need at least two source samples to hold out a validation split");
  auto held = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  held = std::clamp<std::size_t>(held, 1, n - 1);
  const auto order = seeded_permutation(n, derive_seed(seed, kTagValidation));
  ValidationSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

namespace {

// Endless reshuffled pass over [0, n) for the domain that does not drive the epoch.
class CyclicStream {
 public:
  CyclicStream(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) { refill(); }

  std::vector<std::size_t> take(std::size_t count) {
    std::vector<std::size_t> out;
    while (out.size() < count) {
      if (cursor_ == order_.size()) refill();
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  void refill() {
    order_ = seeded_permutation(n_, derive_seed(seed_, kTagTargetStream, pass_++));
    cursor_ = 0;
  }

  std::size_t n_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace

FitResult fit(Model &model, std::span<const Sample> source, std::span<const Sample> target,
              const TrainConfig &config) {
  config.validate();
  if (target.empty()) throw InvalidArgument("fit: target training set is empty");
  const ValidationSplit split = split_validation(source.size(), config.val_fraction, config.seed);
  const std::vector<Sample> train_source = select(source, std::span<const std::size_t>(split.train));
  const std::vector<Sample> validation = select(source, std::span<const std::size_t>(split.validation));

  const bool source_drives = train_source.size() >= target.size();
  const std::size_t driver_size = source_drives ? train_source.size() : target.size();
  CyclicStream follower(source_drives ? target.size() : train_source.size(), config.seed);

  Adam optimizer(model);
  FitResult result;
  std::vector<double> accuracies;
  std::vector<std::vector<double>> best_params;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double lc_sum = 0.0;
    std::size_t lc_count = 0;
    for (const auto &batch : make_batches(driver_size, config.batch_size, config.seed, epoch)) {
      const auto paired = follower.take(batch.size());
      const auto &src_idx = source_drives ? batch : paired;
      const auto &tgt_idx = source_drives ? paired : batch;
      const auto src = select(std::span<const Sample>(train_source), std::span<const std::size_t>(src_idx));
      const auto tgt = select(target, std::span<const std::size_t>(tgt_idx));
      const LossBreakdown loss = train_step(model, optimizer, src, tgt, config);
      result.steps.push_back({++step, epoch, loss});
      lc_sum += loss.l_c;
      ++lc_count;
    }
    const double accuracy = evaluate(model, validation);
    accuracies.push_back(accuracy);
    result.epochs.push_back({epoch, accuracy, lc_sum / static_cast<double>(lc_count)});
    if (select_best_epoch(accuracies) == epoch) best_params = snapshot(model);
  }
  result.best_epoch = select_best_epoch(accuracies);
  result.best_validation_accuracy = accuracies[result.best_epoch - 1];
  restore(model, best_params);
  return result;
}

PreparedRun prepare_run(std::span<const Document> source_docs, std::span<const Document> target_docs,
                        const TrainConfig &config, const std::optional<std::filesystem::path> &embeddings) {
  config.validate();
  if (source_docs.empty() || target_docs.empty()) throw InvalidArgument("need source and target documents");
  const std::vector<Document> src(source_docs.begin(), source_docs.end());
  const std::vector<Document> tgt(target_docs.begin(), target_docs.end());
  const std::vector<Document> *corpora[] = {&src, &tgt};
  Vocabulary vocab = Vocabulary::build(corpora);

  PreparedRun run;
  run.source = encode_all(src, vocab, config.max_len, Domain::kSource);
  run.target = encode_all(tgt, vocab, config.max_len, Domain::kTarget, false);
  for (const Sample &s : run.source)
    if (!s.label) throw InvalidArgument("source documents must be labeled");

  EmbeddingTable table = embeddings ? load_pretrained(*embeddings, vocab, config.dim, config.seed)
                                    : random_embeddings(vocab.size(), config.dim, config.seed);
  const CountTable counts = count_words(run.source, vocab.size());
  CategoryMemory source_memory = build_source_cmm(counts, vocab, config.memory_size);
  run.model = build_model(std::move(vocab), std::move(table), std::move(source_memory), config.model_shape(),
                          config.seed);
  return run;
}

}  // namespace canweave
