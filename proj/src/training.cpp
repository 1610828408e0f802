#include "pcc/training.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "pcc/error.h"

namespace pcc {

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw UsageError("learning rate must be positive");
}

std::size_t select_best_epoch(std::span<const EpochRecord> history) {
  if (history.empty()) throw UsageError("empty training history");
  std::size_t best = 0;
  for (std::size_t e = 1; e < history.size(); ++e)
    if (history[e].mean_loss < history[best].mean_loss) best = e;
  return best;
}

TrainResult train(ModelBundle model, const Dataset& train_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  if (train_set.count(ClassLabel::Statement) == 0 || train_set.count(ClassLabel::WhQuestion) == 0)
    throw DataError("training set must contain both classes");

  OptimizerState opt = cfg.optimizer == OptimizerKind::Adam ? OptimizerState::adam(cfg.learning_rate)
                                                            : OptimizerState::sgd(cfg.learning_rate);
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(derive_seed(cfg.seed, "train-shuffle"));

  Gradients grads = zero_gradients(std::as_const(model).parameters());
  TrainResult result;
  double best_loss = 0.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      for (auto& g : grads) g.fill(0.0);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const PaddedSample& s = train_set.samples[order[b]];
        const auto step = accumulate_gradients(model, s, grads);
        batch_loss += step.loss;
        if (step.predicted == s.label) ++correct;
      }
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index + 1));
      const double scale = 1.0 / static_cast<double>(end - start);
      for (auto& g : grads)
        for (auto& v : g.data()) v *= scale;
      optimizer_step(model.parameters(), grads, opt);
      loss_sum += batch_loss;
    }
    const EpochRecord record{epoch, loss_sum / static_cast<double>(n),
                             static_cast<double>(correct) / static_cast<double>(n)};
    result.history.push_back(record);
    if (epoch == 1 || record.mean_loss < best_loss) {
      best_loss = record.mean_loss;
      result.best = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(record);
  }
  result.best.provenance.seed = cfg.seed;
  result.best.provenance.epochs = static_cast<std::uint32_t>(cfg.epochs);
  result.best.provenance.data_digest = dataset_digest(train_set);
  return result;
}

std::size_t Confusion::total() const {
  std::size_t t = 0;
  for (const auto& row : counts)
    for (const auto c : row) t += c;
  return t;
}

std::size_t Confusion::correct() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < kNumClasses; ++i) t += counts[i][i];
  return t;
}

double Confusion::accuracy() const {
  const auto t = total();
  return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

double Confusion::recall(ClassLabel label) const {
  const auto& row = counts[class_index(label)];
  std::size_t t = 0;
  for (const auto c : row) t += c;
  return t == 0 ? 0.0 : static_cast<double>(row[class_index(label)]) / static_cast<double>(t);
}

Evaluation evaluate(const ModelBundle& model, const Dataset& test_set) {
  if (test_set.empty()) throw DataError("test set is empty");
  Evaluation ev;
  for (const auto& s : test_set.samples)
    ++ev.confusion.counts[class_index(s.label)][class_index(classify(model, s))];
  ev.accuracy = ev.confusion.accuracy();
  return ev;
}

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of an empty list");
  const double pos = static_cast<double>(sorted.size() - 1) * p;  // 0-based
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size() || frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FiveNumberSummary summarize(std::span<const double> values) {
  if (values.empty()) throw UsageError("cannot summarize an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted.front(), quantile(sorted, 0.25), quantile(sorted, 0.5), quantile(sorted, 0.75),
          sorted.back()};
}

ModelBundle build_model(const ArchSpec& spec, Rng& rng) {
  if (const auto* c = std::get_if<ConvNetConfig>(&spec.config)) return build_convnet(*c, rng);
  return build_lstm(std::get<LstmConfig>(spec.config), rng);
}

std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t fold_index) {
  return derive_seed(seed, "fold-init", fold_index);
}

std::uint64_t single_model_seed(std::uint64_t seed) { return derive_seed(seed, "init"); }

CvResult cross_validate(const ArchSpec& spec, const Dataset& data, std::size_t k,
                        const TrainConfig& cfg, std::size_t jobs,
                        const std::function<void(const FoldReport&)>& on_fold) {
  cfg.validate();
  const FoldSplit split = split_kfold(data.size(), k, cfg.seed);
  std::vector<FoldReport> reports(k);
  std::vector<std::exception_ptr> errors(k);
  std::mutex callback_mutex;

  auto run_fold = [&](std::size_t f) {
    std::vector<char> in_test(data.size(), 0);
    for (const auto i : split.folds[f]) in_test[i] = 1;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(data.size() - split.folds[f].size());
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!in_test[i]) train_idx.push_back(i);
    const Dataset train_set = subset(data, train_idx);
    const Dataset test_set = subset(data, split.folds[f]);

    FoldReport report;
    report.fold = f + 1;
    report.train_size = train_set.size();
    report.test_size = test_set.size();
    report.model_seed = fold_model_seed(cfg.seed, f);
    Rng init_rng(report.model_seed);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, "fold-train", f);
    auto trained = train(build_model(spec, init_rng), train_set, fold_cfg);
    const auto ev = evaluate(trained.best, test_set);
    report.accuracy = ev.accuracy;
    report.confusion = ev.confusion;
    report.selected_epoch = trained.best_epoch;
    report.history = std::move(trained.history);
    reports[f] = std::move(report);
    if (on_fold) {
      std::lock_guard lock(callback_mutex);
      on_fold(reports[f]);
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, k);
  if (jobs == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t f = next++; f < k; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  CvResult result;
  result.folds = std::move(reports);
  std::vector<double> acc;
  for (const auto& r : result.folds) acc.push_back(r.accuracy);
  result.summary = summarize(acc);
  return result;
}

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  return std::nullopt;
}

std::string cv_report_json(const CvResult& result, const CvReportContext& context) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["arch"] = arch_name(context.spec.arch());
  if (const auto* c = std::get_if<ConvNetConfig>(&context.spec.config)) {
    j["model_config"] = {{"n_filters", c->n_filters},     {"kernel_len", c->kernel_len},
                         {"conv_stride", c->conv_stride}, {"pool_window", c->pool_window},
                         {"pool_stride", c->pool_stride}};
  } else {
    const auto& l = std::get<LstmConfig>(context.spec.config);
    j["model_config"] = {{"hidden_size", l.hidden_size},
                         {"input_downsample", l.input_downsample},
                         {"alignment", l.alignment == SequenceAlignment::Offset ? "offset" : "onset"}};
  }
  j["train_config"] = {{"epochs", context.train.epochs},
                       {"batch_size", context.train.batch_size},
                       {"optimizer", optimizer_name(context.train.optimizer)},
                       {"learning_rate", context.train.learning_rate},
                       {"shuffle", context.train.shuffle},
                       {"seed", context.train.seed},
                       {"selection", "min_training_loss"}};
  j["data"] = {{"source", context.data_source},
               {"digest", context.data_digest},
               {"n_samples", context.n_samples},
               {"normalization", normalization_name(context.normalization)},
               {"padded_length", kPaddedLength},
               {"frame_step_s", kFrameStep}};
  j["folds_k"] = context.k;
  ordered_json folds = ordered_json::array();
  for (const auto& f : result.folds) {
    ordered_json history = ordered_json::array();
    for (const auto& h : f.history)
      history.push_back({{"epoch", h.epoch}, {"loss", h.mean_loss}, {"accuracy", h.accuracy}});
    const auto& c = f.confusion.counts;
    folds.push_back({{"fold", f.fold},
                     {"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"model_seed", f.model_seed},
                     {"accuracy", f.accuracy},
                     {"selected_epoch", f.selected_epoch},
                     {"confusion", {{"rows", "true label"},
                                    {"columns", "predicted label"},
                                    {"counts", {{c[0][0], c[0][1]}, {c[1][0], c[1][1]}}}}},
                     {"history", history}});
  }
  j["folds"] = folds;
  j["summary"] = {{"min", result.summary.min},
                  {"q1", result.summary.q1},
                  {"median", result.summary.median},
                  {"q3", result.summary.q3},
                  {"max", result.summary.max},
                  {"quantile_rule", "linear interpolation at 1 + (n-1)p"}};
  return j.dump(2) + "\n";
}

}  // namespace pcc
