#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcc/contour_data.h"
#include "pcc/models.h"
#include "pcc/nn.h"

namespace pcc {

struct TrainConfig {
  std::size_t epochs = 18;
  std::size_t batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  bool shuffle = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  ModelBundle best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 1-based
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Index into `history` of the smallest mean loss; ties go to the earliest.
std::size_t select_best_epoch(std::span<const EpochRecord> history);

// Minibatch training; after every epoch the parameters are snapshotted and
// the snapshot with the smallest mean training loss is returned.
TrainResult train(ModelBundle model, const Dataset& train_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// counts[true][predicted]
struct Confusion {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;
  double recall(ClassLabel label) const;
};

struct Evaluation {
  double accuracy = 0.0;
  Confusion confusion;
};

Evaluation evaluate(const ModelBundle& model, const Dataset& test_set);

struct FiveNumberSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quantile at probability p by linear interpolation between order statistics
// (position 1 + (n-1) p, 1-based).
double quantile(std::span<const double> sorted, double p);
FiveNumberSummary summarize(std::span<const double> values);

struct ArchSpec {
  std::variant<ConvNetConfig, LstmConfig> config;

  ArchTag arch() const {
    return std::holds_alternative<ConvNetConfig>(config) ? ArchTag::ConvNet : ArchTag::Lstm;
  }
};

ModelBundle build_model(const ArchSpec& spec, Rng& rng);

struct FoldReport {
  std::size_t fold = 0;  // 1-based
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t model_seed = 0;
  double accuracy = 0.0;
  std::size_t selected_epoch = 0;
  Confusion confusion;
  std::vector<EpochRecord> history;
};

struct CvResult {
  std::vector<FoldReport> folds;
  FiveNumberSummary summary;
};

// Fold i trains a fresh model seeded from (cfg.seed, i) on every other fold
// and is evaluated on fold i. Folds run on up to `jobs` threads; the result
// does not depend on `jobs`.
CvResult cross_validate(const ArchSpec& spec, const Dataset& data, std::size_t k,
                        const TrainConfig& cfg, std::size_t jobs = 1,
                        const std::function<void(const FoldReport&)>& on_fold = {});

std::uint64_t fold_model_seed(std::uint64_t seed, std::size_t fold_index);
std::uint64_t single_model_seed(std::uint64_t seed);

struct CvReportContext {
  ArchSpec spec;
  TrainConfig train;
  std::size_t k = 10;
  std::string data_source;
  std::string data_digest;
  std::size_t n_samples = 0;
  Normalization normalization = Normalization::Scale500;
};

// JSON report: config echo, seeds, per-fold results and the summary.
std::string cv_report_json(const CvResult& result, const CvReportContext& context);

std::string_view optimizer_name(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

}  // namespace pcc
