#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pcc/contour_data.h"
#include "pcc/nn.h"
#include "pcc/rng.h"
#include "pcc/tensor.h"

namespace pcc {

enum class ArchTag : std::uint8_t { ConvNet = 0, Lstm = 1 };

std::string_view arch_name(ArchTag arch);  // "convnet" / "lstm"
std::optional<ArchTag> parse_arch(std::string_view name);

// input [1, 1024] -> conv1d -> ReLU -> maxpool -> flatten -> dense(2) -> softmax
struct ConvNetConfig {
  std::size_t n_filters = 6;
  std::size_t kernel_len = 32;
  std::size_t conv_stride = 4;
  std::size_t pool_window = 4;
  std::size_t pool_stride = 4;
};

struct ConvNetShapes {
  std::size_t conv_len = 0;
  std::size_t pool_len = 0;
  std::size_t dense_in = 0;
};

// Throws UsageError when a layer would end up with no outputs.
ConvNetShapes convnet_shapes(const ConvNetConfig& cfg);

// Where the voiced frames sit in the sequence the LSTM reads. `Onset` feeds
// the padded sample as stored (frames first, zeros after). `Offset` moves the
// trailing zeros in front, so the last step the LSTM sees is the last frame.
enum class SequenceAlignment : std::uint8_t { Onset = 0, Offset = 1 };

// frames (optionally strided) -> LSTM -> final hidden state -> dense(2) -> softmax
struct LstmConfig {
  std::size_t hidden_size = 32;
  std::size_t input_downsample = 1;
  SequenceAlignment alignment = SequenceAlignment::Offset;

  std::size_t steps() const {
    return (kPaddedLength + input_downsample - 1) / input_downsample;
  }
};

struct Provenance {
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  std::string data_digest;

  std::string encode() const;
  static Provenance decode(std::string_view text);
  bool operator==(const Provenance&) const = default;
};

struct ConvNetModel {
  ConvNetConfig config;
  Conv1dParams conv;
  DenseParams head;
};

struct LstmModel {
  LstmConfig config;
  LstmParams cell;
  DenseParams head;
};

struct ModelBundle {
  std::variant<ConvNetModel, LstmModel> net;
  Provenance provenance;

  ArchTag arch() const;
  const ConvNetModel* convnet() const { return std::get_if<ConvNetModel>(&net); }
  const LstmModel* lstm() const { return std::get_if<LstmModel>(&net); }

  // Declaration order; the same order is used for gradients and the file.
  ParamRefs parameters();
  ConstParamRefs parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;
};

ModelBundle build_convnet(const ConvNetConfig& cfg, Rng& rng);
ModelBundle build_lstm(const LstmConfig& cfg, Rng& rng);

// The input the network body consumes, as laid out for its architecture.
Tensor model_input(const ModelBundle& m, const PaddedSample& s);

Tensor model_logits(const ModelBundle& m, const PaddedSample& s);

// [p_statement, p_question]
std::array<double, kNumClasses> predict(const ModelBundle& m, const PaddedSample& s);

// Argmax; ties go to Statement.
ClassLabel classify(const std::array<double, kNumClasses>& probs);
ClassLabel classify(const ModelBundle& m, const PaddedSample& s);

struct SampleStep {
  double loss = 0.0;
  ClassLabel predicted = ClassLabel::Statement;
};

// Forward + backward for one sample; adds its gradient into `accum`.
SampleStep accumulate_gradients(const ModelBundle& m, const PaddedSample& s, Gradients& accum);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const ModelBundle& m, std::ostream& out);
ModelBundle load_model(std::istream& in);
void save_model_file(const ModelBundle& m, const std::filesystem::path& path);
ModelBundle load_model_file(const std::filesystem::path& path);

}  // namespace pcc
