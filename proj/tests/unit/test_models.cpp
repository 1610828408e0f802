#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.h"
#include "oracles.h"
#include "pcc/error.h"
#include "pcc/models.h"

using namespace pcc;

namespace {

PaddedSample random_sample(Rng& rng, std::size_t valid_len, ClassLabel label) {
  PaddedSample s;
  s.values.assign(kPaddedLength, 0.0);
  for (std::size_t i = 0; i < valid_len; ++i) s.values[i] = rng.uniform(0.2, 0.8);
  s.valid_len = valid_len;
  s.label = label;
  return s;
}

std::string serialize(const ModelBundle& m) {
  std::ostringstream out(std::ios::binary);
  save_model(m, out);
  return out.str();
}

ModelBundle deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_model(in);
}

bool same_parameters(const ModelBundle& a, const ModelBundle& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!pa[i].get().identical(pb[i].get())) return false;
  return true;
}

}  // namespace

TEST_CASE("default ConvNet shapes and parameter count") {
  const auto shapes = convnet_shapes(ConvNetConfig{});
  CHECK(shapes.conv_len == 249);
  CHECK(shapes.pool_len == 62);
  CHECK(shapes.dense_in == 372);
  Rng rng(1);
  const auto m = build_convnet(ConvNetConfig{}, rng);
  CHECK(m.parameter_count() == 944);
  CHECK(m.convnet()->conv.weights.shape() == std::vector<std::size_t>{6, 1, 32});
  CHECK(m.convnet()->head.weights.shape() == std::vector<std::size_t>{2, 372});
  CHECK(m.parameter_names() ==
        std::vector<std::string>{"conv.weights", "conv.bias", "head.weights", "head.bias"});

  ConvNetConfig too_long;
  too_long.kernel_len = 1025;
  CHECK_THROWS_AS(convnet_shapes(too_long), UsageError);
  CHECK_THROWS_AS(build_convnet(too_long, rng), UsageError);
}

TEST_CASE("LSTM shapes and parameter count") {
  Rng rng(1);
  const auto m = build_lstm(LstmConfig{}, rng);
  CHECK(m.parameter_count() == 4 * (32 + 32 * 32 + 32) + 2 * 32 + 2);
  CHECK(m.lstm()->cell.bias[kForgetGate][0] == 1.0);
  CHECK(m.lstm()->cell.bias[kInputGate][0] == 0.0);
  for (const double w : m.lstm()->cell.recurrent_weights[kCellGate].data()) CHECK(std::abs(w) <= 0.08);

  LstmConfig strided;
  strided.input_downsample = 3;
  CHECK(strided.steps() == 342);
}

TEST_CASE("model_input layouts") {
  Rng rng(2);
  const auto sample = random_sample(rng, 10, ClassLabel::Statement);
  const auto conv = build_convnet(ConvNetConfig{}, rng);
  CHECK(model_input(conv, sample).shape() == std::vector<std::size_t>{1, kPaddedLength});

  LstmConfig onset;
  onset.alignment = SequenceAlignment::Onset;
  const auto x_on = model_input(build_lstm(onset, rng), sample);
  CHECK(x_on.shape() == std::vector<std::size_t>{kPaddedLength, 1});
  CHECK(x_on[0] == sample.values[0]);

  const auto x_off = model_input(build_lstm(LstmConfig{}, rng), sample);
  CHECK(x_off[kPaddedLength - 1] == sample.values[9]);
  CHECK(x_off[kPaddedLength - 10] == sample.values[0]);
  CHECK(x_off[0] == 0.0);

  LstmConfig strided;
  strided.input_downsample = 4;
  strided.alignment = SequenceAlignment::Onset;
  const auto x_s = model_input(build_lstm(strided, rng), sample);
  CHECK(x_s.shape() == std::vector<std::size_t>{256, 1});
  CHECK(x_s[1] == sample.values[4]);
}

TEST_CASE("predict is a distribution; a zeroed model is undecided") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto m = i % 2 ? build_convnet(ConvNetConfig{}, rng) : build_lstm(LstmConfig{.hidden_size = 4, .input_downsample = 32}, rng);
    const auto p = predict(m, random_sample(rng, 1 + rng.below(kPaddedLength), ClassLabel::Statement));
    CHECK(p[0] >= 0.0);
    CHECK(p[1] >= 0.0);
    CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
  }
  auto m = build_convnet(ConvNetConfig{}, rng);
  for (auto& t : m.parameters()) t.get().fill(0.0);
  const auto p = predict(m, random_sample(rng, 300, ClassLabel::Statement));
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);
  CHECK(classify(p) == ClassLabel::Statement);
  CHECK(classify({0.4, 0.6}) == ClassLabel::WhQuestion);
}

TEST_CASE("accumulate_gradients matches finite differences") {
  Rng rng(4);
  for (int arch = 0; arch < 2; ++arch) {
    auto m = arch == 0 ? build_convnet(ConvNetConfig{}, rng)
                       : build_lstm(LstmConfig{.hidden_size = 5, .input_downsample = 64}, rng);
    // Full-length input keeps every conv window off the padding.
    const auto s = random_sample(rng, kPaddedLength, ClassLabel::WhQuestion);
    Gradients g;
    for (const auto& t : m.parameters()) g.push_back(t.get().zeros_like());
    const auto step = accumulate_gradients(m, s, g);
    auto loss = [&] { return softmax_cross_entropy(model_logits(m, s), s.label).loss; };
    CHECK(std::abs(step.loss - loss()) <= 1e-12);
    const auto check = grad_check(loss, m.parameters(), g, rng, 1e-4, 30);
    CHECK(check.max_error < 1e-4);
  }
}

TEST_CASE("model files round-trip bit for bit") {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    auto m = i % 2 ? build_convnet(ConvNetConfig{.n_filters = 1 + rng.below(8), .kernel_len = 1 + rng.below(64)}, rng)
                   : build_lstm(LstmConfig{.hidden_size = 1 + rng.below(6), .input_downsample = 1 + rng.below(40),
                                           .alignment = SequenceAlignment::Onset},
                                rng);
    m.provenance = {rng.next_u64(), static_cast<std::uint32_t>(rng.below(50)), "0123456789abcdef"};
    const auto bytes = serialize(m);
    const auto back = deserialize(bytes);
    CHECK(back.arch() == m.arch());
    CHECK(back.provenance == m.provenance);
    CHECK(same_parameters(m, back));
    CHECK(serialize(back) == bytes);
  }
}

TEST_CASE("corrupt model files are rejected") {
  Rng rng(6);
  const auto bytes = serialize(build_convnet(ConvNetConfig{}, rng));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(deserialize(bad_magic), doctest::Contains("bad magic"), DataError);
  auto bad_version = bytes;
  bad_version[4] = static_cast<char>(kModelFormatVersion + 1);
  CHECK_THROWS_WITH_AS(deserialize(bad_version), doctest::Contains("version"), DataError);
  CHECK_THROWS_WITH_AS(deserialize(bytes.substr(0, bytes.size() - 9)), doctest::Contains("truncated"), DataError);
  CHECK_THROWS_WITH_AS(deserialize(bytes + "x"), doctest::Contains("trailing"), DataError);
}

TEST_CASE("provenance text round-trips") {
  const Provenance p{42, 18, "00ff00ff00ff00ff"};
  CHECK(Provenance::decode(p.encode()) == p);
  CHECK(p.encode() == "seed=42\nepochs=18\ndata_digest=00ff00ff00ff00ff\n");
}
