#include "pcc/models.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcc/error.h"
#include "text_util.h"

namespace pcc {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'N', 'M'};
constexpr const char* kGateNames[kNumGates] = {"i", "f", "g", "o"};

// Initial LSTM weights are uniform in +-0.08; the forget gate bias starts at 1.
constexpr double kLstmInitRange = 0.08;
constexpr double kForgetBiasInit = 1.0;

DenseParams make_dense(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  DenseParams d{Tensor({out_dim, in_dim}), Tensor({out_dim})};
  glorot_uniform(d.weights, in_dim, out_dim, rng);
  return d;
}

void check_lstm_config(const LstmConfig& cfg) {
  if (cfg.hidden_size < 1) throw UsageError("lstm hidden size must be >= 1");
  if (cfg.input_downsample < 1 || cfg.input_downsample > kPaddedLength)
    throw UsageError("lstm input downsample must be in [1, " + std::to_string(kPaddedLength) + "]");
  if (cfg.alignment != SequenceAlignment::Onset && cfg.alignment != SequenceAlignment::Offset)
    throw UsageError("unknown lstm sequence alignment");
}

void check_sample(const PaddedSample& s) {
  if (s.values.size() != kPaddedLength)
    throw ShapeError("sample has " + std::to_string(s.values.size()) + " values, models expect " +
                     std::to_string(kPaddedLength));
  if (s.valid_len > kPaddedLength) throw ShapeError("sample valid length exceeds its size");
}

struct ConvNetActivations {
  Tensor input;
  Tensor conv;
  Tensor relu;
  MaxPoolForward pool;
  Tensor logits;
};

ConvNetActivations convnet_forward(const ConvNetModel& net, Tensor input) {
  ConvNetActivations a;
  a.input = std::move(input);
  a.conv = conv1d_forward(a.input, net.conv);
  a.relu = relu(a.conv);
  a.pool = maxpool1d_forward(a.relu, net.config.pool_window, net.config.pool_stride);
  a.logits = dense_forward(a.pool.output, net.head);
  return a;
}

// --- little-endian binary helpers -----------------------------------------

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(out, b, 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  put_bytes(out, b, 8);
}

void get_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw DataError(std::string("truncated model stream while reading ") + what);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char b[4];
  get_bytes(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  get_bytes(in, b, 8, "parameters");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint32_t narrow_u32(std::size_t v) {
  if (v > 0xffffffffULL) throw UsageError("config value does not fit the model file format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string_view arch_name(ArchTag arch) { return arch == ArchTag::ConvNet ? "convnet" : "lstm"; }

std::optional<ArchTag> parse_arch(std::string_view name) {
  if (name == "convnet") return ArchTag::ConvNet;
  if (name == "lstm") return ArchTag::Lstm;
  return std::nullopt;
}

ConvNetShapes convnet_shapes(const ConvNetConfig& cfg) {
  if (cfg.n_filters < 1) throw UsageError("convnet needs at least one filter");
  if (cfg.kernel_len < 1 || cfg.conv_stride < 1 || cfg.pool_window < 1 || cfg.pool_stride < 1)
    throw UsageError("convnet kernel, stride and pool sizes must be >= 1");
  if (cfg.kernel_len > kPaddedLength)
    throw UsageError("convnet kernel length " + std::to_string(cfg.kernel_len) +
                     " exceeds the input length " + std::to_string(kPaddedLength));
  ConvNetShapes s;
  s.conv_len = (kPaddedLength - cfg.kernel_len) / cfg.conv_stride + 1;
  if (cfg.pool_window > s.conv_len)
    throw UsageError("convnet pool window " + std::to_string(cfg.pool_window) +
                     " exceeds the convolution output length " + std::to_string(s.conv_len));
  s.pool_len = (s.conv_len - cfg.pool_window) / cfg.pool_stride + 1;
  s.dense_in = cfg.n_filters * s.pool_len;
  return s;
}

std::string Provenance::encode() const {
  return "seed=" + std::to_string(seed) + "\nepochs=" + std::to_string(epochs) +
         "\ndata_digest=" + data_digest + "\n";
}

Provenance Provenance::decode(std::string_view text) {
  Provenance p;
  for (const auto& line : detail::split_lines(text)) {
    if (line.text.empty()) continue;
    const auto eq = line.text.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed provenance record");
    const auto key = line.text.substr(0, eq);
    const auto value = line.text.substr(eq + 1);
    if (key == "seed") {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || ptr != value.data() + value.size())
        throw DataError("malformed provenance seed");
      p.seed = v;
    } else if (key == "epochs") {
      const auto v = detail::parse_integer(value);
      if (!v || *v < 0 || *v > 0xffffffffLL) throw DataError("malformed provenance epochs");
      p.epochs = static_cast<std::uint32_t>(*v);
    } else if (key == "data_digest") {
      p.data_digest = std::string(value);
    }
  }
  return p;
}

ArchTag ModelBundle::arch() const {
  return std::holds_alternative<ConvNetModel>(net) ? ArchTag::ConvNet : ArchTag::Lstm;
}

ParamRefs ModelBundle::parameters() {
  ParamRefs refs;
  if (auto* c = std::get_if<ConvNetModel>(&net)) {
    refs = {c->conv.weights, c->conv.bias, c->head.weights, c->head.bias};
  } else {
    auto& l = std::get<LstmModel>(net);
    for (auto& t : l.cell.input_weights) refs.emplace_back(t);
    for (auto& t : l.cell.recurrent_weights) refs.emplace_back(t);
    for (auto& t : l.cell.bias) refs.emplace_back(t);
    refs.emplace_back(l.head.weights);
    refs.emplace_back(l.head.bias);
  }
  return refs;
}

ConstParamRefs ModelBundle::parameters() const {
  ConstParamRefs refs;
  for (Tensor& t : const_cast<ModelBundle*>(this)->parameters()) refs.emplace_back(t);
  return refs;
}

std::vector<std::string> ModelBundle::parameter_names() const {
  if (arch() == ArchTag::ConvNet)
    return {"conv.weights", "conv.bias", "head.weights", "head.bias"};
  std::vector<std::string> names;
  for (const char* prefix : {"lstm.W_", "lstm.U_", "lstm.b_"})
    for (const char* gate : kGateNames) names.push_back(std::string(prefix) + gate);
  names.emplace_back("head.weights");
  names.emplace_back("head.bias");
  return names;
}

std::size_t ModelBundle::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : parameters()) n += t.size();
  return n;
}

ModelBundle build_convnet(const ConvNetConfig& cfg, Rng& rng) {
  const auto shapes = convnet_shapes(cfg);
  ConvNetModel net;
  net.config = cfg;
  net.conv.weights = Tensor({cfg.n_filters, 1, cfg.kernel_len});
  net.conv.bias = Tensor({cfg.n_filters});
  net.conv.stride = cfg.conv_stride;
  glorot_uniform(net.conv.weights, cfg.kernel_len, cfg.n_filters * cfg.kernel_len, rng);
  net.head = make_dense(shapes.dense_in, kNumClasses, rng);
  return ModelBundle{std::move(net), {}};
}

ModelBundle build_lstm(const LstmConfig& cfg, Rng& rng) {
  check_lstm_config(cfg);
  LstmModel net;
  net.config = cfg;
  net.cell = LstmParams::zeros(1, cfg.hidden_size);
  for (std::size_t g = 0; g < kNumGates; ++g) {
    uniform_fill(net.cell.input_weights[g], -kLstmInitRange, kLstmInitRange, rng);
    uniform_fill(net.cell.recurrent_weights[g], -kLstmInitRange, kLstmInitRange, rng);
  }
  net.cell.bias[kForgetGate].fill(kForgetBiasInit);
  net.head = make_dense(cfg.hidden_size, kNumClasses, rng);
  return ModelBundle{std::move(net), {}};
}

Tensor model_input(const ModelBundle& m, const PaddedSample& s) {
  check_sample(s);
  if (m.arch() == ArchTag::ConvNet) return Tensor({1, kPaddedLength}, s.values);
  const auto& cfg = m.lstm()->config;
  const std::size_t steps = cfg.steps();
  const std::size_t shift =
      cfg.alignment == SequenceAlignment::Offset ? kPaddedLength - s.valid_len : 0;
  Tensor seq({steps, 1});
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t pos = t * cfg.input_downsample;
    seq[t] = pos >= shift ? s.values[pos - shift] : 0.0;
  }
  return seq;
}

Tensor model_logits(const ModelBundle& m, const PaddedSample& s) {
  Tensor input = model_input(m, s);
  if (const auto* c = m.convnet()) return convnet_forward(*c, std::move(input)).logits;
  const auto& l = *m.lstm();
  return dense_forward(lstm_final_state(input, l.cell), l.head);
}

std::array<double, kNumClasses> predict(const ModelBundle& m, const PaddedSample& s) {
  const Tensor probs = softmax(model_logits(m, s));
  return {probs[0], probs[1]};
}

ClassLabel classify(const std::array<double, kNumClasses>& probs) {
  return probs[1] > probs[0] ? ClassLabel::WhQuestion : ClassLabel::Statement;
}

ClassLabel classify(const ModelBundle& m, const PaddedSample& s) { return classify(predict(m, s)); }

SampleStep accumulate_gradients(const ModelBundle& m, const PaddedSample& s, Gradients& accum) {
  Tensor input = model_input(m, s);
  SampleStep step;

  auto add = [&accum](std::size_t slot, const Tensor& g) {
    Tensor& target = accum.at(slot);
    if (target.shape() != g.shape()) throw ShapeError("gradient accumulator shape mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) target[i] += g[i];
  };

  if (const auto* c = m.convnet()) {
    if (accum.size() != 4) throw ShapeError("gradient accumulator does not match the convnet");
    const auto a = convnet_forward(*c, std::move(input));
    const auto loss = softmax_cross_entropy(a.logits, s.label);
    step.loss = loss.loss;
    step.predicted = classify({loss.probs[0], loss.probs[1]});
    const auto head = dense_backward(loss.dlogits, a.pool.output, c->head);
    const Tensor drelu = maxpool1d_backward(head.dx, a.pool.cache);
    const Tensor dconv = relu_backward(drelu, a.conv);
    const auto conv = conv1d_backward(dconv, a.input, c->conv, false);
    add(0, conv.grads.weights);
    add(1, conv.grads.bias);
    add(2, head.grads.weights);
    add(3, head.grads.bias);
    return step;
  }

  const auto& l = *m.lstm();
  if (accum.size() != 3 * kNumGates + 2) throw ShapeError("gradient accumulator does not match the lstm");
  auto fwd = lstm_forward(input, l.cell);
  const Tensor logits = dense_forward(fwd.h_final, l.head);
  const auto loss = softmax_cross_entropy(logits, s.label);
  step.loss = loss.loss;
  step.predicted = classify({loss.probs[0], loss.probs[1]});
  const auto head = dense_backward(loss.dlogits, fwd.h_final, l.head);
  const auto cell = lstm_backward(head.dx, fwd.cache, l.cell);
  for (std::size_t g = 0; g < kNumGates; ++g) {
    add(g, cell.grads.input_weights[g]);
    add(kNumGates + g, cell.grads.recurrent_weights[g]);
    add(2 * kNumGates + g, cell.grads.bias[g]);
  }
  add(3 * kNumGates, head.grads.weights);
  add(3 * kNumGates + 1, head.grads.bias);
  return step;
}

// ---------------------------------------------------------------------------
// Model file:
//   "PCNM" | u32 version | u8 arch | u32 config fields | f64 parameters in
//   declaration order | u32 provenance length | provenance bytes
// All integers and floats little-endian.

void save_model(const ModelBundle& m, std::ostream& out) {
  put_bytes(out, kMagic, 4);
  put_u32(out, kModelFormatVersion);
  const auto tag = static_cast<unsigned char>(m.arch());
  put_bytes(out, &tag, 1);
  if (const auto* c = m.convnet()) {
    for (const auto v : {c->config.n_filters, c->config.kernel_len, c->config.conv_stride,
                         c->config.pool_window, c->config.pool_stride})
      put_u32(out, narrow_u32(v));
  } else {
    const auto& cfg = m.lstm()->config;
    put_u32(out, narrow_u32(cfg.hidden_size));
    put_u32(out, narrow_u32(cfg.input_downsample));
    put_u32(out, static_cast<std::uint32_t>(cfg.alignment));
  }
  for (const Tensor& t : m.parameters())
    for (const double v : t.data()) put_f64(out, v);
  const std::string prov = m.provenance.encode();
  put_u32(out, narrow_u32(prov.size()));
  put_bytes(out, prov.data(), prov.size());
  if (!out) throw DataError("failed to write model stream");
}

ModelBundle load_model(std::istream& in) {
  char magic[4];
  get_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("bad magic: not a model file");
  const std::uint32_t version = get_u32(in, "version");
  if (version != kModelFormatVersion)
    throw DataError("unknown version " + std::to_string(version) + " (this build reads version " +
                    std::to_string(kModelFormatVersion) + ")");
  unsigned char tag = 0;
  get_bytes(in, &tag, 1, "architecture tag");

  ModelBundle m;
  // Builders allocate the shapes; the random values are overwritten below.
  Rng scratch(0);
  try {
    if (tag == static_cast<unsigned char>(ArchTag::ConvNet)) {
      ConvNetConfig cfg;
      cfg.n_filters = get_u32(in, "config");
      cfg.kernel_len = get_u32(in, "config");
      cfg.conv_stride = get_u32(in, "config");
      cfg.pool_window = get_u32(in, "config");
      cfg.pool_stride = get_u32(in, "config");
      m = build_convnet(cfg, scratch);
    } else if (tag == static_cast<unsigned char>(ArchTag::Lstm)) {
      LstmConfig cfg;
      cfg.hidden_size = get_u32(in, "config");
      cfg.input_downsample = get_u32(in, "config");
      const std::uint32_t alignment = get_u32(in, "config");
      if (alignment > 1) throw UsageError("unknown sequence alignment " + std::to_string(alignment));
      cfg.alignment = static_cast<SequenceAlignment>(alignment);
      m = build_lstm(cfg, scratch);
    } else {
      throw DataError("unknown architecture tag " + std::to_string(tag));
    }
  } catch (const UsageError& e) {
    throw DataError(std::string("model config mismatch: ") + e.what());
  }
  for (Tensor& t : m.parameters())
    for (auto& v : t.data()) v = get_f64(in);
  const std::uint32_t prov_len = get_u32(in, "provenance length");
  std::string prov(prov_len, '\0');
  get_bytes(in, prov.data(), prov_len, "provenance");
  m.provenance = Provenance::decode(prov);
  if (in.peek() != std::char_traits<char>::eof()) throw DataError("trailing bytes after model record");
  return m;
}

void save_model_file(const ModelBundle& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file " + path.string());
  save_model(m, out);
}

ModelBundle load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace pcc
