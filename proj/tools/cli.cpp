#include "cli.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pcc/contour_data.h"
#include "pcc/error.h"
#include "pcc/models.h"
#include "pcc/synth_corpus.h"
#include "pcc/training.h"

namespace pcc::cli {
namespace {

constexpr double kGradTolerance = 1e-4;
constexpr double kGradEps = 1e-4;
constexpr double kKinkMargin = 1.5 * kGradEps;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("PCC_SEED");
  if (env == nullptr || *env == '\0') return 42;
  const std::string_view text(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw UsageError("PCC_SEED must be a non-negative integer, got `" + std::string(text) + "`");
  return seed;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Flag groups shared by several subcommands.

struct ModelFlags {
  std::string arch = "convnet";
  ConvNetConfig conv;
  LstmConfig lstm;
  std::string alignment = "offset";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--arch", arch, "Model architecture")->check(CLI::IsMember({"convnet", "lstm"}));
    cmd.add_option("--filters", conv.n_filters, "ConvNet: number of filters");
    cmd.add_option("--kernel", conv.kernel_len, "ConvNet: filter length in frames");
    cmd.add_option("--conv-stride", conv.conv_stride, "ConvNet: convolution stride");
    cmd.add_option("--pool", conv.pool_window, "ConvNet: max-pool window");
    cmd.add_option("--pool-stride", conv.pool_stride, "ConvNet: max-pool stride");
    cmd.add_option("--hidden", lstm.hidden_size, "LSTM: hidden units");
    cmd.add_option("--downsample", lstm.input_downsample, "LSTM: read every n-th frame");
    cmd.add_option("--alignment", alignment, "LSTM: frames at the sequence onset or offset")
        ->check(CLI::IsMember({"onset", "offset"}));
  }

  ArchSpec spec() const {
    if (arch == "convnet") {
      convnet_shapes(conv);
      return {conv};
    }
    if (lstm.hidden_size == 0) throw UsageError("--hidden must be positive");
    if (lstm.input_downsample == 0 || lstm.input_downsample > kPaddedLength)
      throw UsageError("--downsample must lie in [1, " + std::to_string(kPaddedLength) + "]");
    LstmConfig c = lstm;
    c.alignment = alignment == "onset" ? SequenceAlignment::Onset : SequenceAlignment::Offset;
    return {c};
  }
};

struct TrainFlags {
  TrainConfig cfg;
  std::string optimizer = "adam";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--epochs", cfg.epochs, "Training epochs");
    cmd.add_option("--batch", cfg.batch_size, "Minibatch size");
    cmd.add_option("--lr", cfg.learning_rate, "Learning rate");
    cmd.add_option("--optimizer", optimizer, "Optimizer")->check(CLI::IsMember({"adam", "sgd"}));
    cmd.add_option("--seed", cfg.seed, "Seed for initialisation, shuffling and folds (env PCC_SEED)");
  }

  TrainConfig config() const {
    TrainConfig c = cfg;
    c.optimizer = *parse_optimizer(optimizer);
    c.validate();
    return c;
  }
};

struct DataFlags {
  std::string manifest;
  std::string norm = "scale500";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--data", manifest, "Manifest CSV (path,label,speaker_id)")->required();
    cmd.add_option("--norm", norm, "F0 normalisation")->check(CLI::IsMember({"scale500", "none"}));
  }

  Dataset load() const {
    LoadOptions opts;
    opts.normalization = *parse_normalization(norm);
    return load_dataset_file(manifest, opts);
  }
};

// ---------------------------------------------------------------------------
// synth

struct SynthFlags {
  SynthConfig cfg;
  std::string out_dir;
  std::string noise = "moderate";
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  SynthConfig cfg = f.cfg;
  cfg.noise = *parse_noise_level(f.noise);
  const auto corpus = gen_corpus(cfg, f.out_dir);
  out << "wrote " << corpus.dataset.size() << " contours (" << corpus.dataset.count(ClassLabel::Statement)
      << " statements, " << corpus.dataset.count(ClassLabel::WhQuestion) << " wh-questions)\n";
  out << "manifest " << corpus.manifest_path.string() << "\n";
  out << "config digest " << corpus.config_digest << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainCmdFlags {
  ModelFlags model;
  TrainFlags train;
  DataFlags data;
  std::string out_path;
  std::string log_path;
};

int cmd_train(const TrainCmdFlags& f, std::ostream& out) {
  const auto spec = f.model.spec();
  const auto cfg = f.train.config();
  const auto data = f.data.load();
  Rng init_rng(single_model_seed(cfg.seed));
  const auto model = build_model(spec, init_rng);

  const std::filesystem::path log_path = f.log_path.empty() ? f.out_path + ".log" : f.log_path;
  std::ostringstream log;
  auto result = train(model, data, cfg, [&](const EpochRecord& r) {
    const std::string line = "epoch " + std::to_string(r.epoch) + " loss " + fixed(r.mean_loss, 6) +
                             " accuracy " + fixed(r.accuracy, 4) + "\n";
    log << line;
    out << line << std::flush;
  });
  result.best.provenance = {cfg.seed, static_cast<std::uint32_t>(cfg.epochs), dataset_digest(data)};
  save_model_file(result.best, f.out_path);
  write_file(log_path, log.str());

  const auto& best = result.history[result.best_epoch - 1];
  out << "selected epoch " << result.best_epoch << " loss " << fixed(best.mean_loss, 6) << "\n";
  out << "model " << f.out_path << "\n";
  out << "log " << log_path.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string model_path;
  DataFlags data;
};

void print_confusion(const Confusion& c, std::ostream& out) {
  char line[128];
  out << "confusion (rows: true class, columns: predicted)\n";
  std::snprintf(line, sizeof line, "%-12s %12s %12s\n", "", "statement", "wh_question");
  out << line;
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    std::snprintf(line, sizeof line, "%-12s %12zu %12zu\n", std::string(label_token(label_from_index(t))).c_str(),
                  c.counts[t][0], c.counts[t][1]);
    out << line;
  }
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    const auto label = label_from_index(t);
    out << "recall " << label_token(label) << " " << fixed(c.recall(label), 4) << "\n";
  }
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const auto model = load_model_file(f.model_path);
  const auto data = f.data.load();
  const auto ev = evaluate(model, data);
  out << "accuracy " << fixed(ev.accuracy, 4) << "\n";
  print_confusion(ev.confusion, out);
  return kOk;
}

// ---------------------------------------------------------------------------
// cv

struct CvFlags {
  ModelFlags model;
  TrainFlags train;
  DataFlags data;
  std::size_t folds = 10;
  std::size_t jobs = 1;
  std::string report_path = "cv_report.json";
};

int cmd_cv(const CvFlags& f, std::ostream& out) {
  const auto spec = f.model.spec();
  const auto cfg = f.train.config();
  if (f.folds < 2) throw UsageError("--folds must be at least 2");
  if (f.jobs == 0) throw UsageError("--jobs must be positive");
  const auto data = f.data.load();
  const auto result = cross_validate(spec, data, f.folds, cfg, f.jobs);

  CvReportContext ctx;
  ctx.spec = spec;
  ctx.train = cfg;
  ctx.k = f.folds;
  ctx.data_source = f.data.manifest;
  ctx.data_digest = dataset_digest(data);
  ctx.n_samples = data.size();
  ctx.normalization = *parse_normalization(f.data.norm);
  write_file(f.report_path, cv_report_json(result, ctx));

  for (const auto& r : result.folds)
    out << "fold " << r.fold << " accuracy " << fixed(r.accuracy, 4) << " epoch " << r.selected_epoch << " train "
        << r.train_size << " test " << r.test_size << "\n";
  const auto& s = result.summary;
  out << "Min.    " << fixed(s.min, 4) << "\n"
      << "1st Qu. " << fixed(s.q1, 4) << "\n"
      << "Median  " << fixed(s.median, 4) << "\n"
      << "3rd Qu. " << fixed(s.q3, 4) << "\n"
      << "Max.    " << fixed(s.max, 4) << "\n";
  out << "report " << f.report_path << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckFlags {
  std::string arch = "convnet";
  std::uint64_t seed = 42;
  std::size_t coords = 10;
  bool inject_fault = false;
};

PaddedSample random_full_sample(Rng& rng) {
  PaddedSample s;
  s.values.resize(kPaddedLength);
  for (auto& v : s.values) v = rng.uniform(0.2, 0.8);
  s.valid_len = kPaddedLength;
  s.label = label_from_index(rng.below(kNumClasses));
  return s;
}

// True when no ReLU input sits within `margin` of zero and no pooling window
// has a positive runner-up within 2 * margin of its winner. Inputs lie in
// [0, 1], so nudging one conv parameter by eps moves each pre-activation by at
// most eps; a margin just above eps keeps every probe on one side of a kink.
bool clear_of_kinks(const ConvNetModel& net, const PaddedSample& s, double margin) {
  const Tensor x({1, kPaddedLength}, s.values);
  const Tensor z = conv1d_forward(x, net.conv);
  for (const double v : z.data())
    if (std::abs(v) < margin) return false;
  const Tensor a = relu(z);
  const auto& c = net.config;
  const std::size_t pooled = (a.dim(1) - c.pool_window) / c.pool_stride + 1;
  for (std::size_t ch = 0; ch < a.dim(0); ++ch)
    for (std::size_t p = 0; p < pooled; ++p) {
      double best = 0.0, second = 0.0;
      for (std::size_t w = 0; w < c.pool_window; ++w) {
        const double v = a.at(ch, p * c.pool_stride + w);
        if (v > best) {
          second = best;
          best = v;
        } else if (v > second) {
          second = v;
        }
      }
      if (second > 0.0 && best - second < 2.0 * margin) return false;
    }
  return true;
}

int cmd_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  if (f.coords == 0) throw UsageError("--coords must be positive");
  Rng rng(derive_seed(f.seed, "gradcheck"));
  ModelBundle model = f.arch == "convnet" ? build_convnet(ConvNetConfig{}, rng) : build_lstm(LstmConfig{}, rng);

  PaddedSample sample = random_full_sample(rng);
  if (const auto* net = model.convnet()) {
    int attempts = 1;
    while (!clear_of_kinks(*net, sample, kKinkMargin)) {
      if (++attempts > 10000) throw NumericError("could not draw a sample away from ReLU and pooling kinks");
      sample = random_full_sample(rng);
    }
  }

  Gradients analytic;
  for (const auto& t : model.parameters()) analytic.push_back(t.get().zeros_like());
  accumulate_gradients(model, sample, analytic);
  if (f.inject_fault)
    for (auto& v : analytic.front().data()) v += 0.01;

  auto loss = [&] { return softmax_cross_entropy(model_logits(model, sample), sample.label).loss; };
  const auto check = grad_check(loss, model.parameters(), analytic, rng, kGradEps, f.coords);

  const auto names = model.parameter_names();
  char line[128];
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::snprintf(line, sizeof line, "%-16s max rel error %s\n", names[i].c_str(), sci(check.per_tensor[i]).c_str());
    out << line;
  }
  const bool ok = check.max_error < kGradTolerance;
  out << "overall max rel error " << sci(check.max_error) << (ok ? " ok" : " FAILED") << "\n";
  return ok ? kOk : kNumeric;
}

// ---------------------------------------------------------------------------
// dump-filters and plot-contour

struct DumpFlags {
  std::string model_path;
  std::string format = "csv";
  std::string out_path;
};

std::vector<std::vector<double>> filter_rows(const ConvNetModel& net) {
  const Tensor& w = net.conv.weights;
  std::vector<std::vector<double>> rows(w.dim(0));
  for (std::size_t o = 0; o < w.dim(0); ++o)
    for (std::size_t c = 0; c < w.dim(1); ++c)
      for (std::size_t j = 0; j < w.dim(2); ++j) rows[o].push_back(w.at(o, c, j));
  return rows;
}

std::string filters_csv(const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) text += ',';
      text += exact(row[j]);
    }
    text += '\n';
  }
  return text;
}

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string svg_escape(const std::string& s) {
  std::string r;
  for (const char c : s) {
    if (c == '<') r += "&lt;";
    else if (c == '>') r += "&gt;";
    else if (c == '&') r += "&amp;";
    else r += c;
  }
  return r;
}

struct Panel {
  double x0, y0, w, h;
  double xmin, xmax, ymin, ymax;

  double px(double x) const { return x0 + (xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5) * w; }
  double py(double y) const { return y0 + h - (ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5) * h; }
};

std::string svg_text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + svg_number(x) + "\" y=\"" + svg_number(y) + "\" font-size=\"10\" text-anchor=\"" + anchor +
         "\">" + svg_escape(s) + "</text>\n";
}

std::string svg_frame(const Panel& p, const std::string& title, const std::string& xlabel,
                      const std::string& xlo, const std::string& xhi, const std::string& ylo, const std::string& yhi) {
  std::string s = "<rect x=\"" + svg_number(p.x0) + "\" y=\"" + svg_number(p.y0) + "\" width=\"" + svg_number(p.w) +
                  "\" height=\"" + svg_number(p.h) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  s += svg_text(p.x0 + p.w / 2, p.y0 - 6, title);
  s += svg_text(p.x0, p.y0 + p.h + 12, xlo);
  s += svg_text(p.x0 + p.w, p.y0 + p.h + 12, xhi);
  s += svg_text(p.x0 + p.w / 2, p.y0 + p.h + 24, xlabel);
  s += svg_text(p.x0 - 4, p.y0 + p.h, ylo, "end");
  s += svg_text(p.x0 - 4, p.y0 + 8, yhi, "end");
  return s;
}

std::string svg_polyline(const Panel& p, const std::vector<std::pair<double, double>>& pts) {
  std::string s = "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) s += ' ';
    s += svg_number(p.px(pts[i].first)) + "," + svg_number(p.py(pts[i].second));
  }
  return s + "\"/>\n";
}

std::string svg_document(double width, double height, const std::string& body) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         svg_number(width) + "\" height=\"" + svg_number(height) + "\" viewBox=\"0 0 " + svg_number(width) + " " +
         svg_number(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "</svg>\n";
}

std::string filters_svg(const std::vector<std::vector<double>>& rows) {
  constexpr std::size_t kCols = 3;
  constexpr double kW = 200, kH = 100, kGapX = 70, kGapY = 60, kLeft = 60, kTop = 30;
  const std::size_t n_rows = (rows.size() + kCols - 1) / kCols;
  std::string body;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& w = rows[i];
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    const Panel p{kLeft + static_cast<double>(i % kCols) * (kW + kGapX), kTop + static_cast<double>(i / kCols) * (kH + kGapY),
                  kW, kH, 0.0, static_cast<double>(w.size() - 1), *lo, *hi};
    body += svg_frame(p, "filter " + std::to_string(i + 1), "tap index", "0", std::to_string(w.size() - 1),
                      fixed(*lo, 3), fixed(*hi, 3));
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < w.size(); ++j) pts.emplace_back(static_cast<double>(j), w[j]);
    body += svg_polyline(p, pts);
  }
  const double width = kLeft + kCols * (kW + kGapX);
  const double height = kTop + static_cast<double>(n_rows) * (kH + kGapY);
  return svg_document(width, height, body);
}

int cmd_dump_filters(const DumpFlags& f, std::ostream& out) {
  const auto model = load_model_file(f.model_path);
  const auto* net = model.convnet();
  if (net == nullptr) throw UsageError("no convolutional filters in an " + std::string(arch_name(model.arch())) + " model");
  const auto rows = filter_rows(*net);
  write_file(f.out_path, f.format == "csv" ? filters_csv(rows) : filters_svg(rows));
  out << "wrote " << rows.size() << " filters of " << net->config.kernel_len << " taps to " << f.out_path << "\n";
  return kOk;
}

struct PlotFlags {
  std::string input;
  std::string out_path;
};

int cmd_plot_contour(const PlotFlags& f, std::ostream& out) {
  const auto contour = load_contour_file(f.input);
  validate_contour(contour);
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& p : contour.points)
    if (p.f0_hz > 0.0) {
      lo = any ? std::min(lo, p.f0_hz) : p.f0_hz;
      hi = any ? std::max(hi, p.f0_hz) : p.f0_hz;
      any = true;
    }
  if (!any) throw DataError(f.input + ": contour has no voiced points");
  const double t0 = contour.points.front().time_s, t1 = contour.points.back().time_s;
  const Panel p{70, 30, 600, 240, t0, t1, lo, hi};
  std::string body = svg_frame(p, std::filesystem::path(f.input).filename().string() + " (" +
                                      std::string(label_token(contour.label)) + ")",
                               "time (s)", fixed(t0, 3), fixed(t1, 3), fixed(lo, 1) + " Hz", fixed(hi, 1) + " Hz");
  // Unvoiced points break the line.
  std::vector<std::pair<double, double>> run;
  std::size_t segments = 0;
  auto flush = [&] {
    if (!run.empty()) body += svg_polyline(p, run), ++segments;
    run.clear();
  };
  for (const auto& pt : contour.points) {
    if (pt.f0_hz > 0.0) run.emplace_back(pt.time_s, pt.f0_hz);
    else flush();
  }
  flush();
  write_file(f.out_path, svg_document(760, 320, body));
  out << "wrote " << segments << " voiced segments to " << f.out_path << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::uint64_t seed = 42;
  try {
    seed = default_seed();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  CLI::App app{"Statement vs wh-question classification from F0 contours"};
  app.name("pcc");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthFlags synth;
  synth.cfg.seed = seed;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labelled contour corpus");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.cfg.seed, "Generator seed (env PCC_SEED)");
  synth_cmd->add_option("--noise", synth.noise, "Noise preset")->check(CLI::IsMember({"zero", "low", "moderate"}));
  synth_cmd->add_option("--n-statements", synth.cfg.n_statements, "Number of statements");
  synth_cmd->add_option("--n-questions", synth.cfg.n_questions, "Number of wh-questions");
  synth_cmd->add_option("--n-speakers-stmt", synth.cfg.n_speakers_stmt, "Statement speaker pool size");
  synth_cmd->add_option("--n-speakers-q", synth.cfg.n_speakers_q, "Question speaker pool size");
  synth_cmd->add_option("--frame-step", synth.cfg.frame_step, "Frame step in seconds");

  TrainCmdFlags train_flags;
  train_flags.train.cfg.seed = seed;
  auto* train_cmd = app.add_subcommand("train", "Train a model and keep the lowest-loss epoch");
  train_flags.model.add_to(*train_cmd);
  train_flags.data.add_to(*train_cmd);
  train_flags.train.add_to(*train_cmd);
  train_cmd->add_option("--out", train_flags.out_path, "Model file to write")->required();
  train_cmd->add_option("--log", train_flags.log_path, "Per-epoch log file (default: <out>.log)");

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a dataset");
  eval_cmd->add_option("--model", eval_flags.model_path, "Model file")->required();
  eval_flags.data.add_to(*eval_cmd);

  CvFlags cv_flags;
  cv_flags.train.cfg.seed = seed;
  auto* cv_cmd = app.add_subcommand("cv", "k-fold cross-validation with a five-number summary");
  cv_flags.model.add_to(*cv_cmd);
  cv_flags.data.add_to(*cv_cmd);
  cv_flags.train.add_to(*cv_cmd);
  cv_cmd->add_option("--folds", cv_flags.folds, "Number of folds");
  cv_cmd->add_option("--jobs", cv_flags.jobs, "Folds trained in parallel");
  cv_cmd->add_option("--report", cv_flags.report_path, "JSON report file");

  GradcheckFlags gc_flags;
  gc_flags.seed = seed;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare backprop gradients with finite differences");
  gc_cmd->add_option("--arch", gc_flags.arch, "Model architecture")->check(CLI::IsMember({"convnet", "lstm"}));
  gc_cmd->add_option("--seed", gc_flags.seed, "Seed for weights and sample (env PCC_SEED)");
  gc_cmd->add_option("--coords", gc_flags.coords, "Coordinates checked per parameter tensor");
  gc_cmd->add_flag("--inject-fault", gc_flags.inject_fault, "Corrupt the analytic gradient (self-test)");

  DumpFlags dump_flags;
  auto* dump_cmd = app.add_subcommand("dump-filters", "Export first-layer ConvNet filters");
  dump_cmd->add_option("--model", dump_flags.model_path, "Model file")->required();
  dump_cmd->add_option("--format", dump_flags.format, "Output format")->check(CLI::IsMember({"csv", "svg"}));
  dump_cmd->add_option("--out", dump_flags.out_path, "Output file")->required();

  PlotFlags plot_flags;
  auto* plot_cmd = app.add_subcommand("plot-contour", "Render one contour file as SVG");
  plot_cmd->add_option("--input", plot_flags.input, "Contour file (.csv or .PitchTier)")->required();
  plot_cmd->add_option("--out", plot_flags.out_path, "SVG file to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train_flags, out);
    if (eval_cmd->parsed()) return cmd_eval(eval_flags, out);
    if (cv_cmd->parsed()) return cmd_cv(cv_flags, out);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc_flags, out);
    if (dump_cmd->parsed()) return cmd_dump_filters(dump_flags, out);
    if (plot_cmd->parsed()) return cmd_plot_contour(plot_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace pcc::cli
