#include "pcc/synth_corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <system_error>

#include <json.hpp>

#include "pcc/error.h"

namespace pcc {

namespace {

struct WordSpan {
  double start = 0.0;
  double duration = 0.0;
};

std::vector<WordSpan> lay_out_words(Rng& rng, std::size_t n_words, double rate,
                                    const Perturbation& perturb) {
  std::vector<WordSpan> words;
  double t = 0.0;
  for (std::size_t k = 0; k < n_words; ++k) {
    const double warp = perturb.time_warp > 0.0
                            ? rng.uniform(1.0 - perturb.time_warp, 1.0 + perturb.time_warp)
                            : 1.0;
    words.push_back({t, warp / rate});
    t += warp / rate;
  }
  return words;
}

// Frame grid over [0, total duration], with the word index and the position
// within the word for every frame.
struct Frame {
  double time = 0.0;
  std::size_t word = 0;
  double pos = 0.0;  // in [0, 1]
  bool gap = false;
};

std::vector<Frame> frame_grid(const std::vector<WordSpan>& words, double step,
                              std::size_t gap_frames) {
  const double total = words.back().start + words.back().duration;
  const auto n = static_cast<std::size_t>(std::floor(total / step)) + 1;
  if (n > kPaddedLength)
    throw UsageError("synthetic utterance of " + std::to_string(total) + " s exceeds " +
                     std::to_string(kPaddedLength) + " frames");
  std::vector<Frame> frames(n);
  std::size_t k = 0;
  std::vector<std::size_t> first_frame(words.size(), n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * step;
    while (k + 1 < words.size() && t >= words[k + 1].start) ++k;
    frames[j].time = t;
    frames[j].word = k;
    frames[j].pos = std::clamp((t - words[k].start) / words[k].duration, 0.0, 1.0);
    if (first_frame[k] == n) first_frame[k] = j;
  }
  for (std::size_t w = 1; w < words.size(); ++w)
    for (std::size_t g = 0; g < gap_frames && first_frame[w] + g < n; ++g)
      if (frames[first_frame[w] + g].word == w) frames[first_frame[w] + g].gap = true;
  return frames;
}

double rise_fall(double pos) {
  const double s = std::sin(std::numbers::pi * pos);
  return s * s;
}

F0Contour realise(Rng& rng, const std::vector<Frame>& frames, const std::vector<double>& f0,
                  double jitter_sd, ClassLabel label) {
  F0Contour c;
  c.label = label;
  c.points.reserve(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    double v = 0.0;
    if (!frames[j].gap) {
      v = f0[j];
      if (jitter_sd > 0.0) v += rng.normal(0.0, jitter_sd);
      v = std::max(v, 50.0);  // stay voiced
    }
    c.points.push_back({frames[j].time, v});
  }
  return c;
}

std::string format_fixed(double v, int precision) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v, std::chars_format::fixed, precision);
  return std::string(buffer, result.ptr);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace

void SpeakerProfile::validate() const {
  if (!(base_f0 >= 120.0 && base_f0 <= 350.0)) throw UsageError("speaker base_f0 must lie in [120, 350] Hz");
  if (!(range > 0.0)) throw UsageError("speaker range must be positive");
  if (!(rate > 0.0)) throw UsageError("speaker rate must be positive");
  if (!(jitter_sd >= 0.0)) throw UsageError("speaker jitter must be non-negative");
}

std::string_view noise_level_name(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::Zero: return "zero";
    case NoiseLevel::Low: return "low";
    case NoiseLevel::Moderate: return "moderate";
  }
  return "moderate";
}

std::optional<NoiseLevel> parse_noise_level(std::string_view name) {
  if (name == "zero") return NoiseLevel::Zero;
  if (name == "low") return NoiseLevel::Low;
  if (name == "moderate") return NoiseLevel::Moderate;
  return std::nullopt;
}

NoisePreset noise_preset(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::Zero: return {0.0, 0.0};
    case NoiseLevel::Low: return {3.0, 0.0};
    case NoiseLevel::Moderate: return {8.0, 0.10};
  }
  return {};
}

void SynthConfig::validate() const {
  if (n_statements == 0 || n_questions == 0) throw UsageError("sample counts must be positive");
  if (n_speakers_stmt == 0 || n_speakers_q == 0) throw UsageError("speaker counts must be positive");
  if (!(frame_step > 0.0)) throw UsageError("frame step must be positive");
  if (!(base_f0_min >= 120.0 && base_f0_max <= 350.0 && base_f0_min <= base_f0_max))
    throw UsageError("base_f0 range must lie within [120, 350] Hz");
  if (!(range_min > 0.0 && range_min <= range_max)) throw UsageError("invalid speaker range bounds");
  if (!(rate_min > 0.0 && rate_min <= rate_max)) throw UsageError("invalid speech rate bounds");
}

F0Contour gen_statement(Rng& rng, const SpeakerProfile& profile, const MelodyTemplate& melody,
                        const Perturbation& perturb, double frame_step) {
  profile.validate();
  const auto words = lay_out_words(rng, kStatementWords, profile.rate, perturb);
  const auto frames = frame_grid(words, frame_step, melody.gap_frames);
  const double total = words.back().start + words.back().duration;
  const double top = profile.base_f0 + profile.range / 2.0;

  std::vector<double> f0(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) {
    const double baseline = top - profile.range * (frames[j].time / total);
    f0[j] = baseline + melody.word_peak * profile.range * rise_fall(frames[j].pos);
  }
  return realise(rng, frames, f0, profile.jitter_sd, ClassLabel::Statement);
}

F0Contour gen_wh_question(Rng& rng, const SpeakerProfile& profile, QuestionVariant variant,
                          const MelodyTemplate& melody, const Perturbation& perturb,
                          double frame_step) {
  profile.validate();
  const std::size_t n_words =
      kMinQuestionWords + static_cast<std::size_t>(rng.below(kMaxQuestionWords - kMinQuestionWords + 1));
  const auto words = lay_out_words(rng, n_words, profile.rate, perturb);
  const auto frames = frame_grid(words, frame_step, melody.gap_frames);
  const double total = words.back().start + words.back().duration;
  const double high = profile.base_f0 + profile.range / 2.0;
  const double low = profile.base_f0 - profile.range / 2.0;
  const double n = static_cast<double>(frames.size());

  std::vector<double> f0(frames.size());
  if (variant == QuestionVariant::SustainedHigh) {
    for (std::size_t j = 0; j < frames.size(); ++j)
      f0[j] = high + melody.plateau_wobble * profile.range * rise_fall(frames[j].pos);
  } else {
    const double peak = high + melody.wh_peak * profile.range;
    const double onset = high - melody.wh_onset_drop * profile.range;
    const double wh_end = words[0].duration;
    const double peak_time = melody.wh_peak_position * wh_end;
    for (std::size_t j = 0; j < frames.size(); ++j) {
      const double t = frames[j].time;
      if (t <= peak_time) {
        f0[j] = onset + (peak - onset) * rise_fall(0.5 * t / peak_time);
      } else if (t <= wh_end) {
        // high-low on the wh-word: peak down to the speaker median
        const double u = (t - peak_time) / (wh_end - peak_time);
        f0[j] = profile.base_f0 + (peak - profile.base_f0) * (1.0 - rise_fall(0.5 * u));
      } else {
        const double u = (t - wh_end) / (total - wh_end);
        f0[j] = profile.base_f0 + (low - profile.base_f0) * u;
      }
    }
    if (variant == QuestionVariant::HighLowFallFinalRise) {
      const auto rise_start =
          static_cast<std::size_t>(std::floor((1.0 - melody.final_rise_span) * n));
      const double span = std::max(1.0, n - 1.0 - static_cast<double>(rise_start));
      for (std::size_t j = rise_start; j < frames.size(); ++j)
        f0[j] += melody.final_rise * profile.range * (static_cast<double>(j - rise_start) / span);
    }
  }
  return realise(rng, frames, f0, profile.jitter_sd, ClassLabel::WhQuestion);
}

SpeakerProfile draw_speaker(Rng& rng, const SynthConfig& config) {
  SpeakerProfile p;
  p.base_f0 = rng.uniform(config.base_f0_min, config.base_f0_max);
  p.range = rng.uniform(config.range_min, config.range_max);
  p.rate = rng.uniform(config.rate_min, config.rate_max);
  p.jitter_sd = noise_preset(config.noise).jitter_sd;
  return p;
}

std::vector<SynthSample> generate_contours(const SynthConfig& config) {
  config.validate();
  std::vector<SpeakerProfile> stmt_speakers, q_speakers;
  for (std::size_t k = 0; k < config.n_speakers_stmt; ++k) {
    Rng rng(derive_seed(config.seed, "speaker-statement", k));
    stmt_speakers.push_back(draw_speaker(rng, config));
  }
  for (std::size_t k = 0; k < config.n_speakers_q; ++k) {
    Rng rng(derive_seed(config.seed, "speaker-question", k));
    q_speakers.push_back(draw_speaker(rng, config));
  }
  const Perturbation perturb{noise_preset(config.noise).time_warp};
  char id[32];

  std::vector<SynthSample> out;
  out.reserve(config.n_statements + config.n_questions);
  for (std::size_t i = 0; i < config.n_statements; ++i) {
    Rng rng(derive_seed(config.seed, "statement", i));
    const std::size_t speaker = i % config.n_speakers_stmt;
    SynthSample s{gen_statement(rng, stmt_speakers[speaker], config.melody, perturb, config.frame_step),
                  std::nullopt};
    std::snprintf(id, sizeof id, "S%02zu", speaker + 1);
    s.contour.speaker_id = id;
    out.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < config.n_questions; ++i) {
    Rng rng(derive_seed(config.seed, "question", i));
    const std::size_t speaker = i % config.n_speakers_q;
    const auto variant = static_cast<QuestionVariant>(rng.below(kNumQuestionVariants));
    SynthSample s{gen_wh_question(rng, q_speakers[speaker], variant, config.melody, perturb,
                                  config.frame_step),
                  variant};
    std::snprintf(id, sizeof id, "Q%02zu", speaker + 1);
    s.contour.speaker_id = id;
    out.push_back(std::move(s));
  }
  return out;
}

std::string synth_config_json(const SynthConfig& config) {
  const auto preset = noise_preset(config.noise);
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["n_statements"] = config.n_statements;
  j["n_questions"] = config.n_questions;
  j["n_speakers_stmt"] = config.n_speakers_stmt;
  j["n_speakers_q"] = config.n_speakers_q;
  j["noise_level"] = noise_level_name(config.noise);
  j["jitter_sd_hz"] = preset.jitter_sd;
  j["time_warp"] = preset.time_warp;
  j["frame_step_s"] = config.frame_step;
  j["speaker_draws"] = {{"base_f0_hz", {config.base_f0_min, config.base_f0_max}},
                        {"range_hz", {config.range_min, config.range_max}},
                        {"rate_words_per_s", {config.rate_min, config.rate_max}}};
  const auto& m = config.melody;
  j["melody"] = {{"word_peak", m.word_peak},
                 {"wh_peak", m.wh_peak},
                 {"wh_onset_drop", m.wh_onset_drop},
                 {"wh_peak_position", m.wh_peak_position},
                 {"plateau_wobble", m.plateau_wobble},
                 {"final_rise_span", m.final_rise_span},
                 {"final_rise", m.final_rise},
                 {"gap_frames", m.gap_frames}};
  j["statement_words"] = kStatementWords;
  j["question_words"] = {kMinQuestionWords, kMaxQuestionWords};
  j["question_variants"] = "uniform over sustained_high, high_low_fall, high_low_fall_final_rise";
  j["calibration"] = {
      {"noise_presets_hz", {{"zero", 0.0}, {"low", 3.0}, {"moderate", 8.0}}},
      {"moderate_time_warp", 0.10},
      {"pilot_sweep",
       {{"range_hz_40_90_peaks_0.35_0.30", "convnet fold-1 accuracy 0.88 (moderate), 0.90 (zero)"},
        {"range_hz_80_140_peaks_0.5_0.5", "convnet fold-1 accuracy 0.98 (moderate)"}}},
      {"note", "speaker range and melody peaks widened after the pilot; noise presets unchanged"}};
  return j.dump(2) + "\n";
}

std::string synth_config_digest(const SynthConfig& config) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(fnv1a(synth_config_json(config))));
  return buffer;
}

std::string contour_to_csv(const F0Contour& contour) {
  std::string text = "time_s,f0_hz\n";
  for (const auto& p : contour.points) {
    text += format_fixed(p.time_s, 6);
    text += ',';
    text += format_fixed(p.f0_hz, 4);
    text += '\n';
  }
  return text;
}

SynthCorpus gen_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                       const LoadOptions& load) {
  const auto samples = generate_contours(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "contours", ec);
  if (ec) throw DataError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  std::string manifest = "path,label,speaker_id\n";
  std::size_t stmt = 0, quest = 0;
  char name[64];
  for (const auto& s : samples) {
    const bool is_stmt = s.contour.label == ClassLabel::Statement;
    std::snprintf(name, sizeof name, "contours/%s_%05zu.csv", is_stmt ? "statement" : "question",
                  is_stmt ? ++stmt : ++quest);
    write_file(out_dir / name, contour_to_csv(s.contour));
    manifest += name;
    manifest += ',';
    manifest += label_token(s.contour.label);
    manifest += ',';
    manifest += s.contour.speaker_id;
    manifest += '\n';
  }
  const auto manifest_path = out_dir / "manifest.csv";
  write_file(manifest_path, manifest);
  write_file(out_dir / "synth_config.json", synth_config_json(config));
  write_file(out_dir / "synth_config.digest", synth_config_digest(config) + "\n");

  SynthCorpus corpus;
  corpus.dataset = load_dataset_file(manifest_path, load);
  corpus.dataset.provenance = "synth:" + synth_config_digest(config);
  corpus.manifest_path = manifest_path;
  corpus.config_digest = synth_config_digest(config);
  return corpus;
}

}  // namespace pcc
