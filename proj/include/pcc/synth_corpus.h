#pragma once

// Parametric generator of labelled F0 contours. Statements ride a declining
// baseline with one rise-fall per word; wh-questions are either a sustained
// high plateau or a high-low fall from the wh-word, optionally with a final
// rise.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcc/contour_data.h"
#include "pcc/rng.h"

namespace pcc {

struct SpeakerProfile {
  double base_f0 = 200.0;   // Hz, speaker median
  double range = 60.0;      // Hz, excursion size
  double rate = 4.5;        // words per second
  double jitter_sd = 0.0;   // Hz, per-frame Gaussian noise

  // Throws UsageError outside base_f0 in [120, 350], range > 0, rate > 0,
  // jitter_sd >= 0.
  void validate() const;
};

enum class QuestionVariant { SustainedHigh = 0, HighLowFall = 1, HighLowFallFinalRise = 2 };
inline constexpr std::size_t kNumQuestionVariants = 3;

enum class NoiseLevel { Zero, Low, Moderate };

std::string_view noise_level_name(NoiseLevel level);
std::optional<NoiseLevel> parse_noise_level(std::string_view name);

// Melody shape constants. Heights are fractions of the speaker range.
struct MelodyTemplate {
  double word_peak = 0.5;         // statement rise-fall height per word
  double wh_peak = 0.5;            // wh-word peak above the high level
  double wh_onset_drop = 0.20;    // wh-word starts this far below the high level
  double wh_peak_position = 0.4;  // within the wh-word, as a fraction of its span
  double plateau_wobble = 0.08;   // per-word bump on the sustained plateau
  double final_rise_span = 0.15;  // fraction of frames carrying the final rise
  double final_rise = 0.6;        // height of the final rise
  std::size_t gap_frames = 1;     // unvoiced frames at each later word onset
};

// Per-sample realisation knobs derived from the noise level.
struct Perturbation {
  double time_warp = 0.0;  // each word lasts (1 +- time_warp) x nominal
};

struct NoisePreset {
  double jitter_sd = 0.0;
  double time_warp = 0.0;
};

NoisePreset noise_preset(NoiseLevel level);

struct SynthConfig {
  std::size_t n_statements = 1966;
  std::size_t n_questions = 2860;
  std::size_t n_speakers_stmt = 25;
  std::size_t n_speakers_q = 20;
  std::uint64_t seed = 42;
  NoiseLevel noise = NoiseLevel::Moderate;
  double frame_step = kFrameStep;

  // Speaker profiles are drawn uniformly from these ranges.
  double base_f0_min = 180.0, base_f0_max = 240.0;
  double range_min = 80.0, range_max = 140.0;
  double rate_min = 3.5, rate_max = 5.5;

  MelodyTemplate melody;

  void validate() const;
};

inline constexpr std::size_t kStatementWords = 3;
inline constexpr std::size_t kMinQuestionWords = 3;
inline constexpr std::size_t kMaxQuestionWords = 5;

F0Contour gen_statement(Rng& rng, const SpeakerProfile& profile,
                        const MelodyTemplate& melody = {}, const Perturbation& perturb = {},
                        double frame_step = kFrameStep);

F0Contour gen_wh_question(Rng& rng, const SpeakerProfile& profile, QuestionVariant variant,
                          const MelodyTemplate& melody = {}, const Perturbation& perturb = {},
                          double frame_step = kFrameStep);

SpeakerProfile draw_speaker(Rng& rng, const SynthConfig& config);

struct SynthSample {
  F0Contour contour;
  std::optional<QuestionVariant> variant;  // set for questions
};

// Pure in-memory generation: statements first, then questions. Each sample
// draws from its own stream derived from (seed, sample index).
std::vector<SynthSample> generate_contours(const SynthConfig& config);

// Every parameter and the seed as JSON text, with its FNV-1a digest.
std::string synth_config_json(const SynthConfig& config);
std::string synth_config_digest(const SynthConfig& config);

struct SynthCorpus {
  Dataset dataset;
  std::filesystem::path manifest_path;
  std::string config_digest;
};

// Writes contours/*.csv, manifest.csv and synth_config.json under `out_dir`,
// then loads the manifest back through the regular loader.
SynthCorpus gen_corpus(const SynthConfig& config, const std::filesystem::path& out_dir,
                       const LoadOptions& load = {});

std::string contour_to_csv(const F0Contour& contour);

}  // namespace pcc
