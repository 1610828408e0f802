#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcc {

// Sentence type. The integer encoding is stable: it is used as the class
// index in the network heads and written into manifests and reports.
enum class ClassLabel : std::uint8_t { Statement = 0, WhQuestion = 1 };

inline constexpr std::size_t kNumClasses = 2;
inline constexpr std::size_t kPaddedLength = 1024;
inline constexpr double kFrameStep = 0.0125;  // seconds

constexpr std::size_t class_index(ClassLabel label) {
  return static_cast<std::size_t>(label);
}
ClassLabel label_from_index(std::size_t index);

// "statement" / "wh_question", as used in manifests.
std::string_view label_token(ClassLabel label);
std::optional<ClassLabel> parse_label_token(std::string_view token);

struct ContourPoint {
  double time_s = 0.0;
  double f0_hz = 0.0;  // 0 marks an unvoiced frame
};

struct F0Contour {
  std::vector<ContourPoint> points;
  ClassLabel label = ClassLabel::Statement;
  std::string speaker_id;
};

// Throws DataError if times are not strictly increasing and non-negative,
// any f0 is negative or non-finite, or no point is voiced.
void validate_contour(const F0Contour& contour);

// Contour CSV: header `time_s,f0_hz`, LF or CRLF line endings.
F0Contour parse_contour_csv(std::string_view text);

// Praat PitchTier, short text format only.
F0Contour parse_pitchtier(std::string_view text);

// Frames on the grid 0, step, 2*step, ... clipped to the contour's time span.
// Between two voiced points the value is linearly interpolated; a frame that
// falls between a voiced and an unvoiced point is 0.
std::vector<double> resample_contour(const F0Contour& contour,
                                     double frame_step = kFrameStep);

enum class Normalization { None, Scale500 };

inline constexpr double kScale500Divisor = 500.0;

std::string_view normalization_name(Normalization scheme);
std::optional<Normalization> parse_normalization(std::string_view name);

std::vector<double> normalize_frames(std::span<const double> frames,
                                     Normalization scheme);

struct PaddedSample {
  std::vector<double> values;  // always kPaddedLength entries
  std::size_t valid_len = 0;
  ClassLabel label = ClassLabel::Statement;
  std::string speaker_id;
};

// Copies `frames` into a zero-filled vector of `target` entries. Input longer
// than `target` is an error unless `truncate` is set.
PaddedSample pad_to_fixed(std::span<const double> frames,
                          std::size_t target = kPaddedLength,
                          bool truncate = false);

struct Dataset {
  std::vector<PaddedSample> samples;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t count(ClassLabel label) const;
};

struct LoadOptions {
  Normalization normalization = Normalization::Scale500;
  double frame_step = kFrameStep;
  bool truncate = false;
};

// Manifest CSV: header `path,label,speaker_id`. Paths are resolved against
// `base_dir`; the extension selects the parser (.csv or .PitchTier).
Dataset load_dataset(std::string_view manifest,
                     const std::filesystem::path& base_dir,
                     const LoadOptions& options = {});

// Reads the manifest at `manifest_path`; paths resolve relative to its
// directory.
Dataset load_dataset_file(const std::filesystem::path& manifest_path,
                          const LoadOptions& options = {});

// The extension selects the parser (.csv or .PitchTier, case-insensitive).
F0Contour load_contour_file(const std::filesystem::path& contour_path);

PaddedSample load_sample(const std::filesystem::path& contour_path,
                         ClassLabel label, std::string speaker_id,
                         const LoadOptions& options = {});

Dataset subset(const Dataset& data, std::span<const std::size_t> indices);

// 64-bit FNV-1a over the sample values, lengths and labels, as 16 hex digits.
std::string dataset_digest(const Dataset& data);

struct FoldSplit {
  std::vector<std::vector<std::size_t>> folds;

  std::size_t k() const { return folds.size(); }
};

// Shuffles 0..n-1 with an Rng seeded from `seed`, then deals them into k
// contiguous chunks; the first n mod k chunks get one extra element.
FoldSplit split_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace pcc
