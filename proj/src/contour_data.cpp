#include "pcc/contour_data.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcc/error.h"
#include "pcc/rng.h"
#include "text_util.h"

namespace pcc {

namespace {

using detail::Line;
using detail::parse_double;
using detail::split_fields;
using detail::split_lines;
using detail::trim;

// Grid times closer than this to a contour point are treated as on the point.
constexpr double kTimeSnap = 1e-9;

std::string at_line(std::size_t number) {
  return "line " + std::to_string(number) + ": ";
}

void check_point(const ContourPoint& point, const ContourPoint* previous,
                 std::size_t line) {
  if (!std::isfinite(point.time_s) || !std::isfinite(point.f0_hz))
    throw DataError(at_line(line) + "non-finite value");
  if (point.time_s < 0.0) throw DataError(at_line(line) + "negative time");
  if (point.f0_hz < 0.0) throw DataError(at_line(line) + "negative f0");
  if (previous != nullptr && !(point.time_s > previous->time_s))
    throw DataError(at_line(line) + "non-increasing time");
}

bool has_voiced_point(const F0Contour& contour) {
  return std::any_of(contour.points.begin(), contour.points.end(),
                     [](const ContourPoint& p) { return p.f0_hz > 0.0; });
}

std::string strip_quotes(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s.remove_prefix(1);
    s.remove_suffix(1);
  }
  return std::string(s);
}

// Splits `key = value`; returns false when there is no '='.
bool split_assignment(std::string_view line, std::string_view& key,
                      std::string_view& value) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return false;
  key = trim(line.substr(0, eq));
  value = trim(line.substr(eq + 1));
  return true;
}

void append_u64(std::uint64_t& hash, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    hash ^= (value >> (8 * i)) & 0xffU;
    hash *= 0x100000001b3ULL;
  }
}

}  // namespace

ClassLabel label_from_index(std::size_t index) {
  if (index >= kNumClasses) throw DataError("class index out of range: " + std::to_string(index));
  return static_cast<ClassLabel>(index);
}

std::string_view label_token(ClassLabel label) {
  return label == ClassLabel::Statement ? "statement" : "wh_question";
}

std::optional<ClassLabel> parse_label_token(std::string_view token) {
  if (token == "statement") return ClassLabel::Statement;
  if (token == "wh_question") return ClassLabel::WhQuestion;
  return std::nullopt;
}

void validate_contour(const F0Contour& contour) {
  if (contour.points.empty()) throw DataError("contour has no points");
  for (std::size_t i = 0; i < contour.points.size(); ++i) {
    check_point(contour.points[i], i == 0 ? nullptr : &contour.points[i - 1], i + 1);
  }
  if (!has_voiced_point(contour)) throw DataError("contour has no voiced point");
}

F0Contour parse_contour_csv(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && detail::blank(lines[i].text)) ++i;
  if (i == lines.size()) throw DataError("empty contour document");
  {
    const auto header = split_fields(lines[i].text);
    if (header.size() != 2 || header[0] != "time_s" || header[1] != "f0_hz")
      throw DataError(at_line(lines[i].number) + "expected header `time_s,f0_hz`");
  }
  F0Contour contour;
  for (++i; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (detail::blank(line.text)) continue;
    const auto fields = split_fields(line.text);
    if (fields.size() != 2) throw DataError(at_line(line.number) + "expected 2 fields");
    const auto time = parse_double(fields[0]);
    const auto f0 = parse_double(fields[1]);
    if (!time || !f0) throw DataError(at_line(line.number) + "malformed number");
    const ContourPoint point{*time, *f0};
    check_point(point, contour.points.empty() ? nullptr : &contour.points.back(), line.number);
    contour.points.push_back(point);
  }
  if (contour.points.empty()) throw DataError("contour document has no data rows");
  if (!has_voiced_point(contour)) throw DataError("contour has no voiced point");
  return contour;
}

F0Contour parse_pitchtier(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<Line> content;
  for (const auto& line : lines)
    if (!detail::blank(line.text)) content.push_back({line.number, trim(line.text)});

  std::string_view key;
  std::string_view value;
  if (content.empty() || !split_assignment(content[0].text, key, value) ||
      key != "File type" || strip_quotes(value) != "ooTextFile")
    throw DataError("line 1: expected `File type = \"ooTextFile\"`");
  if (content.size() < 2 || !split_assignment(content[1].text, key, value) ||
      key != "Object class")
    throw DataError("expected `Object class = \"PitchTier\"` after the file type");
  if (strip_quotes(value) != "PitchTier")
    throw DataError(at_line(content[1].number) + "wrong object class `" +
                    strip_quotes(value) + "`, expected PitchTier");

  std::vector<std::pair<double, std::size_t>> numbers;
  for (std::size_t i = 2; i < content.size(); ++i) {
    if (content[i].text.find('=') != std::string_view::npos)
      throw DataError(at_line(content[i].number) +
                      "long text format is not supported, use the short format");
    const auto number = parse_double(content[i].text);
    if (!number) throw DataError(at_line(content[i].number) + "malformed number");
    numbers.emplace_back(*number, content[i].number);
  }
  if (numbers.size() < 3) throw DataError("PitchTier is missing xmin, xmax or the point count");
  const double xmin = numbers[0].first;
  const double xmax = numbers[1].first;
  const double declared = numbers[2].first;
  if (declared < 0 || declared != std::floor(declared))
    throw DataError(at_line(numbers[2].second) + "point count is not a non-negative integer");
  const auto count = static_cast<std::size_t>(declared);
  const std::size_t values = numbers.size() - 3;
  if (values != 2 * count)
    throw DataError("PitchTier declares " + std::to_string(count) + " points but holds " +
                    std::to_string(values) + " values (expected " +
                    std::to_string(2 * count) + ")");
  if (count == 0) throw DataError("PitchTier has no points");

  F0Contour contour;
  for (std::size_t p = 0; p < count; ++p) {
    const auto& [time, line] = numbers[3 + 2 * p];
    const ContourPoint point{time, numbers[4 + 2 * p].first};
    if (time < xmin || time > xmax)
      throw DataError(at_line(line) + "time outside [xmin, xmax]");
    check_point(point, contour.points.empty() ? nullptr : &contour.points.back(), line);
    contour.points.push_back(point);
  }
  if (!has_voiced_point(contour)) throw DataError("contour has no voiced point");
  return contour;
}

std::vector<double> resample_contour(const F0Contour& contour, double frame_step) {
  if (!(frame_step > 0.0)) throw UsageError("frame step must be positive");
  if (contour.points.empty()) throw DataError("cannot resample an empty contour");
  const auto& pts = contour.points;
  const double first = pts.front().time_s;
  const double last = pts.back().time_s;
  const auto j_begin = static_cast<std::int64_t>(std::ceil(first / frame_step - kTimeSnap));
  const auto j_end = static_cast<std::int64_t>(std::floor(last / frame_step + kTimeSnap));

  std::vector<double> frames;
  if (j_end >= j_begin) frames.reserve(static_cast<std::size_t>(j_end - j_begin + 1));
  std::size_t k = 0;  // pts[k].time_s <= t (up to the snap tolerance)
  for (std::int64_t j = std::max<std::int64_t>(j_begin, 0); j <= j_end; ++j) {
    const double t = static_cast<double>(j) * frame_step;
    while (k + 1 < pts.size() && pts[k + 1].time_s <= t + kTimeSnap) ++k;
    if (std::abs(t - pts[k].time_s) <= kTimeSnap || k + 1 == pts.size()) {
      frames.push_back(pts[k].f0_hz);
      continue;
    }
    const ContourPoint& a = pts[k];
    const ContourPoint& b = pts[k + 1];
    if (a.f0_hz > 0.0 && b.f0_hz > 0.0) {
      frames.push_back(a.f0_hz + (t - a.time_s) * (b.f0_hz - a.f0_hz) / (b.time_s - a.time_s));
    } else {
      frames.push_back(0.0);
    }
  }
  if (frames.empty()) throw DataError("contour spans no frame on the resampling grid");
  return frames;
}

std::string_view normalization_name(Normalization scheme) {
  return scheme == Normalization::None ? "none" : "scale500";
}

std::optional<Normalization> parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::None;
  if (name == "scale500") return Normalization::Scale500;
  return std::nullopt;
}

std::vector<double> normalize_frames(std::span<const double> frames, Normalization scheme) {
  std::vector<double> out(frames.begin(), frames.end());
  if (scheme == Normalization::Scale500)
    for (auto& v : out) v /= kScale500Divisor;
  return out;
}

PaddedSample pad_to_fixed(std::span<const double> frames, std::size_t target, bool truncate) {
  if (frames.empty()) throw DataError("cannot pad an empty frame vector");
  if (frames.size() > target && !truncate)
    throw DataError("contour needs " + std::to_string(frames.size()) +
                    " frames but only " + std::to_string(target) + " are available");
  PaddedSample sample;
  sample.valid_len = std::min(frames.size(), target);
  sample.values.assign(target, 0.0);
  for (std::size_t i = 0; i < sample.valid_len; ++i) {
    if (!std::isfinite(frames[i])) throw DataError("non-finite frame value at index " + std::to_string(i));
    sample.values[i] = frames[i];
  }
  return sample;
}

std::size_t Dataset::count(ClassLabel label) const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [label](const PaddedSample& s) { return s.label == label; }));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

F0Contour load_contour_file(const std::filesystem::path& contour_path) {
  const std::string text = read_text_file(contour_path);
  std::string ext = contour_path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".csv") return parse_contour_csv(text);
  if (ext == ".pitchtier") return parse_pitchtier(text);
  throw DataError("unknown contour file extension `" + ext + "`");
}

PaddedSample load_sample(const std::filesystem::path& contour_path, ClassLabel label,
                         std::string speaker_id, const LoadOptions& options) {
  const F0Contour contour = load_contour_file(contour_path);
  const auto frames = resample_contour(contour, options.frame_step);
  const auto normalized = normalize_frames(frames, options.normalization);
  PaddedSample sample = pad_to_fixed(normalized, kPaddedLength, options.truncate);
  sample.label = label;
  sample.speaker_id = std::move(speaker_id);
  return sample;
}

Dataset load_dataset(std::string_view manifest, const std::filesystem::path& base_dir,
                     const LoadOptions& options) {
  const auto lines = split_lines(manifest);
  std::size_t i = 0;
  while (i < lines.size() && detail::blank(lines[i].text)) ++i;
  if (i == lines.size()) throw DataError("empty manifest");
  {
    const auto header = split_fields(lines[i].text);
    if (header.size() != 3 || header[0] != "path" || header[1] != "label" ||
        header[2] != "speaker_id")
      throw DataError("manifest " + at_line(lines[i].number) +
                      "expected header `path,label,speaker_id`");
  }
  Dataset data;
  for (++i; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (detail::blank(line.text)) continue;
    const auto fields = split_fields(line.text);
    const std::string where = "manifest " + at_line(line.number);
    if (fields.size() != 3) throw DataError(where + "expected 3 fields");
    const auto label = parse_label_token(fields[1]);
    if (!label) throw DataError(where + "unknown label `" + std::string(fields[1]) + "`");
    const std::filesystem::path path = base_dir / std::filesystem::path(std::string(fields[0]));
    try {
      data.samples.push_back(load_sample(path, *label, std::string(fields[2]), options));
    } catch (const DataError& e) {
      throw DataError(where + std::string(fields[0]) + ": " + e.what());
    }
  }
  if (data.samples.empty()) throw DataError("manifest lists no samples");
  return data;
}

Dataset load_dataset_file(const std::filesystem::path& manifest_path, const LoadOptions& options) {
  Dataset data = load_dataset(read_text_file(manifest_path), manifest_path.parent_path(), options);
  data.provenance = manifest_path.string();
  return data;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.provenance = data.provenance;
  out.samples.reserve(indices.size());
  for (const auto index : indices) out.samples.push_back(data.samples.at(index));
  return out;
}

std::string dataset_digest(const Dataset& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  append_u64(hash, data.samples.size());
  for (const auto& sample : data.samples) {
    append_u64(hash, class_index(sample.label));
    append_u64(hash, sample.valid_len);
    for (const double v : sample.values) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      append_u64(hash, bits);
    }
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

FoldSplit split_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("k-fold split needs k >= 2 (got " + std::to_string(k) + ")");
  if (k > n)
    throw UsageError("k-fold split needs k <= n (k = " + std::to_string(k) +
                     ", n = " + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(order);

  FoldSplit split;
  split.folds.resize(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    split.folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                          order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return split;
}

}  // namespace pcc
