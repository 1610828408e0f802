#pragma once

#include "pcc/contour_data.h"
#include "pcc/synth_corpus.h"

namespace pcc::testing {

// Small in-memory synthetic dataset, built without touching the filesystem.
inline Dataset synth_dataset(std::size_t n_statements, std::size_t n_questions, std::uint64_t seed = 42,
                             NoiseLevel noise = NoiseLevel::Moderate) {
  SynthConfig cfg;
  cfg.n_statements = n_statements;
  cfg.n_questions = n_questions;
  cfg.seed = seed;
  cfg.noise = noise;
  Dataset data;
  data.provenance = "synthetic";
  for (const auto& s : generate_contours(cfg)) {
    auto sample = pad_to_fixed(normalize_frames(resample_contour(s.contour), Normalization::Scale500));
    sample.label = s.contour.label;
    sample.speaker_id = s.contour.speaker_id;
    data.samples.push_back(std::move(sample));
  }
  return data;
}

}  // namespace pcc::testing
