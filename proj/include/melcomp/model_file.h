// Versioned JSON persistence of a trained pipeline.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "melcomp/composer.h"
#include "melcomp/contour.h"
#include "melcomp/markov.h"

namespace melcomp {

inline constexpr int kModelFileVersion = 1;

struct CorpusFingerprint {
  std::string file;
  std::string sha256;
  friend bool operator==(const CorpusFingerprint&, const CorpusFingerprint&) = default;
};

struct ModelFile {
  int version = kModelFileVersion;
  GeneratorConfig config;
  TransitionModel pitch_model;
  TransitionModel duration_model;
  ContourModel pitch_contour;
  ContourModel rhythm_contour;
  std::vector<CorpusFingerprint> corpus;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// Canonical encoding: sorted keys, two-space indent, trailing newline.
/// Rationals are "num/den" strings, complex numbers [re, im] pairs and the
/// rest pitch is null.
std::string model_to_json(const ModelFile& model);

/// Throws SchemaError with the JSON pointer of the first bad field.
ModelFile model_from_json(std::string_view text);

}  // namespace melcomp
