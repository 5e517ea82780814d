// End-to-end steps behind the CLI subcommands.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "melcomp/composer.h"
#include "melcomp/corpus.h"
#include "melcomp/model_file.h"

namespace melcomp {

/// Training sequences of one feature, onsets taken at absolute song
/// position so off-beats follow the bar grid.
std::vector<TrainingSequence> training_sequences(std::span<const Phrase> phrases, const StateAlphabet& alphabet);

/// Trains both Markov models and learns both contours.
ModelFile train_model(const std::vector<CorpusEntry>& corpus, const GeneratorConfig& config);

/// Cluster diagnostics and context-size estimate as a plain-text table.
void print_training_summary(std::ostream& out, const ModelFile& model);

struct ComposeRequest {
  int bars = 4;
  int count = 1;
  std::uint64_t seed = 0;
  bool follow_contours = true;
  bool parametric = true;
  std::optional<double> sigma2_pitch;
  std::optional<double> sigma2_rhythm;
};

struct ComposedMelody {
  std::uint64_t seed = 0;
  Phrase phrase;
};

/// Composes request.count phrases with seeds seed, seed+1, ... Seeds run
/// in parallel; results come back in seed order. SearchExhausted carries
/// the failing seed in its message.
std::vector<ComposedMelody> compose_melodies(const ModelFile& model, const ComposeRequest& request);

/// Rows: index,onset,duration,pitch (empty pitch for rests).
void write_melody_csv(std::ostream& out, const Phrase& phrase);

/// cluster_id,size,width,quality,selected
void write_cluster_csv(std::ostream& out, const ContourModel& contour);

/// cluster_id,t,value for every cluster's mean contour on [0, 1).
void write_contour_csv(std::ostream& out, const ContourModel& contour);

void print_model_summary(std::ostream& out, const ModelFile& model);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace melcomp
