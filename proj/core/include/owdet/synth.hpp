#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "owdet/dataset.hpp"
#include "owdet/pseudolabel.hpp"

namespace owdet {

// One synthetic object class: taxonomy entry, split membership, and the
// box-size profile its instances are drawn from.
struct SynthClassSpec {
  std::int64_t category_id = 0;
  std::string name;
  std::string supercategory = "synthetic";
  bool is_base = false;
  double sqrt_area_min = 16.0;
  double sqrt_area_max = 128.0;
  double aspect_min = 0.5;
  double aspect_max = 2.0;
  std::size_t min_per_image = 0;
  std::size_t max_per_image = 2;
};

// Detector bias profile for one simulated proposal source: per-size-class
// recall, localization jitter, and score noise.
struct SourceProfile {
  std::string tag;
  double recall_small = 1.0;
  double recall_medium = 1.0;
  double recall_large = 1.0;
  double loc_jitter_sigma = 0.0;
  double score_noise_sigma = 0.0;
  double false_positives_per_image = 0.0;

  double recall_for(SizeClass c) const;
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t n_images = 0;
  double image_width = 640.0;
  double image_height = 480.0;
  double max_placement_iou = 0.3;
  std::vector<SynthClassSpec> classes;
  std::vector<SourceProfile> sources;

  void validate() const;

  // Small mixed corpus with two biased sources: "geometry" favors large
  // boxes, "appearance" favors small ones.
  static SynthSpec default_spec();
};

// Seeded corpus generation. Boxes are placed by per-image rejection
// sampling so the max pairwise IoU within an image stays below the
// placement bound; placement failure after bounded retries names the
// overcrowded image. Per-image streams are derived from the master seed,
// so generation is order-independent.
std::pair<Dataset, ClassSplit> gen_corpus(const SynthSpec& spec);

// Simulated proposal source: each ground-truth box is recalled with its
// size-class probability and jittered; false positives are added at the
// profile rate. Scores are the proposal's best IoU against the image's
// ground truth plus noise, clamped to [0, 1]; centerness/IoU sub-scores
// are emitted consistently with objectness = sqrt(centerness * iou).
std::vector<Proposal> simulate_source(const Dataset& ds, const SourceProfile& profile,
                                      std::uint64_t seed);

// SynthSpec file (JSON) so corpora are reproducible from a config.
SynthSpec load_synth_spec(const std::filesystem::path& file);
void save_synth_spec(const SynthSpec& spec, const std::filesystem::path& file);

}  // namespace owdet
