#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "owdet/eval.hpp"
#include "owdet/geometry.hpp"
#include "owdet/pseudolabel.hpp"

namespace owdet {

// Highest-objectness pseudo box per image for one source.
struct TopBoxes {
  std::string source_tag;
  std::map<std::int64_t, BBox> by_image;
};

TopBoxes top1_by_image(std::span<const PseudoBox> boxes, std::string source_tag);

// Fraction of common images on which the two sources' top-1 boxes overlap
// at IoU >= iou_t. Images missing in either source leave the denominator;
// an empty common image set yields nullopt.
std::optional<double> pairwise_overlap(const TopBoxes& a, const TopBoxes& b,
                                       double iou_t = 0.5);

// A pseudo-label source under consideration for the ensemble: its holdout
// performance gain and its top-1 boxes for redundancy scoring.
struct SourceCandidate {
  std::string source_tag;
  double utility = 0.0;
  TopBoxes top1;
};

// Holdout novel-class AR of the source minus the baseline's. Both reports
// must describe the same dataset and split.
double utility(const EvalReport& source_holdout, const EvalReport& baseline);

struct SelectionStep {
  std::string source_tag;
  double utility = 0.0;
  double uniqueness = 1.0;  // 1 - max overlap with the selected set
  double score = 0.0;       // utility * uniqueness at selection time
};

// Greedy ensembling order: repeatedly append the remaining source with
// the highest utility * uniqueness, where uniqueness is one minus the
// maximum top-1 overlap against the already-selected sources (vacuously 1
// at the first step). Exact score ties break lexicographically by tag.
// Sources with non-positive scores are still appended, so the result is
// always a full permutation.
std::vector<SelectionStep> greedy_order(const std::vector<SourceCandidate>& candidates,
                                        double overlap_iou = 0.5);

// Ordering file: one record per selection step.
void save_order(std::span<const SelectionStep> steps,
                const std::filesystem::path& file);
std::vector<SelectionStep> load_order(const std::filesystem::path& file);

}  // namespace owdet
