#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "owdet/dataset.hpp"
#include "owdet/geometry.hpp"

namespace owdet {

// A class-agnostic detector output, ranked by score.
struct Detection {
  std::int64_t image_id = 0;
  BBox box;
  double score = 0.0;
};

struct EvalConfig {
  std::size_t budget = 100;
  std::vector<double> iou_thresholds = default_iou_thresholds();
  double base_association_iou = 0.5;
  bool size_stratified = true;

  // 0.50 : 0.05 : 0.95, ten thresholds.
  static std::vector<double> default_iou_thresholds();
  void validate() const;
};

// Matched/total ground-truth counts for one evaluation stratum. matched
// is aligned with the config's IoU thresholds; total is
// threshold-independent. Crowd annotations are never counted.
struct StratumCounts {
  std::int64_t total_gt = 0;
  std::vector<std::int64_t> matched;

  // Mean over thresholds of matched/total; 0 when there is no ground
  // truth (flagged via EvalReport::zero_gt_warning).
  double average_recall() const;
};

struct EvalReport {
  std::string dataset_id;
  std::string split_name;
  std::string source_tag;
  EvalConfig config;
  std::size_t per_class_budget = 5;

  StratumCounts all;           // AR over every class
  StratumCounts novel;         // AR over novel classes, base-budget exclusion applied
  StratumCounts novel_small;
  StratumCounts novel_medium;
  StratumCounts novel_large;
  std::map<std::int64_t, StratumCounts> per_class;  // novel classes with >=1 GT
  bool zero_gt_warning = false;

  double ar_all() const { return all.average_recall(); }
  double ar_novel() const { return novel.average_recall(); }
  double ar_novel_small() const { return novel_small.average_recall(); }
  double ar_novel_medium() const { return novel_medium.average_recall(); }
  double ar_novel_large() const { return novel_large.average_recall(); }
  std::map<std::int64_t, double> per_class_ar_map() const;
};

// Single-image greedy matching at one IoU threshold and budget k.
// Detections are taken in descending score order (ties by input order);
// each matches the unmatched non-crowd ground truth of highest IoU >=
// iou_t. Crowd ground truth may be matched by any detection without
// consuming budget or counting as recall. Returns
// (#matched non-crowd GT, #non-crowd GT).
std::pair<std::int64_t, std::int64_t> recall_single(
    std::span<const Detection> dets, std::span<const GroundTruthAnnotation> gts,
    double iou_t, std::size_t k);

// Corpus-level AR: mean over IoU thresholds of total matched / total
// ground truth at the configured budget. Inputs may span multiple images.
double average_recall(std::span<const Detection> dets,
                      std::span<const GroundTruthAnnotation> gts,
                      const EvalConfig& cfg);

// Novel-class AR with the base-budget exclusion protocol: detections
// whose max IoU with any base-class ground truth reaches
// cfg.base_association_iou are removed before budgeting; recall is then
// measured against novel-class ground truth only.
StratumCounts ar_novel(std::span<const Detection> dets, const Dataset& ds,
                       const ClassSplit& split, const EvalConfig& cfg);

// Per novel class: novel-class evaluation with ground truth restricted to
// that class (base exclusion unchanged). Classes with zero non-crowd
// ground truth are omitted.
std::map<std::int64_t, double> per_class_ar(std::span<const Detection> dets,
                                            const Dataset& ds, const ClassSplit& split,
                                            const EvalConfig& cfg);

// Full report: overall AR, novel AR with size strata, and per-class AR
// at its own budget. threads bounds worker parallelism; results are
// independent of it.
EvalReport evaluate_detections(std::span<const Detection> dets, const Dataset& ds,
                               const ClassSplit& split, const EvalConfig& cfg,
                               std::size_t per_class_budget = 5, unsigned threads = 1);

// Relative per-class difference (ar_x - ar_ref) / ar_ref. Classes where
// the reference is 0 are reported as undefined rather than infinite.
struct RelDiff {
  bool defined = false;
  double value = 0.0;
};
std::map<std::int64_t, RelDiff> relative_diff(
    const std::map<std::int64_t, double>& ar_x,
    const std::map<std::int64_t, double>& ar_ref);

// Detection file: COCO-results array {image_id, bbox:[x,y,w,h], score}.
std::vector<Detection> load_detections(const std::filesystem::path& file);
void save_detections(std::span<const Detection> dets,
                     const std::filesystem::path& file);

// Report files: a JSON document carrying every report field plus a
// config echo, and a human-readable rendering with percentages at one
// decimal place.
void save_report(const EvalReport& report, const std::filesystem::path& json_file);
EvalReport load_report(const std::filesystem::path& json_file);
std::string report_to_text(const EvalReport& report);

}  // namespace owdet
