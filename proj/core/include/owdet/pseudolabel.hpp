#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "owdet/dataset.hpp"
#include "owdet/geometry.hpp"

namespace owdet {

// A scored detector output. When centerness and IoU sub-scores are
// present, objectness is derived as sqrt(centerness * iou); detectors
// that emit a single combined score are accepted verbatim.
struct Proposal {
  std::int64_t image_id = 0;
  BBox box;
  double objectness = 0.0;
  std::optional<double> centerness_score;
  std::optional<double> iou_score;
  std::string source_tag;
};

// A proposal promoted to a training annotation.
struct PseudoBox {
  std::int64_t pseudo_id = 0;
  std::int64_t image_id = 0;
  BBox box;
  double objectness = 0.0;
  std::string source_tag;
};

// Ground-truth base annotations plus accepted pseudo boxes; the
// supervision source for the second training phase. Invariant: no pseudo
// box overlaps a non-crowd base annotation on the same image above the
// filter threshold.
struct AnnotationPool {
  std::vector<GroundTruthAnnotation> base;
  std::vector<PseudoBox> pseudo;
};

constexpr double kDefaultGtFilterIou = 0.5;
constexpr double kDefaultMergeIou = 0.5;

double objectness_score(double centerness, double iou);

// Keeps exactly the proposals whose max IoU with any non-crowd base
// annotation on the same image is <= threshold (strictly-greater
// removal). Order preserved.
std::vector<Proposal> filter_against_gt(std::span<const Proposal> proposals,
                                        std::span<const GroundTruthAnnotation> base,
                                        double threshold = kDefaultGtFilterIou);

// Per image, the k proposals of highest objectness (fewer if fewer
// remain). Output is canonical: ascending image id, descending objectness,
// ties by input order. Pseudo ids are assigned sequentially in that order.
std::vector<PseudoBox> top_k(std::span<const Proposal> proposals, std::size_t k);

// Greedy cross-source merge: per image, pool all boxes, sort by
// descending objectness (ties by source order then input order), keep a
// box iff its IoU with every already-kept box is <= threshold. Pseudo ids
// are reassigned sequentially over the canonical output order.
std::vector<PseudoBox> merge_sources(
    const std::vector<std::pair<std::string, std::vector<PseudoBox>>>& sources,
    double iou_threshold = kDefaultMergeIou);

// Assembles the supervision pool and re-verifies the overlap invariant;
// a violation here signals an upstream pipeline bug.
AnnotationPool build_pool(const Dataset& ds_train, std::vector<PseudoBox> merged,
                          double gt_filter_threshold = kDefaultGtFilterIou);

// Proposal file: COCO-results-style array of records
// {image_id, bbox:[x,y,w,h], score, optional centerness, iou_pred, source}.
std::vector<Proposal> load_proposals(const std::filesystem::path& file,
                                     const std::string& default_source_tag = "");
void save_proposals(std::span<const Proposal> proposals,
                    const std::filesystem::path& file);

// Pseudo-pool file: same record shape plus pseudo_id and source tag.
std::vector<PseudoBox> load_pseudo_boxes(const std::filesystem::path& file);
void save_pseudo_boxes(std::span<const PseudoBox> boxes,
                       const std::filesystem::path& file);

}  // namespace owdet
