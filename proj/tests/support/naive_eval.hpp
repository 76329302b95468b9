#pragma once

// Independent reference evaluator used as an oracle. Everything here is a
// straightforward double-loop restatement of the matching protocol,
// written without reusing the library's evaluation path (its own IoU
// arithmetic included). Keep it slow and obvious.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "owdet/dataset.hpp"
#include "owdet/eval.hpp"

namespace naive {

double box_iou(const owdet::BBox& a, const owdet::BBox& b);

// Matched non-crowd ground truth on a single image at one threshold and
// budget. Detections in descending score order (input order on ties);
// each takes the unmatched non-crowd ground truth of highest IoU >= t;
// detections overlapping only crowd regions are set aside without
// spending budget.
std::int64_t match_one_image(const std::vector<const owdet::Detection*>& dets,
                             const std::vector<const owdet::GroundTruthAnnotation*>& gts,
                             double iou_t, std::size_t budget);

double average_recall(std::span<const owdet::Detection> dets,
                      std::span<const owdet::GroundTruthAnnotation> gts,
                      const std::vector<double>& thresholds, std::size_t budget);

double ar_novel(std::span<const owdet::Detection> dets, const owdet::Dataset& ds,
                const owdet::ClassSplit& split, const std::vector<double>& thresholds,
                std::size_t budget, double base_association_iou);

std::map<std::int64_t, double> per_class_ar(std::span<const owdet::Detection> dets,
                                            const owdet::Dataset& ds,
                                            const owdet::ClassSplit& split,
                                            const std::vector<double>& thresholds,
                                            std::size_t budget,
                                            double base_association_iou);

}  // namespace naive
