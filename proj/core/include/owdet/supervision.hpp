#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "owdet/geometry.hpp"
#include "owdet/pseudolabel.hpp"

namespace owdet {

struct ImageSize {
  double width = 1.0;
  double height = 1.0;
};

// An anchor/proposal from the candidate set, with its predictions.
struct Candidate {
  std::int64_t id = 0;
  BBox box;                         // matching geometry
  double predicted_prob = 0.0;      // classification output, [0, 1]
  BBox predicted_box;               // regressed coordinates
  double predicted_objectness = 0.0;
};

enum class MatchKind { Background, Base, Pseudo };

// Per-candidate label and targets. Targets are valid only when the
// candidate is matched (kind != Background). The classification target is
// 1 iff the match is to a base annotation.
struct CandidateLabel {
  std::int64_t candidate_id = 0;
  MatchKind kind = MatchKind::Background;
  std::int64_t matched_id = -1;  // annotation id or pseudo id
  double match_iou = 0.0;
  BBox target_box;
  double prob_target = 0.0;
  double centerness_target = 0.0;
  double iou_target = 0.0;
  double objectness_target = 0.0;  // sqrt(centerness_target * iou_target)
};

struct Assignment {
  ImageSize image;
  std::vector<Candidate> candidates;
  std::vector<CandidateLabel> labels;  // parallel to candidates

  std::size_t n_total() const { return candidates.size(); }
  std::size_t n_base() const;
  std::size_t n_pseudo() const;
};

constexpr double kDefaultIouPositiveThreshold = 0.5;

// Centerness of a location inside a target box:
// sqrt((min(l,r)/max(l,r)) * (min(t,b)/max(t,b))) over the distances to
// the four sides. 1 at the exact center, 0 on any edge. Locations outside
// the target have no defined centerness and raise ValidationError.
double centerness(double px, double py, const BBox& target);

// Matches each candidate to the pool box (ground truth or pseudo) of
// maximal IoU when that IoU reaches the threshold, else labels it
// background. Ties resolve to the base annotation. The objectness target
// is sqrt(centerness * IoU) of the candidate box against its match, with
// centerness taken at the candidate box center (0 if that center falls
// outside the matched box).
Assignment assign(std::vector<Candidate> candidates, const AnnotationPool& pool,
                  std::int64_t image_id, ImageSize image,
                  double iou_positive_threshold = kDefaultIouPositiveThreshold);

struct LossBreakdown {
  double cls = 0.0;
  double reg = 0.0;
  double obj = 0.0;
  double total = 0.0;
};

// Standard closed-world loss: binary cross-entropy over all candidates
// (normalized by the candidate count) plus L1 regression over base-matched
// candidates (normalized by their count). Log arguments are clamped at
// 1e-12 so confident-wrong classifications stay finite. Empty regression
// sets contribute 0.
LossBreakdown loss_std(const Assignment& a);

// Objectness-supervised loss over base-matched candidates only:
// regression plus |o - o*|, both normalized by the base count. Background
// candidates contribute nothing.
LossBreakdown loss_oln(const Assignment& a);

// Same functional form extended over base- and pseudo-matched candidates,
// normalized by the size of their union.
LossBreakdown loss_good(const Assignment& a);

}  // namespace owdet
