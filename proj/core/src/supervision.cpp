#include "owdet/supervision.hpp"

#include <algorithm>
#include <cmath>

namespace owdet {

namespace {

constexpr double kLogClamp = 1e-12;

double centerness_or_zero(double px, double py, const BBox& target) {
  const double l = px - target.x1;
  const double r = target.x2 - px;
  const double t = py - target.y1;
  const double b = target.y2 - py;
  if (l < 0 || r < 0 || t < 0 || b < 0) {
    return 0.0;
  }
  const double mx = std::max(l, r);
  const double my = std::max(t, b);
  if (mx == 0.0 || my == 0.0) {
    // Degenerate target extent: the location sits on both opposing sides.
    return 0.0;
  }
  return std::sqrt((std::min(l, r) / mx) * (std::min(t, b) / my));
}

double bce(double p, double p_star) {
  const double q = p_star >= 0.5 ? p : 1.0 - p;
  return -std::log(std::max(q, kLogClamp));
}

double l1_box(const BBox& pred, const BBox& target, const ImageSize& image) {
  const double w = image.width > 0 ? image.width : 1.0;
  const double h = image.height > 0 ? image.height : 1.0;
  return (std::abs(pred.x1 - target.x1) / w + std::abs(pred.y1 - target.y1) / h +
          std::abs(pred.x2 - target.x2) / w + std::abs(pred.y2 - target.y2) / h) /
         4.0;
}

}  // namespace

std::size_t Assignment::n_base() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(),
                    [](const CandidateLabel& l) { return l.kind == MatchKind::Base; }));
}

std::size_t Assignment::n_pseudo() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const CandidateLabel& l) {
        return l.kind == MatchKind::Pseudo;
      }));
}

double centerness(double px, double py, const BBox& target) {
  if (px < target.x1 || px > target.x2 || py < target.y1 || py > target.y2) {
    throw ValidationError("centerness: location lies outside the target box");
  }
  return centerness_or_zero(px, py, target);
}

Assignment assign(std::vector<Candidate> candidates, const AnnotationPool& pool,
                  std::int64_t image_id, ImageSize image,
                  double iou_positive_threshold) {
  if (!(iou_positive_threshold > 0.0 && iou_positive_threshold <= 1.0)) {
    throw ValidationError("assign: iou_positive_threshold must lie in (0, 1]");
  }
  for (const auto& c : candidates) {
    if (c.predicted_prob < 0.0 || c.predicted_prob > 1.0 ||
        c.predicted_objectness < 0.0 || c.predicted_objectness > 1.0) {
      throw ValidationError("assign: candidate " + std::to_string(c.id) +
                            " has a probability or objectness outside [0, 1]");
    }
  }

  struct PoolBox {
    const BBox* box;
    std::int64_t id;
    bool is_base;
  };
  std::vector<PoolBox> pool_boxes;
  for (const auto& ann : pool.base) {
    if (ann.image_id == image_id) {
      pool_boxes.push_back({&ann.box, ann.id, true});
    }
  }
  for (const auto& pb : pool.pseudo) {
    if (pb.image_id == image_id) {
      pool_boxes.push_back({&pb.box, pb.pseudo_id, false});
    }
  }

  Assignment out;
  out.image = image;
  out.labels.reserve(candidates.size());
  for (const auto& c : candidates) {
    CandidateLabel label;
    label.candidate_id = c.id;

    const PoolBox* best = nullptr;
    double best_iou = 0.0;
    for (const auto& pb : pool_boxes) {
      const double v = iou(c.box, *pb.box);
      // Ties resolve to the earlier find; base boxes are listed first, so
      // an equal-IoU base/pseudo tie resolves to base.
      if (v > best_iou) {
        best_iou = v;
        best = &pb;
      }
    }

    if (best != nullptr && best_iou >= iou_positive_threshold) {
      label.kind = best->is_base ? MatchKind::Base : MatchKind::Pseudo;
      label.matched_id = best->id;
      label.match_iou = best_iou;
      label.target_box = *best->box;
      label.prob_target = best->is_base ? 1.0 : 0.0;
      label.centerness_target = centerness_or_zero(c.box.cx(), c.box.cy(), *best->box);
      label.iou_target = best_iou;
      label.objectness_target = std::sqrt(label.centerness_target * label.iou_target);
    }
    out.labels.push_back(label);
  }
  out.candidates = std::move(candidates);
  return out;
}

LossBreakdown loss_std(const Assignment& a) {
  LossBreakdown loss;
  const std::size_t n_cls = a.n_total();
  if (n_cls == 0) {
    return loss;
  }
  double cls_sum = 0.0;
  double reg_sum = 0.0;
  std::size_t n_reg = 0;
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    const auto& c = a.candidates[i];
    const auto& l = a.labels[i];
    cls_sum += bce(c.predicted_prob, l.prob_target);
    if (l.kind == MatchKind::Base) {
      reg_sum += l1_box(c.predicted_box, l.target_box, a.image);
      ++n_reg;
    }
  }
  loss.cls = cls_sum / static_cast<double>(n_cls);
  loss.reg = n_reg > 0 ? reg_sum / static_cast<double>(n_reg) : 0.0;
  loss.total = loss.cls + loss.reg;
  return loss;
}

namespace {

LossBreakdown objectness_loss(const Assignment& a, bool include_pseudo) {
  LossBreakdown loss;
  double reg_sum = 0.0;
  double obj_sum = 0.0;
  std::size_t n_reg = 0;
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    const auto& c = a.candidates[i];
    const auto& l = a.labels[i];
    const bool in_set = l.kind == MatchKind::Base ||
                        (include_pseudo && l.kind == MatchKind::Pseudo);
    if (!in_set) {
      continue;
    }
    reg_sum += l1_box(c.predicted_box, l.target_box, a.image);
    obj_sum += std::abs(c.predicted_objectness - l.objectness_target);
    ++n_reg;
  }
  if (n_reg > 0) {
    loss.reg = reg_sum / static_cast<double>(n_reg);
    loss.obj = obj_sum / static_cast<double>(n_reg);
  }
  loss.total = loss.reg + loss.obj;
  return loss;
}

}  // namespace

LossBreakdown loss_oln(const Assignment& a) {
  return objectness_loss(a, /*include_pseudo=*/false);
}

LossBreakdown loss_good(const Assignment& a) {
  return objectness_loss(a, /*include_pseudo=*/true);
}

}  // namespace owdet
