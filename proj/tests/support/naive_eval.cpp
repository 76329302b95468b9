#include "support/naive_eval.hpp"

#include <algorithm>
#include <set>

namespace naive {

using owdet::BBox;
using owdet::ClassSplit;
using owdet::Dataset;
using owdet::Detection;
using owdet::GroundTruthAnnotation;

double box_iou(const BBox& a, const BBox& b) {
  const double left = a.x1 > b.x1 ? a.x1 : b.x1;
  const double top = a.y1 > b.y1 ? a.y1 : b.y1;
  const double right = a.x2 < b.x2 ? a.x2 : b.x2;
  const double bottom = a.y2 < b.y2 ? a.y2 : b.y2;
  if (right <= left || bottom <= top) {
    return 0.0;
  }
  const double inter = (right - left) * (bottom - top);
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

std::vector<const Detection*> by_descending_score(
    const std::vector<const Detection*>& dets) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dets[a]->score > dets[b]->score;
                   });
  std::vector<const Detection*> sorted;
  for (std::size_t i : order) {
    sorted.push_back(dets[i]);
  }
  return sorted;
}

struct Grouped {
  std::map<std::int64_t, std::vector<const Detection*>> dets;
  std::map<std::int64_t, std::vector<const GroundTruthAnnotation*>> gts;
};

Grouped group(std::span<const Detection> dets,
              std::span<const GroundTruthAnnotation> gts) {
  Grouped g;
  for (const auto& d : dets) {
    g.dets[d.image_id].push_back(&d);
  }
  for (const auto& a : gts) {
    g.gts[a.image_id].push_back(&a);
  }
  return g;
}

}  // namespace

std::int64_t match_one_image(const std::vector<const Detection*>& dets,
                             const std::vector<const GroundTruthAnnotation*>& gts,
                             double iou_t, std::size_t budget) {
  const auto sorted = by_descending_score(dets);
  std::vector<bool> taken(gts.size(), false);
  std::size_t spent = 0;
  std::int64_t matched = 0;
  for (const Detection* d : sorted) {
    if (spent >= budget) {
      break;
    }
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g]->is_crowd || taken[g]) {
        continue;
      }
      const double v = box_iou(d->box, gts[g]->box);
      if (v >= iou_t && v > best_iou) {
        best_iou = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[static_cast<std::size_t>(best)] = true;
      ++matched;
      ++spent;
      continue;
    }
    bool crowd_only = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g]->is_crowd && box_iou(d->box, gts[g]->box) >= iou_t) {
        crowd_only = true;
        break;
      }
    }
    if (!crowd_only) {
      ++spent;
    }
  }
  return matched;
}

double average_recall(std::span<const Detection> dets,
                      std::span<const GroundTruthAnnotation> gts,
                      const std::vector<double>& thresholds, std::size_t budget) {
  const Grouped g = group(dets, gts);
  std::int64_t total = 0;
  for (const auto& [image_id, anns] : g.gts) {
    for (const auto* a : anns) {
      if (!a->is_crowd) {
        ++total;
      }
    }
  }
  if (total == 0) {
    return 0.0;
  }
  double sum = 0.0;
  for (double t : thresholds) {
    std::int64_t matched = 0;
    for (const auto& [image_id, anns] : g.gts) {
      std::vector<const Detection*> image_dets;
      if (const auto it = g.dets.find(image_id); it != g.dets.end()) {
        image_dets = it->second;
      }
      matched += match_one_image(image_dets, anns, t, budget);
    }
    sum += static_cast<double>(matched) / static_cast<double>(total);
  }
  return sum / static_cast<double>(thresholds.size());
}

namespace {

// Survivors of the base-association filter plus the image's novel GT.
struct NovelView {
  std::vector<Detection> dets;
  std::vector<GroundTruthAnnotation> gts;
};

NovelView novel_view(std::span<const Detection> dets, const Dataset& ds,
                     const ClassSplit& split, double base_association_iou) {
  NovelView view;
  for (const auto& ann : ds.annotations) {
    if (split.novel_category_ids.count(ann.category_id) > 0) {
      view.gts.push_back(ann);
    }
  }
  for (const auto& d : dets) {
    bool on_base = false;
    for (const auto& ann : ds.annotations) {
      if (ann.image_id != d.image_id ||
          split.base_category_ids.count(ann.category_id) == 0) {
        continue;
      }
      if (box_iou(d.box, ann.box) >= base_association_iou) {
        on_base = true;
        break;
      }
    }
    if (!on_base) {
      view.dets.push_back(d);
    }
  }
  return view;
}

}  // namespace

double ar_novel(std::span<const Detection> dets, const Dataset& ds,
                const ClassSplit& split, const std::vector<double>& thresholds,
                std::size_t budget, double base_association_iou) {
  const NovelView view = novel_view(dets, ds, split, base_association_iou);
  return average_recall(view.dets, view.gts, thresholds, budget);
}

std::map<std::int64_t, double> per_class_ar(std::span<const Detection> dets,
                                            const Dataset& ds, const ClassSplit& split,
                                            const std::vector<double>& thresholds,
                                            std::size_t budget,
                                            double base_association_iou) {
  const NovelView view = novel_view(dets, ds, split, base_association_iou);
  std::map<std::int64_t, double> out;
  for (std::int64_t category_id : split.novel_category_ids) {
    std::vector<GroundTruthAnnotation> class_gts;
    std::int64_t non_crowd = 0;
    for (const auto& ann : view.gts) {
      if (ann.category_id == category_id) {
        class_gts.push_back(ann);
        if (!ann.is_crowd) {
          ++non_crowd;
        }
      }
    }
    if (non_crowd == 0) {
      continue;
    }
    out[category_id] = average_recall(view.dets, class_gts, thresholds, budget);
  }
  return out;
}

}  // namespace naive
