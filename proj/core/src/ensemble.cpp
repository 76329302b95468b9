#include "owdet/ensemble.hpp"

#include <algorithm>

#include "json_util.hpp"

namespace owdet {

using detail::ojson;

TopBoxes top1_by_image(std::span<const PseudoBox> boxes, std::string source_tag) {
  TopBoxes top;
  top.source_tag = std::move(source_tag);
  std::map<std::int64_t, double> best_score;
  for (const auto& b : boxes) {
    const auto it = best_score.find(b.image_id);
    // Strict comparison keeps the first box on ties, matching the
    // canonical pool ordering.
    if (it == best_score.end() || b.objectness > it->second) {
      best_score[b.image_id] = b.objectness;
      top.by_image[b.image_id] = b.box;
    }
  }
  return top;
}

std::optional<double> pairwise_overlap(const TopBoxes& a, const TopBoxes& b,
                                       double iou_t) {
  if (!(iou_t > 0.0 && iou_t <= 1.0)) {
    throw ValidationError("pairwise_overlap: iou_t must lie in (0, 1]");
  }
  std::size_t common = 0;
  std::size_t overlapping = 0;
  for (const auto& [image_id, box] : a.by_image) {
    const auto it = b.by_image.find(image_id);
    if (it == b.by_image.end()) {
      continue;
    }
    ++common;
    if (iou(box, it->second) >= iou_t) {
      ++overlapping;
    }
  }
  if (common == 0) {
    return std::nullopt;
  }
  return static_cast<double>(overlapping) / static_cast<double>(common);
}

double utility(const EvalReport& source_holdout, const EvalReport& baseline) {
  if (source_holdout.dataset_id != baseline.dataset_id) {
    throw ValidationError("utility: reports describe different datasets ('" +
                          source_holdout.dataset_id + "' vs '" + baseline.dataset_id +
                          "')");
  }
  if (source_holdout.split_name != baseline.split_name) {
    throw ValidationError("utility: reports describe different splits ('" +
                          source_holdout.split_name + "' vs '" + baseline.split_name +
                          "')");
  }
  return source_holdout.ar_novel() - baseline.ar_novel();
}

std::vector<SelectionStep> greedy_order(const std::vector<SourceCandidate>& candidates,
                                        double overlap_iou) {
  if (candidates.empty()) {
    throw ValidationError("greedy_order: need at least one candidate");
  }

  std::vector<const SourceCandidate*> remaining;
  remaining.reserve(candidates.size());
  for (const auto& c : candidates) {
    remaining.push_back(&c);
  }

  std::vector<SelectionStep> steps;
  std::vector<const SourceCandidate*> selected;
  while (!remaining.empty()) {
    const SourceCandidate* best = nullptr;
    SelectionStep best_step;
    for (const SourceCandidate* c : remaining) {
      double max_overlap = 0.0;
      for (const SourceCandidate* s : selected) {
        // Pairs without common images carry no redundancy evidence.
        if (const auto o = pairwise_overlap(c->top1, s->top1, overlap_iou)) {
          max_overlap = std::max(max_overlap, *o);
        }
      }
      SelectionStep step;
      step.source_tag = c->source_tag;
      step.utility = c->utility;
      step.uniqueness = 1.0 - max_overlap;
      step.score = step.utility * step.uniqueness;
      if (best == nullptr || step.score > best_step.score ||
          (step.score == best_step.score && step.source_tag < best_step.source_tag)) {
        best = c;
        best_step = step;
      }
    }
    steps.push_back(best_step);
    selected.push_back(best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }
  return steps;
}

void save_order(std::span<const SelectionStep> steps,
                const std::filesystem::path& file) {
  ojson root = ojson::array();
  std::size_t rank = 1;
  for (const auto& s : steps) {
    ojson js;
    js["rank"] = rank++;
    js["source"] = s.source_tag;
    js["utility"] = s.utility;
    js["uniqueness"] = s.uniqueness;
    js["score"] = s.score;
    root.push_back(std::move(js));
  }
  detail::write_json(root, file);
}

std::vector<SelectionStep> load_order(const std::filesystem::path& file) {
  const nlohmann::json root = detail::load_json(file);
  const std::string ctx = file.filename().string();
  if (!root.is_array()) {
    throw ParseError(ctx + ": ordering file must be a JSON array");
  }
  std::vector<SelectionStep> steps;
  for (const auto& js : root) {
    SelectionStep s;
    s.source_tag = detail::require_field<std::string>(js, "source", ctx);
    s.utility = detail::require_field<double>(js, "utility", ctx);
    s.uniqueness = detail::require_field<double>(js, "uniqueness", ctx);
    s.score = detail::require_field<double>(js, "score", ctx);
    steps.push_back(std::move(s));
  }
  return steps;
}

}  // namespace owdet
