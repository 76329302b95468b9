#include "owdet/pseudolabel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "json_util.hpp"

namespace owdet {

using detail::ojson;

double objectness_score(double centerness, double iou) {
  if (centerness < 0.0 || centerness > 1.0 || iou < 0.0 || iou > 1.0) {
    throw ValidationError("objectness_score: inputs must lie in [0, 1]");
  }
  return std::sqrt(centerness * iou);
}

std::vector<Proposal> filter_against_gt(std::span<const Proposal> proposals,
                                        std::span<const GroundTruthAnnotation> base,
                                        double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ValidationError("filter_against_gt: threshold must lie in (0, 1]");
  }
  std::unordered_map<std::int64_t, std::vector<const GroundTruthAnnotation*>> by_image;
  for (const auto& ann : base) {
    if (!ann.is_crowd) {
      by_image[ann.image_id].push_back(&ann);
    }
  }

  std::vector<Proposal> kept;
  kept.reserve(proposals.size());
  for (const auto& p : proposals) {
    bool overlaps = false;
    if (const auto it = by_image.find(p.image_id); it != by_image.end()) {
      for (const auto* ann : it->second) {
        if (iou(p.box, ann->box) > threshold) {
          overlaps = true;
          break;
        }
      }
    }
    if (!overlaps) {
      kept.push_back(p);
    }
  }
  return kept;
}

namespace {

// Canonical per-image grouping: ascending image id, entries in input order.
std::map<std::int64_t, std::vector<std::size_t>> group_by_image(
    std::span<const Proposal> proposals) {
  std::map<std::int64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    groups[proposals[i].image_id].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<PseudoBox> top_k(std::span<const Proposal> proposals, std::size_t k) {
  if (k == 0) {
    throw ValidationError("top_k: k must be >= 1");
  }
  std::vector<PseudoBox> out;
  for (auto& [image_id, indices] : group_by_image(proposals)) {
    // Stable sort keeps input order on objectness ties.
    std::stable_sort(indices.begin(), indices.end(),
                     [&](std::size_t a, std::size_t b) {
                       return proposals[a].objectness > proposals[b].objectness;
                     });
    const std::size_t take = std::min(k, indices.size());
    for (std::size_t i = 0; i < take; ++i) {
      const Proposal& p = proposals[indices[i]];
      PseudoBox box;
      box.pseudo_id = static_cast<std::int64_t>(out.size());
      box.image_id = p.image_id;
      box.box = p.box;
      box.objectness = p.objectness;
      box.source_tag = p.source_tag;
      out.push_back(std::move(box));
    }
  }
  return out;
}

std::vector<PseudoBox> merge_sources(
    const std::vector<std::pair<std::string, std::vector<PseudoBox>>>& sources,
    double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("merge_sources: iou_threshold must lie in (0, 1]");
  }

  struct Entry {
    const PseudoBox* box;
    std::size_t source_index;
    std::size_t input_index;
  };
  std::map<std::int64_t, std::vector<Entry>> groups;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& boxes = sources[s].second;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      groups[boxes[i].image_id].push_back({&boxes[i], s, i});
    }
  }

  std::vector<PseudoBox> out;
  for (auto& [image_id, entries] : groups) {
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.box->objectness != b.box->objectness) {
        return a.box->objectness > b.box->objectness;
      }
      if (a.source_index != b.source_index) {
        return a.source_index < b.source_index;
      }
      return a.input_index < b.input_index;
    });

    std::vector<const PseudoBox*> kept;
    for (const Entry& e : entries) {
      bool suppressed = false;
      for (const PseudoBox* k : kept) {
        if (iou(e.box->box, k->box) > iou_threshold) {
          suppressed = true;
          break;
        }
      }
      if (!suppressed) {
        kept.push_back(e.box);
      }
    }
    for (const PseudoBox* k : kept) {
      PseudoBox box = *k;
      box.pseudo_id = static_cast<std::int64_t>(out.size());
      out.push_back(std::move(box));
    }
  }
  return out;
}

AnnotationPool build_pool(const Dataset& ds_train, std::vector<PseudoBox> merged,
                          double gt_filter_threshold) {
  std::unordered_map<std::int64_t, std::vector<const GroundTruthAnnotation*>> by_image;
  for (const auto& ann : ds_train.annotations) {
    if (!ann.is_crowd) {
      by_image[ann.image_id].push_back(&ann);
    }
  }
  for (const auto& box : merged) {
    if (const auto it = by_image.find(box.image_id); it != by_image.end()) {
      for (const auto* ann : it->second) {
        if (iou(box.box, ann->box) > gt_filter_threshold) {
          throw InvariantError(
              "build_pool: pseudo box " + std::to_string(box.pseudo_id) +
              " on image " + std::to_string(box.image_id) +
              " overlaps base annotation " + std::to_string(ann->id) +
              " above the filter threshold");
        }
      }
    }
  }
  AnnotationPool pool;
  pool.base = ds_train.annotations;
  pool.pseudo = std::move(merged);
  return pool;
}

std::vector<Proposal> load_proposals(const std::filesystem::path& file,
                                     const std::string& default_source_tag) {
  const nlohmann::json root = detail::load_json(file);
  const std::string ctx = file.filename().string();
  if (!root.is_array()) {
    throw ParseError(ctx + ": proposal file must be a JSON array");
  }

  std::vector<Proposal> out;
  out.reserve(root.size());
  std::size_t index = 0;
  for (const auto& jp : root) {
    const std::string pctx = ctx + " record " + std::to_string(index++);
    Proposal p;
    p.image_id = detail::require_field<std::int64_t>(jp, "image_id", pctx);
    const auto bbox = detail::require_field<std::vector<double>>(jp, "bbox", pctx);
    if (bbox.size() != 4) {
      throw ParseError(pctx + ": bbox must have 4 entries [x,y,w,h]");
    }
    if (bbox[2] < 0 || bbox[3] < 0) {
      throw ParseError(pctx + ": bbox has negative width or height");
    }
    p.box = BBox::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3]);
    p.source_tag =
        detail::optional_field<std::string>(jp, "source", default_source_tag, pctx);

    const double score = detail::require_field<double>(jp, "score", pctx);
    if (jp.contains("centerness") && jp.contains("iou_pred")) {
      p.centerness_score = detail::require_field<double>(jp, "centerness", pctx);
      p.iou_score = detail::require_field<double>(jp, "iou_pred", pctx);
      p.objectness = objectness_score(*p.centerness_score, *p.iou_score);
      if (std::abs(p.objectness - score) > 1e-6) {
        throw ParseError(pctx + ": score is inconsistent with sqrt(centerness*iou_pred)");
      }
    } else {
      if (score < 0.0 || score > 1.0) {
        throw ParseError(pctx + ": score must lie in [0, 1]");
      }
      p.objectness = score;
    }
    out.push_back(std::move(p));
  }
  return out;
}

void save_proposals(std::span<const Proposal> proposals,
                    const std::filesystem::path& file) {
  ojson root = ojson::array();
  for (const auto& p : proposals) {
    ojson jp;
    jp["image_id"] = p.image_id;
    jp["bbox"] = {p.box.x1, p.box.y1, p.box.width(), p.box.height()};
    jp["score"] = p.objectness;
    if (p.centerness_score) {
      jp["centerness"] = *p.centerness_score;
    }
    if (p.iou_score) {
      jp["iou_pred"] = *p.iou_score;
    }
    if (!p.source_tag.empty()) {
      jp["source"] = p.source_tag;
    }
    root.push_back(std::move(jp));
  }
  detail::write_json(root, file);
}

std::vector<PseudoBox> load_pseudo_boxes(const std::filesystem::path& file) {
  const nlohmann::json root = detail::load_json(file);
  const std::string ctx = file.filename().string();
  if (!root.is_array()) {
    throw ParseError(ctx + ": pseudo-pool file must be a JSON array");
  }

  std::vector<PseudoBox> out;
  out.reserve(root.size());
  std::size_t index = 0;
  for (const auto& jb : root) {
    const std::string bctx = ctx + " record " + std::to_string(index++);
    PseudoBox box;
    box.pseudo_id = detail::require_field<std::int64_t>(jb, "pseudo_id", bctx);
    box.image_id = detail::require_field<std::int64_t>(jb, "image_id", bctx);
    const auto bbox = detail::require_field<std::vector<double>>(jb, "bbox", bctx);
    if (bbox.size() != 4) {
      throw ParseError(bctx + ": bbox must have 4 entries [x,y,w,h]");
    }
    box.box = BBox::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3]);
    box.objectness = detail::require_field<double>(jb, "score", bctx);
    box.source_tag = detail::require_field<std::string>(jb, "source", bctx);
    out.push_back(std::move(box));
  }
  return out;
}

void save_pseudo_boxes(std::span<const PseudoBox> boxes,
                       const std::filesystem::path& file) {
  ojson root = ojson::array();
  for (const auto& b : boxes) {
    ojson jb;
    jb["pseudo_id"] = b.pseudo_id;
    jb["image_id"] = b.image_id;
    jb["bbox"] = {b.box.x1, b.box.y1, b.box.width(), b.box.height()};
    jb["score"] = b.objectness;
    jb["source"] = b.source_tag;
    root.push_back(std::move(jb));
  }
  detail::write_json(root, file);
}

}  // namespace owdet
