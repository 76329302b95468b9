#include "owdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "json_util.hpp"
#include "parallel.hpp"

namespace owdet {

using detail::ojson;

std::vector<double> EvalConfig::default_iou_thresholds() {
  std::vector<double> out;
  out.reserve(10);
  for (int i = 0; i < 10; ++i) {
    out.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  }
  return out;
}

void EvalConfig::validate() const {
  if (budget == 0) {
    throw ValidationError("EvalConfig: budget must be >= 1");
  }
  if (iou_thresholds.empty()) {
    throw ValidationError("EvalConfig: iou_thresholds must not be empty");
  }
  double prev = 0.0;
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw ValidationError("EvalConfig: IoU thresholds must lie in (0, 1]");
    }
    if (t <= prev) {
      throw ValidationError("EvalConfig: IoU thresholds must be strictly increasing");
    }
    prev = t;
  }
  if (!(base_association_iou > 0.0 && base_association_iou <= 1.0)) {
    throw ValidationError("EvalConfig: base_association_iou must lie in (0, 1]");
  }
}

double StratumCounts::average_recall() const {
  if (total_gt == 0 || matched.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::int64_t m : matched) {
    sum += static_cast<double>(m) / static_cast<double>(total_gt);
  }
  return sum / static_cast<double>(matched.size());
}

std::map<std::int64_t, double> EvalReport::per_class_ar_map() const {
  std::map<std::int64_t, double> out;
  for (const auto& [id, counts] : per_class) {
    out[id] = counts.average_recall();
  }
  return out;
}

namespace {

// Detection indices in matching order: descending score, ties by input order.
std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  return order;
}

// Greedy matcher for one image at one threshold, on a precomputed IoU
// matrix (row per detection in matching order, column per ground truth).
// Detections matching only crowd ground truth are set aside without
// consuming budget; every other processed detection consumes one of the k
// slots whether or not it matches. Returns matched flags per ground truth.
std::vector<std::uint8_t> greedy_match(
    const std::vector<std::vector<double>>& iou_rows,
    std::span<const GroundTruthAnnotation* const> gts, double iou_t,
    std::size_t budget) {
  std::vector<std::uint8_t> matched(gts.size(), 0);
  std::size_t budget_used = 0;
  for (const auto& row : iou_rows) {
    if (budget_used >= budget) {
      break;
    }
    std::ptrdiff_t best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g]->is_crowd || matched[g]) {
        continue;
      }
      const double v = row[g];
      if (v >= iou_t && v > best_iou) {
        best_iou = v;
        best = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (best >= 0) {
      matched[static_cast<std::size_t>(best)] = 1;
      ++budget_used;
      continue;
    }
    bool crowd_hit = false;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g]->is_crowd && row[g] >= iou_t) {
        crowd_hit = true;
        break;
      }
    }
    if (!crowd_hit) {
      ++budget_used;
    }
  }
  return matched;
}

std::vector<std::vector<double>> iou_matrix(
    std::span<const Detection* const> dets_ordered,
    std::span<const GroundTruthAnnotation* const> gts) {
  std::vector<std::vector<double>> rows(dets_ordered.size(),
                                        std::vector<double>(gts.size(), 0.0));
  for (std::size_t d = 0; d < dets_ordered.size(); ++d) {
    for (std::size_t g = 0; g < gts.size(); ++g) {
      rows[d][g] = iou(dets_ordered[d]->box, gts[g]->box);
    }
  }
  return rows;
}

struct ImageGroup {
  std::vector<const Detection*> dets;  // in matching order
  std::vector<const GroundTruthAnnotation*> gts;
};

// Images in ascending id order; detections pre-sorted per image.
std::map<std::int64_t, ImageGroup> group_by_image(
    std::span<const Detection> dets, std::span<const GroundTruthAnnotation> gts) {
  std::map<std::int64_t, ImageGroup> groups;
  for (const auto& g : gts) {
    groups[g.image_id].gts.push_back(&g);
  }
  // Detections on images without ground truth cannot affect recall.
  for (std::size_t i : score_order(dets)) {
    const auto it = groups.find(dets[i].image_id);
    if (it != groups.end()) {
      it->second.dets.push_back(&dets[i]);
    }
  }
  return groups;
}

void accumulate(StratumCounts& into, const StratumCounts& part) {
  if (into.matched.empty()) {
    into.matched.assign(part.matched.size(), 0);
  }
  into.total_gt += part.total_gt;
  for (std::size_t i = 0; i < part.matched.size(); ++i) {
    into.matched[i] += part.matched[i];
  }
}

}  // namespace

std::pair<std::int64_t, std::int64_t> recall_single(
    std::span<const Detection> dets, std::span<const GroundTruthAnnotation> gts,
    double iou_t, std::size_t k) {
  if (!(iou_t > 0.0 && iou_t <= 1.0)) {
    throw ValidationError("recall_single: iou_t must lie in (0, 1]");
  }
  std::vector<const Detection*> ordered;
  ordered.reserve(dets.size());
  for (std::size_t i : score_order(dets)) {
    ordered.push_back(&dets[i]);
  }
  std::vector<const GroundTruthAnnotation*> gt_ptrs;
  gt_ptrs.reserve(gts.size());
  std::int64_t total = 0;
  for (const auto& g : gts) {
    gt_ptrs.push_back(&g);
    if (!g.is_crowd) {
      ++total;
    }
  }
  const auto rows = iou_matrix(ordered, gt_ptrs);
  const auto matched = greedy_match(rows, gt_ptrs, iou_t, k);
  std::int64_t n_matched = 0;
  for (std::size_t g = 0; g < gt_ptrs.size(); ++g) {
    if (matched[g] && !gt_ptrs[g]->is_crowd) {
      ++n_matched;
    }
  }
  return {n_matched, total};
}

double average_recall(std::span<const Detection> dets,
                      std::span<const GroundTruthAnnotation> gts,
                      const EvalConfig& cfg) {
  cfg.validate();
  StratumCounts counts;
  counts.matched.assign(cfg.iou_thresholds.size(), 0);
  for (const auto& [image_id, group] : group_by_image(dets, gts)) {
    const auto rows = iou_matrix(group.dets, group.gts);
    for (const auto* g : group.gts) {
      if (!g->is_crowd) {
        ++counts.total_gt;
      }
    }
    for (std::size_t t = 0; t < cfg.iou_thresholds.size(); ++t) {
      const auto matched =
          greedy_match(rows, group.gts, cfg.iou_thresholds[t], cfg.budget);
      for (std::size_t g = 0; g < group.gts.size(); ++g) {
        if (matched[g] && !group.gts[g]->is_crowd) {
          ++counts.matched[t];
        }
      }
    }
  }
  return counts.average_recall();
}

namespace {

// Per-image novel evaluation shared by ar_novel, per-class AR and the
// report assembler. Detections associated to base ground truth are
// removed up front, in score order, before any budgeting.
struct NovelImageTask {
  std::vector<const Detection*> survivors;         // matching order
  std::vector<const GroundTruthAnnotation*> novel; // this image's novel GT
};

struct NovelImageResult {
  StratumCounts novel;
  StratumCounts by_size[3];
  std::map<std::int64_t, StratumCounts> per_class;
};

NovelImageResult eval_novel_image(const NovelImageTask& task, const EvalConfig& cfg,
                                  std::size_t per_class_budget) {
  NovelImageResult result;
  const std::size_t n_thresholds = cfg.iou_thresholds.size();
  result.novel.matched.assign(n_thresholds, 0);
  for (auto& s : result.by_size) {
    s.matched.assign(n_thresholds, 0);
  }

  const auto rows = iou_matrix(task.survivors, task.novel);
  for (const auto* g : task.novel) {
    if (g->is_crowd) {
      continue;
    }
    ++result.novel.total_gt;
    ++result.by_size[static_cast<int>(size_class(g->box))].total_gt;
  }
  for (std::size_t t = 0; t < n_thresholds; ++t) {
    const auto matched =
        greedy_match(rows, task.novel, cfg.iou_thresholds[t], cfg.budget);
    for (std::size_t g = 0; g < task.novel.size(); ++g) {
      if (!matched[g] || task.novel[g]->is_crowd) {
        continue;
      }
      ++result.novel.matched[t];
      ++result.by_size[static_cast<int>(size_class(task.novel[g]->box))].matched[t];
    }
  }

  // Class-restricted runs reuse the survivors but rebuild the ground
  // truth set, so each class is matched in isolation.
  std::map<std::int64_t, std::vector<const GroundTruthAnnotation*>> by_class;
  for (const auto* g : task.novel) {
    by_class[g->category_id].push_back(g);
  }
  for (const auto& [category_id, gts] : by_class) {
    StratumCounts counts;
    counts.matched.assign(n_thresholds, 0);
    for (const auto* g : gts) {
      if (!g->is_crowd) {
        ++counts.total_gt;
      }
    }
    const auto class_rows = iou_matrix(task.survivors, gts);
    for (std::size_t t = 0; t < n_thresholds; ++t) {
      const auto matched =
          greedy_match(class_rows, gts, cfg.iou_thresholds[t], per_class_budget);
      for (std::size_t g = 0; g < gts.size(); ++g) {
        if (matched[g] && !gts[g]->is_crowd) {
          ++counts.matched[t];
        }
      }
    }
    result.per_class[category_id] = std::move(counts);
  }
  return result;
}

std::vector<NovelImageTask> build_novel_tasks(std::span<const Detection> dets,
                                              const Dataset& ds,
                                              const ClassSplit& split,
                                              const EvalConfig& cfg) {
  struct Raw {
    std::vector<const Detection*> dets;
    std::vector<const GroundTruthAnnotation*> base;
    std::vector<const GroundTruthAnnotation*> novel;
  };
  std::map<std::int64_t, Raw> groups;
  for (const auto& ann : ds.annotations) {
    auto& raw = groups[ann.image_id];
    (split.is_base(ann.category_id) ? raw.base : raw.novel).push_back(&ann);
  }
  for (std::size_t i : score_order(dets)) {
    const auto it = groups.find(dets[i].image_id);
    if (it != groups.end()) {
      it->second.dets.push_back(&dets[i]);
    }
  }

  std::vector<NovelImageTask> tasks;
  tasks.reserve(groups.size());
  for (auto& [image_id, raw] : groups) {
    NovelImageTask task;
    task.novel = std::move(raw.novel);
    for (const auto* d : raw.dets) {
      // Base association is decided once per detection, before budgeting;
      // crowd base regions also exclude.
      bool base_associated = false;
      for (const auto* b : raw.base) {
        if (iou(d->box, b->box) >= cfg.base_association_iou) {
          base_associated = true;
          break;
        }
      }
      if (!base_associated) {
        task.survivors.push_back(d);
      }
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

}  // namespace

StratumCounts ar_novel(std::span<const Detection> dets, const Dataset& ds,
                       const ClassSplit& split, const EvalConfig& cfg) {
  cfg.validate();
  split.validate(ds.taxonomy);
  StratumCounts counts;
  counts.matched.assign(cfg.iou_thresholds.size(), 0);
  for (const auto& task : build_novel_tasks(dets, ds, split, cfg)) {
    const auto result = eval_novel_image(task, cfg, cfg.budget);
    accumulate(counts, result.novel);
  }
  return counts;
}

std::map<std::int64_t, double> per_class_ar(std::span<const Detection> dets,
                                            const Dataset& ds, const ClassSplit& split,
                                            const EvalConfig& cfg) {
  cfg.validate();
  split.validate(ds.taxonomy);
  std::map<std::int64_t, StratumCounts> per_class;
  for (const auto& task : build_novel_tasks(dets, ds, split, cfg)) {
    const auto result = eval_novel_image(task, cfg, cfg.budget);
    for (const auto& [id, counts] : result.per_class) {
      accumulate(per_class[id], counts);
    }
  }
  std::map<std::int64_t, double> out;
  for (const auto& [id, counts] : per_class) {
    if (counts.total_gt > 0) {
      out[id] = counts.average_recall();
    }
  }
  return out;
}

EvalReport evaluate_detections(std::span<const Detection> dets, const Dataset& ds,
                               const ClassSplit& split, const EvalConfig& cfg,
                               std::size_t per_class_budget, unsigned threads) {
  cfg.validate();
  split.validate(ds.taxonomy);
  if (per_class_budget == 0) {
    throw ValidationError("evaluate_detections: per_class_budget must be >= 1");
  }

  EvalReport report;
  report.split_name = split.name;
  report.config = cfg;
  report.per_class_budget = per_class_budget;
  const std::size_t n_thresholds = cfg.iou_thresholds.size();
  report.all.matched.assign(n_thresholds, 0);
  report.novel.matched.assign(n_thresholds, 0);
  report.novel_small.matched.assign(n_thresholds, 0);
  report.novel_medium.matched.assign(n_thresholds, 0);
  report.novel_large.matched.assign(n_thresholds, 0);

  // Overall recall over every class.
  {
    const auto groups = group_by_image(dets, ds.annotations);
    std::vector<const ImageGroup*> ordered;
    ordered.reserve(groups.size());
    for (const auto& [id, group] : groups) {
      ordered.push_back(&group);
    }
    std::vector<StratumCounts> partial(ordered.size());
    detail::parallel_for(ordered.size(), threads, [&](std::size_t i) {
      const ImageGroup& group = *ordered[i];
      StratumCounts counts;
      counts.matched.assign(n_thresholds, 0);
      const auto rows = iou_matrix(group.dets, group.gts);
      for (const auto* g : group.gts) {
        if (!g->is_crowd) {
          ++counts.total_gt;
        }
      }
      for (std::size_t t = 0; t < n_thresholds; ++t) {
        const auto matched =
            greedy_match(rows, group.gts, cfg.iou_thresholds[t], cfg.budget);
        for (std::size_t g = 0; g < group.gts.size(); ++g) {
          if (matched[g] && !group.gts[g]->is_crowd) {
            ++counts.matched[t];
          }
        }
      }
      partial[i] = std::move(counts);
    });
    for (const auto& counts : partial) {
      accumulate(report.all, counts);
    }
  }

  // Novel-class protocol with size strata and per-class runs.
  {
    const auto tasks = build_novel_tasks(dets, ds, split, cfg);
    std::vector<NovelImageResult> partial(tasks.size());
    detail::parallel_for(tasks.size(), threads, [&](std::size_t i) {
      partial[i] = eval_novel_image(tasks[i], cfg, per_class_budget);
    });
    std::map<std::int64_t, StratumCounts> per_class;
    for (const auto& result : partial) {
      accumulate(report.novel, result.novel);
      accumulate(report.novel_small, result.by_size[0]);
      accumulate(report.novel_medium, result.by_size[1]);
      accumulate(report.novel_large, result.by_size[2]);
      for (const auto& [id, counts] : result.per_class) {
        accumulate(per_class[id], counts);
      }
    }
    for (auto& [id, counts] : per_class) {
      if (counts.total_gt > 0) {
        report.per_class[id] = std::move(counts);
      }
    }
  }

  report.zero_gt_warning = report.all.total_gt == 0 || report.novel.total_gt == 0;
  return report;
}

std::map<std::int64_t, RelDiff> relative_diff(
    const std::map<std::int64_t, double>& ar_x,
    const std::map<std::int64_t, double>& ar_ref) {
  if (ar_x.size() != ar_ref.size()) {
    throw ValidationError("relative_diff: maps must share the same key set");
  }
  std::map<std::int64_t, RelDiff> out;
  for (const auto& [id, x] : ar_x) {
    const auto it = ar_ref.find(id);
    if (it == ar_ref.end()) {
      throw ValidationError("relative_diff: maps must share the same key set");
    }
    RelDiff d;
    if (it->second != 0.0) {
      d.defined = true;
      d.value = (x - it->second) / it->second;
    }
    out[id] = d;
  }
  return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& file) {
  const nlohmann::json root = detail::load_json(file);
  const std::string ctx = file.filename().string();
  if (!root.is_array()) {
    throw ParseError(ctx + ": detection file must be a JSON array");
  }
  std::vector<Detection> out;
  out.reserve(root.size());
  std::size_t index = 0;
  for (const auto& jd : root) {
    const std::string dctx = ctx + " record " + std::to_string(index++);
    Detection d;
    d.image_id = detail::require_field<std::int64_t>(jd, "image_id", dctx);
    const auto bbox = detail::require_field<std::vector<double>>(jd, "bbox", dctx);
    if (bbox.size() != 4) {
      throw ParseError(dctx + ": bbox must have 4 entries [x,y,w,h]");
    }
    if (bbox[2] < 0 || bbox[3] < 0) {
      throw ParseError(dctx + ": bbox has negative width or height");
    }
    d.box = BBox::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3]);
    d.score = detail::require_field<double>(jd, "score", dctx);
    if (!std::isfinite(d.score)) {
      throw ParseError(dctx + ": score must be finite");
    }
    out.push_back(d);
  }
  return out;
}

void save_detections(std::span<const Detection> dets,
                     const std::filesystem::path& file) {
  ojson root = ojson::array();
  for (const auto& d : dets) {
    ojson jd;
    jd["image_id"] = d.image_id;
    jd["bbox"] = {d.box.x1, d.box.y1, d.box.width(), d.box.height()};
    jd["score"] = d.score;
    root.push_back(std::move(jd));
  }
  detail::write_json(root, file);
}

namespace {

ojson stratum_to_json(const StratumCounts& s) {
  ojson j;
  j["total_gt"] = s.total_gt;
  j["matched"] = s.matched;
  j["average_recall"] = s.average_recall();
  return j;
}

StratumCounts stratum_from_json(const nlohmann::json& j, const std::string& ctx) {
  StratumCounts s;
  s.total_gt = detail::require_field<std::int64_t>(j, "total_gt", ctx);
  s.matched = detail::require_field<std::vector<std::int64_t>>(j, "matched", ctx);
  return s;
}

std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", ratio * 100.0);
  return buf;
}

}  // namespace

void save_report(const EvalReport& report, const std::filesystem::path& json_file) {
  ojson j;
  j["dataset"] = report.dataset_id;
  j["split"] = report.split_name;
  j["source"] = report.source_tag;
  j["config"]["budget"] = report.config.budget;
  j["config"]["iou_thresholds"] = report.config.iou_thresholds;
  j["config"]["base_association_iou"] = report.config.base_association_iou;
  j["config"]["size_stratified"] = report.config.size_stratified;
  j["per_class_budget"] = report.per_class_budget;
  j["zero_gt_warning"] = report.zero_gt_warning;
  j["strata"]["all"] = stratum_to_json(report.all);
  j["strata"]["novel"] = stratum_to_json(report.novel);
  j["strata"]["novel_small"] = stratum_to_json(report.novel_small);
  j["strata"]["novel_medium"] = stratum_to_json(report.novel_medium);
  j["strata"]["novel_large"] = stratum_to_json(report.novel_large);
  j["per_class"] = ojson::object();
  for (const auto& [id, counts] : report.per_class) {
    j["per_class"][std::to_string(id)] = stratum_to_json(counts);
  }
  detail::write_json(j, json_file);
}

EvalReport load_report(const std::filesystem::path& json_file) {
  const nlohmann::json j = detail::load_json(json_file);
  const std::string ctx = json_file.filename().string();
  EvalReport report;
  report.dataset_id = detail::require_field<std::string>(j, "dataset", ctx);
  report.split_name = detail::require_field<std::string>(j, "split", ctx);
  report.source_tag = detail::require_field<std::string>(j, "source", ctx);
  const auto& jc = j.at("config");
  report.config.budget = detail::require_field<std::size_t>(jc, "budget", ctx);
  report.config.iou_thresholds =
      detail::require_field<std::vector<double>>(jc, "iou_thresholds", ctx);
  report.config.base_association_iou =
      detail::require_field<double>(jc, "base_association_iou", ctx);
  report.config.size_stratified =
      detail::require_field<bool>(jc, "size_stratified", ctx);
  report.per_class_budget =
      detail::require_field<std::size_t>(j, "per_class_budget", ctx);
  report.zero_gt_warning = detail::require_field<bool>(j, "zero_gt_warning", ctx);
  const auto& js = j.at("strata");
  report.all = stratum_from_json(js.at("all"), ctx);
  report.novel = stratum_from_json(js.at("novel"), ctx);
  report.novel_small = stratum_from_json(js.at("novel_small"), ctx);
  report.novel_medium = stratum_from_json(js.at("novel_medium"), ctx);
  report.novel_large = stratum_from_json(js.at("novel_large"), ctx);
  for (const auto& [key, value] : j.at("per_class").items()) {
    report.per_class[std::stoll(key)] = stratum_from_json(value, ctx);
  }
  return report;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  const std::string k = std::to_string(report.config.budget);
  out << "dataset: " << report.dataset_id << "\n";
  out << "split: " << report.split_name << "\n";
  if (!report.source_tag.empty()) {
    out << "source: " << report.source_tag << "\n";
  }
  out << "budget: " << k << "\n";
  out << "iou thresholds:";
  for (double t : report.config.iou_thresholds) {
    out << " " << t;
  }
  out << "\n";
  out << "base association iou: " << report.config.base_association_iou << "\n";
  out << "\n";
  out << "AR_all@" << k << ":          " << percent(report.ar_all()) << "\n";
  out << "AR_novel@" << k << ":        " << percent(report.ar_novel()) << "\n";
  if (report.config.size_stratified) {
    out << "AR_novel_small@" << k << ":  " << percent(report.ar_novel_small()) << "\n";
    out << "AR_novel_medium@" << k << ": " << percent(report.ar_novel_medium()) << "\n";
    out << "AR_novel_large@" << k << ":  " << percent(report.ar_novel_large()) << "\n";
  }
  if (!report.per_class.empty()) {
    out << "\nper-class AR@" << report.per_class_budget << ":\n";
    for (const auto& [id, counts] : report.per_class) {
      out << "  category " << id << ": " << percent(counts.average_recall()) << "\n";
    }
  }
  if (report.zero_gt_warning) {
    out << "\nwarning: a stratum had zero ground-truth boxes; its AR is reported as 0\n";
  }
  return out.str();
}

}  // namespace owdet
