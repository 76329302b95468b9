#include "owdet/synth.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "rng.hpp"

namespace owdet {

using detail::ojson;

double SourceProfile::recall_for(SizeClass c) const {
  switch (c) {
    case SizeClass::Small:
      return recall_small;
    case SizeClass::Medium:
      return recall_medium;
    case SizeClass::Large:
      return recall_large;
  }
  return 0.0;
}

void SynthSpec::validate() const {
  if (image_width <= 0 || image_height <= 0) {
    throw ValidationError("SynthSpec: image dimensions must be positive");
  }
  if (!(max_placement_iou >= 0.0 && max_placement_iou < 1.0)) {
    throw ValidationError("SynthSpec: max_placement_iou must lie in [0, 1)");
  }
  if (classes.empty()) {
    throw ValidationError("SynthSpec: need at least one class");
  }
  std::set<std::int64_t> ids;
  for (const auto& c : classes) {
    if (!ids.insert(c.category_id).second) {
      throw ValidationError("SynthSpec: duplicate category id " +
                            std::to_string(c.category_id));
    }
    if (!(c.sqrt_area_min > 0 && c.sqrt_area_max >= c.sqrt_area_min)) {
      throw ValidationError("SynthSpec: class '" + c.name + "' has a bad size range");
    }
    if (!(c.aspect_min > 0 && c.aspect_max >= c.aspect_min)) {
      throw ValidationError("SynthSpec: class '" + c.name + "' has a bad aspect range");
    }
    if (c.max_per_image < c.min_per_image) {
      throw ValidationError("SynthSpec: class '" + c.name + "' has a bad count range");
    }
  }
  for (const auto& s : sources) {
    for (double r : {s.recall_small, s.recall_medium, s.recall_large}) {
      if (r < 0.0 || r > 1.0) {
        throw ValidationError("SynthSpec: source '" + s.tag +
                              "' has a recall outside [0, 1]");
      }
    }
    if (s.loc_jitter_sigma < 0 || s.score_noise_sigma < 0 ||
        s.false_positives_per_image < 0) {
      throw ValidationError("SynthSpec: source '" + s.tag + "' has a negative rate");
    }
  }
}

SynthSpec SynthSpec::default_spec() {
  SynthSpec spec;
  spec.n_images = 20;
  spec.image_width = 640;
  spec.image_height = 480;

  SynthClassSpec person;
  person.category_id = 1;
  person.name = "walker";
  person.is_base = true;
  person.sqrt_area_min = 40;
  person.sqrt_area_max = 90;
  person.min_per_image = 1;
  person.max_per_image = 2;

  SynthClassSpec crate;
  crate.category_id = 2;
  crate.name = "crate";
  crate.is_base = false;
  crate.sqrt_area_min = 100;
  crate.sqrt_area_max = 180;
  crate.max_per_image = 2;

  SynthClassSpec token;
  token.category_id = 3;
  token.name = "token";
  token.is_base = false;
  token.sqrt_area_min = 12;
  token.sqrt_area_max = 30;
  token.max_per_image = 3;

  spec.classes = {person, crate, token};

  SourceProfile geometry;
  geometry.tag = "geometry";
  geometry.recall_small = 0.2;
  geometry.recall_medium = 0.7;
  geometry.recall_large = 0.95;
  geometry.loc_jitter_sigma = 2.0;
  geometry.score_noise_sigma = 0.05;
  geometry.false_positives_per_image = 0.5;

  SourceProfile appearance;
  appearance.tag = "appearance";
  appearance.recall_small = 0.9;
  appearance.recall_medium = 0.6;
  appearance.recall_large = 0.3;
  appearance.loc_jitter_sigma = 2.0;
  appearance.score_noise_sigma = 0.05;
  appearance.false_positives_per_image = 0.5;

  spec.sources = {geometry, appearance};
  return spec;
}

namespace {

constexpr int kPlacementRetries = 100;

BBox random_box(detail::Rng& rng, const SynthClassSpec& cls, double image_w,
                double image_h) {
  const double sqrt_area = rng.uniform(cls.sqrt_area_min, cls.sqrt_area_max);
  const double aspect = rng.uniform(cls.aspect_min, cls.aspect_max);
  double w = sqrt_area * std::sqrt(aspect);
  double h = sqrt_area / std::sqrt(aspect);
  w = std::min(w, image_w);
  h = std::min(h, image_h);
  const double x = rng.uniform(0.0, image_w - w);
  const double y = rng.uniform(0.0, image_h - h);
  return BBox(x, y, x + w, y + h);
}

}  // namespace

std::pair<Dataset, ClassSplit> gen_corpus(const SynthSpec& spec) {
  spec.validate();

  Dataset ds;
  ClassSplit split;
  split.name = "synth";
  for (const auto& c : spec.classes) {
    ds.taxonomy.categories.push_back({c.category_id, c.name, c.supercategory});
    (c.is_base ? split.base_category_ids : split.novel_category_ids)
        .insert(c.category_id);
  }
  ds.taxonomy.validate();

  std::int64_t next_annotation_id = 1;
  for (std::size_t i = 0; i < spec.n_images; ++i) {
    const std::int64_t image_id = static_cast<std::int64_t>(i) + 1;
    ImageInfo img;
    img.id = image_id;
    img.width = spec.image_width;
    img.height = spec.image_height;
    img.file_name = "synth_" + std::to_string(image_id) + ".jpg";
    ds.images.push_back(img);

    detail::Rng rng(detail::mix_seed(spec.seed, static_cast<std::uint64_t>(i)));
    std::vector<BBox> placed;
    for (const auto& cls : spec.classes) {
      const std::size_t count = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(cls.min_per_image),
          static_cast<std::int64_t>(cls.max_per_image)));
      for (std::size_t n = 0; n < count; ++n) {
        bool placed_ok = false;
        for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
          const BBox box = random_box(rng, cls, spec.image_width, spec.image_height);
          const bool clear =
              std::all_of(placed.begin(), placed.end(), [&](const BBox& other) {
                return iou(box, other) <= spec.max_placement_iou;
              });
          if (clear) {
            placed.push_back(box);
            GroundTruthAnnotation ann;
            ann.id = next_annotation_id++;
            ann.image_id = image_id;
            ann.category_id = cls.category_id;
            ann.box = box;
            ds.annotations.push_back(ann);
            placed_ok = true;
            break;
          }
        }
        if (!placed_ok) {
          throw Error("gen_corpus: could not place an instance of class '" + cls.name +
                      "' on image " + std::to_string(image_id) +
                      " within the placement bound; the image spec is overcrowded");
        }
      }
    }
  }
  return {std::move(ds), std::move(split)};
}

std::vector<Proposal> simulate_source(const Dataset& ds, const SourceProfile& profile,
                                      std::uint64_t seed) {
  std::vector<Proposal> out;
  const auto by_image = ds.annotations_by_image();

  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    const ImageInfo& img = ds.images[i];
    detail::Rng rng(detail::mix_seed(seed, static_cast<std::uint64_t>(i)));

    std::vector<const GroundTruthAnnotation*> gts;
    if (const auto it = by_image.find(img.id); it != by_image.end()) {
      for (std::size_t idx : it->second) {
        gts.push_back(&ds.annotations[idx]);
      }
    }

    const auto emit = [&](const BBox& box) {
      double best_iou = 0.0;
      for (const auto* g : gts) {
        best_iou = std::max(best_iou, iou(box, g->box));
      }
      const double score =
          std::clamp(best_iou + rng.normal(0.0, profile.score_noise_sigma), 0.0, 1.0);
      Proposal p;
      p.image_id = img.id;
      p.box = box;
      p.centerness_score = score;
      p.iou_score = score;
      p.objectness = score;  // sqrt(score * score)
      p.source_tag = profile.tag;
      out.push_back(std::move(p));
    };

    for (const auto* g : gts) {
      if (!rng.bernoulli(profile.recall_for(size_class(g->box)))) {
        continue;
      }
      double x1 = g->box.x1 + rng.normal(0.0, profile.loc_jitter_sigma);
      double y1 = g->box.y1 + rng.normal(0.0, profile.loc_jitter_sigma);
      double x2 = g->box.x2 + rng.normal(0.0, profile.loc_jitter_sigma);
      double y2 = g->box.y2 + rng.normal(0.0, profile.loc_jitter_sigma);
      if (x2 < x1) {
        std::swap(x1, x2);
      }
      if (y2 < y1) {
        std::swap(y1, y2);
      }
      emit(BBox(x1, y1, x2, y2).clipped(img.width, img.height));
    }

    // Deterministic false-positive count: the fractional part becomes a
    // Bernoulli draw.
    const double rate = profile.false_positives_per_image;
    std::size_t n_fp = static_cast<std::size_t>(std::floor(rate));
    if (rng.bernoulli(rate - std::floor(rate))) {
      ++n_fp;
    }
    for (std::size_t f = 0; f < n_fp; ++f) {
      const double sqrt_area = rng.uniform(8.0, 128.0);
      const double aspect = rng.uniform(0.5, 2.0);
      double w = std::min(sqrt_area * std::sqrt(aspect), img.width);
      double h = std::min(sqrt_area / std::sqrt(aspect), img.height);
      const double x = rng.uniform(0.0, img.width - w);
      const double y = rng.uniform(0.0, img.height - h);
      emit(BBox(x, y, x + w, y + h));
    }
  }
  return out;
}

namespace {

ojson class_to_json(const SynthClassSpec& c) {
  ojson j;
  j["category_id"] = c.category_id;
  j["name"] = c.name;
  j["supercategory"] = c.supercategory;
  j["is_base"] = c.is_base;
  j["sqrt_area_min"] = c.sqrt_area_min;
  j["sqrt_area_max"] = c.sqrt_area_max;
  j["aspect_min"] = c.aspect_min;
  j["aspect_max"] = c.aspect_max;
  j["min_per_image"] = c.min_per_image;
  j["max_per_image"] = c.max_per_image;
  return j;
}

SynthClassSpec class_from_json(const nlohmann::json& j, const std::string& ctx) {
  SynthClassSpec c;
  c.category_id = detail::require_field<std::int64_t>(j, "category_id", ctx);
  c.name = detail::require_field<std::string>(j, "name", ctx);
  c.supercategory =
      detail::optional_field<std::string>(j, "supercategory", "synthetic", ctx);
  c.is_base = detail::require_field<bool>(j, "is_base", ctx);
  c.sqrt_area_min = detail::require_field<double>(j, "sqrt_area_min", ctx);
  c.sqrt_area_max = detail::require_field<double>(j, "sqrt_area_max", ctx);
  c.aspect_min = detail::optional_field<double>(j, "aspect_min", 0.5, ctx);
  c.aspect_max = detail::optional_field<double>(j, "aspect_max", 2.0, ctx);
  c.min_per_image = detail::optional_field<std::size_t>(j, "min_per_image", 0, ctx);
  c.max_per_image = detail::optional_field<std::size_t>(j, "max_per_image", 2, ctx);
  return c;
}

ojson source_to_json(const SourceProfile& s) {
  ojson j;
  j["tag"] = s.tag;
  j["recall_small"] = s.recall_small;
  j["recall_medium"] = s.recall_medium;
  j["recall_large"] = s.recall_large;
  j["loc_jitter_sigma"] = s.loc_jitter_sigma;
  j["score_noise_sigma"] = s.score_noise_sigma;
  j["false_positives_per_image"] = s.false_positives_per_image;
  return j;
}

SourceProfile source_from_json(const nlohmann::json& j, const std::string& ctx) {
  SourceProfile s;
  s.tag = detail::require_field<std::string>(j, "tag", ctx);
  s.recall_small = detail::require_field<double>(j, "recall_small", ctx);
  s.recall_medium = detail::require_field<double>(j, "recall_medium", ctx);
  s.recall_large = detail::require_field<double>(j, "recall_large", ctx);
  s.loc_jitter_sigma = detail::optional_field<double>(j, "loc_jitter_sigma", 0.0, ctx);
  s.score_noise_sigma = detail::optional_field<double>(j, "score_noise_sigma", 0.0, ctx);
  s.false_positives_per_image =
      detail::optional_field<double>(j, "false_positives_per_image", 0.0, ctx);
  return s;
}

}  // namespace

SynthSpec load_synth_spec(const std::filesystem::path& file) {
  const nlohmann::json j = detail::load_json(file);
  const std::string ctx = file.filename().string();
  SynthSpec spec;
  spec.seed = detail::optional_field<std::uint64_t>(j, "seed", 0, ctx);
  spec.n_images = detail::require_field<std::size_t>(j, "n_images", ctx);
  spec.image_width = detail::optional_field<double>(j, "image_width", 640.0, ctx);
  spec.image_height = detail::optional_field<double>(j, "image_height", 480.0, ctx);
  spec.max_placement_iou =
      detail::optional_field<double>(j, "max_placement_iou", 0.3, ctx);
  for (const auto& jc : detail::require_field<nlohmann::json>(j, "classes", ctx)) {
    spec.classes.push_back(class_from_json(jc, ctx + " classes"));
  }
  if (j.contains("sources")) {
    for (const auto& js : j.at("sources")) {
      spec.sources.push_back(source_from_json(js, ctx + " sources"));
    }
  }
  spec.validate();
  return spec;
}

void save_synth_spec(const SynthSpec& spec, const std::filesystem::path& file) {
  ojson j;
  j["seed"] = spec.seed;
  j["n_images"] = spec.n_images;
  j["image_width"] = spec.image_width;
  j["image_height"] = spec.image_height;
  j["max_placement_iou"] = spec.max_placement_iou;
  j["classes"] = ojson::array();
  for (const auto& c : spec.classes) {
    j["classes"].push_back(class_to_json(c));
  }
  j["sources"] = ojson::array();
  for (const auto& s : spec.sources) {
    j["sources"].push_back(source_to_json(s));
  }
  detail::write_json(j, file);
}

}  // namespace owdet
