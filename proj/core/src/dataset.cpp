#include "owdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json_util.hpp"
#include "rng.hpp"

namespace owdet {

using detail::ojson;

const Category* Taxonomy::find(std::int64_t category_id) const {
  for (const auto& c : categories) {
    if (c.id == category_id) {
      return &c;
    }
  }
  return nullptr;
}

std::set<std::int64_t> Taxonomy::ids() const {
  std::set<std::int64_t> out;
  for (const auto& c : categories) {
    out.insert(c.id);
  }
  return out;
}

void Taxonomy::validate() const {
  std::unordered_set<std::int64_t> seen;
  for (const auto& c : categories) {
    if (!seen.insert(c.id).second) {
      throw ValidationError("taxonomy: duplicate category id " + std::to_string(c.id));
    }
    if (c.supercategory.empty()) {
      throw ValidationError("taxonomy: category " + std::to_string(c.id) +
                            " has an empty supercategory");
    }
  }
}

const ImageInfo* Dataset::find_image(std::int64_t image_id) const {
  for (const auto& img : images) {
    if (img.id == image_id) {
      return &img;
    }
  }
  return nullptr;
}

std::unordered_map<std::int64_t, std::vector<std::size_t>>
Dataset::annotations_by_image() const {
  std::unordered_map<std::int64_t, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    out[annotations[i].image_id].push_back(i);
  }
  return out;
}

void ClassSplit::validate(const Taxonomy& taxonomy) const {
  for (std::int64_t id : base_category_ids) {
    if (novel_category_ids.count(id) > 0) {
      throw ValidationError("split '" + name + "': category " + std::to_string(id) +
                            " is both base and novel");
    }
  }
  std::set<std::int64_t> all = base_category_ids;
  all.insert(novel_category_ids.begin(), novel_category_ids.end());
  if (all != taxonomy.ids()) {
    throw ValidationError("split '" + name +
                          "' does not cover the taxonomy category ids exactly");
  }
}

Dataset load_dataset(const std::filesystem::path& annotation_file) {
  const nlohmann::json root = detail::load_json(annotation_file);
  const std::string ctx = annotation_file.filename().string();
  if (!root.is_object()) {
    throw ParseError(ctx + ": top level must be an object");
  }

  Dataset ds;

  for (const auto& jc : detail::require_field<nlohmann::json>(root, "categories", ctx)) {
    Category c;
    c.id = detail::require_field<std::int64_t>(jc, "id", ctx + " categories");
    c.name = detail::require_field<std::string>(jc, "name", ctx + " categories");
    c.supercategory = detail::optional_field<std::string>(
        jc, "supercategory", "none", ctx + " categories");
    ds.taxonomy.categories.push_back(std::move(c));
  }
  ds.taxonomy.validate();

  std::unordered_map<std::int64_t, std::size_t> image_index;
  for (const auto& ji : detail::require_field<nlohmann::json>(root, "images", ctx)) {
    ImageInfo img;
    img.id = detail::require_field<std::int64_t>(ji, "id", ctx + " images");
    img.width = detail::require_field<double>(ji, "width", ctx + " images");
    img.height = detail::require_field<double>(ji, "height", ctx + " images");
    img.file_name = detail::optional_field<std::string>(ji, "file_name", "", ctx + " images");
    if (image_index.count(img.id) > 0) {
      throw ParseError(ctx + ": duplicate image id " + std::to_string(img.id));
    }
    image_index[img.id] = ds.images.size();
    ds.images.push_back(std::move(img));
  }

  for (const auto& ja : detail::require_field<nlohmann::json>(root, "annotations", ctx)) {
    GroundTruthAnnotation ann;
    ann.id = detail::require_field<std::int64_t>(ja, "id", ctx + " annotations");
    const std::string actx = ctx + " annotation " + std::to_string(ann.id);
    ann.image_id = detail::require_field<std::int64_t>(ja, "image_id", actx);
    ann.category_id = detail::require_field<std::int64_t>(ja, "category_id", actx);
    ann.is_crowd = detail::optional_field<int>(ja, "iscrowd", 0, actx) != 0;

    const auto it = image_index.find(ann.image_id);
    if (it == image_index.end()) {
      throw ParseError(actx + ": references missing image id " +
                       std::to_string(ann.image_id));
    }
    if (!ds.taxonomy.contains(ann.category_id)) {
      throw ParseError(actx + ": references unknown category id " +
                       std::to_string(ann.category_id));
    }

    const auto bbox = detail::require_field<std::vector<double>>(ja, "bbox", actx);
    if (bbox.size() != 4) {
      throw ParseError(actx + ": bbox must have 4 entries [x,y,w,h]");
    }
    if (bbox[2] < 0 || bbox[3] < 0) {
      throw ParseError(actx + ": bbox has negative width or height");
    }
    const ImageInfo& img = ds.images[it->second];
    ann.box = BBox::from_xywh(bbox[0], bbox[1], bbox[2], bbox[3])
                  .clipped(img.width, img.height);
    ds.annotations.push_back(std::move(ann));
  }

  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& annotation_file) {
  ojson root;
  root["images"] = ojson::array();
  for (const auto& img : ds.images) {
    ojson ji;
    ji["id"] = img.id;
    ji["width"] = img.width;
    ji["height"] = img.height;
    ji["file_name"] = img.file_name;
    root["images"].push_back(std::move(ji));
  }
  root["annotations"] = ojson::array();
  for (const auto& ann : ds.annotations) {
    ojson ja;
    ja["id"] = ann.id;
    ja["image_id"] = ann.image_id;
    ja["category_id"] = ann.category_id;
    ja["bbox"] = {ann.box.x1, ann.box.y1, ann.box.width(), ann.box.height()};
    ja["area"] = area(ann.box);
    ja["iscrowd"] = ann.is_crowd ? 1 : 0;
    root["annotations"].push_back(std::move(ja));
  }
  root["categories"] = ojson::array();
  for (const auto& c : ds.taxonomy.categories) {
    ojson jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    jc["supercategory"] = c.supercategory;
    root["categories"].push_back(std::move(jc));
  }
  detail::write_json(root, annotation_file);
}

ClassSplit load_split_file(const std::filesystem::path& file, const Taxonomy& taxonomy) {
  const nlohmann::json root = detail::load_json(file);
  const std::string ctx = file.filename().string();

  ClassSplit split;
  split.name = detail::require_field<std::string>(root, "name", ctx);
  for (const auto& entry : detail::require_field<nlohmann::json>(root, "base", ctx)) {
    if (entry.is_number_integer()) {
      const std::int64_t id = entry.get<std::int64_t>();
      if (!taxonomy.contains(id)) {
        throw ParseError(ctx + ": base category id " + std::to_string(id) +
                         " not in taxonomy");
      }
      split.base_category_ids.insert(id);
    } else if (entry.is_string()) {
      const std::string name = entry.get<std::string>();
      const Category* found = nullptr;
      for (const auto& c : taxonomy.categories) {
        if (c.name == name) {
          found = &c;
          break;
        }
      }
      if (found == nullptr) {
        throw ParseError(ctx + ": base category name '" + name + "' not in taxonomy");
      }
      split.base_category_ids.insert(found->id);
    } else {
      throw ParseError(ctx + ": base entries must be category names or ids");
    }
  }
  for (std::int64_t id : taxonomy.ids()) {
    if (split.base_category_ids.count(id) == 0) {
      split.novel_category_ids.insert(id);
    }
  }
  split.validate(taxonomy);
  return split;
}

void save_split_file(const ClassSplit& split, const std::filesystem::path& file) {
  ojson root;
  root["name"] = split.name;
  root["base"] = split.base_category_ids;
  root["novel"] = split.novel_category_ids;
  detail::write_json(root, file);
}

Dataset training_view(const Dataset& ds, const ClassSplit& split) {
  for (const auto& ann : ds.annotations) {
    if (!split.is_base(ann.category_id) && !split.is_novel(ann.category_id)) {
      throw ValidationError("split '" + split.name + "' does not cover category " +
                            std::to_string(ann.category_id));
    }
  }

  Dataset view;
  view.taxonomy = ds.taxonomy;

  std::unordered_set<std::int64_t> retained_images;
  for (const auto& ann : ds.annotations) {
    if (split.is_base(ann.category_id)) {
      view.annotations.push_back(ann);
      retained_images.insert(ann.image_id);
    }
  }
  for (const auto& img : ds.images) {
    if (retained_images.count(img.id) > 0) {
      view.images.push_back(img);
    }
  }
  return view;
}

SplitStats split_stats(const Dataset& ds, const ClassSplit& split) {
  const Dataset view = training_view(ds, split);
  SplitStats stats;
  stats.n_classes = split.base_category_ids.size();
  stats.n_images = view.images.size();
  stats.n_instances = view.annotations.size();
  for (const auto& ann : view.annotations) {
    if (ann.is_crowd) {
      ++stats.n_crowd_instances;
    }
  }
  return stats;
}

std::pair<Dataset, Dataset> carve_holdout(const Dataset& ds, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ValidationError("carve_holdout: fraction must lie in (0, 1)");
  }

  std::vector<std::int64_t> image_ids;
  image_ids.reserve(ds.images.size());
  for (const auto& img : ds.images) {
    image_ids.push_back(img.id);
  }
  detail::Rng rng(seed);
  rng.shuffle(image_ids);

  const std::size_t n_holdout = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(ds.images.size())));
  std::unordered_set<std::int64_t> holdout_ids(image_ids.begin(),
                                               image_ids.begin() + n_holdout);

  Dataset train;
  Dataset holdout;
  train.taxonomy = ds.taxonomy;
  holdout.taxonomy = ds.taxonomy;
  for (const auto& img : ds.images) {
    (holdout_ids.count(img.id) > 0 ? holdout : train).images.push_back(img);
  }
  for (const auto& ann : ds.annotations) {
    (holdout_ids.count(ann.image_id) > 0 ? holdout : train).annotations.push_back(ann);
  }
  return {std::move(train), std::move(holdout)};
}

}  // namespace owdet
