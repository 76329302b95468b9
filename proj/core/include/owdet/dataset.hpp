#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "owdet/geometry.hpp"

namespace owdet {

struct Category {
  std::int64_t id = 0;
  std::string name;
  std::string supercategory;
};

// Category table. Ids are unique; every category carries a non-empty
// supercategory string.
struct Taxonomy {
  std::vector<Category> categories;

  const Category* find(std::int64_t category_id) const;
  bool contains(std::int64_t category_id) const { return find(category_id) != nullptr; }
  std::set<std::int64_t> ids() const;

  void validate() const;
};

struct ImageInfo {
  std::int64_t id = 0;
  double width = 0;
  double height = 0;
  std::string file_name;
};

// A labeled object instance. Crowd annotations mark group-of-object
// regions; evaluation treats them as ignore regions.
struct GroundTruthAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  BBox box;
  bool is_crowd = false;
};

struct Dataset {
  Taxonomy taxonomy;
  std::vector<ImageInfo> images;
  std::vector<GroundTruthAnnotation> annotations;

  const ImageInfo* find_image(std::int64_t image_id) const;
  // Annotation indices grouped by image id.
  std::unordered_map<std::int64_t, std::vector<std::size_t>> annotations_by_image() const;
};

// Partition of a taxonomy into base (training) and novel (held-out)
// category ids. The two sets are disjoint and together cover the taxonomy.
struct ClassSplit {
  std::string name;
  std::set<std::int64_t> base_category_ids;
  std::set<std::int64_t> novel_category_ids;

  bool is_base(std::int64_t category_id) const {
    return base_category_ids.count(category_id) > 0;
  }
  bool is_novel(std::int64_t category_id) const {
    return novel_category_ids.count(category_id) > 0;
  }

  // Checks disjointness and that base + novel cover exactly the taxonomy ids.
  void validate(const Taxonomy& taxonomy) const;
};

// The standard 80-category COCO table (id, name, supercategory) the
// builtin splits are defined over.
const Taxonomy& coco_taxonomy();

// Benchmark splits: "person", "voc", and the cumulative supercategory
// series "supercat-1" ... "supercat-80".
std::vector<std::string> builtin_split_names();
ClassSplit builtin_split(const std::string& name);

// COCO-format annotation ingestion. Boxes are converted from [x,y,w,h]
// to corner form and clipped to image bounds.
Dataset load_dataset(const std::filesystem::path& annotation_file);
void save_dataset(const Dataset& ds, const std::filesystem::path& annotation_file);

// Custom split file: {"name": ..., "base": [category names or ids]}.
// Novel set is the complement within the taxonomy.
ClassSplit load_split_file(const std::filesystem::path& file, const Taxonomy& taxonomy);
void save_split_file(const ClassSplit& split, const std::filesystem::path& file);

// Projection keeping only base-class annotations and only images that
// retain at least one of them.
Dataset training_view(const Dataset& ds, const ClassSplit& split);

struct SplitStats {
  std::size_t n_classes = 0;
  std::size_t n_images = 0;
  std::size_t n_instances = 0;
  std::size_t n_crowd_instances = 0;  // subset of n_instances with is_crowd set
};

// Counts over the training view: base classes, surviving images, surviving
// annotations. Crowd annotations are included in n_instances and also
// reported separately so either counting rule can be read off.
SplitStats split_stats(const Dataset& ds, const ClassSplit& split);

// Deterministic image-level partition by seeded shuffle. The holdout part
// receives ceil(fraction * n_images) images; annotations follow their
// images.
std::pair<Dataset, Dataset> carve_holdout(const Dataset& ds, double fraction,
                                          std::uint64_t seed);

}  // namespace owdet
