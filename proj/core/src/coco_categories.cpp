#include <array>
#include <algorithm>
#include <string_view>

#include "owdet/dataset.hpp"

namespace owdet {

namespace {

struct CocoCategoryRow {
  std::int64_t id;
  std::string_view name;
  std::string_view supercategory;
};

// Standard COCO 2017 detection categories. Ids are sparse (gaps are
// categories dropped from the original 91-class list).
constexpr std::array<CocoCategoryRow, 80> kCocoCategories{{
    {1, "person", "person"},
    {2, "bicycle", "vehicle"},
    {3, "car", "vehicle"},
    {4, "motorcycle", "vehicle"},
    {5, "airplane", "vehicle"},
    {6, "bus", "vehicle"},
    {7, "train", "vehicle"},
    {8, "truck", "vehicle"},
    {9, "boat", "vehicle"},
    {10, "traffic light", "outdoor"},
    {11, "fire hydrant", "outdoor"},
    {13, "stop sign", "outdoor"},
    {14, "parking meter", "outdoor"},
    {15, "bench", "outdoor"},
    {16, "bird", "animal"},
    {17, "cat", "animal"},
    {18, "dog", "animal"},
    {19, "horse", "animal"},
    {20, "sheep", "animal"},
    {21, "cow", "animal"},
    {22, "elephant", "animal"},
    {23, "bear", "animal"},
    {24, "zebra", "animal"},
    {25, "giraffe", "animal"},
    {27, "backpack", "accessory"},
    {28, "umbrella", "accessory"},
    {31, "handbag", "accessory"},
    {32, "tie", "accessory"},
    {33, "suitcase", "accessory"},
    {34, "frisbee", "sports"},
    {35, "skis", "sports"},
    {36, "snowboard", "sports"},
    {37, "sports ball", "sports"},
    {38, "kite", "sports"},
    {39, "baseball bat", "sports"},
    {40, "baseball glove", "sports"},
    {41, "skateboard", "sports"},
    {42, "surfboard", "sports"},
    {43, "tennis racket", "sports"},
    {44, "bottle", "kitchen"},
    {46, "wine glass", "kitchen"},
    {47, "cup", "kitchen"},
    {48, "fork", "kitchen"},
    {49, "knife", "kitchen"},
    {50, "spoon", "kitchen"},
    {51, "bowl", "kitchen"},
    {52, "banana", "food"},
    {53, "apple", "food"},
    {54, "sandwich", "food"},
    {55, "orange", "food"},
    {56, "broccoli", "food"},
    {57, "carrot", "food"},
    {58, "hot dog", "food"},
    {59, "pizza", "food"},
    {60, "donut", "food"},
    {61, "cake", "food"},
    {62, "chair", "furniture"},
    {63, "couch", "furniture"},
    {64, "potted plant", "furniture"},
    {65, "bed", "furniture"},
    {67, "dining table", "furniture"},
    {70, "toilet", "furniture"},
    {72, "tv", "electronic"},
    {73, "laptop", "electronic"},
    {74, "mouse", "electronic"},
    {75, "remote", "electronic"},
    {76, "keyboard", "electronic"},
    {77, "cell phone", "electronic"},
    {78, "microwave", "appliance"},
    {79, "oven", "appliance"},
    {80, "toaster", "appliance"},
    {81, "sink", "appliance"},
    {82, "refrigerator", "appliance"},
    {84, "book", "indoor"},
    {85, "clock", "indoor"},
    {86, "vase", "indoor"},
    {87, "scissors", "indoor"},
    {88, "teddy bear", "indoor"},
    {89, "hair drier", "indoor"},
    {90, "toothbrush", "indoor"},
}};

// The 20 PASCAL-VOC classes under their COCO names.
constexpr std::array<std::string_view, 20> kVocClassNames{
    "person",     "bird",       "cat",          "cow",   "dog",
    "horse",      "sheep",      "airplane",     "bicycle", "boat",
    "bus",        "car",        "motorcycle",   "train", "bottle",
    "chair",      "dining table", "potted plant", "couch", "tv",
};

// Cumulative supercategory groups, in benchmark column order.
constexpr std::array<std::string_view, 12> kSupercatOrder{
    "person",   "vehicle",    "outdoor",   "animal",    "accessory",
    "sports",   "kitchen",    "food",      "furniture", "electronic",
    "appliance", "indoor",
};

// How many leading supercategory groups each cumulative split takes.
struct SupercatSplit {
  std::string_view name;
  std::size_t n_groups;
};
constexpr std::array<SupercatSplit, 6> kSupercatSplits{{
    {"supercat-1", 1},   // person
    {"supercat-9", 2},   // + vehicle
    {"supercat-24", 4},  // + outdoor, animal
    {"supercat-39", 6},  // + accessory, sports
    {"supercat-56", 8},  // + kitchen, food
    {"supercat-80", 12}, // + furniture, electronic, appliance, indoor
}};

ClassSplit make_split(std::string name, std::set<std::int64_t> base) {
  ClassSplit split;
  split.name = std::move(name);
  split.base_category_ids = std::move(base);
  for (const auto& cat : kCocoCategories) {
    if (split.base_category_ids.count(cat.id) == 0) {
      split.novel_category_ids.insert(cat.id);
    }
  }
  return split;
}

}  // namespace

const Taxonomy& coco_taxonomy() {
  static const Taxonomy taxonomy = [] {
    Taxonomy t;
    t.categories.reserve(kCocoCategories.size());
    for (const auto& row : kCocoCategories) {
      t.categories.push_back(
          {row.id, std::string(row.name), std::string(row.supercategory)});
    }
    return t;
  }();
  return taxonomy;
}

std::vector<std::string> builtin_split_names() {
  std::vector<std::string> names{"person", "voc"};
  for (const auto& s : kSupercatSplits) {
    names.emplace_back(s.name);
  }
  return names;
}

ClassSplit builtin_split(const std::string& name) {
  if (name == "person") {
    return make_split("person", {1});
  }
  if (name == "voc") {
    std::set<std::int64_t> base;
    for (const auto& cls : kVocClassNames) {
      for (const auto& cat : kCocoCategories) {
        if (cat.name == cls) {
          base.insert(cat.id);
          break;
        }
      }
    }
    return make_split("voc", std::move(base));
  }
  for (const auto& s : kSupercatSplits) {
    if (name == s.name) {
      std::set<std::int64_t> base;
      for (std::size_t g = 0; g < s.n_groups; ++g) {
        for (const auto& cat : kCocoCategories) {
          if (cat.supercategory == kSupercatOrder[g]) {
            base.insert(cat.id);
          }
        }
      }
      return make_split(std::string(s.name), std::move(base));
    }
  }
  throw ValidationError("unknown builtin split name: " + name);
}

}  // namespace owdet
