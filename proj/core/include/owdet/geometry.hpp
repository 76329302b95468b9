#pragma once

#include <algorithm>
#include <string_view>

#include "owdet/error.hpp"

namespace owdet {

// Axis-aligned box in continuous pixel coordinates, corner form.
// Degenerate boxes (zero width or height) are valid and have area 0;
// negative extents are rejected at construction.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  BBox() = default;
  BBox(double x1_, double y1_, double x2_, double y2_)
      : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
    if (x2 < x1 || y2 < y1) {
      throw ValidationError("BBox: negative extent (x2 < x1 or y2 < y1)");
    }
  }

  static BBox from_xywh(double x, double y, double w, double h) {
    return BBox(x, y, x + w, y + h);
  }

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
  bool degenerate() const { return x1 == x2 || y1 == y2; }

  // Intersection with [0,w] x [0,h]; empty intersections collapse to a
  // degenerate box on the nearest image border.
  BBox clipped(double w, double h) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class SizeClass { Small, Medium, Large };

double area(const BBox& b);

// Intersection over union. Total on valid boxes: 0 when the union has
// zero area (both degenerate).
double iou(const BBox& a, const BBox& b);

// COCO-convention strata: Small below 32^2, Medium in [32^2, 96^2),
// Large from 96^2 up. Boundaries are inclusive on the larger class.
SizeClass size_class_for_area(double a);
SizeClass size_class(const BBox& b);

std::string_view to_string(SizeClass c);

}  // namespace owdet
