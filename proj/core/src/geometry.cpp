#include "owdet/geometry.hpp"

namespace owdet {

BBox BBox::clipped(double w, double h) const {
  const double cx1 = std::clamp(x1, 0.0, w);
  const double cy1 = std::clamp(y1, 0.0, h);
  const double cx2 = std::clamp(x2, 0.0, w);
  const double cy2 = std::clamp(y2, 0.0, h);
  return BBox(cx1, cy1, cx2, cy2);
}

double area(const BBox& b) {
  return b.width() * b.height();
}

double iou(const BBox& a, const BBox& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  return inter / uni;
}

SizeClass size_class_for_area(double a) {
  if (a < 32.0 * 32.0) {
    return SizeClass::Small;
  }
  if (a < 96.0 * 96.0) {
    return SizeClass::Medium;
  }
  return SizeClass::Large;
}

SizeClass size_class(const BBox& b) {
  return size_class_for_area(area(b));
}

std::string_view to_string(SizeClass c) {
  switch (c) {
    case SizeClass::Small:
      return "small";
    case SizeClass::Medium:
      return "medium";
    case SizeClass::Large:
      return "large";
  }
  return "unknown";
}

}  // namespace owdet
