#include <doctest.h>

#include <random>

#include "owdet/geometry.hpp"

using namespace owdet;

TEST_CASE("iou identity, disjoint, and partial overlap") {
  const BBox a(0, 0, 10, 10);
  CHECK(iou(a, a) == doctest::Approx(1.0));

  CHECK(iou(BBox(0, 0, 1, 1), BBox(5, 5, 6, 6)) == 0.0);

  // intersection 1, union 4 + 4 - 1 = 7
  CHECK(iou(BBox(0, 0, 2, 2), BBox(1, 1, 3, 3)) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("area arithmetic") {
  CHECK(area(BBox(0, 0, 0, 0)) == 0.0);
  CHECK(area(BBox(0, 0, 32, 32)) == 1024.0);
  CHECK(area(BBox(2, 3, 5, 7)) == 12.0);
}

TEST_CASE("degenerate boxes are valid with zero area and zero iou") {
  const BBox line(5, 5, 5, 9);
  CHECK(area(line) == 0.0);
  CHECK(iou(line, BBox(0, 0, 10, 10)) == 0.0);
  CHECK(iou(line, line) == 0.0);
}

TEST_CASE("negative extents are rejected at construction") {
  CHECK_THROWS_AS(BBox(10, 0, 5, 10), ValidationError);
  CHECK_THROWS_AS(BBox(0, 10, 10, 5), ValidationError);
  CHECK_THROWS_AS(BBox::from_xywh(0, 0, -1, 5), ValidationError);
}

TEST_CASE("size_class boundaries") {
  CHECK(size_class_for_area(1023) == SizeClass::Small);
  CHECK(size_class_for_area(1024) == SizeClass::Medium);
  CHECK(size_class_for_area(9215) == SizeClass::Medium);
  CHECK(size_class_for_area(9216) == SizeClass::Large);
  CHECK(size_class(BBox(0, 0, 32, 32)) == SizeClass::Medium);
}

TEST_CASE("clipping to image bounds") {
  CHECK(BBox(-5, -5, 15, 15).clipped(10, 10) == BBox(0, 0, 10, 10));
  CHECK(BBox(2, 2, 8, 8).clipped(10, 10) == BBox(2, 2, 8, 8));
  // entirely outside collapses to a degenerate box on the border
  CHECK(area(BBox(20, 20, 30, 30).clipped(10, 10)) == 0.0);
}

namespace {

BBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(0.0, 500.0);
  std::uniform_real_distribution<double> extent(0.0, 200.0);
  const double x = coord(rng);
  const double y = coord(rng);
  return BBox(x, y, x + extent(rng), y + extent(rng));
}

}  // namespace

TEST_CASE("iou properties on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  std::uniform_real_distribution<double> scale(0.1, 5.0);
  for (int i = 0; i < 2000; ++i) {
    const BBox a = random_box(rng);
    const BBox b = random_box(rng);
    const double v = iou(a, b);

    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(iou(b, a) == v);

    const double dx = shift(rng);
    const double dy = shift(rng);
    const BBox at(a.x1 + dx, a.y1 + dy, a.x2 + dx, a.y2 + dy);
    const BBox bt(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy);
    CHECK(iou(at, bt) == doctest::Approx(v).epsilon(1e-9));

    const double s = scale(rng);
    const BBox as(a.x1 * s, a.y1 * s, a.x2 * s, a.y2 * s);
    const BBox bs(b.x1 * s, b.y1 * s, b.x2 * s, b.y2 * s);
    CHECK(iou(as, bs) == doctest::Approx(v).epsilon(1e-9));

    if (area(a) > 0.0) {
      CHECK(iou(a, a) == 1.0);
    }
  }
}
