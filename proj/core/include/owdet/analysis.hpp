#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "owdet/ensemble.hpp"
#include "owdet/eval.hpp"
#include "owdet/pseudolabel.hpp"

namespace owdet {

// Cross-source top-1 overlap fractions. Entries are directional
// (row source against column source) and undefined when the pair shares
// no images.
struct OverlapMatrix {
  std::vector<std::string> source_tags;
  std::vector<std::vector<std::optional<double>>> values;
};

OverlapMatrix overlap_matrix(const std::vector<TopBoxes>& sources, double iou_t = 0.5);

// Box-size histogram over sqrt(area). Bins are half-open [e_i, e_{i+1})
// with the last bin closed; boxes beyond the final edge land in the
// overflow count.
struct SizeHistogram {
  std::string source_tag;
  std::vector<double> edges;
  std::vector<std::int64_t> counts;  // edges.size() - 1 bins
  std::int64_t overflow = 0;

  std::int64_t total() const;
};

std::vector<double> default_size_edges();  // {0,16,32,64,96,128,192,256,512}

SizeHistogram size_histogram(std::span<const PseudoBox> boxes,
                             std::vector<double> edges = default_size_edges(),
                             std::string source_tag = "");

// Table assembly over evaluation reports sharing one config. Values are
// percentages at one decimal place; column maxima can be marked with
// asterisks. Output is a pure function of the inputs.
enum class ReportField {
  ArAll,
  ArNovel,
  ArNovelSmall,
  ArNovelMedium,
  ArNovelLarge,
};

struct TableColumn {
  std::string header;
  ReportField field;
};

struct TableLayout {
  std::vector<TableColumn> columns;
  bool mark_column_maxima = false;
};

std::string render_table(std::span<const EvalReport> reports, const TableLayout& layout);

// Plot-ready emission: one CSV record per matrix cell / histogram bin.
void save_overlap_matrix(const OverlapMatrix& m, const std::filesystem::path& file);
void save_size_histogram(const SizeHistogram& h, const std::filesystem::path& file);

}  // namespace owdet
