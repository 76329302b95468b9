#include "owdet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json_util.hpp"

namespace owdet {

OverlapMatrix overlap_matrix(const std::vector<TopBoxes>& sources, double iou_t) {
  if (sources.size() < 2) {
    throw ValidationError("overlap_matrix: need at least two sources");
  }
  OverlapMatrix m;
  for (const auto& s : sources) {
    m.source_tags.push_back(s.source_tag);
  }
  m.values.assign(sources.size(),
                  std::vector<std::optional<double>>(sources.size(), std::nullopt));
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < sources.size(); ++j) {
      m.values[i][j] = pairwise_overlap(sources[i], sources[j], iou_t);
    }
  }
  return m;
}

std::int64_t SizeHistogram::total() const {
  std::int64_t sum = overflow;
  for (std::int64_t c : counts) {
    sum += c;
  }
  return sum;
}

std::vector<double> default_size_edges() {
  return {0, 16, 32, 64, 96, 128, 192, 256, 512};
}

SizeHistogram size_histogram(std::span<const PseudoBox> boxes,
                             std::vector<double> edges, std::string source_tag) {
  if (edges.size() < 2) {
    throw ValidationError("size_histogram: need at least two bin edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw ValidationError("size_histogram: edges must be strictly increasing");
    }
  }

  SizeHistogram h;
  h.source_tag = std::move(source_tag);
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (const auto& b : boxes) {
    const double size = std::sqrt(area(b.box));
    if (size < h.edges.front() || size > h.edges.back()) {
      ++h.overflow;
      continue;
    }
    // upper_bound - 1 gives the half-open bin; the final edge folds into
    // the last (closed) bin.
    const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), size);
    std::size_t bin = static_cast<std::size_t>(it - h.edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    if (bin >= h.counts.size()) {
      bin = h.counts.size() - 1;
    }
    ++h.counts[bin];
  }
  return h;
}

namespace {

double field_value(const EvalReport& r, ReportField f) {
  switch (f) {
    case ReportField::ArAll:
      return r.ar_all();
    case ReportField::ArNovel:
      return r.ar_novel();
    case ReportField::ArNovelSmall:
      return r.ar_novel_small();
    case ReportField::ArNovelMedium:
      return r.ar_novel_medium();
    case ReportField::ArNovelLarge:
      return r.ar_novel_large();
  }
  throw ValidationError("render_table: unknown report field");
}

std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", ratio * 100.0);
  return buf;
}

}  // namespace

std::string render_table(std::span<const EvalReport> reports,
                         const TableLayout& layout) {
  if (reports.empty()) {
    throw ValidationError("render_table: no reports");
  }
  if (layout.columns.empty()) {
    throw ValidationError("render_table: layout has no columns");
  }
  for (const auto& r : reports) {
    if (r.config.budget != reports.front().config.budget ||
        r.config.iou_thresholds != reports.front().config.iou_thresholds) {
      throw ValidationError("render_table: reports do not share a config");
    }
  }

  const std::size_t n_rows = reports.size();
  const std::size_t n_cols = layout.columns.size();

  std::vector<std::vector<std::string>> cells(n_rows, std::vector<std::string>(n_cols));
  for (std::size_t c = 0; c < n_cols; ++c) {
    double best = field_value(reports[0], layout.columns[c].field);
    for (const auto& r : reports) {
      best = std::max(best, field_value(r, layout.columns[c].field));
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double v = field_value(reports[r], layout.columns[c].field);
      std::string text = percent(v);
      if (layout.mark_column_maxima && v == best) {
        text = "*" + text + "*";
      }
      cells[r][c] = std::move(text);
    }
  }

  std::vector<std::string> row_labels;
  row_labels.reserve(n_rows);
  std::size_t label_width = 0;
  for (const auto& r : reports) {
    row_labels.push_back(r.source_tag.empty() ? r.dataset_id : r.source_tag);
    label_width = std::max(label_width, row_labels.back().size());
  }

  std::vector<std::size_t> widths(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    widths[c] = layout.columns[c].header.size();
    for (std::size_t r = 0; r < n_rows; ++r) {
      widths[c] = std::max(widths[c], cells[r][c].size());
    }
  }

  std::ostringstream out;
  out << std::string(label_width, ' ');
  for (std::size_t c = 0; c < n_cols; ++c) {
    out << "  " << std::string(widths[c] - layout.columns[c].header.size(), ' ')
        << layout.columns[c].header;
  }
  out << "\n";
  for (std::size_t r = 0; r < n_rows; ++r) {
    out << row_labels[r] << std::string(label_width - row_labels[r].size(), ' ');
    for (std::size_t c = 0; c < n_cols; ++c) {
      out << "  " << std::string(widths[c] - cells[r][c].size(), ' ') << cells[r][c];
    }
    out << "\n";
  }
  return out.str();
}

void save_overlap_matrix(const OverlapMatrix& m, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "row_source,col_source,overlap\n";
  for (std::size_t i = 0; i < m.source_tags.size(); ++i) {
    for (std::size_t j = 0; j < m.source_tags.size(); ++j) {
      out << m.source_tags[i] << "," << m.source_tags[j] << ",";
      if (m.values[i][j].has_value()) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", *m.values[i][j]);
        out << buf;
      } else {
        out << "undefined";
      }
      out << "\n";
    }
  }
  detail::write_text(out.str(), file);
}

void save_size_histogram(const SizeHistogram& h, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "source,bin_low,bin_high,count\n";
  for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
    out << h.source_tag << "," << h.edges[i] << "," << h.edges[i + 1] << ","
        << h.counts[i] << "\n";
  }
  out << h.source_tag << "," << h.edges.back() << ",inf," << h.overflow << "\n";
  detail::write_text(out.str(), file);
}

}  // namespace owdet
