#pragma once
// Output and configuration plumbing: CSV with 17 significant digits (so
// reruns are byte-identical), a flat key=value config format with strict
// key checking, SVG line plots whose polylines carry the data values
// verbatim, and a small index-deterministic parallel_for.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "g2inst/types.hpp"

namespace g2inst::io {

// Configuration and file-format failures throw g2inst::ConfigError with the
// origin (path or '<string>') in the message.

// %.17g rendering; round-trips every double exactly.
std::string fmt17(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  void raw_row(const std::vector<std::string>& cells);
  const std::filesystem::path& path() const { return path_; }

  void flush();  // writes the accumulated rows atomically

 private:
  std::filesystem::path path_;
  std::string buffer_;
  size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

// Atomic full-file write (temp file + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Flat key=value configuration: '#' comments, one pair per line, values kept
// as strings with typed getters.  Unknown keys are rejected explicitly so a
// typo cannot silently fall back to a default.

class Config {
 public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> number_list(const std::string& key,
                                  const std::vector<double>& fallback) const;

  // Throws ConfigError naming the offending key when one is not in the
  // allowed set.
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

 private:
  std::map<std::string, std::string> kv_;
  std::string origin_;
};

// ---------------------------------------------------------------------------
// SVG line plots.  Polyline points are written as the data values with 17
// significant digits; the drawing is mapped onto the canvas through the
// viewBox of a nested <svg> element, so the stored coordinates equal the
// CSV columns exactly.  Set xlog to plot against log10 of the x column (the
// stored x coordinates are then log10 values).

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
};

struct SvgOptions {
  int width = 960, height = 600;
  std::string title, xlabel, ylabel;
  bool xlog = false;
};

void write_svg_lines(const std::filesystem::path& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& opt);

// Extracts the polyline point lists of a plot written by write_svg_lines
// (used by tests to confirm the plot carries the data unchanged).
std::vector<std::vector<std::pair<double, double>>> read_svg_points(
    const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Deterministic parallel map: runs fn(i) for i in [0, n) on up to jobs
// threads (jobs <= 0: hardware count); results must be written into
// index-addressed slots by the caller, so the output order never depends on
// scheduling.  Exceptions are captured and rethrown on the calling thread.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

int hardware_jobs();

}  // namespace g2inst::io
