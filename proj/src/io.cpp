// Output and configuration plumbing.  CSV and SVG renderings both carry the
// data with 17 significant digits so that reruns of a deterministic pipeline
// produce byte-identical artifacts.

#include "g2inst/io.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace g2inst::io {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("csv header must not be empty");
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_)
    throw std::invalid_argument("csv row width does not match the header");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += fmt17(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw std::invalid_argument("csv row width does not match the header");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::flush() { write_text_atomic(path_, buffer_); }

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(where + ": cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv file " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line, ',');
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != table.header.size()) {
      std::ostringstream msg;
      msg << path.string() << ":" << lineno << ": row width " << cells.size()
          << " does not match header width " << table.header.size();
      throw ConfigError(msg.str());
    }
    std::vector<double> row(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) {
      std::ostringstream where;
      where << path.string() << ":" << lineno;
      row[i] = parse_double(cells[i], where.str());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Config

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": expected key = value, got '" << line << "'";
      throw ConfigError(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": empty key";
      throw ConfigError(msg.str());
    }
    cfg.kv_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str(), path.string());
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::number(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  return parse_double(it->second, origin_ + ": key '" + key + "'");
}

int Config::integer(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (end == it->second.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" + it->second +
                      "' as an integer");
  return static_cast<int>(v);
}

bool Config::flag(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" + v + "' as a flag");
}

std::vector<double> Config::number_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& cell : split(it->second, ',')) {
    const std::string c = trim(cell);
    if (c.empty()) continue;
    out.push_back(parse_double(c, origin_ + ": key '" + key + "'"));
  }
  return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : kv_) {
    if (!allowed.count(key)) {
      std::ostringstream msg;
      msg << origin_ << ": unknown key '" << key << "'";
      throw ConfigError(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Range {
  double lo = 0.0, hi = 1.0;
  void widen() {
    if (lo > hi) std::swap(lo, hi);
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

}  // namespace

void write_svg_lines(const std::filesystem::path& path, const std::vector<SvgSeries>& series,
                     const SvgOptions& opt) {
  const int ml = 70, mr = 25, mt = 45, mb = 55;
  const int pw = opt.width - ml - mr, ph = opt.height - mt - mb;
  if (pw <= 0 || ph <= 0) throw std::invalid_argument("svg canvas too small");

  Range rx, ry;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("svg series '" + s.label + "' has mismatched x/y sizes");
    for (size_t i = 0; i < s.x.size(); ++i) {
      double x = s.x[i];
      if (opt.xlog) {
        if (x <= 0.0)
          throw std::invalid_argument("svg xlog requires positive x values");
        x = std::log10(x);
      }
      const double y = s.y[i];
      if (first) {
        rx = {x, x};
        ry = {y, y};
        first = false;
      } else {
        rx.lo = std::min(rx.lo, x);
        rx.hi = std::max(rx.hi, x);
        ry.lo = std::min(ry.lo, y);
        ry.hi = std::max(ry.hi, y);
      }
    }
  }
  rx.widen();
  ry.widen();

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
      << opt.height << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    svg << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << esc(opt.title) << "</text>\n";

  // Axis ticks in outer coordinates.
  auto map_x = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto map_y = [&](double y) { return mt + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };
  svg << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\"/>\n";
  svg << "</g>\n";
  char buf[64];
  for (int k = 0; k <= 5; ++k) {
    const double x = rx.lo + (rx.hi - rx.lo) * k / 5.0;
    const double y = ry.lo + (ry.hi - ry.lo) * k / 5.0;
    const double cx = map_x(x), cy = map_y(y);
    svg << "<line x1=\"" << cx << "\" y1=\"" << mt + ph << "\" x2=\"" << cx << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"#444\"/>\n";
    std::snprintf(buf, sizeof buf, "%.6g", x);
    svg << "<text x=\"" << cx << "\" y=\"" << mt + ph + 20 << "\" text-anchor=\"middle\">"
        << (opt.xlog ? "1e" : "") << buf << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << cy << "\" x2=\"" << ml << "\" y2=\"" << cy
        << "\" stroke=\"#444\"/>\n";
    std::snprintf(buf, sizeof buf, "%.6g", y);
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << cy + 4 << "\" text-anchor=\"end\">" << buf
        << "</text>\n";
  }
  if (!opt.xlabel.empty())
    svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 12
        << "\" text-anchor=\"middle\">" << esc(opt.xlabel) << (opt.xlog ? " (log10)" : "")
        << "</text>\n";
  if (!opt.ylabel.empty())
    svg << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << esc(opt.ylabel) << "</text>\n";

  // Legend.
  int lx = ml + 10;
  for (const auto& s : series) {
    svg << "<rect x=\"" << lx << "\" y=\"" << mt + 6 << "\" width=\"14\" height=\"3\" fill=\""
        << s.color << "\"/>\n";
    svg << "<text x=\"" << lx + 18 << "\" y=\"" << mt + 11 << "\">" << esc(s.label)
        << "</text>\n";
    lx += 30 + 8 * static_cast<int>(s.label.size());
  }

  // Data panel: a nested svg whose viewBox is the (flipped) data range, so
  // the polyline points are the data values themselves.
  svg << "<svg x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" viewBox=\"" << fmt17(rx.lo) << " " << fmt17(-ry.hi) << " " << fmt17(rx.hi - rx.lo)
      << " " << fmt17(ry.hi - ry.lo) << "\" preserveAspectRatio=\"none\">\n";
  for (const auto& s : series) {
    svg << "<polyline class=\"data\" fill=\"none\" stroke=\"" << s.color
        << "\" vector-effect=\"non-scaling-stroke\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) {
      const double x = opt.xlog ? std::log10(s.x[i]) : s.x[i];
      if (i) svg << ' ';
      svg << fmt17(x) << ',' << fmt17(-s.y[i]);
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n</svg>\n";
  write_text_atomic(path, svg.str());
}

std::vector<std::vector<std::pair<double, double>>> read_svg_points(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open svg file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const std::string s = text.str();

  std::vector<std::vector<std::pair<double, double>>> out;
  size_t pos = 0;
  while ((pos = s.find("<polyline class=\"data\"", pos)) != std::string::npos) {
    const size_t pbeg = s.find("points=\"", pos);
    if (pbeg == std::string::npos) break;
    const size_t beg = pbeg + 8;
    const size_t end = s.find('"', beg);
    if (end == std::string::npos) break;
    std::vector<std::pair<double, double>> pts;
    std::istringstream ps(s.substr(beg, end - beg));
    std::string pair;
    while (ps >> pair) {
      const size_t comma = pair.find(',');
      if (comma == std::string::npos)
        throw ConfigError(path.string() + ": malformed polyline point '" + pair + "'");
      const double x = parse_double(pair.substr(0, comma), path.string());
      const double y = parse_double(pair.substr(comma + 1), path.string());
      pts.emplace_back(x, -y);  // undo the vertical flip
    }
    out.push_back(std::move(pts));
    pos = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// parallel_for

int hardware_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs <= 0) jobs = hardware_jobs();
  jobs = std::min(jobs, n);
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(jobs));
  for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace g2inst::io
