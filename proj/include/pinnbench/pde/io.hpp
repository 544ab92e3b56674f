#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pinnbench/pde/case.hpp"
#include "pinnbench/pde/fields.hpp"

namespace pinnbench::pde {

struct CsvTable {
  std::vector<std::string> header;
  Mat data;  // rows x header.size()
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    std::string tok = line.substr(start, pos == std::string::npos ? pos : pos - start);
    // trim surrounding blanks
    std::size_t b = tok.find_first_not_of(" \t");
    std::size_t e = tok.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : tok.substr(b, e - b + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Comma-separated values, one header row, decimal payload. Errors carry the
// 1-based line number (the header is line 1).
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_csv: cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("read_csv: '" + path + "' is empty");
  t.header = detail::split_csv_line(line);
  const std::size_t ncol = t.header.size();
  if (ncol == 0 || t.header[0].empty())
    throw IoError("read_csv: '" + path + "' line 1: empty header");

  std::vector<double> buf;
  long rows = 0;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> toks = detail::split_csv_line(line);
    if (toks.size() != ncol)
      throw IoError("read_csv: '" + path + "' line " + std::to_string(line_no) + ": expected " +
                    std::to_string(ncol) + " fields, got " + std::to_string(toks.size()));
    for (const std::string& tok : toks) {
      std::size_t used = 0;
      double v = 0;
      bool ok = !tok.empty();
      if (ok) {
        try {
          v = std::stod(tok, &used);
        } catch (const std::exception&) {
          ok = false;
        }
      }
      if (!ok || used != tok.size())
        throw IoError("read_csv: '" + path + "' line " + std::to_string(line_no) +
                      ": malformed number '" + tok + "'");
      buf.push_back(v);
    }
    ++rows;
  }
  if (rows == 0)
    throw IoError("read_csv: '" + path + "' has a header but no data rows");
  t.data.resize(rows, Index(ncol));
  for (long r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ncol; ++c) t.data(r, Index(c)) = buf[std::size_t(r) * ncol + c];
  return t;
}

namespace detail {

// Recognize an exact row-major tensor lattice (last coordinate fastest).
// Values must repeat bit-identically, which holds for files we write and for
// any generator that formats each axis value once.
inline std::vector<Vec> detect_axes(const Mat& pts) {
  const Index dim = pts.cols();
  std::vector<std::vector<double>> uniq(static_cast<std::size_t>(dim));
  for (Index a = 0; a < dim; ++a) {
    std::vector<double> v(pts.rows());
    for (Index r = 0; r < pts.rows(); ++r) v[std::size_t(r)] = pts(r, a);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    uniq[std::size_t(a)] = std::move(v);
  }
  long total = 1;
  for (const auto& v : uniq) {
    if (double(total) * double(v.size()) > 1e12) return {};
    total *= long(v.size());
  }
  if (total != pts.rows()) return {};
  for (Index r = 0; r < pts.rows(); ++r) {
    long rem = r;
    for (Index a = dim - 1; a >= 0; --a) {
      const auto& ax = uniq[std::size_t(a)];
      if (pts(r, a) != ax[std::size_t(rem) % ax.size()]) return {};
      rem /= long(ax.size());
    }
  }
  std::vector<Vec> axes(static_cast<std::size_t>(dim));
  for (Index a = 0; a < dim; ++a) {
    const auto& v = uniq[std::size_t(a)];
    axes[std::size_t(a)] = Eigen::Map<const Vec>(v.data(), Index(v.size()));
  }
  return axes;
}

}  // namespace detail

// Reference ingestion: coordinates first, then one column per unknown.
inline ReferenceSolution load_reference(const Case& c, const std::string& path) {
  CsvTable t = read_csv(path);
  const int want = c.input_dim() + c.n_unknowns();
  if (int(t.header.size()) != want) {
    std::ostringstream os;
    os << "load_reference: '" << path << "': header has " << t.header.size() << " columns (";
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << ") but case '" << c.name << "' needs " << c.input_dim() << " coordinates + "
       << c.n_unknowns() << " unknowns = " << want;
    throw IoError(os.str());
  }
  ReferenceSolution ref;
  ref.points = t.data.leftCols(c.input_dim());
  ref.values = t.data.rightCols(c.n_unknowns());
  ref.axes = detail::detect_axes(ref.points);
  ref.source = "file:" + path;
  return ref;
}

// Locates <base>.csv under BENCH_DATA_DIR, if the variable is set and the
// file exists.
inline std::optional<std::string> data_file(const std::string& base) {
  const char* dir = std::getenv("BENCH_DATA_DIR");
  if (!dir || !*dir) return std::nullopt;
  std::filesystem::path p = std::filesystem::path(dir) / (base + ".csv");
  std::error_code ec;
  if (std::filesystem::exists(p, ec)) return p.string();
  return std::nullopt;
}

// Coefficient grids ship as 2-D lattices "x,y,a". The lattice must be
// uniform per axis (bilinear cells assume equal spacing).
inline BilinearField load_coefficient_grid(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() != 3)
    throw IoError("load_coefficient_grid: '" + path + "': expected columns x,y,value, got " +
                  std::to_string(t.header.size()));
  std::vector<Vec> axes = detail::detect_axes(t.data.leftCols(2));
  if (axes.size() != 2)
    throw IoError("load_coefficient_grid: '" + path + "': rows do not form a tensor lattice");
  for (int a = 0; a < 2; ++a) {
    const Vec& ax = axes[std::size_t(a)];
    require(ax.size() >= 2, "load_coefficient_grid: axis too short");
    double d = ax[1] - ax[0];
    for (Index i = 1; i + 1 < ax.size(); ++i)
      if (std::abs((ax[i + 1] - ax[i]) - d) > 1e-9 * std::max(1.0, std::abs(d)))
        throw IoError("load_coefficient_grid: '" + path + "': axis " + std::to_string(a) +
                      " is not uniformly spaced");
  }
  const int nx = int(axes[0].size()), ny = int(axes[1].size());
  Mat nodes(nx, ny);
  for (Index r = 0; r < t.data.rows(); ++r) {
    long rem = r;
    int j = int(rem % ny);
    int i = int(rem / ny);
    nodes(i, j) = t.data(r, 2);
  }
  Vec lo(2), hi(2);
  lo << axes[0][0], axes[1][0];
  hi << axes[0][nx - 1], axes[1][ny - 1];
  return BilinearField(lo, hi, nx, ny, std::move(nodes));
}

}  // namespace pinnbench::pde
