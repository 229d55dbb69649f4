#include "larmap/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "larmap/numformat.hpp"

namespace larmap {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void RasterGrid::validate() const {
  if (cellsize <= 0.0) throw FormatError("raster cellsize must be > 0");
  if (ncols <= 0 || nrows <= 0) throw FormatError("raster dimensions must be positive");
  if (values.size() != static_cast<size_t>(ncols) * static_cast<size_t>(nrows))
    throw FormatError("raster value count " + std::to_string(values.size()) +
                      " does not match ncols*nrows = " +
                      std::to_string(static_cast<size_t>(ncols) * nrows));
}

bool RasterGrid::sample(const GeoPoint& p, double& out) const {
  double fx = (p.easting - xllcorner) / cellsize;
  double fy = (p.northing - yllcorner) / cellsize;
  if (fx < 0.0 || fy < 0.0) return false;
  int col = static_cast<int>(fx);
  int row_from_bottom = static_cast<int>(fy);
  if (col >= ncols || row_from_bottom >= nrows) return false;
  double v = at(col, nrows - 1 - row_from_bottom);
  if (is_nodata(v)) return false;
  out = v;
  return true;
}

RasterGrid load_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open raster: " + path);

  RasterGrid g;
  bool have_ncols = false, have_nrows = false, have_xll = false, have_yll = false,
       have_cell = false;

  // Header: key/value lines until the first token that parses as a number.
  std::string token;
  double pending_value = 0.0;
  bool have_pending = false;
  while (in >> token) {
    double num;
    if (try_parse_double(token, num)) {
      pending_value = num;
      have_pending = true;
      break;
    }
    std::string key = lower(token);
    std::string raw;
    if (!(in >> raw)) throw FormatError(path + ": header key '" + token + "' has no value");
    double value = parse_double(raw, path + " header " + token);
    if (key == "ncols") {
      g.ncols = static_cast<int>(value);
      have_ncols = true;
    } else if (key == "nrows") {
      g.nrows = static_cast<int>(value);
      have_nrows = true;
    } else if (key == "xllcorner") {
      g.xllcorner = value;
      have_xll = true;
    } else if (key == "yllcorner") {
      g.yllcorner = value;
      have_yll = true;
    } else if (key == "cellsize") {
      g.cellsize = value;
      have_cell = true;
    } else if (key == "nodata_value") {
      g.nodata = value;
    } else {
      throw FormatError(path + ": unknown header key '" + token + "'");
    }
  }
  if (!have_ncols || !have_nrows || !have_xll || !have_yll || !have_cell) {
    std::string missing;
    if (!have_ncols) missing += " ncols";
    if (!have_nrows) missing += " nrows";
    if (!have_xll) missing += " xllcorner";
    if (!have_yll) missing += " yllcorner";
    if (!have_cell) missing += " cellsize";
    throw FormatError(path + ": missing header key(s):" + missing);
  }

  size_t expected = static_cast<size_t>(g.ncols) * static_cast<size_t>(g.nrows);
  g.values.reserve(expected);
  if (have_pending) g.values.push_back(pending_value);
  while (in >> token)
    g.values.push_back(parse_double(token, path + " data value"));
  if (g.values.size() != expected)
    throw FormatError(path + ": expected " + std::to_string(expected) + " values, found " +
                      std::to_string(g.values.size()));
  g.validate();
  return g;
}

void write_raster(const RasterGrid& grid, const std::string& path) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open raster for writing: " + path);
  out << "ncols " << grid.ncols << '\n';
  out << "nrows " << grid.nrows << '\n';
  out << "xllcorner " << format_double(grid.xllcorner) << '\n';
  out << "yllcorner " << format_double(grid.yllcorner) << '\n';
  out << "cellsize " << format_double(grid.cellsize) << '\n';
  out << "NODATA_value " << format_double(grid.nodata) << '\n';
  for (int r = 0; r < grid.nrows; ++r) {
    for (int c = 0; c < grid.ncols; ++c) {
      if (c) out << ' ';
      out << format_double(grid.at(c, r));
    }
    out << '\n';
  }
}

}  // namespace larmap
