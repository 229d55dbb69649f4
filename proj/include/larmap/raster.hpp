#ifndef LARMAP_RASTER_HPP
#define LARMAP_RASTER_HPP

#include <string>
#include <vector>

#include "larmap/types.hpp"

namespace larmap {

/// Regular grid in ESRI ASCII layout: values row-major with the first data
/// row being the northernmost row. Cell (col, row) with row counted from the
/// top spans x in [xll + col*cell, xll + (col+1)*cell).
struct RasterGrid {
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 1.0;
  int ncols = 0;
  int nrows = 0;
  std::vector<double> values;  // ncols * nrows, row-major from the top row
  double nodata = -9999.0;

  double& at(int col, int row_from_top) { return values[static_cast<size_t>(row_from_top) * ncols + col]; }
  double at(int col, int row_from_top) const { return values[static_cast<size_t>(row_from_top) * ncols + col]; }

  bool is_nodata(double v) const { return v == nodata; }

  GeoPoint cell_center(int col, int row_from_top) const {
    return {xllcorner + (col + 0.5) * cellsize,
            yllcorner + (nrows - row_from_top - 0.5) * cellsize};
  }

  /// Nearest-cell lookup. Returns false when the point is outside the grid
  /// extent or the cell holds the nodata sentinel.
  bool sample(const GeoPoint& p, double& out) const;

  void validate() const;
};

RasterGrid load_raster(const std::string& path);
void write_raster(const RasterGrid& grid, const std::string& path);

}  // namespace larmap

#endif
