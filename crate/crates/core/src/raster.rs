//! Georeferenced grids and zonal summary statistics.

use serde::{Deserialize, Serialize};

use crate::geo::{cap_bounds, haversine_deg, GeoPoint};
use crate::{Error, Result};

/// Row-major grid of cell values on a regular lat/lon lattice.
///
/// `origin_*` is the center of the top-left cell; rows go south and columns
/// go east. Cells equal to `nodata` are treated as cloudy and never enter any
/// statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid {
    origin_lat_deg: f64,
    origin_lon_deg: f64,
    cell_deg: f64,
    n_rows: usize,
    n_cols: usize,
    nodata: f64,
    values: Vec<f64>,
}

impl RasterGrid {
    pub fn new(
        origin_lat_deg: f64,
        origin_lon_deg: f64,
        cell_deg: f64,
        n_rows: usize,
        n_cols: usize,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(cell_deg > 0.0) || !cell_deg.is_finite() {
            return Err(Error::InvalidRaster(format!("cell size {cell_deg} must be positive")));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidRaster("raster has no cells".into()));
        }
        if !origin_lat_deg.is_finite() || !origin_lon_deg.is_finite() {
            return Err(Error::InvalidRaster("origin must be finite".into()));
        }
        let expected = n_rows * n_cols;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            origin_lat_deg,
            origin_lon_deg,
            cell_deg,
            n_rows,
            n_cols,
            nodata,
            values,
        })
    }

    pub fn origin_lat(&self) -> f64 {
        self.origin_lat_deg
    }

    pub fn origin_lon(&self) -> f64 {
        self.origin_lon_deg
    }

    pub fn cell_deg(&self) -> f64 {
        self.cell_deg
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn is_nodata(&self, row: usize, col: usize) -> bool {
        is_nodata(self.get(row, col), self.nodata)
    }

    /// (lat, lon) of the center of a cell.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin_lat_deg - row as f64 * self.cell_deg,
            self.origin_lon_deg + col as f64 * self.cell_deg,
        )
    }

    /// Cells whose centers lie within `radius_m` of `center`, including
    /// nodata cells, in row-major order.
    pub fn cells_within(&self, center: GeoPoint, radius_m: f64) -> Vec<(usize, usize)> {
        let (row_range, col_range) = self.candidate_window(center, radius_m);
        let mut cells = Vec::new();
        for row in row_range {
            for col in col_range.clone() {
                let (lat, lon) = self.cell_center(row, col);
                if haversine_deg(center.lat(), center.lon(), lat, lon) <= radius_m {
                    cells.push((row, col));
                }
            }
        }
        cells
    }

    /// Conservative row/column window that contains every cell center in the
    /// cap. Falls back to the whole grid near the poles.
    fn candidate_window(
        &self,
        center: GeoPoint,
        radius_m: f64,
    ) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let full = (0..self.n_rows, 0..self.n_cols);
        let Some(b) = cap_bounds(center.lat(), center.lon(), radius_m) else {
            return full;
        };
        let clamp_index = |x: f64, n: usize| -> usize {
            if x <= 0.0 {
                0
            } else if x >= n as f64 {
                n
            } else {
                x as usize
            }
        };
        // One extra cell on each side absorbs rounding in the index maths.
        let row_lo = clamp_index(((self.origin_lat_deg - b.lat_hi) / self.cell_deg).floor() - 1.0, self.n_rows);
        let row_hi = clamp_index(((self.origin_lat_deg - b.lat_lo) / self.cell_deg).ceil() + 2.0, self.n_rows);

        // Cell longitudes are not wrapped, so a grid that straddles the
        // antimeridian may be probed with a shifted copy of the window.
        let grid_lon_hi = self.origin_lon_deg + (self.n_cols - 1) as f64 * self.cell_deg;
        let overlaps = |lo: f64, hi: f64| hi >= self.origin_lon_deg - self.cell_deg && lo <= grid_lon_hi + self.cell_deg;
        let shifts = [0.0, 360.0, -360.0];
        let hits: Vec<f64> = shifts
            .iter()
            .copied()
            .filter(|s| overlaps(b.lon_lo + s, b.lon_hi + s))
            .collect();
        if hits.len() != 1 {
            // Either nothing overlaps (empty window) or the wrap is ambiguous.
            if hits.is_empty() {
                return (row_lo..row_hi.max(row_lo), 0..0);
            }
            return (row_lo..row_hi.max(row_lo), full.1);
        }
        let shift = hits[0];
        let col_lo = clamp_index(((b.lon_lo + shift - self.origin_lon_deg) / self.cell_deg).floor() - 1.0, self.n_cols);
        let col_hi = clamp_index(((b.lon_hi + shift - self.origin_lon_deg) / self.cell_deg).ceil() + 2.0, self.n_cols);
        (row_lo..row_hi.max(row_lo), col_lo..col_hi.max(col_lo))
    }
}

fn is_nodata(value: f64, nodata: f64) -> bool {
    value == nodata || (value.is_nan() && nodata.is_nan())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub maximum: f64,
    pub minimum: f64,
    /// Population second central moment.
    pub variance: f64,
    /// Fisher-Pearson coefficient `m3 / m2^1.5`.
    pub skewness: f64,
    /// Excess kurtosis `m4 / m2^2 - 3`.
    pub kurtosis: f64,
}

/// Below this second moment the shape statistics are reported as zero.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

impl SummaryStats {
    /// Statistic names in feature-column order.
    pub const NAMES: [&'static str; 6] = ["mean", "max", "min", "variance", "skewness", "kurtosis"];

    /// Population moments of a nonempty sample.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyZone);
        }
        let n = values.len() as f64;
        let (mut minimum, mut maximum) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut sum = 0.0;
        for &v in values {
            minimum = minimum.min(v);
            maximum = maximum.max(v);
            sum += v;
        }
        let mean = (sum / n).clamp(minimum, maximum);
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= n;
        m3 /= n;
        m4 /= n;
        let (skewness, kurtosis) = if m2 < DEGENERATE_VARIANCE {
            (0.0, 0.0)
        } else {
            (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
        };
        Ok(Self {
            count: values.len(),
            mean,
            maximum,
            minimum,
            variance: m2,
            skewness,
            kurtosis,
        })
    }

    /// Values in [`NAMES`](Self::NAMES) order.
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.mean,
            self.maximum,
            self.minimum,
            self.variance,
            self.skewness,
            self.kurtosis,
        ]
    }
}

/// Summary statistics of all cloudless cells whose centers fall within
/// `radius_m` of `center`.
pub fn zonal_statistics(raster: &RasterGrid, center: GeoPoint, radius_m: f64) -> Result<SummaryStats> {
    if !(radius_m > 0.0) {
        return Err(Error::InvalidParameter(format!("zone radius {radius_m} must be positive")));
    }
    let values: Vec<f64> = raster
        .cells_within(center, radius_m)
        .into_iter()
        .map(|(r, c)| raster.get(r, c))
        .filter(|v| !is_nodata(*v, raster.nodata))
        .collect();
    SummaryStats::from_values(&values)
}
