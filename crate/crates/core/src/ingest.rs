//! Input file formats and assembly of the per-cluster feature matrix.
//!
//! Feature columns carry one of three source-group tags. Within the matrix
//! the groups are laid out in the order SM, RS, POI.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geo::{ClusterSite, GeoPoint, SpatialIndex, Urbanity};
use crate::raster::{zonal_statistics, RasterGrid, SummaryStats};
use crate::{par_map, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SourceGroup {
    #[serde(rename = "SM")]
    Social,
    #[serde(rename = "RS")]
    RemoteSensing,
    #[serde(rename = "POI")]
    PointsOfInterest,
}

impl SourceGroup {
    pub const ALL: [SourceGroup; 3] = [SourceGroup::Social, SourceGroup::RemoteSensing, SourceGroup::PointsOfInterest];

    pub fn tag(self) -> &'static str {
        match self {
            SourceGroup::Social => "SM",
            SourceGroup::RemoteSensing => "RS",
            SourceGroup::PointsOfInterest => "POI",
        }
    }
}

impl fmt::Display for SourceGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SourceGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SM" => Ok(SourceGroup::Social),
            "RS" => Ok(SourceGroup::RemoteSensing),
            "POI" => Ok(SourceGroup::PointsOfInterest),
            other => Err(Error::InvalidRecord(format!("unknown source group `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub group: SourceGroup,
}

/// Rectangular per-cluster feature table. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    row_ids: Vec<String>,
    columns: Vec<FeatureColumn>,
    cells: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn new(row_ids: Vec<String>, columns: Vec<FeatureColumn>, cells: Vec<Option<f64>>) -> Result<Self> {
        if cells.len() != row_ids.len() * columns.len() {
            return Err(Error::InvalidRecord(format!(
                "feature matrix has {} cells for {} rows x {} columns",
                cells.len(),
                row_ids.len(),
                columns.len()
            )));
        }
        let mut names = HashSet::new();
        for c in &columns {
            if !names.insert(c.name.as_str()) {
                return Err(Error::DuplicateId(c.name.clone()));
            }
        }
        let mut ids = HashSet::new();
        for id in &row_ids {
            if !ids.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self { row_ids, columns, cells })
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row_index(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.columns.len() + col]
    }

    pub fn row(&self, row: usize) -> &[Option<f64>] {
        let p = self.columns.len();
        &self.cells[row * p..(row + 1) * p]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.n_rows()).map(move |r| self.get(r, col))
    }

    pub fn has_missing(&self) -> bool {
        self.cells.iter().any(Option::is_none)
    }

    /// Row-major dense copy with missing cells as NaN.
    pub fn to_dense(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.unwrap_or(f64::NAN)).collect()
    }

    /// Columns at the given positions, in that order.
    pub fn select(&self, cols: &[usize]) -> FeatureMatrix {
        let columns = cols.iter().map(|&c| self.columns[c].clone()).collect();
        let mut cells = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            cells.extend(cols.iter().map(|&c| self.get(r, c)));
        }
        FeatureMatrix {
            row_ids: self.row_ids.clone(),
            columns,
            cells,
        }
    }

    pub fn select_names(&self, names: &[String]) -> Result<FeatureMatrix> {
        let cols = names
            .iter()
            .map(|n| {
                self.column_index(n)
                    .ok_or_else(|| Error::InvalidRecord(format!("unknown feature column `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select(&cols))
    }

    pub fn select_group(&self, group: SourceGroup) -> FeatureMatrix {
        let cols: Vec<usize> = (0..self.n_cols()).filter(|&c| self.columns[c].group == group).collect();
        self.select(&cols)
    }

    /// Side-by-side concatenation of matrices sharing the same row ids.
    pub fn hconcat(parts: &[FeatureMatrix]) -> Result<FeatureMatrix> {
        let Some(first) = parts.first() else {
            return FeatureMatrix::new(Vec::new(), Vec::new(), Vec::new());
        };
        if parts.iter().any(|m| m.row_ids != first.row_ids) {
            return Err(Error::InvalidRecord("row ids differ between matrices".into()));
        }
        let columns: Vec<FeatureColumn> = parts.iter().flat_map(|m| m.columns.iter().cloned()).collect();
        let mut cells = Vec::with_capacity(first.n_rows() * columns.len());
        for r in 0..first.n_rows() {
            for m in parts {
                cells.extend_from_slice(m.row(r));
            }
        }
        FeatureMatrix::new(first.row_ids.clone(), columns, cells)
    }
}

// ---------------------------------------------------------------------------
// Records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub category: String,
    pub location: GeoPoint,
    #[serde(default)]
    pub attributes: BTreeMap<String, f64>,
}

/// Per-cluster social-media audience estimate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialRecord {
    pub cluster_id: String,
    pub total_users: u64,
    pub users_4g: u64,
    pub users_3g: u64,
    pub users_2g: u64,
    pub users_wifi: u64,
    pub users_apple: u64,
    pub users_midhigh_consumer: u64,
}

impl SocialRecord {
    /// Segment names and counts in column order.
    pub fn segments(&self) -> [(&'static str, u64); 6] {
        [
            ("4g", self.users_4g),
            ("3g", self.users_3g),
            ("2g", self.users_2g),
            ("wifi", self.users_wifi),
            ("apple", self.users_apple),
            ("midhigh", self.users_midhigh_consumer),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, count) in self.segments() {
            if count > self.total_users {
                return Err(Error::InvalidRecord(format!(
                    "cluster `{}`: {name} users {count} exceed total {}",
                    self.cluster_id, self.total_users
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Cluster file: cluster_id,lat,lon,urbanity

#[derive(Deserialize)]
struct ClusterRow {
    cluster_id: String,
    lat: f64,
    lon: f64,
    urbanity: String,
}

pub fn read_clusters(path: impl AsRef<Path>) -> Result<Vec<ClusterSite>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut seen = HashSet::new();
    let mut sites = Vec::new();
    for row in reader.deserialize::<ClusterRow>() {
        let row = row?;
        let line = sites.len() as u64 + 2;
        let centroid = GeoPoint::new(row.lat, row.lon).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let urbanity: Urbanity = row.urbanity.parse().map_err(|e: Error| Error::parse(path, line, e.to_string()))?;
        if !seen.insert(row.cluster_id.clone()) {
            return Err(Error::DuplicateId(row.cluster_id));
        }
        sites.push(ClusterSite {
            id: row.cluster_id,
            centroid,
            urbanity,
        });
    }
    Ok(sites)
}

pub fn write_clusters(path: impl AsRef<Path>, sites: &[ClusterSite]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster_id", "lat", "lon", "urbanity"])?;
    for s in sites {
        w.write_record([
            s.id.clone(),
            s.centroid.lat().to_string(),
            s.centroid.lon().to_string(),
            s.urbanity.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

/// Reads an ESRI ASCII grid. Both `xllcorner`/`yllcorner` and
/// `xllcenter`/`yllcenter` georeferencing are accepted; `NODATA_value`
/// defaults to -9999 when absent.
pub fn read_raster(path: impl AsRef<Path>) -> Result<RasterGrid> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    parse_raster(reader)
}

pub fn parse_raster(reader: impl BufRead) -> Result<RasterGrid> {
    let mut header: HashMap<String, String> = HashMap::new();
    let mut values = Vec::new();
    let mut in_body = false;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !in_body {
            let first = trimmed.split_whitespace().next().unwrap_or_default();
            if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let mut parts = trimmed.split_whitespace();
                let key = parts.next().unwrap_or_default().to_ascii_lowercase();
                let value = parts
                    .next()
                    .ok_or_else(|| Error::MalformedHeader(format!("`{key}` has no value")))?;
                if parts.next().is_some() {
                    return Err(Error::MalformedHeader(format!("trailing tokens after `{key}`")));
                }
                if header.insert(key.clone(), value.to_string()).is_some() {
                    return Err(Error::MalformedHeader(format!("`{key}` given twice")));
                }
                continue;
            }
            in_body = true;
        }
        for token in trimmed.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| Error::MalformedHeader(format!("non-numeric cell value `{token}`")))?;
            values.push(v);
        }
    }

    let get = |key: &str| -> Result<f64> {
        let raw = header
            .get(key)
            .ok_or_else(|| Error::MalformedHeader(format!("missing `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::MalformedHeader(format!("`{key}` is not a number: `{raw}`")))
    };
    let count = |key: &str| -> Result<usize> {
        let v = get(key)?;
        if v < 1.0 || v.fract() != 0.0 {
            return Err(Error::MalformedHeader(format!("`{key}` must be a positive integer")));
        }
        Ok(v as usize)
    };
    let n_cols = count("ncols")?;
    let n_rows = count("nrows")?;
    let cell = get("cellsize")?;
    if !(cell > 0.0) {
        return Err(Error::MalformedHeader("`cellsize` must be positive".into()));
    }
    let nodata = if header.contains_key("nodata_value") {
        get("nodata_value")?
    } else {
        -9999.0
    };
    let (origin_lon, origin_lat) = match (header.contains_key("xllcorner"), header.contains_key("xllcenter")) {
        (true, false) => (
            get("xllcorner")? + cell / 2.0,
            get("yllcorner")? + (n_rows as f64 - 0.5) * cell,
        ),
        (false, true) => (get("xllcenter")?, get("yllcenter")? + (n_rows - 1) as f64 * cell),
        _ => {
            return Err(Error::MalformedHeader(
                "exactly one of `xllcorner` or `xllcenter` is required".into(),
            ))
        }
    };
    let known = ["ncols", "nrows", "cellsize", "nodata_value", "xllcorner", "yllcorner", "xllcenter", "yllcenter"];
    if let Some(k) = header.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::MalformedHeader(format!("unknown key `{k}`")));
    }
    RasterGrid::new(origin_lat, origin_lon, cell, n_rows, n_cols, nodata, values)
}

pub fn write_raster(path: impl AsRef<Path>, raster: &RasterGrid) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_raster(&mut w, raster)?;
    w.flush()?;
    Ok(())
}

pub fn format_raster(w: &mut impl Write, raster: &RasterGrid) -> Result<()> {
    let cell = raster.cell_deg();
    let half = cell / 2.0;
    let lat_offset = (raster.n_rows() as f64 - 0.5) * cell;
    let xll = invert_offset(raster.origin_lon(), half);
    let yll = invert_offset(raster.origin_lat(), lat_offset);
    writeln!(w, "ncols {}", raster.n_cols())?;
    writeln!(w, "nrows {}", raster.n_rows())?;
    writeln!(w, "xllcorner {xll}")?;
    writeln!(w, "yllcorner {yll}")?;
    writeln!(w, "cellsize {cell}")?;
    writeln!(w, "NODATA_value {}", raster.nodata())?;
    for row in raster.values().chunks(raster.n_cols()) {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// A value `x` with `x + offset == target` exactly, when one exists within a
/// few ulps of `target - offset`, so grids survive a write/read cycle.
fn invert_offset(target: f64, offset: f64) -> f64 {
    let guess = target - offset;
    let mut down = guess;
    let mut up = guess;
    for _ in 0..8 {
        if down + offset == target {
            return down;
        }
        if up + offset == target {
            return up;
        }
        down = down.next_down();
        up = up.next_up();
    }
    guess
}

// ---------------------------------------------------------------------------
// POI file: category,lat,lon[,attr=value;...]

pub fn read_pois(path: impl AsRef<Path>) -> Result<Vec<PoiRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |msg: String| Error::parse(path, line, msg);
        if record.len() < 3 || record.len() > 4 {
            return Err(bad(format!("expected 3 or 4 fields, found {}", record.len())));
        }
        let category = record[0].to_string();
        if category.is_empty() {
            return Err(bad("empty POI category".into()));
        }
        let lat: f64 = record[1].parse().map_err(|_| bad(format!("bad latitude `{}`", &record[1])))?;
        let lon: f64 = record[2].parse().map_err(|_| bad(format!("bad longitude `{}`", &record[2])))?;
        let location = GeoPoint::new(lat, lon).map_err(|e| bad(e.to_string()))?;
        let mut attributes = BTreeMap::new();
        if let Some(raw) = record.get(3) {
            for pair in raw.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let (k, v) = pair
                    .split_once('=')
                    .ok_or_else(|| bad(format!("attribute `{pair}` is not name=value")))?;
                let v: f64 = v.trim().parse().map_err(|_| bad(format!("attribute `{pair}` is not numeric")))?;
                attributes.insert(k.trim().to_string(), v);
            }
        }
        out.push(PoiRecord {
            category,
            location,
            attributes,
        });
    }
    Ok(out)
}

pub fn write_pois(path: impl AsRef<Path>, pois: &[PoiRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    w.write_record(["category", "lat", "lon", "attributes"])?;
    for p in pois {
        let attrs: Vec<String> = p.attributes.iter().map(|(k, v)| format!("{k}={v}")).collect();
        w.write_record([
            p.category.clone(),
            p.location.lat().to_string(),
            p.location.lon().to_string(),
            attrs.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Social file: cluster_id,total,4g,3g,2g,wifi,apple,midhigh

#[derive(Deserialize)]
struct SocialRow {
    cluster_id: String,
    total: u64,
    #[serde(rename = "4g")]
    g4: u64,
    #[serde(rename = "3g")]
    g3: u64,
    #[serde(rename = "2g")]
    g2: u64,
    wifi: u64,
    apple: u64,
    midhigh: u64,
}

pub fn read_social(path: impl AsRef<Path>) -> Result<Vec<SocialRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize::<SocialRow>() {
        let row = row?;
        let record = SocialRecord {
            cluster_id: row.cluster_id,
            total_users: row.total,
            users_4g: row.g4,
            users_3g: row.g3,
            users_2g: row.g2,
            users_wifi: row.wifi,
            users_apple: row.apple,
            users_midhigh_consumer: row.midhigh,
        };
        record
            .validate()
            .map_err(|e| Error::parse(path, out.len() as u64 + 2, e.to_string()))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_social(path: impl AsRef<Path>, social: &[SocialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["cluster_id", "total", "4g", "3g", "2g", "wifi", "apple", "midhigh"])?;
    for s in social {
        let mut rec = vec![s.cluster_id.clone(), s.total_users.to_string()];
        rec.extend(s.segments().iter().map(|(_, c)| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Feature matrix CSV: two header rows (names, then source groups); empty
// cells are missing.

pub fn write_features(path: impl AsRef<Path>, matrix: &FeatureMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut names = vec!["cluster_id".to_string()];
    names.extend(matrix.columns.iter().map(|c| c.name.clone()));
    w.write_record(&names)?;
    let mut groups = vec!["group".to_string()];
    groups.extend(matrix.columns.iter().map(|c| c.group.tag().to_string()));
    w.write_record(&groups)?;
    for r in 0..matrix.n_rows() {
        let mut rec = vec![matrix.row_ids[r].clone()];
        rec.extend(matrix.row(r).iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut records = reader.records();
    let names = records
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing name header"))??;
    let groups = records
        .next()
        .ok_or_else(|| Error::parse(path, 2, "missing source-group header"))??;
    if names.len() != groups.len() || names.is_empty() {
        return Err(Error::parse(path, 2, "header rows differ in length"));
    }
    let columns = names
        .iter()
        .skip(1)
        .zip(groups.iter().skip(1))
        .map(|(n, g)| {
            Ok(FeatureColumn {
                name: n.to_string(),
                group: g.parse().map_err(|e: Error| Error::parse(path, 2, e.to_string()))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut row_ids = Vec::new();
    let mut cells = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        row_ids.push(record[0].to_string());
        for field in record.iter().skip(1) {
            if field.is_empty() {
                cells.push(None);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad feature value `{field}`")))?;
                cells.push(Some(v));
            }
        }
    }
    FeatureMatrix::new(row_ids, columns, cells)
}

// ---------------------------------------------------------------------------
// Assembly

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// POI categories that always get a count column, even when no record
    /// of that category exists. Categories seen in the data are added.
    #[serde(default)]
    pub poi_categories: Vec<String>,
}

/// Builds the per-cluster feature matrix. Rows follow the order of
/// `clusters`; the result does not depend on the order of `pois` or
/// `social`.
pub fn assemble_features(
    clusters: &[ClusterSite],
    rasters: &[(String, RasterGrid)],
    pois: &[PoiRecord],
    social: &[SocialRecord],
    options: &FeatureOptions,
) -> Result<FeatureMatrix> {
    let mut ids = HashSet::new();
    for c in clusters {
        if !ids.insert(c.id.as_str()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }
    let mut social_by_cluster: HashMap<&str, &SocialRecord> = HashMap::new();
    for s in social {
        if !ids.contains(s.cluster_id.as_str()) {
            return Err(Error::UnknownCluster(s.cluster_id.clone()));
        }
        s.validate()?;
        if social_by_cluster.insert(s.cluster_id.as_str(), s).is_some() {
            return Err(Error::DuplicateId(format!("social record for {}", s.cluster_id)));
        }
    }
    let mut raster_names = HashSet::new();
    for (name, _) in rasters {
        if !raster_names.insert(name.as_str()) {
            return Err(Error::DuplicateId(format!("raster {name}")));
        }
    }

    // POI layout: per category a count, then one share per attribute.
    let mut categories: BTreeMap<&str, BTreeSet<&str>> = options
        .poi_categories
        .iter()
        .map(|c| (c.as_str(), BTreeSet::new()))
        .collect();
    for p in pois {
        if p.category.is_empty() {
            return Err(Error::InvalidRecord("empty POI category".into()));
        }
        categories
            .entry(p.category.as_str())
            .or_default()
            .extend(p.attributes.keys().map(String::as_str));
    }
    let poi_index = SpatialIndex::build(pois.iter().enumerate().map(|(i, p)| (i.to_string(), p.location)))?;

    let mut columns = Vec::new();
    columns.push(FeatureColumn {
        name: "sm_total_users".into(),
        group: SourceGroup::Social,
    });
    for seg in ["4g", "3g", "2g", "wifi", "apple", "midhigh"] {
        columns.push(FeatureColumn {
            name: format!("sm_share_{seg}"),
            group: SourceGroup::Social,
        });
    }
    for (name, _) in rasters {
        for stat in SummaryStats::NAMES {
            columns.push(FeatureColumn {
                name: format!("{name}_{stat}"),
                group: SourceGroup::RemoteSensing,
            });
        }
    }
    for (category, attrs) in &categories {
        columns.push(FeatureColumn {
            name: format!("poi_{category}_count"),
            group: SourceGroup::PointsOfInterest,
        });
        for attr in attrs {
            columns.push(FeatureColumn {
                name: format!("poi_{category}_{attr}_share"),
                group: SourceGroup::PointsOfInterest,
            });
        }
    }

    let rows = par_map(clusters, |site| -> Result<Vec<Option<f64>>> {
        let mut row = Vec::with_capacity(columns.len());
        match social_by_cluster.get(site.id.as_str()) {
            Some(s) => {
                row.push(Some(s.total_users as f64));
                for (_, count) in s.segments() {
                    let share = if s.total_users == 0 {
                        0.0
                    } else {
                        count as f64 / s.total_users as f64
                    };
                    row.push(Some(share));
                }
            }
            None => row.extend(std::iter::repeat_n(None, 7)),
        }

        let radius = site.radius_m();
        for (_, raster) in rasters {
            match zonal_statistics(raster, site.centroid, radius) {
                Ok(stats) => row.extend(stats.as_array().map(Some)),
                Err(Error::EmptyZone) => row.extend([None; 6]),
                Err(e) => return Err(e),
            }
        }

        let nearby = poi_index.radius_query_slots(site.centroid, radius)?;
        for (category, attrs) in &categories {
            let members: Vec<&PoiRecord> = nearby
                .iter()
                .map(|&i| &pois[i])
                .filter(|p| p.category == *category)
                .collect();
            row.push(Some(members.len() as f64));
            for attr in attrs {
                let mut values: Vec<f64> = members.iter().filter_map(|p| p.attributes.get(*attr).copied()).collect();
                if values.is_empty() {
                    row.push(None);
                } else {
                    // Sorted summation keeps the share independent of input order.
                    values.sort_by(f64::total_cmp);
                    row.push(Some(values.iter().sum::<f64>() / values.len() as f64));
                }
            }
        }
        Ok(row)
    });

    let mut cells = Vec::with_capacity(clusters.len() * columns.len());
    for row in rows {
        cells.extend(row?);
    }
    FeatureMatrix::new(clusters.iter().map(|c| c.id.clone()).collect(), columns, cells)
}

/// Replaces missing cells with their column mean over non-missing rows.
pub fn impute_missing(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    let means = column_means(matrix)?;
    let p = matrix.n_cols();
    let cells = matrix
        .cells
        .iter()
        .enumerate()
        .map(|(i, c)| Some(c.unwrap_or(means[i % p])))
        .collect();
    Ok(FeatureMatrix {
        row_ids: matrix.row_ids.clone(),
        columns: matrix.columns.clone(),
        cells,
    })
}

/// Mean of each column over its non-missing cells.
pub fn column_means(matrix: &FeatureMatrix) -> Result<Vec<f64>> {
    (0..matrix.n_cols())
        .map(|c| {
            let (sum, n) = matrix
                .column(c)
                .flatten()
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                Err(Error::AllMissingColumn(matrix.columns[c].name.clone()))
            } else {
                Ok(sum / n as f64)
            }
        })
        .collect()
}
