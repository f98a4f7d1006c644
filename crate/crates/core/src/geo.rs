//! Geographic primitives: points, survey clusters, haversine distance and an
//! exact radius index.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Query radius around an urban cluster centroid.
pub const URBAN_RADIUS_M: f64 = 2_000.0;
/// Query radius around a rural cluster centroid.
pub const RURAL_RADIUS_M: f64 = 5_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat_deg: f64,
    lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat_deg) || !(-180.0..=180.0).contains(&lon_deg) {
            return Err(Error::InvalidCoordinate {
                lat: lat_deg,
                lon: lon_deg,
            });
        }
        Ok(Self { lat_deg, lon_deg })
    }

    pub fn lat(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon(&self) -> f64 {
        self.lon_deg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Urbanity {
    Urban,
    Rural,
}

impl Urbanity {
    pub fn radius_m(self) -> f64 {
        match self {
            Urbanity::Urban => URBAN_RADIUS_M,
            Urbanity::Rural => RURAL_RADIUS_M,
        }
    }
}

impl fmt::Display for Urbanity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Urbanity::Urban => "urban",
            Urbanity::Rural => "rural",
        })
    }
}

impl FromStr for Urbanity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "urban" => Ok(Urbanity::Urban),
            "rural" => Ok(Urbanity::Rural),
            other => Err(Error::InvalidRecord(format!("unknown urbanity `{other}`"))),
        }
    }
}

/// A survey cluster centroid. The query radius is derived from the urbanity
/// class and is never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSite {
    pub id: String,
    pub centroid: GeoPoint,
    pub urbanity: Urbanity,
}

impl ClusterSite {
    pub fn radius_m(&self) -> f64 {
        self.urbanity.radius_m()
    }
}

/// Great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    haversine_deg(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg)
}

/// Haversine on raw degrees. Longitudes outside [-180, 180] are accepted,
/// which lets raster cell centers past the antimeridian be measured directly.
pub fn haversine_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Conservative lat/lon bounding box of a spherical cap, in degrees.
///
/// Returns `None` when the cap touches a pole or spans so much longitude
/// that a box is useless; callers then fall back to a full scan.
pub(crate) fn cap_bounds(center_lat: f64, center_lon: f64, radius_m: f64) -> Option<CapBounds> {
    let angular = radius_m / EARTH_RADIUS_M;
    if angular >= std::f64::consts::FRAC_PI_2 {
        return None;
    }
    // A little slack so boundary points survive rounding in the box test.
    let margin = 1e-7;
    let dlat = angular.to_degrees() + margin;
    let lat_lo = center_lat - dlat;
    let lat_hi = center_lat + dlat;
    if lat_lo <= -90.0 || lat_hi >= 90.0 {
        return None;
    }
    let cos_lat = center_lat.to_radians().cos();
    let ratio = angular.sin() / cos_lat;
    if ratio >= 1.0 {
        return None;
    }
    let dlon = ratio.asin().to_degrees() * (1.0 + 1e-9) + margin;
    if dlon >= 180.0 {
        return None;
    }
    Some(CapBounds {
        lat_lo,
        lat_hi,
        lon_lo: center_lon - dlon,
        lon_hi: center_lon + dlon,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CapBounds {
    pub lat_lo: f64,
    pub lat_hi: f64,
    pub lon_lo: f64,
    pub lon_hi: f64,
}

/// Default bucket edge for [`SpatialIndex`], in degrees (about 5.6 km).
const DEFAULT_CELL_DEG: f64 = 0.05;

/// Immutable uniform-grid index over a fixed set of points.
///
/// Radius queries return exactly the entries whose haversine distance to the
/// center is `<= radius_m`.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    ids: Vec<String>,
    points: Vec<GeoPoint>,
    cell_deg: f64,
    n_cols: i64,
    n_rows: i64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialIndex {
    pub fn build<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, GeoPoint)>,
        S: Into<String>,
    {
        Self::with_cell_size(entries, DEFAULT_CELL_DEG)
    }

    /// Builds an index with buckets of roughly `cell_deg` degrees. The size
    /// is adjusted so that a whole number of buckets spans 360 degrees.
    pub fn with_cell_size<I, S>(entries: I, cell_deg: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (S, GeoPoint)>,
        S: Into<String>,
    {
        if !(cell_deg > 0.0 && cell_deg <= 180.0) {
            return Err(Error::InvalidParameter(format!(
                "index cell size {cell_deg} must be in (0, 180]"
            )));
        }
        let n_cols = (360.0 / cell_deg).round().max(1.0) as i64;
        let cell_deg = 360.0 / n_cols as f64;
        let n_rows = (180.0 / cell_deg).ceil() as i64;

        let mut seen = HashSet::new();
        let mut ids = Vec::new();
        let mut points = Vec::new();
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (id, point) in entries {
            let id = id.into();
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id));
            }
            let slot = ids.len();
            let key = (
                bucket_row(point.lat_deg, cell_deg, n_rows),
                bucket_col(point.lon_deg, cell_deg, n_cols),
            );
            buckets.entry(key).or_default().push(slot);
            ids.push(id);
            points.push(point);
        }
        Ok(Self {
            ids,
            points,
            cell_deg,
            n_cols,
            n_rows,
            buckets,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, slot: usize) -> &str {
        &self.ids[slot]
    }

    pub fn point(&self, slot: usize) -> GeoPoint {
        self.points[slot]
    }

    /// Ids of all entries within `radius_m` of `center`, boundary inclusive.
    pub fn radius_query(&self, center: GeoPoint, radius_m: f64) -> Result<HashSet<String>> {
        Ok(self
            .radius_query_slots(center, radius_m)?
            .into_iter()
            .map(|slot| self.ids[slot].clone())
            .collect())
    }

    /// Like [`radius_query`](Self::radius_query) but returns insertion
    /// positions, sorted ascending.
    pub fn radius_query_slots(&self, center: GeoPoint, radius_m: f64) -> Result<Vec<usize>> {
        if radius_m < 0.0 || radius_m.is_nan() {
            return Err(Error::NegativeRadius(radius_m));
        }
        let within = |slot: &usize| haversine_distance(center, self.points[*slot]) <= radius_m;

        let Some(bounds) = cap_bounds(center.lat_deg, center.lon_deg, radius_m) else {
            return Ok((0..self.points.len()).filter(within).collect());
        };
        let row_lo = bucket_row(bounds.lat_lo, self.cell_deg, self.n_rows);
        let row_hi = bucket_row(bounds.lat_hi, self.cell_deg, self.n_rows);
        let col_lo = ((bounds.lon_lo + 180.0) / self.cell_deg).floor() as i64;
        let col_hi = ((bounds.lon_hi + 180.0) / self.cell_deg).floor() as i64;
        if col_hi - col_lo + 1 >= self.n_cols {
            return Ok((0..self.points.len()).filter(within).collect());
        }

        let mut hits = Vec::new();
        for row in row_lo..=row_hi {
            for col in col_lo..=col_hi {
                if let Some(slots) = self.buckets.get(&(row, col.rem_euclid(self.n_cols))) {
                    hits.extend(slots.iter().copied().filter(within));
                }
            }
        }
        hits.sort_unstable();
        Ok(hits)
    }
}

fn bucket_row(lat: f64, cell_deg: f64, n_rows: i64) -> i64 {
    (((lat + 90.0) / cell_deg).floor() as i64).clamp(0, n_rows - 1)
}

fn bucket_col(lon: f64, cell_deg: f64, n_cols: i64) -> i64 {
    (((lon + 180.0) / cell_deg).floor() as i64).rem_euclid(n_cols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    /// Spherical law of cosines, kept independent of the haversine form.
    fn law_of_cosines(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, p2) = (a.lat().to_radians(), b.lat().to_radians());
        let dl = (b.lon() - a.lon()).to_radians();
        let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
        EARTH_RADIUS_M * c.clamp(-1.0, 1.0).acos()
    }

    /// Destination point at `distance` meters on bearing `bearing_deg`.
    fn destination(start: GeoPoint, bearing_deg: f64, distance: f64) -> GeoPoint {
        let d = distance / EARTH_RADIUS_M;
        let th = bearing_deg.to_radians();
        let p1 = start.lat().to_radians();
        let l1 = start.lon().to_radians();
        let p2 = (p1.sin() * d.cos() + p1.cos() * d.sin() * th.cos()).asin();
        let l2 = l1 + (th.sin() * d.sin() * p1.cos()).atan2(d.cos() - p1.sin() * p2.sin());
        let lon = (l2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
        pt(p2.to_degrees(), lon)
    }

    #[test]
    fn rejects_out_of_range_coordinates() {
        assert!(GeoPoint::new(90.5, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.1).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert!(GeoPoint::new(-90.0, 180.0).is_ok());
    }

    #[test]
    fn radius_follows_urbanity() {
        let mut site = ClusterSite {
            id: "c1".into(),
            centroid: pt(14.6, 121.0),
            urbanity: Urbanity::Urban,
        };
        assert_eq!(site.radius_m(), 2000.0);
        site.urbanity = Urbanity::Rural;
        assert_eq!(site.radius_m(), 5000.0);
        assert_eq!("RURAL".parse::<Urbanity>().unwrap(), Urbanity::Rural);
        assert!("suburban".parse::<Urbanity>().is_err());
    }

    #[test]
    fn identical_points_are_zero_apart() {
        let a = pt(14.6, 121.0);
        assert_eq!(haversine_distance(a, a), 0.0);
    }

    #[test]
    fn antipodal_points_span_half_the_circumference() {
        let d = haversine_distance(pt(0.0, 0.0), pt(0.0, 180.0));
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_M).abs() < 1e-6);
        assert!((d - 20_015_087.0).abs() < 1.0);
    }

    #[test]
    fn manila_pair_matches_law_of_cosines() {
        let a = pt(14.5995, 120.9842);
        let b = pt(14.6760, 121.0437);
        let oracle = law_of_cosines(a, b);
        let d = haversine_distance(a, b);
        assert!((d - oracle).abs() < 1.0, "{d} vs {oracle}");
        // Frozen from an offline law-of-cosines evaluation.
        assert!((d - 10_645.958).abs() < 1.0, "{d}");
    }

    #[test]
    fn empty_index() {
        let index = SpatialIndex::build(Vec::<(String, GeoPoint)>::new()).unwrap();
        assert!(index.is_empty());
        assert!(index.radius_query(pt(0.0, 0.0), 1e7).unwrap().is_empty());
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let err = SpatialIndex::build([("a", pt(0.0, 0.0)), ("a", pt(1.0, 1.0))]).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "a"));
    }

    #[test]
    fn each_point_found_at_its_own_location() {
        let entries = [("a", pt(14.6, 121.0)), ("b", pt(-33.9, 151.2)), ("c", pt(51.5, -0.1))];
        let index = SpatialIndex::build(entries).unwrap();
        assert_eq!(index.len(), 3);
        for (id, p) in entries {
            let hits = index.radius_query(p, 0.0).unwrap();
            assert_eq!(hits, HashSet::from([id.to_string()]));
        }
    }

    #[test]
    fn negative_radius_is_an_error() {
        let index = SpatialIndex::build([("a", pt(0.0, 0.0))]).unwrap();
        assert!(matches!(
            index.radius_query(pt(0.0, 0.0), -1.0),
            Err(Error::NegativeRadius(_))
        ));
    }

    #[test]
    fn boundary_is_inclusive_and_exact() {
        let center = pt(14.6, 121.0);
        let near = destination(center, 37.0, 1999.0);
        let far = destination(center, 200.0, 2001.0);
        assert!((haversine_distance(center, near) - 1999.0).abs() < 1e-6);
        assert!((haversine_distance(center, far) - 2001.0).abs() < 1e-6);
        let index = SpatialIndex::build([("near", near), ("far", far)]).unwrap();
        let hits = index.radius_query(center, 2000.0).unwrap();
        assert_eq!(hits, HashSet::from(["near".to_string()]));
    }

    #[test]
    fn whole_earth_radius_returns_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let entries: Vec<_> = (0..200)
            .map(|i| {
                (
                    format!("p{i}"),
                    pt(rng.random_range(-90.0..=90.0), rng.random_range(-180.0..=180.0)),
                )
            })
            .collect();
        let index = SpatialIndex::build(entries).unwrap();
        assert_eq!(index.radius_query(pt(10.0, 10.0), 2.1e7).unwrap().len(), 200);
    }

    #[test]
    fn ten_thousand_points_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points: Vec<GeoPoint> = (0..10_000)
            .map(|_| pt(rng.random_range(4.0..20.0), rng.random_range(116.0..127.0)))
            .collect();
        let index =
            SpatialIndex::build(points.iter().enumerate().map(|(i, p)| (i.to_string(), *p))).unwrap();
        for _ in 0..100 {
            let center = pt(rng.random_range(4.0..20.0), rng.random_range(116.0..127.0));
            let radius = rng.random_range(0.0..60_000.0);
            let expected: Vec<usize> = (0..points.len())
                .filter(|&i| haversine_distance(center, points[i]) <= radius)
                .collect();
            assert_eq!(index.radius_query_slots(center, radius).unwrap(), expected);
        }
    }

    fn any_point() -> impl Strategy<Value = GeoPoint> {
        (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(a, b)| pt(a, b))
    }

    proptest! {
        #[test]
        fn haversine_is_a_metric(a in any_point(), b in any_point(), c in any_point()) {
            let ab = haversine_distance(a, b);
            let ba = haversine_distance(b, a);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-6 * ab.max(1.0));
            let ac = haversine_distance(a, c);
            let cb = haversine_distance(c, b);
            prop_assert!(ab <= (ac + cb) * (1.0 + 1e-6) + 1e-6);
        }

        #[test]
        fn radius_query_is_exact_everywhere(
            points in prop::collection::vec(any_point(), 0..60),
            center in any_point(),
            radius in 0.0f64..3.0e6,
            cell in prop::sample::select(vec![0.01f64, 0.05, 1.0, 7.5, 90.0]),
        ) {
            let index = SpatialIndex::with_cell_size(
                points.iter().enumerate().map(|(i, p)| (i.to_string(), *p)),
                cell,
            ).unwrap();
            let expected: Vec<usize> = (0..points.len())
                .filter(|&i| haversine_distance(center, points[i]) <= radius)
                .collect();
            prop_assert_eq!(index.radius_query_slots(center, radius).unwrap(), expected);
        }

        #[test]
        fn clustered_queries_near_the_antimeridian_and_poles(
            lat in prop::sample::select(vec![-89.9f64, -60.0, 0.0, 60.0, 89.9]),
            lon in prop::sample::select(vec![-179.99f64, 0.0, 179.99]),
            offsets in prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..80),
            radius in 0.0f64..30_000.0,
        ) {
            let wrap = |x: f64| (x + 540.0).rem_euclid(360.0) - 180.0;
            let points: Vec<GeoPoint> = offsets
                .iter()
                .map(|(dy, dx)| pt((lat + dy).clamp(-90.0, 90.0), wrap(lon + dx)))
                .collect();
            let index = SpatialIndex::with_cell_size(
                points.iter().enumerate().map(|(i, p)| (i.to_string(), *p)),
                0.01,
            ).unwrap();
            let center = pt(lat, lon);
            let expected: Vec<usize> = (0..points.len())
                .filter(|&i| haversine_distance(center, points[i]) <= radius)
                .collect();
            prop_assert_eq!(index.radius_query_slots(center, radius).unwrap(), expected);
        }
    }
}
