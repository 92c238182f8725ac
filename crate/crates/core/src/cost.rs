//! Distance metrics and the flat projection used for lat/lon trace data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostMetric, Location};

/// Kilometres per degree of longitude at the equator.
pub const KM_PER_DEG_LON: f64 = 111.320;
/// Kilometres per degree of latitude.
pub const KM_PER_DEG_LAT: f64 = 110.574;

pub fn manhattan(a: Location, b: Location) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

pub fn euclidean(a: Location, b: Location) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// A lat/lon rectangle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl GeoBoundingBox {
    /// The Manhattan/NYC study region of the Uber pickup experiments.
    pub const NYC: GeoBoundingBox = GeoBoundingBox {
        lat_min: 40.5998,
        lat_max: 40.8998,
        lon_min: -74.0701,
        lon_max: -73.7701,
    };

    pub fn new(lat_min: f64, lon_min: f64, lat_max: f64, lon_max: f64) -> Result<Self> {
        let b = GeoBoundingBox {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let lat_ok = (-90.0..=90.0).contains(&self.lat_min)
            && (-90.0..=90.0).contains(&self.lat_max)
            && self.lat_min < self.lat_max;
        let lon_ok = (-180.0..=180.0).contains(&self.lon_min)
            && (-180.0..=180.0).contains(&self.lon_max)
            && self.lon_min < self.lon_max;
        if lat_ok && lon_ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("degenerate bounding box {self:?}")))
        }
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }

    fn mid_lat_cos(&self) -> f64 {
        (0.5 * (self.lat_min + self.lat_max)).to_radians().cos()
    }

    /// Projected width (east-west) in km.
    pub fn width_km(&self) -> f64 {
        (self.lon_max - self.lon_min) * KM_PER_DEG_LON * self.mid_lat_cos()
    }

    /// Projected height (north-south) in km.
    pub fn height_km(&self) -> f64 {
        (self.lat_max - self.lat_min) * KM_PER_DEG_LAT
    }

    /// Parses `lat0,lon0,lat1,lon1`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad bounding box {s:?}: {e}")))?;
        match parts[..] {
            [lat0, lon0, lat1, lon1] => GeoBoundingBox::new(lat0.min(lat1), lon0.min(lon1), lat0.max(lat1), lon0.max(lon1)),
            _ => Err(Error::InvalidInput(format!(
                "bounding box needs four comma-separated values, got {s:?}"
            ))),
        }
    }
}

/// Equirectangular projection to km, relative to the box's south-west
/// corner. Longitude is scaled by the cosine of the box's central latitude
/// so every point in the box shares one scale.
pub fn project_geo(lat: f64, lon: f64, bbox: &GeoBoundingBox) -> Result<Location> {
    if !bbox.contains(lat, lon) {
        return Err(Error::OutOfRegion { lat, lon });
    }
    Ok(Location {
        x: (lon - bbox.lon_min) * KM_PER_DEG_LON * bbox.mid_lat_cos(),
        y: (lat - bbox.lat_min) * KM_PER_DEG_LAT,
    })
}

/// Inverse of [`project_geo`]: `(lat, lon)` of a projected point.
pub fn unproject_geo(loc: Location, bbox: &GeoBoundingBox) -> (f64, f64) {
    (
        bbox.lat_min + loc.y / KM_PER_DEG_LAT,
        bbox.lon_min + loc.x / (KM_PER_DEG_LON * bbox.mid_lat_cos()),
    )
}

/// A region workers and tasks are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Square { side: f64 },
    Rect { width: f64, height: f64 },
    Geo { bbox: GeoBoundingBox },
}

impl Region {
    fn extent(&self) -> (f64, f64) {
        match *self {
            Region::Square { side } => (side, side),
            Region::Rect { width, height } => (width, height),
            Region::Geo { bbox } => (bbox.width_km(), bbox.height_km()),
        }
    }
}

/// Metric diameter of the region: the largest travel cost any worker-task
/// pair inside it can have.
pub fn region_c_max(region: &Region, metric: CostMetric) -> Result<f64> {
    let (w, h) = region.extent();
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(Error::InvalidInput(format!("degenerate region {region:?}")));
    }
    Ok(match metric {
        CostMetric::Manhattan => w + h,
        CostMetric::Euclidean => w.hypot(h),
    })
}
