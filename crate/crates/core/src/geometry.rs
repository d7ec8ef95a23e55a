//! Base-station layout, UE drops, mobility and distance-based association.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio between inter-site distance and cell radius.
pub const INTERSITE_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Sub6,
    Mmwave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BsSite {
    pub id: usize,
    pub position: Point,
    pub max_power_dbm: f64,
    pub antennas: usize,
    pub band: Band,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ue {
    pub id: usize,
    pub position: Point,
    /// km/h
    pub speed_kmh: f64,
    pub serving_bs: usize,
    /// Bearer selector: 0 voice, 1 data.
    pub bearer: u8,
}

/// Everything needed to place the sites.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    pub n_sites: usize,
    pub cell_radius: f64,
    pub band: Band,
    pub antennas: usize,
    pub max_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub sites: Vec<BsSite>,
    pub cell_radius: f64,
    pub intersite_distance: f64,
}

/// Places `n_sites` on a line (two sites) or on a regular ring whose
/// neighbouring sites are `R = 1.5 r` apart.
pub fn build_layout(spec: &LayoutSpec) -> Result<Layout> {
    if !(spec.cell_radius > 0.0) || !spec.cell_radius.is_finite() {
        return Err(Error::Config(format!(
            "cell radius must be positive, got {}",
            spec.cell_radius
        )));
    }
    if spec.n_sites < 2 {
        return Err(Error::Config(format!(
            "at least two base stations are required, got {}",
            spec.n_sites
        )));
    }
    match spec.band {
        Band::Sub6 if spec.antennas != 1 => {
            return Err(Error::Config(format!(
                "sub-6 sites have a single antenna, got {}",
                spec.antennas
            )))
        }
        _ if spec.antennas == 0 => {
            return Err(Error::Config("antenna count must be positive".into()))
        }
        _ => {}
    }

    let isd = INTERSITE_RATIO * spec.cell_radius;
    let positions: Vec<Point> = if spec.n_sites == 2 {
        vec![Point::new(0.0, 0.0), Point::new(isd, 0.0)]
    } else {
        let l = spec.n_sites as f64;
        let circumradius = isd / (2.0 * (PI / l).sin());
        (0..spec.n_sites)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / l;
                Point::new(circumradius * phi.cos(), circumradius * phi.sin())
            })
            .collect()
    };

    let sites = positions
        .into_iter()
        .enumerate()
        .map(|(id, position)| BsSite {
            id,
            position,
            max_power_dbm: spec.max_power_dbm,
            antennas: spec.antennas,
            band: spec.band,
        })
        .collect();

    Ok(Layout {
        sites,
        cell_radius: spec.cell_radius,
        intersite_distance: isd,
    })
}

/// Nearest site; ties go to the lowest id.
pub fn associate(position: &Point, layout: &Layout) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for site in &layout.sites {
        let d = site.position.distance(position);
        if d < best_d {
            best_d = d;
            best = site.id;
        }
    }
    best
}

/// Drops `n_per_bs` UEs uniformly over each site's disk. A UE dropped in the
/// overlap region is associated with whichever site is nearest.
pub fn drop_ues<R: Rng + ?Sized>(
    layout: &Layout,
    n_per_bs: usize,
    max_per_bs: usize,
    speed_kmh: f64,
    bearer: u8,
    rng: &mut R,
) -> Result<Vec<Ue>> {
    if n_per_bs == 0 || n_per_bs > max_per_bs {
        return Err(Error::invalid(
            "n_per_bs",
            format!("must be in 1..={max_per_bs}, got {n_per_bs}"),
        ));
    }
    let mut ues = Vec::with_capacity(n_per_bs * layout.sites.len());
    for site in &layout.sites {
        for _ in 0..n_per_bs {
            let radius = layout.cell_radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let position = Point::new(
                site.position.x + radius * phi.cos(),
                site.position.y + radius * phi.sin(),
            );
            ues.push(Ue {
                id: ues.len(),
                position,
                speed_kmh,
                serving_bs: associate(&position, layout),
                bearer,
            });
        }
    }
    Ok(ues)
}

/// Moves the UE by `v * dt` in a uniformly random direction. A step that
/// would leave the serving disk is reflected radially back inside it.
pub fn step_mobility<R: Rng + ?Sized>(ue: &Ue, layout: &Layout, dt: f64, rng: &mut R) -> Ue {
    let step = ue.speed_kmh / 3.6 * dt;
    let phi = 2.0 * PI * rng.random::<f64>();
    let center = layout.sites[ue.serving_bs].position;
    let r = layout.cell_radius;

    let mut rel = Point::new(
        ue.position.x - center.x + step * phi.cos(),
        ue.position.y - center.y + step * phi.sin(),
    );
    let dist = rel.x.hypot(rel.y);
    if dist > r {
        let reflected = (2.0 * r - dist).max(0.0);
        rel = Point::new(rel.x * reflected / dist, rel.y * reflected / dist);
    }

    Ue {
        position: Point::new(center.x + rel.x, center.y + rel.y),
        ..ue.clone()
    }
}
