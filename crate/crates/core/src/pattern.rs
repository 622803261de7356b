//! Planar array factor, element pattern, directivity and side-lobe analysis.
//!
//! Array-frame angles: `theta` is measured from the array normal (+z) and
//! `phi` from the +x axis in the array plane. Elements are placed on a
//! uniform rectangular lattice centred on the origin, weight row `i` along x
//! and column `j` along y.
//!
//! The single-element model uses its own native frame, in which boresight is
//! `theta' = 90°, phi' = 0°`. [`ElementPattern::gain_array_frame`] maps the
//! array normal onto that boresight with the native vertical plane lying in
//! the array x-z plane:
//!
//! ```text
//!   native x' = array +z    (boresight)
//!   native y' = array +y
//!   native z' = array -x
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netcore::C64;
use crate::taper::PlanarWeights;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Linear floor applied before taking logs (-100 dB).
pub const PATTERN_FLOOR_DB: f64 = -100.0;

pub const DEFAULT_QUADRATURE_STEP_DEG: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("weights are {rows}x{cols} but the array is {nx}x{ny}")]
    DimensionMismatch { rows: usize, cols: usize, nx: usize, ny: usize },
    #[error("invalid geometry: {0}")]
    BadGeometry(String),
    #[error("frequency must be positive, got {0} Hz")]
    BadFrequency(f64),
    #[error("quadrature step {0} deg must divide 180 evenly")]
    BadStep(f64),
    #[error("radiated power integral is not positive and finite ({0})")]
    QuadratureFailure(f64),
    #[error("a pattern cut needs at least 5 samples, got {0}")]
    TooFewSamples(usize),
    #[error("cut has no side lobes")]
    NoSidelobes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Direction {
    pub const BROADSIDE: Direction = Direction { theta_deg: 0.0, phi_deg: 0.0 };

    pub fn new(theta_deg: f64, phi_deg: f64) -> Self {
        Self { theta_deg, phi_deg }
    }

    fn unit(&self) -> [f64; 3] {
        let (st, ct) = self.theta_deg.to_radians().sin_cos();
        let (sp, cp) = self.phi_deg.to_radians().sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Uniform rectangular lattice in the x-y plane, boresight along +z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub nx: usize,
    pub ny: usize,
    pub pitch_m: f64,
}

impl ArrayGeometry {
    pub fn new(nx: usize, ny: usize, pitch_m: f64) -> Result<Self, PatternError> {
        if nx == 0 || ny == 0 {
            return Err(PatternError::BadGeometry(format!("{nx}x{ny} elements")));
        }
        if !(pitch_m > 0.0 && pitch_m.is_finite()) {
            return Err(PatternError::BadGeometry(format!("pitch {pitch_m} m")));
        }
        Ok(Self { nx, ny, pitch_m })
    }

    pub fn x_positions(&self) -> Vec<f64> {
        centred(self.nx, self.pitch_m)
    }

    pub fn y_positions(&self) -> Vec<f64> {
        centred(self.ny, self.pitch_m)
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }
}

fn centred(n: usize, pitch: f64) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| (i as f64 - c) * pitch).collect()
}

/// Parabolic-in-dB single-element model with side-lobe and back-lobe floors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPattern {
    pub g_max_dbi: f64,
    pub theta_3db: f64,
    pub phi_3db: f64,
    pub sla_v: f64,
    pub a_max: f64,
    pub isotropic: bool,
}

impl Default for ElementPattern {
    /// 3GPP TR 38.901 single-element constants.
    fn default() -> Self {
        Self { g_max_dbi: 8.0, theta_3db: 65.0, phi_3db: 65.0, sla_v: 30.0, a_max: 30.0, isotropic: false }
    }
}

impl ElementPattern {
    pub fn isotropic() -> Self {
        Self { g_max_dbi: 0.0, isotropic: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PatternError> {
        let bw_ok = |b: f64| b > 0.0 && b < 180.0;
        if !bw_ok(self.theta_3db) || !bw_ok(self.phi_3db) || self.sla_v < 0.0 || self.a_max < 0.0 {
            return Err(PatternError::BadGeometry("element pattern constants out of range".into()));
        }
        Ok(())
    }

    /// Gain in dBi in the element's native frame (boresight at 90°, 0°).
    pub fn gain(&self, theta_deg: f64, phi_deg: f64) -> f64 {
        if self.isotropic {
            return 0.0;
        }
        let phi = wrap_degrees(phi_deg);
        let vertical = -(12.0 * ((theta_deg - 90.0) / self.theta_3db).powi(2)).min(self.sla_v);
        let horizontal = -(12.0 * (phi / self.phi_3db).powi(2)).min(self.a_max);
        self.g_max_dbi - (-(vertical + horizontal)).min(self.a_max)
    }

    /// Gain in dBi for an array-frame direction.
    pub fn gain_array_frame(&self, dir: Direction) -> f64 {
        if self.isotropic {
            return 0.0;
        }
        let (theta, phi) = array_to_element_frame(dir);
        self.gain(theta, phi)
    }
}

/// Maps an array-frame direction to the element's native (theta', phi').
pub fn array_to_element_frame(dir: Direction) -> (f64, f64) {
    let [ux, uy, uz] = dir.unit();
    let theta = (-ux).clamp(-1.0, 1.0).acos().to_degrees();
    let phi = uy.atan2(uz).to_degrees();
    (theta, phi)
}

fn wrap_degrees(phi: f64) -> f64 {
    let mut p = (phi + 180.0).rem_euclid(360.0) - 180.0;
    if p == -180.0 && phi > 0.0 {
        p = 180.0;
    }
    p
}

/// Complex array factor with progressive phase steering toward `steer`.
pub fn array_factor(
    geom: &ArrayGeometry,
    weights: &PlanarWeights,
    steer: Direction,
    freq_hz: f64,
    at: Direction,
) -> Result<C64, PatternError> {
    let eval = ArrayFactor::new(geom, weights, steer, freq_hz)?;
    Ok(eval.at(at))
}

/// Precomputed array-factor evaluator for repeated use over a grid.
#[derive(Debug, Clone)]
pub struct ArrayFactor {
    kx: Vec<f64>,
    ky: Vec<f64>,
    weights: Vec<f64>,
    ny: usize,
    steer_u: [f64; 3],
}

impl ArrayFactor {
    pub fn new(
        geom: &ArrayGeometry,
        weights: &PlanarWeights,
        steer: Direction,
        freq_hz: f64,
    ) -> Result<Self, PatternError> {
        if weights.rows() != geom.nx || weights.cols() != geom.ny {
            return Err(PatternError::DimensionMismatch {
                rows: weights.rows(),
                cols: weights.cols(),
                nx: geom.nx,
                ny: geom.ny,
            });
        }
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(PatternError::BadFrequency(freq_hz));
        }
        let k = 2.0 * PI * freq_hz / SPEED_OF_LIGHT;
        Ok(Self {
            kx: geom.x_positions().into_iter().map(|x| k * x).collect(),
            ky: geom.y_positions().into_iter().map(|y| k * y).collect(),
            weights: weights.as_slice().to_vec(),
            ny: geom.ny,
            steer_u: steer.unit(),
        })
    }

    pub fn at(&self, dir: Direction) -> C64 {
        let u = dir.unit();
        let du = u[0] - self.steer_u[0];
        let dv = u[1] - self.steer_u[1];
        let ey: Vec<C64> = self.ky.iter().map(|&ky| C64::from_polar(1.0, ky * dv)).collect();
        let mut total = C64::new(0.0, 0.0);
        for (i, &kx) in self.kx.iter().enumerate() {
            let row = &self.weights[i * self.ny..(i + 1) * self.ny];
            let inner: C64 = row.iter().zip(&ey).map(|(&w, &e)| e * w).sum();
            total += C64::from_polar(1.0, kx * du) * inner;
        }
        total
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

/// Element pattern times array factor, as linear radiation intensity.
#[derive(Debug, Clone)]
pub struct ArrayPattern {
    af: ArrayFactor,
    element: ElementPattern,
    pub freq_hz: f64,
    pub steer: Direction,
}

impl ArrayPattern {
    pub fn new(
        geom: &ArrayGeometry,
        weights: &PlanarWeights,
        element: ElementPattern,
        freq_hz: f64,
        steer: Direction,
    ) -> Result<Self, PatternError> {
        element.validate()?;
        Ok(Self { af: ArrayFactor::new(geom, weights, steer, freq_hz)?, element, freq_hz, steer })
    }

    pub fn intensity(&self, dir: Direction) -> f64 {
        let g = 10f64.powf(self.element.gain_array_frame(dir) / 10.0);
        g * self.af.at(dir).norm_sqr()
    }

    /// Principal-plane cut through `phi_deg`: signed angles in [-90, 90],
    /// negative angles lying in the `phi + 180°` half plane.
    pub fn cut(&self, phi_deg: f64, step_deg: f64) -> PatternCut {
        let n = (180.0 / step_deg).round() as usize;
        let angles: Vec<f64> = (0..=n).map(|i| -90.0 + i as f64 * step_deg).collect();
        let intensity: Vec<f64> = angles.iter().map(|&t| self.intensity(signed_cut_direction(t, phi_deg))).collect();
        PatternCut::from_intensity(phi_deg, angles, &intensity)
    }
}

/// Array-frame direction for a signed cut angle in the plane `phi_deg`.
pub fn signed_cut_direction(angle_deg: f64, phi_deg: f64) -> Direction {
    if angle_deg >= 0.0 {
        Direction::new(angle_deg, phi_deg)
    } else {
        Direction::new(-angle_deg, wrap_degrees(phi_deg + 180.0))
    }
}

/// One-dimensional pattern slice, levels in dB relative to the cut maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCut {
    pub phi_deg: f64,
    pub angles_deg: Vec<f64>,
    pub level_db: Vec<f64>,
}

impl PatternCut {
    pub fn from_intensity(phi_deg: f64, angles_deg: Vec<f64>, intensity: &[f64]) -> Self {
        let max = intensity.iter().cloned().fold(0.0, f64::max);
        let level_db = intensity.iter().map(|&u| floor_db(u / max)).collect();
        Self { phi_deg, angles_deg, level_db }
    }
}

fn floor_db(ratio: f64) -> f64 {
    let db = 10.0 * ratio.log10();
    if db.is_nan() || db < PATTERN_FLOOR_DB {
        PATTERN_FLOOR_DB
    } else {
        db
    }
}

/// Sampled gain over the sphere, theta-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiationPattern {
    pub theta_deg: Vec<f64>,
    pub phi_deg: Vec<f64>,
    pub gain_dbi: Vec<f64>,
    pub freq_hz: f64,
}

impl RadiationPattern {
    pub fn gain_at(&self, theta_index: usize, phi_index: usize) -> f64 {
        self.gain_dbi[theta_index * self.phi_deg.len() + phi_index]
    }

    /// CSV with header `theta_deg,phi_deg,gain_dbi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,phi_deg,gain_dbi\n");
        for (i, t) in self.theta_deg.iter().enumerate() {
            for (j, p) in self.phi_deg.iter().enumerate() {
                out.push_str(&format!("{t},{p},{}\n", self.gain_at(i, j)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectivityResult {
    pub directivity_dbi: f64,
    /// Direction of the largest sampled intensity (steer direction included).
    pub peak: Direction,
    pub radiated_power: f64,
    pub pattern: RadiationPattern,
}

impl DirectivityResult {
    /// Gain in dBi for a raw intensity value from the same closure.
    pub fn gain_dbi_of(&self, intensity: f64) -> f64 {
        floor_db(4.0 * PI * intensity / self.radiated_power)
    }
}

/// Directivity by midpoint quadrature of `intensity(dir)` over the sphere.
///
/// Rows of constant theta are evaluated in parallel and reduced in a fixed
/// order, so the result does not depend on the thread count.
pub fn directivity<F>(intensity: F, freq_hz: f64, steer: Direction, step_deg: f64) -> Result<DirectivityResult, PatternError>
where
    F: Fn(Direction) -> f64 + Sync,
{
    let n_theta = (180.0 / step_deg).round() as usize;
    if n_theta == 0 || ((n_theta as f64) * step_deg - 180.0).abs() > 1e-9 {
        return Err(PatternError::BadStep(step_deg));
    }
    let n_phi = 2 * n_theta;
    let theta_deg: Vec<f64> = (0..n_theta).map(|i| (i as f64 + 0.5) * step_deg).collect();
    let phi_deg: Vec<f64> = (0..n_phi).map(|j| -180.0 + (j as f64 + 0.5) * step_deg).collect();
    let d = step_deg.to_radians();

    let rows: Vec<(f64, Vec<f64>)> = theta_deg
        .par_iter()
        .map(|&t| {
            let values: Vec<f64> = phi_deg.iter().map(|&p| intensity(Direction::new(t, p))).collect();
            let sum: f64 = values.iter().sum();
            (sum * t.to_radians().sin() * d * d, values)
        })
        .collect();

    let radiated_power: f64 = rows.iter().map(|(s, _)| *s).sum();
    if !(radiated_power > 0.0 && radiated_power.is_finite()) {
        return Err(PatternError::QuadratureFailure(radiated_power));
    }

    let mut u_max = intensity(steer);
    let mut peak = steer;
    for (i, (_, values)) in rows.iter().enumerate() {
        for (j, &u) in values.iter().enumerate() {
            if u > u_max {
                u_max = u;
                peak = Direction::new(theta_deg[i], phi_deg[j]);
            }
        }
    }
    let gain_dbi = rows
        .iter()
        .flat_map(|(_, values)| values.iter().map(|&u| floor_db(4.0 * PI * u / radiated_power)))
        .collect();
    Ok(DirectivityResult {
        directivity_dbi: 10.0 * (4.0 * PI * u_max / radiated_power).log10(),
        peak,
        radiated_power,
        pattern: RadiationPattern { theta_deg, phi_deg, gain_dbi, freq_hz },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub angle_deg: f64,
    /// Absolute level for the main lobe; relative to the main lobe for side lobes.
    pub level_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidelobeReport {
    pub main: Lobe,
    /// Sorted by level, highest first.
    pub sidelobes: Vec<Lobe>,
}

impl SidelobeReport {
    pub fn worst(&self) -> Lobe {
        self.sidelobes[0]
    }

    /// The side lobe closest in angle to the main lobe (highest wins a tie).
    pub fn first(&self) -> Lobe {
        let main = self.main.angle_deg;
        *self
            .sidelobes
            .iter()
            .min_by(|a, b| {
                let da = (a.angle_deg - main).abs();
                let db = (b.angle_deg - main).abs();
                da.total_cmp(&db).then(b.level_db.total_cmp(&a.level_db))
            })
            .expect("report holds at least one side lobe")
    }
}

fn refine_peak(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    // Vertex of the parabola through three points.
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if curvature >= 0.0 || !curvature.is_finite() {
        return (x[1], y[1]);
    }
    let slope_mid = d1 + curvature * (x[1] - x[0]);
    let xv = (x[1] - slope_mid / (2.0 * curvature)).clamp(x[0], x[2]);
    let yv = y[1] + slope_mid * (xv - x[1]) + curvature * (xv - x[1]).powi(2);
    (xv, yv)
}

/// Main lobe and side lobes of a 1-D cut, by strict local-maximum detection
/// with three-point parabolic refinement.
pub fn sidelobe_levels(angles_deg: &[f64], level_db: &[f64]) -> Result<SidelobeReport, PatternError> {
    let n = level_db.len().min(angles_deg.len());
    if n < 5 {
        return Err(PatternError::TooFewSamples(n));
    }
    let refined = |i: usize| {
        refine_peak(
            [angles_deg[i - 1], angles_deg[i], angles_deg[i + 1]],
            [level_db[i - 1], level_db[i], level_db[i + 1]],
        )
    };
    let global = (0..n).max_by(|&a, &b| level_db[a].total_cmp(&level_db[b])).unwrap_or(0);
    let main = if global > 0 && global < n - 1 {
        let (a, l) = refined(global);
        Lobe { angle_deg: a, level_db: l }
    } else {
        Lobe { angle_deg: angles_deg[global], level_db: level_db[global] }
    };
    let mut sidelobes: Vec<Lobe> = (1..n - 1)
        .filter(|&i| i != global && level_db[i] > level_db[i - 1] && level_db[i] > level_db[i + 1])
        .map(|i| {
            let (a, l) = refined(i);
            Lobe { angle_deg: a, level_db: l - main.level_db }
        })
        .collect();
    if sidelobes.is_empty() {
        return Err(PatternError::NoSidelobes);
    }
    sidelobes.sort_by(|a, b| b.level_db.total_cmp(&a.level_db).then(a.angle_deg.total_cmp(&b.angle_deg)));
    Ok(SidelobeReport { main, sidelobes })
}

/// JSON-friendly summary: directivity, main-lobe direction and top side lobes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub directivity_dbi: f64,
    pub main_lobe: Direction,
    pub sidelobes: Vec<Lobe>,
}

impl PatternSummary {
    pub fn new(result: &DirectivityResult, cut: Option<&SidelobeReport>) -> Self {
        Self {
            directivity_dbi: result.directivity_dbi,
            main_lobe: result.peak,
            sidelobes: cut.map(|r| r.sidelobes.iter().take(5).copied().collect()).unwrap_or_default(),
        }
    }
}
