//! Two-port network algebra and noise-parameter evaluation.
//!
//! Networks are stored as scattering matrices against an explicit
//! [`FrequencyGrid`] and a real reference impedance. Conversions to ABCD and
//! impedance form, cascading, reflection and gain formulas all live here and
//! are shared by the synthesis and extraction modules.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Reference noise temperature in kelvin.
pub const T0_KELVIN: f64 = 290.0;

/// Slack allowed on the largest singular value of a passive S-matrix.
pub const PASSIVITY_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("frequency grid must be strictly increasing and positive (index {index}: {value} Hz)")]
    BadGrid { index: usize, value: f64 },
    #[error("reference impedance must be positive, got {0} ohm")]
    BadReference(f64),
    #[error("expected {expected} matrices for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("network flagged passive has singular value {sigma} at {freq_hz} Hz")]
    NotPassive { freq_hz: f64, sigma: f64 },
    #[error("S21 vanishes at {freq_hz} Hz; ABCD form does not exist")]
    SingularConversion { freq_hz: f64 },
    #[error("networks do not share the same frequency grid and reference impedance")]
    GridMismatch,
    #[error("cannot cascade an empty list of networks")]
    EmptyCascade,
    #[error("source reflection magnitude {0} is not below 1")]
    DegenerateSource(f64),
    #[error("noise figure must be non-negative, got {0} dB")]
    NegativeNoiseFigure(f64),
    #[error("invalid noise parameters: {0}")]
    BadNoiseSpec(&'static str),
}

/// Strictly increasing list of positive frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self, NetError> {
        if points.is_empty() {
            return Err(NetError::EmptyGrid);
        }
        for (index, &value) in points.iter().enumerate() {
            let ok = value.is_finite() && value > 0.0 && (index == 0 || value > points[index - 1]);
            if !ok {
                return Err(NetError::BadGrid { index, value });
            }
        }
        Ok(Self { points })
    }

    pub fn single(freq_hz: f64) -> Result<Self, NetError> {
        Self::new(vec![freq_hz])
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linspace(start: f64, stop: f64, n: usize) -> Result<Self, NetError> {
        if n == 1 {
            return Self::single(start);
        }
        let step = (stop - start) / (n as f64 - 1.0);
        Self::new((0..n).map(|i| start + step * i as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = NetError;

    fn try_from(points: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(points)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(grid: FrequencyGrid) -> Self {
        grid.points
    }
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self([[m11, m12], [m21, m22]])
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn scalar(v: C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self::new(v, zero, zero, v)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Self::new(m[1][1] / det, -m[0][1] / det, -m[1][0] / det, m[0][0] / det))
    }

    pub fn conj_transpose(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Largest singular value, from the closed-form eigenvalues of `M^H M`.
    pub fn max_singular_value(&self) -> f64 {
        let h = self.conj_transpose() * *self;
        let a = h.0[0][0].re;
        let d = h.0[1][1].re;
        let b = h.0[0][1].norm();
        let half_diff = 0.5 * (a - d);
        let lambda = 0.5 * (a + d) + (half_diff * half_diff + b * b).sqrt();
        lambda.max(0.0).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        let a = &self.0;
        Mat2::new(-a[0][0], -a[0][1], -a[1][0], -a[1][1])
    }
}

/// Chain (ABCD) parameters of a two-port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abcd {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Abcd {
    pub fn identity() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
            c: C64::new(0.0, 0.0),
            d: C64::new(1.0, 0.0),
        }
    }

    pub fn series(z: C64) -> Self {
        Self { b: z, ..Self::identity() }
    }

    pub fn shunt(y: C64) -> Self {
        Self { c: y, ..Self::identity() }
    }

    pub fn then(&self, next: &Abcd) -> Abcd {
        Abcd {
            a: self.a * next.a + self.b * next.c,
            b: self.a * next.b + self.b * next.d,
            c: self.c * next.a + self.d * next.c,
            d: self.c * next.b + self.d * next.d,
        }
    }

    /// Impedance seen at the input when the output is terminated in `z_load`.
    pub fn input_impedance(&self, z_load: C64) -> C64 {
        (self.a * z_load + self.b) / (self.c * z_load + self.d)
    }

    /// Scattering matrix for equal real reference impedances at both ports.
    pub fn to_s(&self, z_ref: f64) -> Mat2 {
        let z0 = C64::new(z_ref, 0.0);
        let den = self.a + self.b / z0 + self.c * z0 + self.d;
        let det = self.a * self.d - self.b * self.c;
        Mat2::new(
            (self.a + self.b / z0 - self.c * z0 - self.d) / den,
            2.0 * det / den,
            C64::new(2.0, 0.0) / den,
            (-self.a + self.b / z0 - self.c * z0 + self.d) / den,
        )
    }
}

/// Converts one scattering matrix to chain form; `None` when S21 = 0.
pub fn s_matrix_to_abcd(s: &Mat2, z_ref: f64) -> Option<Abcd> {
    let (s11, s12, s21, s22) = (s.get(0, 0), s.get(0, 1), s.get(1, 0), s.get(1, 1));
    if s21.norm() == 0.0 {
        return None;
    }
    let z0 = z_ref;
    let two_s21 = 2.0 * s21;
    let one = C64::new(1.0, 0.0);
    let prod = s12 * s21;
    Some(Abcd {
        a: ((one + s11) * (one - s22) + prod) / two_s21,
        b: z0 * ((one + s11) * (one + s22) - prod) / two_s21,
        c: ((one - s11) * (one - s22) - prod) / (two_s21 * z0),
        d: ((one - s11) * (one + s22) + prod) / two_s21,
    })
}

/// Z = z0 (I + S)(I - S)^-1; `None` when `I - S` is singular.
pub fn s_matrix_to_z(s: &Mat2, z_ref: f64) -> Option<Mat2> {
    let i = Mat2::identity();
    let inv = (i - *s).inverse()?;
    Some(Mat2::scalar(C64::new(z_ref, 0.0)) * (i + *s) * inv)
}

/// S = (Z - z0 I)(Z + z0 I)^-1.
pub fn z_matrix_to_s(z: &Mat2, z_ref: f64) -> Option<Mat2> {
    let z0 = Mat2::scalar(C64::new(z_ref, 0.0));
    let inv = (*z + z0).inverse()?;
    Some((*z - z0) * inv)
}

/// S = (I - z0 Y)(I + z0 Y)^-1.
pub fn y_matrix_to_s(y: &Mat2, z_ref: f64) -> Option<Mat2> {
    let i = Mat2::identity();
    let z0y = Mat2::scalar(C64::new(z_ref, 0.0)) * *y;
    let inv = (i + z0y).inverse()?;
    Some((i - z0y) * inv)
}

/// Frequency-indexed two-port scattering data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPortNetwork {
    grid: FrequencyGrid,
    s: Vec<Mat2>,
    z_ref: f64,
    passive: bool,
}

impl TwoPortNetwork {
    pub fn new(grid: FrequencyGrid, s: Vec<Mat2>, z_ref: f64) -> Result<Self, NetError> {
        if !(z_ref.is_finite() && z_ref > 0.0) {
            return Err(NetError::BadReference(z_ref));
        }
        if s.len() != grid.len() {
            return Err(NetError::LengthMismatch { expected: grid.len(), got: s.len() });
        }
        Ok(Self { grid, s, z_ref, passive: false })
    }

    /// Builds the network and flags it passive, checking every singular value.
    pub fn new_passive(grid: FrequencyGrid, s: Vec<Mat2>, z_ref: f64) -> Result<Self, NetError> {
        let mut net = Self::new(grid, s, z_ref)?;
        net.check_passivity()?;
        net.passive = true;
        Ok(net)
    }

    pub fn from_abcd(grid: FrequencyGrid, abcd: &[Abcd], z_ref: f64) -> Result<Self, NetError> {
        if !(z_ref.is_finite() && z_ref > 0.0) {
            return Err(NetError::BadReference(z_ref));
        }
        let s = abcd.iter().map(|m| m.to_s(z_ref)).collect();
        Self::new(grid, s, z_ref)
    }

    /// Builds a network from a per-frequency chain-matrix generator.
    pub fn from_abcd_fn(
        grid: FrequencyGrid,
        z_ref: f64,
        f: impl Fn(f64) -> Abcd,
    ) -> Result<Self, NetError> {
        let abcd: Vec<Abcd> = grid.points().iter().map(|&freq| f(freq)).collect();
        Self::from_abcd(grid, &abcd, z_ref)
    }

    pub fn through(grid: FrequencyGrid, z_ref: f64) -> Result<Self, NetError> {
        let s = vec![Mat2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)); grid.len()];
        let mut net = Self::new(grid, s, z_ref)?;
        net.passive = true;
        Ok(net)
    }

    pub fn series_impedance(grid: FrequencyGrid, z_ref: f64, z: impl Fn(f64) -> C64) -> Result<Self, NetError> {
        Self::from_abcd_fn(grid, z_ref, |f| Abcd::series(z(f)))
    }

    pub fn shunt_admittance(grid: FrequencyGrid, z_ref: f64, y: impl Fn(f64) -> C64) -> Result<Self, NetError> {
        Self::from_abcd_fn(grid, z_ref, |f| Abcd::shunt(y(f)))
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn s(&self) -> &[Mat2] {
        &self.s
    }

    pub fn z_ref(&self) -> f64 {
        self.z_ref
    }

    pub fn is_passive(&self) -> bool {
        self.passive
    }

    pub fn is_reciprocal(&self, tol: f64) -> bool {
        self.s.iter().all(|m| {
            let scale = m.get(0, 1).norm().max(m.get(1, 0).norm()).max(1e-300);
            (m.get(0, 1) - m.get(1, 0)).norm() <= tol * scale.max(1.0)
        })
    }

    /// Largest singular value of S across the grid.
    pub fn max_singular_value(&self) -> f64 {
        self.s.iter().map(Mat2::max_singular_value).fold(0.0, f64::max)
    }

    fn check_passivity(&self) -> Result<(), NetError> {
        for (m, &freq_hz) in self.s.iter().zip(self.grid.points()) {
            let sigma = m.max_singular_value();
            if !(sigma <= 1.0 + PASSIVITY_SLACK) {
                return Err(NetError::NotPassive { freq_hz, sigma });
            }
        }
        Ok(())
    }

    pub fn s11(&self) -> Vec<C64> {
        self.s.iter().map(|m| m.get(0, 0)).collect()
    }

    pub fn s21(&self) -> Vec<C64> {
        self.s.iter().map(|m| m.get(1, 0)).collect()
    }

    fn compatible(&self, other: &TwoPortNetwork) -> bool {
        self.grid == other.grid && self.z_ref == other.z_ref
    }
}

pub fn s_to_abcd(net: &TwoPortNetwork) -> Result<Vec<Abcd>, NetError> {
    net.s
        .iter()
        .zip(net.grid.points())
        .map(|(m, &freq_hz)| s_matrix_to_abcd(m, net.z_ref).ok_or(NetError::SingularConversion { freq_hz }))
        .collect()
}

pub fn abcd_to_s(abcd: &[Abcd], z_ref: f64) -> Vec<Mat2> {
    abcd.iter().map(|m| m.to_s(z_ref)).collect()
}

/// Impedance matrices per frequency; `None` entries where `I - S` is singular.
pub fn s_to_z(net: &TwoPortNetwork) -> Vec<Option<Mat2>> {
    net.s.iter().map(|m| s_matrix_to_z(m, net.z_ref)).collect()
}

/// Joins two scattering matrices output-to-input.
///
/// This is the ABCD product expressed directly in S form, so it stays defined
/// when either network has S21 = 0.
pub fn connect_s(a: &Mat2, b: &Mat2) -> Mat2 {
    let one = C64::new(1.0, 0.0);
    let den = one - a.get(1, 1) * b.get(0, 0);
    Mat2::new(
        a.get(0, 0) + a.get(0, 1) * b.get(0, 0) * a.get(1, 0) / den,
        a.get(0, 1) * b.get(0, 1) / den,
        a.get(1, 0) * b.get(1, 0) / den,
        b.get(1, 1) + b.get(1, 0) * a.get(1, 1) * b.get(0, 1) / den,
    )
}

/// Cascades networks in order, first network at the input.
pub fn cascade(nets: &[TwoPortNetwork]) -> Result<TwoPortNetwork, NetError> {
    let (first, rest) = nets.split_first().ok_or(NetError::EmptyCascade)?;
    if rest.iter().any(|n| !first.compatible(n)) {
        return Err(NetError::GridMismatch);
    }
    let mut s = first.s.clone();
    for net in rest {
        for (acc, next) in s.iter_mut().zip(&net.s) {
            *acc = connect_s(acc, next);
        }
    }
    let passive = nets.iter().all(|n| n.passive);
    Ok(TwoPortNetwork { grid: first.grid.clone(), s, z_ref: first.z_ref, passive })
}

/// Result of a reflection formula whose denominator may vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Reflection {
    Finite(C64),
    Infinite,
}

impl Reflection {
    pub fn finite(self) -> Option<C64> {
        match self {
            Reflection::Finite(g) => Some(g),
            Reflection::Infinite => None,
        }
    }

    /// Magnitude in dB; `+inf` for the infinite case.
    pub fn magnitude_db(self) -> f64 {
        match self {
            Reflection::Finite(g) => 20.0 * g.norm().log10(),
            Reflection::Infinite => f64::INFINITY,
        }
    }
}

pub fn input_reflection_at(s: &Mat2, gamma_load: C64) -> Reflection {
    if gamma_load == C64::new(0.0, 0.0) {
        return Reflection::Finite(s.get(0, 0));
    }
    let den = C64::new(1.0, 0.0) - s.get(1, 1) * gamma_load;
    if den.norm() == 0.0 {
        return Reflection::Infinite;
    }
    let g = s.get(0, 0) + s.get(0, 1) * s.get(1, 0) * gamma_load / den;
    if g.is_finite() {
        Reflection::Finite(g)
    } else {
        Reflection::Infinite
    }
}

/// Γ_in = S11 + S12·S21·Γ_L / (1 − S22·Γ_L) at every grid point.
pub fn input_reflection(net: &TwoPortNetwork, gamma_load: C64) -> Vec<Reflection> {
    net.s.iter().map(|m| input_reflection_at(m, gamma_load)).collect()
}

/// Output-side reflection with the input terminated in `gamma_src`.
pub fn output_reflection_at(s: &Mat2, gamma_src: C64) -> Reflection {
    let flipped = Mat2::new(s.get(1, 1), s.get(1, 0), s.get(0, 1), s.get(0, 0));
    input_reflection_at(&flipped, gamma_src)
}

/// Linear transducer gain for one scattering matrix.
pub fn transducer_gain_linear(s: &Mat2, gamma_src: C64, gamma_load: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    let num = (1.0 - gamma_src.norm_sqr()) * s.get(1, 0).norm_sqr() * (1.0 - gamma_load.norm_sqr());
    let den = ((one - s.get(0, 0) * gamma_src) * (one - s.get(1, 1) * gamma_load)
        - s.get(0, 1) * s.get(1, 0) * gamma_src * gamma_load)
        .norm_sqr();
    num / den
}

/// Transducer gain G_T in dB at every grid point.
pub fn transducer_gain(net: &TwoPortNetwork, gamma_src: C64, gamma_load: C64) -> Vec<f64> {
    net.s
        .iter()
        .map(|m| 10.0 * transducer_gain_linear(m, gamma_src, gamma_load).log10())
        .collect()
}

/// Available gain (linear) from a source with reflection `gamma_src`.
pub fn available_gain_linear(s: &Mat2, gamma_src: C64) -> f64 {
    let one = C64::new(1.0, 0.0);
    let gamma_out = match output_reflection_at(s, gamma_src) {
        Reflection::Finite(g) => g,
        Reflection::Infinite => return 0.0,
    };
    let num = (1.0 - gamma_src.norm_sqr()) * s.get(1, 0).norm_sqr();
    let den = (one - s.get(0, 0) * gamma_src).norm_sqr() * (1.0 - gamma_out.norm_sqr());
    num / den
}

/// Impedance or admittance value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Immittance {
    Impedance(C64),
    Admittance(C64),
}

impl Immittance {
    pub fn ohms(re: f64, im: f64) -> Self {
        Immittance::Impedance(C64::new(re, im))
    }

    pub fn impedance(&self) -> C64 {
        match *self {
            Immittance::Impedance(z) => z,
            Immittance::Admittance(y) => y.inv(),
        }
    }

    pub fn admittance(&self) -> C64 {
        match *self {
            Immittance::Impedance(z) => z.inv(),
            Immittance::Admittance(y) => y,
        }
    }

    pub fn reflection(&self, z_ref: f64) -> C64 {
        gamma_from_z(self.impedance(), z_ref)
    }
}

pub fn gamma_from_z(z: C64, z_ref: f64) -> C64 {
    (z - z_ref) / (z + z_ref)
}

pub fn z_from_gamma(gamma: C64, z_ref: f64) -> C64 {
    z_ref * (1.0 + gamma) / (1.0 - gamma)
}

/// Four-parameter noise description referenced to `z_ref`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub f_min_db: f64,
    pub r_n: f64,
    pub gamma_opt: C64,
    #[serde(default = "default_z_ref")]
    pub z_ref: f64,
}

fn default_z_ref() -> f64 {
    50.0
}

impl NoiseSpec {
    pub fn new(f_min_db: f64, r_n: f64, gamma_opt: C64) -> Result<Self, NetError> {
        let spec = Self { f_min_db, r_n, gamma_opt, z_ref: 50.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.f_min_db >= 0.0) {
            return Err(NetError::BadNoiseSpec("f_min_db must be >= 0"));
        }
        if !(self.r_n >= 0.0) {
            return Err(NetError::BadNoiseSpec("r_n must be >= 0"));
        }
        if !(self.gamma_opt.norm() < 1.0) {
            return Err(NetError::BadNoiseSpec("|gamma_opt| must be < 1"));
        }
        if !(self.z_ref > 0.0) {
            return Err(NetError::BadReference(self.z_ref));
        }
        Ok(())
    }
}

/// Noise figure in dB presented with source reflection `gamma_src`.
pub fn noise_figure_at_source(spec: &NoiseSpec, gamma_src: C64) -> Result<f64, NetError> {
    let mag = gamma_src.norm();
    if !(mag < 1.0) {
        return Err(NetError::DegenerateSource(mag));
    }
    let f_min = db_to_linear(spec.f_min_db);
    let excess = 4.0 * spec.r_n / spec.z_ref * (gamma_src - spec.gamma_opt).norm_sqr()
        / ((1.0 - gamma_src.norm_sqr()) * (1.0 + spec.gamma_opt).norm_sqr());
    Ok(linear_to_db(f_min + excess))
}

/// Equivalent noise temperature T = T0 (F - 1).
pub fn noise_temperature(f_db: f64) -> Result<f64, NetError> {
    if !(f_db >= 0.0) {
        return Err(NetError::NegativeNoiseFigure(f_db));
    }
    Ok(T0_KELVIN * (db_to_linear(f_db) - 1.0))
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(vec![1e9, 2e9, 3e9]).unwrap()
    }

    #[test]
    fn grid_rejects_bad_points() {
        assert_eq!(FrequencyGrid::new(vec![]), Err(NetError::EmptyGrid));
        assert!(matches!(FrequencyGrid::new(vec![1.0, 1.0]), Err(NetError::BadGrid { index: 1, .. })));
        assert!(matches!(FrequencyGrid::new(vec![-1.0]), Err(NetError::BadGrid { index: 0, .. })));
    }

    #[test]
    fn through_is_identity_abcd() {
        let net = TwoPortNetwork::through(grid(), 50.0).unwrap();
        for m in s_to_abcd(&net).unwrap() {
            assert_eq!(m, Abcd::identity());
        }
    }

    #[test]
    fn series_100_ohm_abcd() {
        let s = Mat2::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0));
        let m = s_matrix_to_abcd(&s, 50.0).unwrap();
        assert!(close(m.a, c(1.0, 0.0), 1e-12));
        assert!(close(m.b, c(100.0, 0.0), 1e-12));
        assert!(close(m.c, c(0.0, 0.0), 1e-12));
        assert!(close(m.d, c(1.0, 0.0), 1e-12));
        assert!(close(m.to_s(50.0).get(0, 0), c(0.5, 0.0), 1e-12));
    }

    #[test]
    fn shunt_admittance_matches_nodal_reflection() {
        // Shunt Y across a matched line: node voltage V = 2/(2 + Y z0), so S11 = V - 1.
        let y = c(0.013, -0.021);
        let z0 = 50.0;
        let s = Abcd::shunt(y).to_s(z0);
        let expected = -y * z0 / (y * z0 + 2.0);
        assert!(close(s.get(0, 0), expected, 1e-12));
        let back = s_matrix_to_abcd(&s, z0).unwrap();
        assert!(close(back.c, y, 1e-12));
    }

    #[test]
    fn zero_s21_is_singular() {
        let s = Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let net = TwoPortNetwork::new(FrequencyGrid::single(1e9).unwrap(), vec![s], 50.0).unwrap();
        assert!(matches!(s_to_abcd(&net), Err(NetError::SingularConversion { .. })));
    }

    #[test]
    fn cascade_of_series_resistors() {
        let a = TwoPortNetwork::series_impedance(grid(), 50.0, |_| c(50.0, 0.0)).unwrap();
        let net = cascade(&[a.clone(), a]).unwrap();
        for m in s_to_abcd(&net).unwrap() {
            assert!(close(m.b, c(100.0, 0.0), 1e-12));
        }
    }

    #[test]
    fn cascade_errors() {
        assert_eq!(cascade(&[]), Err(NetError::EmptyCascade));
        let a = TwoPortNetwork::through(grid(), 50.0).unwrap();
        let b = TwoPortNetwork::through(grid(), 75.0).unwrap();
        assert_eq!(cascade(&[a, b]), Err(NetError::GridMismatch));
    }

    #[test]
    fn reflection_cases() {
        let thru = TwoPortNetwork::through(grid(), 50.0).unwrap();
        let g = c(0.3, -0.2);
        for r in input_reflection(&thru, g) {
            assert!(close(r.finite().unwrap(), g, 1e-15));
        }
        let series = TwoPortNetwork::series_impedance(grid(), 50.0, |_| c(100.0, 0.0)).unwrap();
        for r in input_reflection(&series, c(0.0, 0.0)) {
            assert!(close(r.finite().unwrap(), c(0.5, 0.0), 1e-12));
        }
        // S22 = 1 with Γ_L = 1 drives the denominator to zero.
        let s = Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(input_reflection_at(&s, c(1.0, 0.0)), Reflection::Infinite);
    }

    #[test]
    fn transducer_gain_matched() {
        let s = Mat2::new(c(0.1, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.2, 0.0));
        let g = 10.0 * transducer_gain_linear(&s, c(0.0, 0.0), c(0.0, 0.0)).log10();
        assert!((g - 6.0206).abs() < 1e-3);
        let thru = TwoPortNetwork::through(grid(), 50.0).unwrap();
        for g in transducer_gain(&thru, c(0.0, 0.0), c(0.0, 0.0)) {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn noise_figure_cases() {
        let spec = NoiseSpec::new(2.0, 20.0, c(0.3, 0.1)).unwrap();
        assert!((noise_figure_at_source(&spec, spec.gamma_opt).unwrap() - 2.0).abs() < 1e-12);
        let quiet = NoiseSpec::new(1.5, 0.0, c(0.3, 0.1)).unwrap();
        assert!((noise_figure_at_source(&quiet, c(-0.7, 0.2)).unwrap() - 1.5).abs() < 1e-12);
        assert!(matches!(noise_figure_at_source(&spec, c(1.0, 0.0)), Err(NetError::DegenerateSource(_))));
    }

    #[test]
    fn noise_figure_admittance_form() {
        // F = Fmin + (Rn/Gs)|Ys - Yopt|^2, evaluated with admittances.
        let spec = NoiseSpec::new(2.0, 20.0, c(0.0, 0.0)).unwrap();
        let gs = c(0.2, 0.0);
        let ys = z_from_gamma(gs, 50.0).inv();
        let yopt = z_from_gamma(spec.gamma_opt, 50.0).inv();
        let f = db_to_linear(2.0) + spec.r_n / ys.re * (ys - yopt).norm_sqr();
        let got = noise_figure_at_source(&spec, gs).unwrap();
        assert!((got - linear_to_db(f)).abs() < 1e-12);
    }

    #[test]
    fn noise_temperature_values() {
        assert_eq!(noise_temperature(0.0).unwrap(), 0.0);
        assert!((noise_temperature(10.0 * 2f64.log10()).unwrap() - 290.0).abs() < 1e-9);
        // 290 * (10^0.55 - 1) = 738.96 K
        let t = noise_temperature(5.5).unwrap();
        assert!((t - 738.96).abs() < 0.01, "{t}");
        assert!(matches!(noise_temperature(-0.1), Err(NetError::NegativeNoiseFigure(_))));
    }

    #[test]
    fn passive_flag_checks_singular_values() {
        let gain = Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0));
        let res = TwoPortNetwork::new_passive(FrequencyGrid::single(1e9).unwrap(), vec![gain], 50.0);
        assert!(matches!(res, Err(NetError::NotPassive { .. })));
    }
}
