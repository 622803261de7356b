//! Taylor line tapers, separable planar tapers and gain-state quantization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaperError {
    #[error("invalid taper spec: {0}")]
    InvalidSpec(String),
    #[error("gain states span {span_db:.3} dB but the taper needs {needed_db:.3} dB")]
    InsufficientSpan { span_db: f64, needed_db: f64 },
    #[error("gain state set must be non-empty, finite and strictly increasing")]
    BadStates,
    #[error("weights must be non-empty and strictly positive")]
    BadWeights,
}

/// Design inputs for a Taylor n̄ line taper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaperSpec {
    pub n_elements: usize,
    /// Side-lobe suppression below the main lobe, as a positive dB figure.
    pub sll_db: f64,
    pub n_bar: usize,
}

impl TaperSpec {
    pub const DEFAULT_N_BAR: usize = 4;

    pub fn new(n_elements: usize, sll_db: f64, n_bar: usize) -> Result<Self, TaperError> {
        let spec = Self { n_elements, sll_db, n_bar };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TaperError> {
        if self.n_elements < 2 {
            return Err(TaperError::InvalidSpec(format!("n_elements = {} < 2", self.n_elements)));
        }
        if !(self.sll_db > 0.0 && self.sll_db.is_finite()) {
            return Err(TaperError::InvalidSpec(format!("sll_db = {} must be > 0", self.sll_db)));
        }
        if self.n_bar < 1 || self.n_bar > self.n_elements / 2 {
            return Err(TaperError::InvalidSpec(format!(
                "n_bar = {} outside 1..={}",
                self.n_bar,
                self.n_elements / 2
            )));
        }
        Ok(())
    }
}

/// Line excitation amplitudes normalized to a peak of exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaperWeights {
    amplitudes: Vec<f64>,
}

impl TaperWeights {
    /// Normalizes `raw` to unit peak; all entries must be positive.
    pub fn from_raw(raw: Vec<f64>) -> Result<Self, TaperError> {
        if raw.is_empty() || raw.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(TaperError::BadWeights);
        }
        let peak = raw.iter().cloned().fold(f64::MIN, f64::max);
        Ok(Self { amplitudes: raw.into_iter().map(|w| w / peak).collect() })
    }

    pub fn uniform(n: usize) -> Self {
        Self { amplitudes: vec![1.0; n.max(1)] }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dynamic_range_db(&self) -> f64 {
        dynamic_range_db(&self.amplitudes)
    }
}

/// Row-major 2-D weight matrix; rows index the x axis, columns the y axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarWeights {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PlanarWeights {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, TaperError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(TaperError::BadWeights);
        }
        if data.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(TaperError::BadWeights);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![1.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dynamic_range_db(&self) -> f64 {
        dynamic_range_db(&self.data)
    }

    /// One array row per line, comma separated, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols).map(|c| format!("{}", self.get(r, c))).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, TaperError> {
        let mut data = Vec::new();
        let mut rows = 0;
        let mut cols = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let row: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let row = row.map_err(|_| TaperError::BadWeights)?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => return Err(TaperError::BadWeights),
                _ => {}
            }
            data.extend(row);
            rows += 1;
        }
        Self::new(rows, cols.unwrap_or(0), data)
    }
}

/// Taylor n̄ coefficients F_m, m = 1..n̄-1, for a line aperture.
fn taylor_coefficients(sll_db: f64, n_bar: usize) -> Vec<f64> {
    let r = 10f64.powf(sll_db / 20.0);
    let a = r.acosh() / PI;
    let nb = n_bar as f64;
    let sigma2 = nb * nb / (a * a + (nb - 0.5) * (nb - 0.5));
    (1..n_bar)
        .map(|m| {
            let mf = m as f64;
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            let num: f64 = (1..n_bar)
                .map(|n| {
                    let nf = n as f64 - 0.5;
                    1.0 - mf * mf / (sigma2 * (a * a + nf * nf))
                })
                .product();
            let den: f64 = (1..n_bar)
                .filter(|&n| n != m)
                .map(|n| 1.0 - mf * mf / (n * n) as f64)
                .product();
            sign * num / (2.0 * den)
        })
        .collect()
}

/// Samples the continuous Taylor n̄ distribution at the element centres.
///
/// Element `i` sits at normalized aperture coordinate `(i - (N-1)/2) / N`.
pub fn taylor_line_taper(spec: &TaperSpec) -> Result<TaperWeights, TaperError> {
    spec.validate()?;
    let n = spec.n_elements;
    let coeffs = taylor_coefficients(spec.sll_db, spec.n_bar);
    let center = (n as f64 - 1.0) / 2.0;
    let mut raw: Vec<f64> = (0..n)
        .map(|i| {
            let x = (i as f64 - center) / n as f64;
            1.0 + 2.0
                * coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, f)| f * (2.0 * PI * (k + 1) as f64 * x).cos())
                    .sum::<f64>()
        })
        .collect();
    // Exact mirror symmetry regardless of cosine rounding.
    for i in 0..n / 2 {
        let avg = 0.5 * (raw[i] + raw[n - 1 - i]);
        raw[i] = avg;
        raw[n - 1 - i] = avg;
    }
    if raw.iter().any(|&w| !(w > 0.0)) {
        return Err(TaperError::InvalidSpec(format!(
            "sll {} dB with n_bar {} yields non-positive weights for N = {}",
            spec.sll_db, spec.n_bar, n
        )));
    }
    TaperWeights::from_raw(raw)
}

/// Separable planar taper `w[i][j] = wx[i] * wy[j]`.
pub fn planar_taper(wx: &TaperWeights, wy: &TaperWeights) -> PlanarWeights {
    let data = wx
        .amplitudes()
        .iter()
        .flat_map(|&a| wy.amplitudes().iter().map(move |&b| a * b))
        .collect();
    PlanarWeights { rows: wx.len(), cols: wy.len(), data }
}

/// 20·log10(max/min) over positive weights.
pub fn dynamic_range_db(weights: &[f64]) -> f64 {
    let max = weights.iter().cloned().fold(f64::MIN, f64::max);
    let min = weights.iter().cloned().fold(f64::MAX, f64::min);
    20.0 * (max / min).log10()
}

/// Discrete gain settings in dB, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainStateSet {
    states: Vec<f64>,
}

impl GainStateSet {
    pub fn new(states: Vec<f64>) -> Result<Self, TaperError> {
        let ok = !states.is_empty()
            && states.iter().all(|s| s.is_finite())
            && states.windows(2).all(|w| w[1] > w[0]);
        if !ok {
            return Err(TaperError::BadStates);
        }
        Ok(Self { states })
    }

    /// `n` evenly spaced states from `low_db` to `high_db`.
    pub fn linear(low_db: f64, high_db: f64, n: usize) -> Result<Self, TaperError> {
        if n == 1 {
            return Self::new(vec![high_db]);
        }
        let step = (high_db - low_db) / (n as f64 - 1.0);
        Self::new((0..n).map(|i| low_db + step * i as f64).collect())
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn span_db(&self) -> f64 {
        self.states[self.states.len() - 1] - self.states[0]
    }

    pub fn max_gap_db(&self) -> f64 {
        self.states.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Per-element state assignment produced by [`quantize_weights`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantization {
    /// Index into the state set, one per element.
    pub state_index: Vec<usize>,
    /// Assigned minus ideal gain in dB, one per element.
    pub residual_db: Vec<f64>,
    pub max_abs_residual_db: f64,
}

pub const DEFAULT_SPAN_TOLERANCE_DB: f64 = 0.5;

/// Maps each weight to the nearest gain state, anchoring the largest weight at
/// the highest state.
pub fn quantize_weights(
    weights: &[f64],
    states: &GainStateSet,
    tolerance_db: f64,
) -> Result<Quantization, TaperError> {
    if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(TaperError::BadWeights);
    }
    let needed_db = dynamic_range_db(weights);
    let span_db = states.span_db();
    if span_db < needed_db - tolerance_db {
        return Err(TaperError::InsufficientSpan { span_db, needed_db });
    }
    let peak = weights.iter().cloned().fold(f64::MIN, f64::max);
    let top = states.states()[states.states().len() - 1];
    let mut state_index = Vec::with_capacity(weights.len());
    let mut residual_db = Vec::with_capacity(weights.len());
    for &w in weights {
        let target = top + 20.0 * (w / peak).log10();
        let (idx, &gain) = states
            .states()
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .expect("state set is non-empty");
        state_index.push(idx);
        residual_db.push(gain - target);
    }
    let max_abs_residual_db = residual_db.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(Quantization { state_index, residual_db, max_abs_residual_db })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(n: usize, sll: f64, nbar: usize) -> TaperWeights {
        taylor_line_taper(&TaperSpec::new(n, sll, nbar).unwrap()).unwrap()
    }

    #[test]
    fn two_elements_are_uniform() {
        let w = taylor(2, 25.0, 1);
        assert_eq!(w.amplitudes(), &[1.0, 1.0]);
    }

    #[test]
    fn spec_validation() {
        assert!(TaperSpec::new(8, 18.0, 5).is_err());
        assert!(TaperSpec::new(8, 18.0, 0).is_err());
        assert!(TaperSpec::new(1, 18.0, 1).is_err());
        assert!(TaperSpec::new(8, -3.0, 4).is_err());
        assert!(TaperSpec::new(8, 18.0, 4).is_ok());
    }

    #[test]
    fn eight_element_18db_values() {
        // Reference weights from an independent evaluation of the Taylor
        // n̄ = 4 distribution sampled at (i - 3.5)/8.
        let w = taylor(8, 18.0, 4);
        let expected = [0.721067, 0.705360, 0.888715, 1.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((w.amplitudes()[i] - e).abs() < 1e-6, "{i}: {}", w.amplitudes()[i]);
            assert_eq!(w.amplitudes()[i], w.amplitudes()[7 - i]);
        }
        assert!((w.dynamic_range_db() - 3.0318).abs() < 1e-3);
    }

    #[test]
    fn planar_cases() {
        let u = planar_taper(&TaperWeights::uniform(8), &TaperWeights::uniform(8));
        assert!(u.as_slice().iter().all(|&v| v == 1.0));
        let t = taylor(8, 18.0, 4);
        let p = planar_taper(&t, &t);
        assert!((p.dynamic_range_db() - 2.0 * t.dynamic_range_db()).abs() < 1e-12);
        let max = p.as_slice().iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        let line = planar_taper(&TaperWeights::uniform(1), &t);
        assert_eq!(line.as_slice(), t.amplitudes());
    }

    #[test]
    fn dynamic_range_simple() {
        assert_eq!(dynamic_range_db(&[1.0; 4]), 0.0);
        assert!((dynamic_range_db(&[1.0, 0.5]) - 6.0206).abs() < 1e-4);
    }

    #[test]
    fn quantization_cases() {
        let t = taylor(8, 18.0, 4);
        let fine = GainStateSet::linear(0.0, 10.0, 100_001).unwrap();
        let q = quantize_weights(t.amplitudes(), &fine, 0.5).unwrap();
        assert!(q.max_abs_residual_db < 1e-4);

        let states = GainStateSet::linear(8.1, 15.6, 16).unwrap();
        let q = quantize_weights(t.amplitudes(), &states, 0.5).unwrap();
        assert!(q.max_abs_residual_db <= 0.25 + 1e-12);

        let uq = quantize_weights(&[1.0; 8], &states, 0.5).unwrap();
        assert!(uq.state_index.iter().all(|&i| i == 15));

        let narrow = GainStateSet::new(vec![0.0, 1.0]).unwrap();
        let p = planar_taper(&t, &t);
        assert!(matches!(
            quantize_weights(p.as_slice(), &narrow, 0.5),
            Err(TaperError::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = taylor(8, 18.0, 4);
        let p = planar_taper(&t, &t);
        let back = PlanarWeights::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back, p);
    }
}
