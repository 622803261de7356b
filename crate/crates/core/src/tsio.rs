//! Touchstone v1 input/output, measured-metric extraction and two-tone fits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netcore::{y_matrix_to_s, z_matrix_to_s, Mat2, C64};

/// 10·log10(2): the half-power drop used for bandwidth.
pub const HALF_POWER_DB: f64 = 3.010_299_956_639_812;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TsError {
    #[error("line {line}: malformed option line at '{token}'")]
    MalformedOptionLine { line: usize, token: String },
    #[error("line {line}: frequency '{token}' does not increase")]
    NonMonotonicFrequency { line: usize, token: String },
    #[error("line {line}: expected {expected} values, found {found} near '{token}'")]
    RowArityError { line: usize, token: String, expected: usize, found: usize },
    #[error("line {line}: bad number '{token}'")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: Touchstone keyword '{keyword}' (version 2 files are not supported)")]
    UnsupportedVersion { line: usize, keyword: String },
    #[error("no data rows")]
    Empty,
    #[error("dataset is not a two-port")]
    NotTwoPort,
    #[error("reference resistance must be positive")]
    BadReference,
    #[error("parameter conversion is singular at {0} Hz")]
    Singular(f64),
    #[error("{0}")]
    Csv(String),
    #[error("two-tone sweep: {0}")]
    BadSweep(String),
    #[error("no small-signal region of at least 3 points")]
    NoLinearRegion,
    #[error("fundamental never compresses by 1 dB")]
    NoCompressionObserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreqUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FreqUnit {
    pub fn exponent(self) -> i32 {
        match self {
            FreqUnit::Hz => 0,
            FreqUnit::KHz => 3,
            FreqUnit::MHz => 6,
            FreqUnit::GHz => 9,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            FreqUnit::Hz => "Hz",
            FreqUnit::KHz => "kHz",
            FreqUnit::MHz => "MHz",
            FreqUnit::GHz => "GHz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parameter {
    S,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    MA,
    DB,
    RI,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::MA => "MA",
            DataFormat::DB => "DB",
            DataFormat::RI => "RI",
        }
    }

    /// Complex value of a stored pair.
    pub fn to_complex(self, pair: [f64; 2]) -> C64 {
        match self {
            DataFormat::MA => C64::from_polar(pair[0], pair[1].to_radians()),
            DataFormat::DB => C64::from_polar(10f64.powf(pair[0] / 20.0), pair[1].to_radians()),
            DataFormat::RI => C64::new(pair[0], pair[1]),
        }
    }

    /// Stored pair for a complex value.
    pub fn from_complex(self, z: C64) -> [f64; 2] {
        match self {
            DataFormat::MA => [z.norm(), z.arg().to_degrees()],
            DataFormat::DB => [20.0 * z.norm().log10(), z.arg().to_degrees()],
            DataFormat::RI => [z.re, z.im],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionLine {
    pub unit: FreqUnit,
    pub parameter: Parameter,
    pub format: DataFormat,
    pub resistance: f64,
    /// The line as it appeared in the file, if any.
    pub raw: Option<String>,
}

impl Default for OptionLine {
    fn default() -> Self {
        Self { unit: FreqUnit::GHz, parameter: Parameter::S, format: DataFormat::MA, resistance: 50.0, raw: None }
    }
}

impl OptionLine {
    pub fn new(unit: FreqUnit, parameter: Parameter, format: DataFormat, resistance: f64) -> Self {
        Self { unit, parameter, format, resistance, raw: None }
    }

    pub fn render(&self) -> String {
        match &self.raw {
            Some(r) => r.clone(),
            None => format!(
                "# {} {:?} {} R {}",
                self.unit.keyword(),
                self.parameter,
                self.format.keyword(),
                self.resistance
            ),
        }
    }

    fn parse(line: &str, line_no: usize) -> Result<Self, TsError> {
        let mut opt = OptionLine { raw: Some(line.to_string()), ..OptionLine::default() };
        let body = line.trim_start().trim_start_matches('#');
        let mut toks = body.split_whitespace();
        let bad = |t: &str| TsError::MalformedOptionLine { line: line_no, token: t.to_string() };
        while let Some(t) = toks.next() {
            match t.to_ascii_uppercase().as_str() {
                "HZ" => opt.unit = FreqUnit::Hz,
                "KHZ" => opt.unit = FreqUnit::KHz,
                "MHZ" => opt.unit = FreqUnit::MHz,
                "GHZ" => opt.unit = FreqUnit::GHz,
                "S" => opt.parameter = Parameter::S,
                "Y" => opt.parameter = Parameter::Y,
                "Z" => opt.parameter = Parameter::Z,
                "MA" => opt.format = DataFormat::MA,
                "DB" => opt.format = DataFormat::DB,
                "RI" => opt.format = DataFormat::RI,
                "R" => {
                    let v = toks.next().ok_or_else(|| bad(t))?;
                    let r: f64 = v.parse().map_err(|_| bad(v))?;
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(bad(v));
                    }
                    opt.resistance = r;
                }
                _ => return Err(bad(t)),
            }
        }
        Ok(opt)
    }
}

/// Parsed Touchstone v1 file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchstoneDataset {
    pub options: OptionLine,
    pub ports: usize,
    pub freqs_hz: Vec<f64>,
    /// Stored pairs per row in file order (S11 S21 S12 S22 for two ports).
    pub rows: Vec<Vec<[f64; 2]>>,
    /// Comment text following each '!', verbatim.
    pub comments: Vec<String>,
}

/// Scales a decimal token by a power of ten through its exponent so that
/// equal quantities written in different units parse to the same double.
fn scale_decimal(token: &str, exp: i32) -> Option<f64> {
    let (mantissa, e) = match token.find(['e', 'E']) {
        Some(i) => (&token[..i], token[i + 1..].parse::<i32>().ok()?),
        None => (token, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", e + exp).parse().ok()
}

pub fn parse_touchstone(text: &str) -> Result<TouchstoneDataset, TsError> {
    let mut options: Option<OptionLine> = None;
    let mut comments = Vec::new();
    let mut freqs: Vec<f64> = Vec::new();
    let mut rows = Vec::new();
    let mut ports = 0;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (data, comment) = match raw_line.find('!') {
            Some(i) => (&raw_line[..i], Some(&raw_line[i + 1..])),
            None => (raw_line, None),
        };
        if let Some(c) = comment {
            comments.push(c.to_string());
        }
        let data = data.trim();
        if data.is_empty() {
            continue;
        }
        if data.starts_with('[') {
            let keyword = data.split(']').next().unwrap_or(data).to_string() + "]";
            return Err(TsError::UnsupportedVersion { line: line_no, keyword });
        }
        if data.starts_with('#') {
            // Only the first option line counts.
            if options.is_none() {
                options = Some(OptionLine::parse(data, line_no)?);
            }
            continue;
        }
        let opt = options.get_or_insert_with(OptionLine::default);
        let toks: Vec<&str> = data.split_whitespace().collect();
        let expected = match ports {
            0 => match toks.len() {
                3 => {
                    ports = 1;
                    3
                }
                9 => {
                    ports = 2;
                    9
                }
                n => {
                    return Err(TsError::RowArityError {
                        line: line_no,
                        token: toks[n - 1].to_string(),
                        expected: 9,
                        found: n,
                    })
                }
            },
            p => 1 + 2 * p * p,
        };
        if toks.len() != expected {
            return Err(TsError::RowArityError {
                line: line_no,
                token: toks.last().copied().unwrap_or_default().to_string(),
                expected,
                found: toks.len(),
            });
        }
        let f = scale_decimal(toks[0], opt.unit.exponent())
            .filter(|f| f.is_finite())
            .ok_or_else(|| TsError::BadNumber { line: line_no, token: toks[0].to_string() })?;
        if freqs.last().is_some_and(|&p| !(f > p)) || f < 0.0 {
            return Err(TsError::NonMonotonicFrequency { line: line_no, token: toks[0].to_string() });
        }
        let mut vals = Vec::with_capacity(expected - 1);
        for t in &toks[1..] {
            let v: f64 = t
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| TsError::BadNumber { line: line_no, token: t.to_string() })?;
            vals.push(v);
        }
        freqs.push(f);
        rows.push(vals.chunks(2).map(|c| [c[0], c[1]]).collect());
    }
    if rows.is_empty() {
        return Err(TsError::Empty);
    }
    Ok(TouchstoneDataset { options: options.unwrap_or_default(), ports, freqs_hz: freqs, rows, comments })
}

/// Nine significant digits.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.8e}")
    }
}

pub fn write_touchstone(ds: &TouchstoneDataset) -> String {
    let mut out = String::new();
    for c in &ds.comments {
        let _ = writeln!(out, "!{c}");
    }
    let _ = writeln!(out, "{}", ds.options.render());
    let scale = 10f64.powi(ds.options.unit.exponent());
    for (f, row) in ds.freqs_hz.iter().zip(&ds.rows) {
        let mut line = num(f / scale);
        for p in row {
            line.push(' ');
            line.push_str(&num(p[0]));
            line.push(' ');
            line.push_str(&num(p[1]));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

impl TouchstoneDataset {
    /// Builds a two-port dataset from scattering matrices.
    pub fn from_s(options: OptionLine, freqs_hz: Vec<f64>, s: &[Mat2]) -> Self {
        let fmt = options.format;
        let rows = s
            .iter()
            .map(|m| [m.get(0, 0), m.get(1, 0), m.get(0, 1), m.get(1, 1)].iter().map(|&z| fmt.from_complex(z)).collect())
            .collect();
        Self { options: OptionLine { parameter: Parameter::S, ..options }, ports: 2, freqs_hz, rows, comments: Vec::new() }
    }

    /// Two-port scattering matrices referenced to the file's resistance.
    pub fn s_matrices(&self) -> Result<Vec<Mat2>, TsError> {
        if self.ports != 2 {
            return Err(TsError::NotTwoPort);
        }
        let r = self.options.resistance;
        if !(r > 0.0) {
            return Err(TsError::BadReference);
        }
        let fmt = self.options.format;
        self.rows
            .iter()
            .zip(&self.freqs_hz)
            .map(|(row, &f)| {
                let v: Vec<C64> = row.iter().map(|&p| fmt.to_complex(p)).collect();
                let m = Mat2::new(v[0], v[2], v[1], v[3]);
                // Y and Z data are normalized to the reference resistance.
                match self.options.parameter {
                    Parameter::S => Some(m),
                    Parameter::Z => z_matrix_to_s(&(m * Mat2::scalar(C64::new(r, 0.0))), r),
                    Parameter::Y => y_matrix_to_s(&(m * Mat2::scalar(C64::new(1.0 / r, 0.0))), r),
                }
                .ok_or(TsError::Singular(f))
            })
            .collect()
    }
}

/// Noise figure samples from the sidecar CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfTable {
    pub freqs_hz: Vec<f64>,
    pub nf_db: Vec<f64>,
}

#[derive(Deserialize)]
struct NfRow {
    freq_hz: f64,
    nf_db: f64,
}

/// Parses `freq_hz,nf_db` CSV.
pub fn parse_nf_csv(text: &str) -> Result<NfTable, TsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut t = NfTable { freqs_hz: Vec::new(), nf_db: Vec::new() };
    for r in rdr.deserialize::<NfRow>() {
        let r = r.map_err(|e| TsError::Csv(e.to_string()))?;
        if t.freqs_hz.last().is_some_and(|&p| !(r.freq_hz > p)) {
            return Err(TsError::Csv(format!("NF frequency {} does not increase", r.freq_hz)));
        }
        t.freqs_hz.push(r.freq_hz);
        t.nf_db.push(r.nf_db);
    }
    if t.freqs_hz.is_empty() {
        return Err(TsError::Empty);
    }
    Ok(t)
}

impl NfTable {
    /// Noise figure on `grid`: exact where frequencies coincide, otherwise
    /// linear interpolation. The flag reports whether interpolation was used.
    /// Points outside the table are dropped.
    pub fn align(&self, grid: &[f64]) -> (Vec<(f64, f64)>, bool) {
        let mut interpolated = false;
        let mut out = Vec::new();
        for &f in grid {
            match self.freqs_hz.binary_search_by(|p| p.total_cmp(&f)) {
                Ok(i) => out.push((f, self.nf_db[i])),
                Err(i) if i > 0 && i < self.freqs_hz.len() => {
                    interpolated = true;
                    let (f0, f1) = (self.freqs_hz[i - 1], self.freqs_hz[i]);
                    let t = (f - f0) / (f1 - f0);
                    out.push((f, self.nf_db[i - 1] + t * (self.nf_db[i] - self.nf_db[i - 1])));
                }
                Err(_) => {}
            }
        }
        (out, interpolated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredMetrics {
    pub peak_gain_db: f64,
    pub f_c_hz: f64,
    pub bw3db_hz: f64,
    pub lower_3db_hz: Option<f64>,
    pub upper_3db_hz: Option<f64>,
    /// Peak on the first or last sample; bandwidth is then one-sided.
    pub band_edge_peak: bool,
    pub min_nf_db: Option<f64>,
    pub min_nf_freq_hz: Option<f64>,
    pub nf_interpolated: bool,
    pub s12_max_db: f64,
}

/// Vertex of the parabola through three points.
fn parabola_peak(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if !(a < 0.0) {
        return None;
    }
    // Slope at x1 from the divided differences.
    let b = d1 + a * (x[1] - x[0]);
    let dx = -b / (2.0 * a);
    let xv = x[1] + dx;
    if !(xv >= x[0] && xv <= x[2]) {
        return None;
    }
    Some((xv, y[1] + b * dx + a * dx * dx))
}

pub fn extract_metrics(ds: &TouchstoneDataset, nf: Option<&NfTable>) -> Result<MeasuredMetrics, TsError> {
    let s = ds.s_matrices()?;
    let f = &ds.freqs_hz;
    let g: Vec<f64> = s.iter().map(|m| 20.0 * m.get(1, 0).norm().log10()).collect();
    let s12_max_db = s.iter().map(|m| 20.0 * m.get(0, 1).norm().log10()).fold(f64::NEG_INFINITY, f64::max);
    let n = g.len();
    let k = (0..n).fold(0, |b, i| if g[i] > g[b] { i } else { b });
    let band_edge_peak = k == 0 || k == n - 1;
    let (f_c_hz, peak_gain_db) = if band_edge_peak {
        (f[k], g[k])
    } else {
        parabola_peak([f[k - 1], f[k], f[k + 1]], [g[k - 1], g[k], g[k + 1]]).unwrap_or((f[k], g[k]))
    };
    let level = peak_gain_db - HALF_POWER_DB;
    let cross = |i: usize, j: usize| f[i] + (level - g[i]) * (f[j] - f[i]) / (g[j] - g[i]);
    let lower_3db_hz = (0..k).rev().find(|&i| g[i] < level).map(|i| cross(i, i + 1));
    let upper_3db_hz = (k + 1..n).find(|&i| g[i] < level).map(|i| cross(i - 1, i));
    let lo = lower_3db_hz.unwrap_or(f[0]);
    let hi = upper_3db_hz.unwrap_or(f[n - 1]);
    let (mut min_nf_db, mut min_nf_freq_hz, mut nf_interpolated) = (None, None, false);
    if let Some(t) = nf {
        let (pts, interp) = t.align(f);
        nf_interpolated = interp;
        if let Some(&(fm, v)) = pts.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
            min_nf_db = Some(v);
            min_nf_freq_hz = Some(fm);
        }
    }
    Ok(MeasuredMetrics {
        peak_gain_db,
        f_c_hz,
        bw3db_hz: hi - lo,
        lower_3db_hz,
        upper_3db_hz,
        band_edge_peak,
        min_nf_db,
        min_nf_freq_hz,
        nf_interpolated,
        s12_max_db,
    })
}

/// Swept two-tone measurement; powers are per tone, in dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoToneSweep {
    pub f1_hz: f64,
    pub f2_hz: f64,
    pub pin_dbm: Vec<f64>,
    pub pfund_dbm: Vec<f64>,
    pub pim3_dbm: Vec<f64>,
}

impl TwoToneSweep {
    pub fn validate(&self) -> Result<(), TsError> {
        let bad = |m: &str| Err(TsError::BadSweep(m.to_string()));
        if !(self.f2_hz > self.f1_hz && self.f1_hz > 0.0) {
            return bad("f2 must exceed f1 > 0");
        }
        let n = self.pin_dbm.len();
        if n != self.pfund_dbm.len() || n != self.pim3_dbm.len() {
            return bad("columns differ in length");
        }
        if n < 4 {
            return bad("at least 4 rows are required");
        }
        if !self.pin_dbm.windows(2).all(|w| w[1] > w[0]) {
            return bad("input power must increase strictly");
        }
        if self.pin_dbm.iter().chain(&self.pfund_dbm).any(|v| !v.is_finite()) {
            return bad("input and fundamental powers must be finite");
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# f1={} f2={}\npin_dbm,pfund_dbm,pim3_dbm\n", self.f1_hz, self.f2_hz);
        for i in 0..self.pin_dbm.len() {
            let _ = writeln!(s, "{},{},{}", self.pin_dbm[i], self.pfund_dbm[i], self.pim3_dbm[i]);
        }
        s
    }
}

#[derive(Deserialize)]
struct ToneRow {
    pin_dbm: f64,
    pfund_dbm: f64,
    pim3_dbm: String,
}

/// Parses the two-tone CSV: `# f1=<Hz> f2=<Hz>` followed by
/// `pin_dbm,pfund_dbm,pim3_dbm`. IM3 cells may be `-inf` or empty.
pub fn parse_two_tone_csv(text: &str) -> Result<TwoToneSweep, TsError> {
    let first = text.lines().next().unwrap_or_default();
    let mut f1 = None;
    let mut f2 = None;
    for tok in first.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("f1=") {
            f1 = v.parse::<f64>().ok();
        } else if let Some(v) = tok.strip_prefix("f2=") {
            f2 = v.parse::<f64>().ok();
        }
    }
    let (Some(f1_hz), Some(f2_hz)) = (f1, f2) else {
        return Err(TsError::Csv("first line must be '# f1=<Hz> f2=<Hz>'".into()));
    };
    let body = text.split_once('\n').map_or("", |x| x.1);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let mut sw = TwoToneSweep { f1_hz, f2_hz, pin_dbm: Vec::new(), pfund_dbm: Vec::new(), pim3_dbm: Vec::new() };
    for r in rdr.deserialize::<ToneRow>() {
        let r = r.map_err(|e| TsError::Csv(e.to_string()))?;
        let im3 = if r.pim3_dbm.is_empty() {
            f64::NEG_INFINITY
        } else {
            r.pim3_dbm.parse().map_err(|_| TsError::Csv(format!("bad IM3 value '{}'", r.pim3_dbm)))?
        };
        sw.pin_dbm.push(r.pin_dbm);
        sw.pfund_dbm.push(r.pfund_dbm);
        sw.pim3_dbm.push(im3);
    }
    sw.validate()?;
    Ok(sw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearityFit {
    pub iip3_dbm: Option<f64>,
    pub ip1db_dbm: Option<f64>,
    pub small_signal_gain_db: f64,
    /// Leading samples treated as small-signal.
    pub points_used: usize,
    pub fund_slope_free: f64,
    pub im3_slope_free: Option<f64>,
    pub fund_residual_rms_db: f64,
    pub im3_residual_rms_db: Option<f64>,
}

impl LinearityFit {
    pub fn require_ip1db(&self) -> Result<f64, TsError> {
        self.ip1db_dbm.ok_or(TsError::NoCompressionObserved)
    }
}

/// Tolerance on the fundamental slope inside the small-signal region.
pub const SMALL_SIGNAL_SLOPE_TOL: f64 = 0.1;

fn free_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope-constrained intercept fit: slope 1 for the fundamental and slope 3
/// for IM3 over the small-signal prefix.
pub fn fit_two_tone(sweep: &TwoToneSweep) -> Result<LinearityFit, TsError> {
    sweep.validate()?;
    let pin = &sweep.pin_dbm;
    let fund = &sweep.pfund_dbm;
    let mut m = 1;
    while m < pin.len() {
        let slope = (fund[m] - fund[m - 1]) / (pin[m] - pin[m - 1]);
        if (slope - 1.0).abs() > SMALL_SIGNAL_SLOPE_TOL {
            break;
        }
        m += 1;
    }
    if m < 3 {
        return Err(TsError::NoLinearRegion);
    }
    let gain: f64 = (0..m).map(|i| fund[i] - pin[i]).sum::<f64>() / m as f64;
    let fund_residual_rms_db =
        ((0..m).map(|i| (fund[i] - pin[i] - gain).powi(2)).sum::<f64>() / m as f64).sqrt();
    let fund_slope_free = free_slope(&pin[..m], &fund[..m]);

    let im3_idx: Vec<usize> = (0..m).filter(|&i| sweep.pim3_dbm[i].is_finite()).collect();
    let (mut iip3_dbm, mut im3_slope_free, mut im3_residual_rms_db) = (None, None, None);
    if im3_idx.len() >= 2 {
        let xs: Vec<f64> = im3_idx.iter().map(|&i| pin[i]).collect();
        let ys: Vec<f64> = im3_idx.iter().map(|&i| sweep.pim3_dbm[i]).collect();
        let slope = free_slope(&xs, &ys);
        let c3 = xs.iter().zip(&ys).map(|(x, y)| y - 3.0 * x).sum::<f64>() / xs.len() as f64;
        im3_slope_free = Some(slope);
        im3_residual_rms_db = Some(
            (xs.iter().zip(&ys).map(|(x, y)| (y - 3.0 * x - c3).powi(2)).sum::<f64>() / xs.len() as f64).sqrt(),
        );
        // A floor-limited trace is flat and carries no intercept.
        if slope >= 2.0 {
            iip3_dbm = Some((gain - c3) / 2.0);
        }
    }

    let dev: Vec<f64> = (0..pin.len()).map(|i| pin[i] + gain - fund[i]).collect();
    let ip1db_dbm = (1..pin.len()).find(|&i| dev[i] >= 1.0).map(|i| {
        let (d0, d1) = (dev[i - 1], dev[i]);
        if d1 == d0 {
            pin[i]
        } else {
            pin[i - 1] + (1.0 - d0) * (pin[i] - pin[i - 1]) / (d1 - d0)
        }
    });

    Ok(LinearityFit {
        iip3_dbm,
        ip1db_dbm,
        small_signal_gain_db: gain,
        points_used: m,
        fund_slope_free,
        im3_slope_free,
        fund_residual_rms_db,
        im3_residual_rms_db,
    })
}
