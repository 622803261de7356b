//! Receive-chain budgets and power benchmarking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netcore::{db_to_linear, linear_to_db};
use crate::taper::{quantize_weights, GainStateSet, PlanarWeights, Quantization, TaperError};

/// Gap between IIP3 and input 1 dB compression for a memoryless cubic,
/// −10·log10(1 − 10^(−1/20)) dB.
pub const CUBIC_P1DB_BACKOFF_DB: f64 = 9.636;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RxError {
    #[error("chain has no stages")]
    EmptyChain,
    #[error("stage '{0}' has no IIP3 for its selected state")]
    MissingIip3(String),
    #[error("stage '{stage}': {reason}")]
    InvalidState { stage: String, reason: String },
    #[error("benchmark table: {0}")]
    Table(String),
    #[error("work '{0}' not found in benchmark table")]
    UnknownWork(String),
    #[error(transparent)]
    Taper(#[from] TaperError),
}

/// One operating point of a variable-gain stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainState {
    pub label: String,
    pub gain_db: f64,
    pub nf_db: f64,
    #[serde(default)]
    pub ip1db_dbm: Option<f64>,
    #[serde(default)]
    pub iip3_dbm: Option<f64>,
    #[serde(default)]
    pub pc_mw: f64,
    #[serde(default)]
    pub control_voltage: Option<f64>,
}

impl GainState {
    pub fn new(label: &str, gain_db: f64, nf_db: f64, pc_mw: f64) -> Self {
        Self {
            label: label.to_string(),
            gain_db,
            nf_db,
            ip1db_dbm: None,
            iip3_dbm: None,
            pc_mw,
            control_voltage: None,
        }
    }

    pub fn with_iip3(mut self, iip3_dbm: f64) -> Self {
        self.iip3_dbm = Some(iip3_dbm);
        self
    }

    pub fn with_ip1db(mut self, ip1db_dbm: f64) -> Self {
        self.ip1db_dbm = Some(ip1db_dbm);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub name: String,
    pub states: Vec<GainState>,
    #[serde(default)]
    pub selected: usize,
}

impl StageSpec {
    pub fn single(name: &str, state: GainState) -> Self {
        Self { name: name.to_string(), states: vec![state], selected: 0 }
    }

    pub fn validate(&self) -> Result<(), RxError> {
        let bad = |reason: String| Err(RxError::InvalidState { stage: self.name.clone(), reason });
        if self.states.is_empty() {
            return bad("no gain states".into());
        }
        if self.selected >= self.states.len() {
            return bad(format!("selected state {} out of range", self.selected));
        }
        for s in &self.states {
            if !(s.pc_mw >= 0.0) {
                return bad(format!("state '{}' has negative power", s.label));
            }
            if !(s.gain_db.is_finite() && s.nf_db >= 0.0 && s.nf_db.is_finite()) {
                return bad(format!("state '{}' needs finite gain and non-negative NF", s.label));
            }
            if let (Some(p1), Some(ip3)) = (s.ip1db_dbm, s.iip3_dbm) {
                if !(p1 < ip3) {
                    return bad(format!("state '{}' has IP1dB not below IIP3", s.label));
                }
            }
        }
        Ok(())
    }

    pub fn active(&self) -> &GainState {
        &self.states[self.selected]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Iip3Combining {
    /// Input-referred intercepts add in amplitude (worst case).
    #[default]
    Coherent,
    /// Input-referred intercepts add in power.
    Incoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBudget {
    pub total_gain_db: f64,
    pub total_nf_db: f64,
    pub total_iip3_dbm: Option<f64>,
    pub total_ip1db_dbm: Option<f64>,
    pub total_pc_mw: f64,
}

impl ChainBudget {
    /// Aligned two-column text report.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2}"));
        let rows = [
            ("total gain [dB]", format!("{:.2}", self.total_gain_db)),
            ("total NF [dB]", format!("{:.2}", self.total_nf_db)),
            ("total IIP3 [dBm]", opt(self.total_iip3_dbm)),
            ("total IP1dB [dBm]", opt(self.total_ip1db_dbm)),
            ("total PC [mW]", format!("{:.3}", self.total_pc_mw)),
        ];
        rows.iter().map(|(k, v)| format!("{k:<20}{v:>10}\n")).collect()
    }
}

/// Chain document accepted by [`chain_budget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub stages: Vec<StageSpec>,
    #[serde(default)]
    pub combining: Iip3Combining,
}

fn validate_chain(stages: &[StageSpec]) -> Result<(), RxError> {
    if stages.is_empty() {
        return Err(RxError::EmptyChain);
    }
    stages.iter().try_for_each(StageSpec::validate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Friis {
    pub nf_db: f64,
    pub gain_db: f64,
}

/// F = F1 + Σ (Fi − 1) / (G1 ⋯ Gi−1), accumulated in linear units.
pub fn friis_cascade(stages: &[StageSpec]) -> Result<Friis, RxError> {
    validate_chain(stages)?;
    let mut f = 0.0;
    let mut g = 1.0;
    for (i, st) in stages.iter().enumerate() {
        let s = st.active();
        let fi = db_to_linear(s.nf_db);
        f += if i == 0 { fi } else { (fi - 1.0) / g };
        g *= db_to_linear(s.gain_db);
    }
    Ok(Friis { nf_db: linear_to_db(f), gain_db: linear_to_db(g) })
}

fn intercept_cascade(
    stages: &[StageSpec],
    combining: Iip3Combining,
    value: impl Fn(&StageSpec) -> Result<f64, RxError>,
) -> Result<f64, RxError> {
    validate_chain(stages)?;
    let mut acc = 0.0;
    let mut g = 1.0;
    for st in stages {
        let p = db_to_linear(value(st)?);
        let term = g / p;
        acc += match combining {
            Iip3Combining::Coherent => term,
            Iip3Combining::Incoherent => term * term,
        };
        g *= db_to_linear(st.active().gain_db);
    }
    let inv = match combining {
        Iip3Combining::Coherent => acc,
        Iip3Combining::Incoherent => acc.sqrt(),
    };
    Ok(-linear_to_db(inv))
}

/// Input-referred IIP3 of the chain in dBm.
pub fn iip3_cascade(stages: &[StageSpec], combining: Iip3Combining) -> Result<f64, RxError> {
    intercept_cascade(stages, combining, |st| st.active().iip3_dbm.ok_or_else(|| RxError::MissingIip3(st.name.clone())))
}

/// Input-referred 1 dB compression of the chain in dBm.
///
/// Uses the same reciprocal combination as the intercept, taking each stage's
/// own IP1dB or, when absent, its IIP3 backed off by the cubic rule.
pub fn ip1db_cascade(stages: &[StageSpec], combining: Iip3Combining) -> Result<f64, RxError> {
    intercept_cascade(stages, combining, |st| {
        let s = st.active();
        s.ip1db_dbm
            .or_else(|| s.iip3_dbm.map(p1db_from_iip3))
            .ok_or_else(|| RxError::MissingIip3(st.name.clone()))
    })
}

/// IP1dB of a memoryless cubic stage with the given IIP3.
pub fn p1db_from_iip3(iip3_dbm: f64) -> f64 {
    iip3_dbm - CUBIC_P1DB_BACKOFF_DB
}

/// Sum of the selected states' power consumption.
pub fn power_total(stages: &[StageSpec]) -> f64 {
    stages.iter().map(|s| s.active().pc_mw).sum()
}

/// Full budget for a chain; intercepts are `None` when any stage lacks data.
pub fn chain_budget(spec: &ChainSpec) -> Result<ChainBudget, RxError> {
    let friis = friis_cascade(&spec.stages)?;
    let total_iip3_dbm = match iip3_cascade(&spec.stages, spec.combining) {
        Ok(v) => Some(v),
        Err(RxError::MissingIip3(_)) => None,
        Err(e) => return Err(e),
    };
    let total_ip1db_dbm = ip1db_cascade(&spec.stages, spec.combining).ok();
    Ok(ChainBudget {
        total_gain_db: friis.gain_db,
        total_nf_db: friis.nf_db,
        total_iip3_dbm,
        total_ip1db_dbm,
        total_pc_mw: power_total(&spec.stages),
    })
}

/// One row of a published comparison table. Two rows per work are expected,
/// one for the high-gain and one for the low-gain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub work: String,
    pub state: String,
    pub peak_gain_db: Option<f64>,
    pub f_c_ghz: Option<f64>,
    pub bw3db_ghz: Option<f64>,
    pub min_nf_db: Option<f64>,
    pub ip1db_dbm: Option<f64>,
    pub s21_phase_var_deg: Option<f64>,
    pub pc_mw: Option<f64>,
}

/// Parses a comparison table.
///
/// Header: `work,state,peak_gain_db,f_c_ghz,bw3db_ghz,min_nf_db,ip1db_dbm,
/// s21_phase_var_deg,pc_mw`. Lines starting with `#` are comments. Empty
/// cells and `-` are missing values; a leading `>` or `<` on a bound is
/// dropped and the number kept.
pub fn parse_benchmark_csv(text: &str) -> Result<Vec<BenchmarkRecord>, RxError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| RxError::Table(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(i_work), Some(i_state)) = (col("work"), col("state")) else {
        return Err(RxError::Table("header must include 'work' and 'state'".into()));
    };
    let numeric = [
        "peak_gain_db",
        "f_c_ghz",
        "bw3db_ghz",
        "min_nf_db",
        "ip1db_dbm",
        "s21_phase_var_deg",
        "pc_mw",
    ]
    .map(col);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| RxError::Table(e.to_string()))?;
        let mut vals = [None; 7];
        for (k, idx) in numeric.iter().enumerate() {
            let Some(cell) = idx.and_then(|i| rec.get(i)) else { continue };
            let cell = cell.trim_start_matches(['>', '<']);
            if cell.is_empty() || cell == "-" {
                continue;
            }
            vals[k] = Some(
                cell.parse::<f64>()
                    .map_err(|_| RxError::Table(format!("record {}: bad number '{cell}'", line + 1)))?,
            );
        }
        out.push(BenchmarkRecord {
            work: rec.get(i_work).unwrap_or_default().to_string(),
            state: rec.get(i_state).unwrap_or_default().to_string(),
            peak_gain_db: vals[0],
            f_c_ghz: vals[1],
            bw3db_ghz: vals[2],
            min_nf_db: vals[3],
            ip1db_dbm: vals[4],
            s21_phase_var_deg: vals[5],
            pc_mw: vals[6],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub ours: String,
    pub theirs: String,
    /// Largest power over our states.
    pub ours_pc_mw: f64,
    /// Largest power over their states.
    pub theirs_max_pc_mw: f64,
    /// Smallest power over their states.
    pub theirs_min_pc_mw: f64,
    /// floor(their max / our max): high-gain state against high-gain state.
    pub units: u64,
    /// floor(their min / our max): the least favourable pairing.
    pub units_worst_case: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub comparisons: Vec<Comparison>,
}

impl BenchmarkReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:<10}{:<10}{:>12}{:>14}{:>8}{:>12}\n",
            "ours", "theirs", "ours [mW]", "theirs [mW]", "units", "worst case"
        );
        for c in &self.comparisons {
            s.push_str(&format!(
                "{:<10}{:<10}{:>12.2}{:>14.2}{:>8}{:>12}\n",
                c.ours, c.theirs, c.ours_pc_mw, c.theirs_max_pc_mw, c.units, c.units_worst_case
            ));
        }
        s
    }
}

/// Ratios are floored after a relative nudge so that exact integers survive
/// unit rescaling.
fn units(theirs: f64, ours: f64) -> u64 {
    (theirs / ours * (1.0 + 1e-12)).floor() as u64
}

/// Compares `ours` against every other work in the table.
pub fn benchmark_fom(records: &[BenchmarkRecord], ours: &str) -> Result<BenchmarkReport, RxError> {
    let pcs = |work: &str| -> Vec<f64> { records.iter().filter(|r| r.work == work).filter_map(|r| r.pc_mw).collect() };
    let ours_pc = pcs(ours);
    if !records.iter().any(|r| r.work == ours) {
        return Err(RxError::UnknownWork(ours.to_string()));
    }
    let ours_max = ours_pc.iter().cloned().fold(f64::NAN, f64::max);
    if !(ours_max > 0.0) {
        return Err(RxError::Table(format!("work '{ours}' has no positive power entry")));
    }
    let mut works: Vec<&str> = Vec::new();
    for r in records {
        if r.work != ours && !works.contains(&r.work.as_str()) {
            works.push(&r.work);
        }
    }
    let mut comparisons = Vec::new();
    for w in works {
        let p = pcs(w);
        if p.is_empty() {
            continue;
        }
        let max = p.iter().cloned().fold(f64::MIN, f64::max);
        let min = p.iter().cloned().fold(f64::MAX, f64::min);
        comparisons.push(Comparison {
            ours: ours.to_string(),
            theirs: w.to_string(),
            ours_pc_mw: ours_max,
            theirs_max_pc_mw: max,
            theirs_min_pc_mw: min,
            units: units(max, ours_max),
            units_worst_case: units(min, ours_max),
        });
    }
    Ok(BenchmarkReport { comparisons })
}

/// States with power interpolated linearly in dB-gain between two endpoints.
pub fn linear_pc_states(low: (f64, f64), high: (f64, f64), n: usize) -> Result<Vec<GainState>, RxError> {
    let set = GainStateSet::linear(low.0, high.0, n)?;
    let slope = if high.0 == low.0 { 0.0 } else { (high.1 - low.1) / (high.0 - low.0) };
    Ok(set
        .states()
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let pc = if i + 1 == n { high.1 } else { low.1 + slope * (g - low.0) };
            GainState::new(&format!("s{i}"), g, 0.0, pc)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaperBudget {
    /// Index into the stage's states, row-major over the array.
    pub state_index: Vec<usize>,
    pub quantization: Quantization,
    pub total_pc_mw: f64,
    /// Every element at the highest-gain state.
    pub all_max_pc_mw: f64,
    pub savings_mw: f64,
}

/// Assigns each array element a gain state that realizes the taper and sums
/// the resulting power.
pub fn taper_budget(weights: &PlanarWeights, stage: &StageSpec, tolerance_db: f64) -> Result<TaperBudget, RxError> {
    stage.validate()?;
    let mut order: Vec<usize> = (0..stage.states.len()).collect();
    order.sort_by(|&a, &b| stage.states[a].gain_db.total_cmp(&stage.states[b].gain_db));
    let gains: Vec<f64> = order.iter().map(|&i| stage.states[i].gain_db).collect();
    let set = GainStateSet::new(gains)?;
    let q = quantize_weights(weights.as_slice(), &set, tolerance_db)?;
    let state_index: Vec<usize> = q.state_index.iter().map(|&k| order[k]).collect();
    let total_pc_mw = state_index.iter().map(|&i| stage.states[i].pc_mw).sum();
    let top = &stage.states[*order.last().expect("non-empty")];
    let all_max_pc_mw = top.pc_mw * weights.as_slice().len() as f64;
    Ok(TaperBudget { state_index, quantization: q, total_pc_mw, all_max_pc_mw, savings_mw: all_max_pc_mw - total_pc_mw })
}
