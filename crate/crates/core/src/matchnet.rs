//! Lumped matching-network synthesis.
//!
//! Covers closed-form L-sections, the coupled-inductor two-port, the
//! two-capacitor input network built around a series-aiding coupled pair, and
//! the intermediate-impedance sweep used to trade match against noise.
//!
//! Input network topology (port on the left, amplifier input on the right):
//!
//! ```text
//!  50 Ω ──┬── Lp ──●── Ls ──┬── Z_AN
//!         C1       J        C3
//!         ⏚                 ⏚
//! ```
//!
//! Lp and Ls share node J and are wound series-aiding, so the pair behaves as
//! a single series inductance Lp + Ls + 2M. The intermediate impedance Z_IM is
//! the impedance looking from the T-equivalent centre toward the amplifier,
//! jω(Ls + M) + (Z_AN ∥ C3).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netcore::{
    gamma_from_z, linear_to_db, noise_figure_at_source, Abcd, FrequencyGrid, Immittance, NetError,
    NoiseSpec, TwoPortNetwork, C64,
};
use crate::nodal::{Circuit, NodalError};

/// Reflection magnitudes are reported no lower than this.
pub const REFLECTION_FLOOR_DB: f64 = -100.0;

/// Relative impedance distance treated as already matched.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Maximum |Γ_in| accepted from [`synthesize_imn`].
pub const IMN_TARGET_DB: f64 = -15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("impedance {0} must have positive real part")]
    InvalidImpedance(C64),
    #[error("frequency must be positive and finite, got {0} Hz")]
    BadFrequency(f64),
    #[error("load and target are already matched")]
    AlreadyMatched,
    #[error("no real L-section exists for these impedances")]
    NoRealSolution,
    #[error("invalid coupled inductor: {0}")]
    InvalidTransformer(String),
    #[error("no positive capacitor pair reaches {target_db} dB (best {best_db:.2} dB)")]
    NoFeasibleCapacitors { best_db: f64, target_db: f64 },
    #[error("no grid point yields realizable matching elements")]
    EmptyFeasibleSet,
    #[error("invalid sweep grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Nodal(#[from] NodalError),
}

fn omega(f: f64) -> f64 {
    2.0 * PI * f
}

fn check_freq(f: f64) -> Result<(), MatchError> {
    if f > 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(MatchError::BadFrequency(f))
    }
}

fn check_positive_real(z: C64) -> Result<(), MatchError> {
    if z.re > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(MatchError::InvalidImpedance(z))
    }
}

/// Quality factors applied to lumped elements; `f64::INFINITY` is lossless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementQ {
    pub inductor: f64,
    pub capacitor: f64,
}

impl ElementQ {
    pub const LOSSLESS: ElementQ = ElementQ { inductor: f64::INFINITY, capacitor: f64::INFINITY };
}

impl Default for ElementQ {
    fn default() -> Self {
        Self { inductor: 15.0, capacitor: 50.0 }
    }
}

/// A lumped reactive element with frequency-independent Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Inductor { henries: f64, q: f64 },
    Capacitor { farads: f64, q: f64 },
    /// Zero reactance in series or zero susceptance in shunt.
    Absent,
}

impl Element {
    fn from_reactance(x: f64, w: f64) -> Self {
        if x == 0.0 {
            Element::Absent
        } else if x > 0.0 {
            Element::Inductor { henries: x / w, q: f64::INFINITY }
        } else {
            Element::Capacitor { farads: -1.0 / (w * x), q: f64::INFINITY }
        }
    }

    fn from_susceptance(b: f64, w: f64) -> Self {
        if b == 0.0 {
            Element::Absent
        } else if b > 0.0 {
            Element::Capacitor { farads: b / w, q: f64::INFINITY }
        } else {
            Element::Inductor { henries: -1.0 / (w * b), q: f64::INFINITY }
        }
    }

    pub fn with_q(self, q: ElementQ) -> Self {
        match self {
            Element::Inductor { henries, .. } => Element::Inductor { henries, q: q.inductor },
            Element::Capacitor { farads, .. } => Element::Capacitor { farads, q: q.capacitor },
            Element::Absent => Element::Absent,
        }
    }

    /// Series impedance at `f`; `None` for [`Element::Absent`].
    pub fn impedance(&self, f: f64) -> Option<C64> {
        let w = omega(f);
        match *self {
            Element::Inductor { henries, q } => {
                let x = w * henries;
                Some(C64::new(x / q, x))
            }
            Element::Capacitor { farads, q } => {
                let x = 1.0 / (w * farads);
                Some(C64::new(x / q, -x))
            }
            Element::Absent => None,
        }
    }

    fn series_abcd(&self, f: f64) -> Abcd {
        self.impedance(f).map_or_else(Abcd::identity, Abcd::series)
    }

    fn shunt_abcd(&self, f: f64) -> Abcd {
        self.impedance(f).map_or_else(Abcd::identity, |z| Abcd::shunt(z.inv()))
    }

    fn within(&self, bounds: &ElementBounds) -> bool {
        match *self {
            Element::Inductor { henries, .. } => (bounds.l_min..=bounds.l_max).contains(&henries),
            Element::Capacitor { farads, .. } => (bounds.c_min..=bounds.c_max).contains(&farads),
            Element::Absent => true,
        }
    }
}

/// Which element sits directly across the load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LTopology {
    /// Shunt element across the load, series element toward the target side.
    ShuntAtLoad,
    /// Series element in line with the load, shunt element across the target side.
    SeriesAtLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LSection {
    pub topology: LTopology,
    pub series: Element,
    pub shunt: Element,
}

impl LSection {
    pub const THROUGH: LSection =
        LSection { topology: LTopology::ShuntAtLoad, series: Element::Absent, shunt: Element::Absent };

    /// Chain matrix with port 1 on the target side and port 2 on the load side.
    pub fn abcd(&self, f: f64) -> Abcd {
        match self.topology {
            LTopology::ShuntAtLoad => self.series.series_abcd(f).then(&self.shunt.shunt_abcd(f)),
            LTopology::SeriesAtLoad => self.shunt.shunt_abcd(f).then(&self.series.series_abcd(f)),
        }
    }

    /// Same network with the ports exchanged (load side becomes port 1).
    pub fn abcd_reversed(&self, f: f64) -> Abcd {
        reverse(&self.abcd(f))
    }

    pub fn with_q(self, q: ElementQ) -> Self {
        Self { series: self.series.with_q(q), shunt: self.shunt.with_q(q), ..self }
    }

    /// Impedance seen at the target side when terminated in `z_load`.
    pub fn input_impedance(&self, z_load: C64, f: f64) -> C64 {
        self.abcd(f).input_impedance(z_load)
    }

    fn within(&self, bounds: &ElementBounds) -> bool {
        self.series.within(bounds) && self.shunt.within(bounds)
    }
}

/// Port exchange for a reciprocal chain matrix.
fn reverse(m: &Abcd) -> Abcd {
    Abcd { a: m.d, b: m.b, c: m.c, d: m.a }
}

/// Closed-form L-sections that, terminated in `z_load`, present `z_target`.
///
/// Returns every real solution of both topologies (shunt-at-load first). With
/// real impedances only one topology applies and it has two solutions.
pub fn l_match(z_load: Immittance, z_target: Immittance, f: f64) -> Result<Vec<LSection>, MatchError> {
    check_freq(f)?;
    let zl = z_load.impedance();
    let zt = z_target.impedance();
    for z in [zl, zt] {
        if z.re == 0.0 && z.im.is_finite() {
            return Err(MatchError::NoRealSolution);
        }
        check_positive_real(z)?;
    }
    if (zl - zt).norm() <= MATCH_TOLERANCE * zt.norm() {
        return Err(MatchError::AlreadyMatched);
    }
    let w = omega(f);
    let mut out = Vec::new();

    // Shunt susceptance b across the load, then series reactance x.
    let yl = zl.inv();
    let rad = yl.re / zt.re - yl.re * yl.re;
    if rad >= 0.0 {
        for sign in [1.0, -1.0] {
            let b_tot = sign * rad.sqrt();
            let b = b_tot - yl.im;
            let z1 = C64::new(yl.re, b_tot).inv();
            let x = zt.im - z1.im;
            out.push(LSection {
                topology: LTopology::ShuntAtLoad,
                series: Element::from_reactance(x, w),
                shunt: Element::from_susceptance(b, w),
            });
            if rad == 0.0 {
                break;
            }
        }
    }

    // Series reactance x in line with the load, then shunt susceptance b.
    let yt = zt.inv();
    let rad = zl.re / yt.re - zl.re * zl.re;
    if rad >= 0.0 {
        for sign in [1.0, -1.0] {
            let x_tot = sign * rad.sqrt();
            let x = x_tot - zl.im;
            let y1 = C64::new(zl.re, x_tot).inv();
            let b = yt.im - y1.im;
            out.push(LSection {
                topology: LTopology::SeriesAtLoad,
                series: Element::from_reactance(x, w),
                shunt: Element::from_susceptance(b, w),
            });
            if rad == 0.0 {
                break;
            }
        }
    }

    if out.is_empty() {
        return Err(MatchError::NoRealSolution);
    }
    Ok(out)
}

/// Magnetically coupled inductor pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledInductor {
    pub l_p: f64,
    pub l_s: f64,
    pub k: f64,
    pub q_p: f64,
    pub q_s: f64,
    /// Frequency at which the series resistances are fixed from Q.
    pub f_ref: f64,
}

impl CoupledInductor {
    pub fn lossless(l_p: f64, l_s: f64, k: f64, f_ref: f64) -> Result<Self, MatchError> {
        let t = Self { l_p, l_s, k, q_p: f64::INFINITY, q_s: f64::INFINITY, f_ref };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        let bad = |m: &str| Err(MatchError::InvalidTransformer(m.to_string()));
        if !(self.l_p > 0.0 && self.l_p.is_finite() && self.l_s > 0.0 && self.l_s.is_finite()) {
            return bad("inductances must be positive");
        }
        if !(self.k > 0.0 && self.k < 1.0) {
            return bad("coupling factor must lie in (0, 1)");
        }
        if !(self.q_p > 0.0 && self.q_s > 0.0) {
            return bad("quality factors must be positive");
        }
        if !(self.f_ref > 0.0 && self.f_ref.is_finite()) {
            return bad("reference frequency must be positive");
        }
        Ok(())
    }

    pub fn mutual(&self) -> f64 {
        self.k * (self.l_p * self.l_s).sqrt()
    }

    pub fn r_p(&self) -> f64 {
        omega(self.f_ref) * self.l_p / self.q_p
    }

    pub fn r_s(&self) -> f64 {
        omega(self.f_ref) * self.l_s / self.q_s
    }

    /// Branch impedances (primary, secondary, mutual) at `f`.
    pub fn branch_impedances(&self, f: f64) -> (C64, C64, C64) {
        let w = omega(f);
        (
            C64::new(self.r_p(), w * self.l_p),
            C64::new(self.r_s(), w * self.l_s),
            C64::new(0.0, w * self.mutual()),
        )
    }

    /// Series-aiding connection through a shared node: one series impedance.
    pub fn series_aiding_impedance(&self, f: f64) -> C64 {
        let (zp, zs, zm) = self.branch_impedances(f);
        zp + zs + 2.0 * zm
    }
}

/// Two-port of the coupled pair with both windings referenced to ground.
pub fn coupled_inductor_twoport(
    t: &CoupledInductor,
    grid: &FrequencyGrid,
    z_ref: f64,
) -> Result<TwoPortNetwork, MatchError> {
    t.validate()?;
    let s = grid
        .points()
        .iter()
        .map(|&f| {
            let (zp, zs, zm) = t.branch_impedances(f);
            crate::netcore::z_matrix_to_s(&crate::netcore::Mat2::new(zp, zm, zm, zs), z_ref)
                .ok_or(MatchError::Net(NetError::SingularConversion { freq_hz: f }))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TwoPortNetwork::new_passive(grid.clone(), s, z_ref)?)
}

/// Input matching network built around a coupled inductor pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingNetworkDesign {
    pub c1: f64,
    pub c3: f64,
    pub transformer: CoupledInductor,
    /// Intermediate impedance at f0 (lossless evaluation).
    pub z_im: C64,
    pub f0: f64,
    pub z_an: C64,
    /// |Γ_in| at f0 in dB with lossless elements.
    pub gamma_in_db: f64,
    /// Capacitor Q used when the design is evaluated with losses.
    pub capacitor_q: f64,
    pub z_ref: f64,
}

impl MatchingNetworkDesign {
    /// Chain matrix from the 50 Ω port to the amplifier node.
    pub fn abcd(&self, f: f64) -> Abcd {
        let c = |farads: f64| Element::Capacitor { farads, q: self.capacitor_q };
        c(self.c1)
            .shunt_abcd(f)
            .then(&Abcd::series(self.transformer.series_aiding_impedance(f)))
            .then(&c(self.c3).shunt_abcd(f))
    }

    pub fn input_impedance(&self, f: f64) -> C64 {
        self.abcd(f).input_impedance(self.z_an)
    }

    pub fn gamma_in(&self, f: f64) -> C64 {
        gamma_from_z(self.input_impedance(f), self.z_ref)
    }

    pub fn with_losses(self, capacitor_q: f64, q_p: f64, q_s: f64) -> Self {
        Self { capacitor_q, transformer: CoupledInductor { q_p, q_s, ..self.transformer }, ..self }
    }

    /// Assembles the same network element by element for nodal analysis.
    /// Returns the circuit and the port node.
    pub fn nodal_circuit(&self, f: f64) -> Result<(Circuit, usize), MatchError> {
        let w = omega(f);
        let mut ckt = Circuit::new();
        let port = ckt.node();
        let j = ckt.node();
        let an = ckt.node();
        let cap = |farads: f64| {
            let x = 1.0 / (w * farads);
            C64::new(x / self.capacitor_q, -x)
        };
        ckt.impedance(port, 0, cap(self.c1))?;
        let (zp, zs, zm) = self.transformer.branch_impedances(f);
        ckt.coupled((port, j), (j, an), zp, zs, zm)?;
        ckt.impedance(an, 0, cap(self.c3))?;
        ckt.impedance(an, 0, self.z_an)?;
        Ok((ckt, port))
    }
}

/// Impedance looking from the transformer's T-centre toward the amplifier.
fn intermediate_impedance(t: &CoupledInductor, c3: f64, z_an: C64, f: f64) -> C64 {
    let w = omega(f);
    let (_, zs, zm) = t.branch_impedances(f);
    let y_an = z_an.inv() + C64::new(0.0, w * c3);
    zs + zm + y_an.inv()
}

fn reflection_db(g: C64) -> f64 {
    (20.0 * g.norm().log10()).max(REFLECTION_FLOOR_DB)
}

/// Deterministic starting capacitances for the root search.
pub const IMN_START_CAPS: [f64; 4] = [1e-14, 1e-13, 1e-12, 1e-11];

/// Solves for C1, C3 so that the lossless network terminated in `z_an`
/// presents 50 Ω at `f0`.
pub fn synthesize_imn(z_an: Immittance, t: &CoupledInductor, f0: f64) -> Result<MatchingNetworkDesign, MatchError> {
    check_freq(f0)?;
    let z_an = z_an.impedance();
    check_positive_real(z_an)?;
    t.validate()?;
    let lossless = CoupledInductor { q_p: f64::INFINITY, q_s: f64::INFINITY, ..*t };
    let z_ref = 50.0;
    let mk = |c1: f64, c3: f64| MatchingNetworkDesign {
        c1,
        c3,
        transformer: lossless,
        z_im: C64::new(0.0, 0.0),
        f0,
        z_an,
        gamma_in_db: 0.0,
        capacitor_q: f64::INFINITY,
        z_ref,
    };
    let residual = |u: [f64; 2]| -> [f64; 2] {
        let g = mk(u[0].exp(), u[1].exp()).gamma_in(f0);
        [g.re, g.im]
    };

    let mut best: Option<([f64; 2], f64)> = None;
    for &s1 in &IMN_START_CAPS {
        for &s3 in &IMN_START_CAPS {
            let (u, norm) = levenberg_marquardt(&residual, [s1.ln(), s3.ln()]);
            if norm.is_finite() && best.is_none_or(|(_, b)| norm < b) {
                best = Some((u, norm));
            }
        }
    }
    let (u, _) = best.expect("at least one start evaluated");
    let (c1, c3) = (u[0].exp(), u[1].exp());
    let mut design = mk(c1, c3);
    design.gamma_in_db = reflection_db(design.gamma_in(f0));
    if !(design.gamma_in_db <= IMN_TARGET_DB) {
        return Err(MatchError::NoFeasibleCapacitors { best_db: design.gamma_in_db, target_db: IMN_TARGET_DB });
    }
    design.z_im = intermediate_impedance(&lossless, c3, z_an, f0);
    design.transformer = *t;
    Ok(design)
}

/// Damped Gauss-Newton on a 2-vector residual with a central-difference
/// Jacobian. Returns the final point and residual norm.
fn levenberg_marquardt(r: &impl Fn([f64; 2]) -> [f64; 2], mut u: [f64; 2]) -> ([f64; 2], f64) {
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    let mut f = r(u);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let n0 = norm(f);
        if !n0.is_finite() || n0 < 1e-13 {
            break;
        }
        let h = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let mut up = u;
            let mut dn = u;
            up[k] += h;
            dn[k] -= h;
            let (fp, fm) = (r(up), r(dn));
            for i in 0..2 {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        // Normal equations (JᵀJ + λ diag) δ = -Jᵀf.
        let jtj = |a: usize, b: usize| jac[0][a] * jac[0][b] + jac[1][a] * jac[1][b];
        let g = [-(jac[0][0] * f[0] + jac[1][0] * f[1]), -(jac[0][1] * f[0] + jac[1][1] * f[1])];
        let mut improved = false;
        for _ in 0..30 {
            let a = jtj(0, 0) * (1.0 + lambda);
            let d = jtj(1, 1) * (1.0 + lambda);
            let b = jtj(0, 1);
            let det = a * d - b * b;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let mut step = [(d * g[0] - b * g[1]) / det, (a * g[1] - b * g[0]) / det];
            // Keep each step within a factor of e in capacitance.
            let big = step[0].abs().max(step[1].abs());
            if big > 1.0 {
                step = [step[0] / big, step[1] / big];
            }
            let cand = [u[0] + step[0], u[1] + step[1]];
            let fc = r(cand);
            if norm(fc) < n0 {
                u = cand;
                f = fc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (u, norm(f))
}

/// Realizable element value ranges for the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementBounds {
    pub l_min: f64,
    pub l_max: f64,
    pub c_min: f64,
    pub c_max: f64,
}

impl Default for ElementBounds {
    fn default() -> Self {
        Self { l_min: 1e-12, l_max: 10e-9, c_min: 1e-15, c_max: 10e-12 }
    }
}

/// Set of candidate intermediate impedances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZimGrid {
    points: Vec<C64>,
}

impl ZimGrid {
    /// Log-spaced resistance by linearly spaced reactance, resistance-major.
    pub fn rect(r_min: f64, r_max: f64, n_r: usize, x_min: f64, x_max: f64, n_x: usize) -> Result<Self, MatchError> {
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(MatchError::BadGrid("resistance range must be positive and ordered".into()));
        }
        if !(x_max >= x_min && x_min.is_finite() && x_max.is_finite()) {
            return Err(MatchError::BadGrid("reactance range must be ordered".into()));
        }
        if n_r == 0 || n_x == 0 {
            return Err(MatchError::BadGrid("grid needs at least one point per axis".into()));
        }
        let lin = |a: f64, b: f64, n: usize, i: usize| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        let mut points = Vec::with_capacity(n_r * n_x);
        for i in 0..n_r {
            let r = lin(r_min.ln(), r_max.ln(), n_r, i).exp();
            for j in 0..n_x {
                points.push(C64::new(r, lin(x_min, x_max, n_x, j)));
            }
        }
        Ok(Self { points })
    }

    pub fn from_points(points: Vec<C64>) -> Result<Self, MatchError> {
        if points.is_empty() {
            return Err(MatchError::BadGrid("no points".into()));
        }
        if let Some(z) = points.iter().find(|z| !(z.re > 0.0 && z.im.is_finite())) {
            return Err(MatchError::BadGrid(format!("point {z} needs positive finite resistance")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }
}

impl Default for ZimGrid {
    fn default() -> Self {
        Self::rect(10.0, 400.0, 40, -500.0, 100.0, 40).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepObjective {
    /// Minimize cascade noise figure (input network).
    Noise,
    /// Minimize transducer loss into the amplifier (output network).
    Gain,
}

/// Two cascaded L-sections meeting at an intermediate impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStageMatch {
    pub z_im: C64,
    /// Terminated in the 50 Ω port, presents Z_IM.
    pub stage1: LSection,
    /// Terminated in the amplifier, presents conj(Z_IM).
    pub stage2: LSection,
    pub z_an: C64,
    pub f0: f64,
    pub z_ref: f64,
}

impl TwoStageMatch {
    /// Chain matrix from the 50 Ω port to the amplifier node.
    pub fn abcd(&self, f: f64) -> Abcd {
        self.stage1.abcd_reversed(f).then(&self.stage2.abcd(f))
    }

    /// Impedance presented to the amplifier by the network and 50 Ω source.
    pub fn source_impedance(&self, f: f64) -> C64 {
        let m = self.abcd(f);
        let zs = C64::new(self.z_ref, 0.0);
        (m.d * zs + m.b) / (m.c * zs + m.a)
    }

    /// Available gain from the 50 Ω source to the amplifier plane.
    pub fn available_gain(&self, f: f64) -> f64 {
        available_gain_abcd(&self.abcd(f), self.z_ref)
    }

    /// Returns the circuit, the port node and the amplifier node.
    pub fn nodal_circuit(&self, f: f64) -> Result<(Circuit, usize, usize), MatchError> {
        let mut ckt = Circuit::new();
        let mid = ckt.node();
        let port = stamp_section(&mut ckt, &self.stage1, mid, f)?;
        let an = stamp_section(&mut ckt, &self.stage2, mid, f)?;
        Ok((ckt, port, an))
    }
}

/// Places an L-section with its target side at `target` and returns the
/// load-side node (a new node unless the series element is absent).
pub fn stamp_section(ckt: &mut Circuit, s: &LSection, target: usize, f: f64) -> Result<usize, MatchError> {
    let load = match s.series.impedance(f) {
        Some(z) => {
            let n = ckt.node();
            ckt.impedance(target, n, z)?;
            n
        }
        None => target,
    };
    if let Some(z) = s.shunt.impedance(f) {
        let node = match s.topology {
            LTopology::ShuntAtLoad => load,
            LTopology::SeriesAtLoad => target,
        };
        ckt.impedance(node, 0, z)?;
    }
    Ok(load)
}

/// G_A of a chain matrix driven from a real source resistance.
pub fn available_gain_abcd(m: &Abcd, r_src: f64) -> f64 {
    let zs = C64::new(r_src, 0.0);
    let z_out = (m.d * zs + m.b) / (m.c * zs + m.a);
    r_src / ((m.a + m.c * zs).norm_sqr() * z_out.re)
}

/// G_T of a chain matrix between a real source resistance and `z_load`.
pub fn transducer_gain_abcd(m: &Abcd, r_src: f64, z_load: C64) -> f64 {
    let zs = C64::new(r_src, 0.0);
    let den = m.a * z_load + m.b + zs * (m.c * z_load + m.d);
    4.0 * r_src * z_load.re / den.norm_sqr()
}

/// One evaluated point of the intermediate-impedance sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZimPoint {
    pub z_im: C64,
    /// Objective value in dB; `None` when no realizable match exists.
    pub score_db: Option<f64>,
    pub nf_db: Option<f64>,
    pub loss_db: Option<f64>,
    pub design: Option<TwoStageMatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZimSweep {
    pub best: ZimPoint,
    pub best_index: usize,
    pub map: Vec<ZimPoint>,
    pub objective: SweepObjective,
}

impl ZimSweep {
    /// CSV with header `r_ohm,x_ohm,nf_db`; infeasible points are `NaN`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r_ohm,x_ohm,nf_db\n");
        for p in &self.map {
            let v = p.nf_db.unwrap_or(f64::NAN);
            s.push_str(&format!("{},{},{}\n", p.z_im.re, p.z_im.im, v));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub q: ElementQ,
    pub bounds: ElementBounds,
    pub objective: SweepObjective,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { q: ElementQ::default(), bounds: ElementBounds::default(), objective: SweepObjective::Noise }
    }
}

/// Scores below this separation are treated as ties.
const TIE_DB: f64 = 1e-9;

fn sections(z_load: C64, z_target: C64, f: f64) -> Result<Vec<LSection>, MatchError> {
    match l_match(Immittance::Impedance(z_load), Immittance::Impedance(z_target), f) {
        Err(MatchError::AlreadyMatched) => Ok(vec![LSection::THROUGH]),
        other => other,
    }
}

fn evaluate_point(z_im: C64, z_an: C64, noise: &NoiseSpec, f0: f64, opt: &SweepOptions) -> ZimPoint {
    let z_ref = noise.z_ref;
    let empty = ZimPoint { z_im, score_db: None, nf_db: None, loss_db: None, design: None };
    let (Ok(s1), Ok(s2)) = (sections(C64::new(z_ref, 0.0), z_im, f0), sections(z_an, z_im.conj(), f0)) else {
        return empty;
    };
    let mut best = empty;
    for a in s1.iter().filter(|s| s.within(&opt.bounds)) {
        for b in s2.iter().filter(|s| s.within(&opt.bounds)) {
            let d = TwoStageMatch { z_im, stage1: a.with_q(opt.q), stage2: b.with_q(opt.q), z_an, f0, z_ref };
            let ga = d.available_gain(f0);
            let zs = d.source_impedance(f0);
            if !(ga > 0.0 && ga.is_finite() && zs.re > 0.0) {
                continue;
            }
            let loss_db = -linear_to_db(ga);
            let Ok(nf_an) = noise_figure_at_source(noise, gamma_from_z(zs, z_ref)) else {
                continue;
            };
            let nf_db = loss_db + nf_an;
            let score = match opt.objective {
                SweepObjective::Noise => nf_db,
                SweepObjective::Gain => -linear_to_db(transducer_gain_abcd(&d.abcd(f0), z_ref, z_an)),
            };
            if best.score_db.is_none_or(|s| score < s - TIE_DB) {
                best = ZimPoint { z_im, score_db: Some(score), nf_db: Some(nf_db), loss_db: Some(loss_db), design: Some(d) };
            }
        }
    }
    best
}

/// Evaluates every candidate Z_IM and returns the best two-stage match.
///
/// Ties within 1e-9 dB go to the lowest resistance, then lowest |X|, then
/// lowest grid index.
pub fn sweep_zim(
    z_an: Immittance,
    noise: &NoiseSpec,
    f0: f64,
    grid: &ZimGrid,
    opt: &SweepOptions,
) -> Result<ZimSweep, MatchError> {
    check_freq(f0)?;
    noise.validate()?;
    let z_an = z_an.impedance();
    check_positive_real(z_an)?;
    let map: Vec<ZimPoint> = grid.points().par_iter().map(|&z| evaluate_point(z, z_an, noise, f0, opt)).collect();
    let mut best: Option<usize> = None;
    for (i, p) in map.iter().enumerate() {
        let Some(s) = p.score_db else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let bp = &map[b];
                let bs = bp.score_db.expect("best is feasible");
                if s < bs - TIE_DB {
                    true
                } else if s > bs + TIE_DB {
                    false
                } else {
                    (p.z_im.re, p.z_im.im.abs()) < (bp.z_im.re, bp.z_im.im.abs())
                }
            }
        };
        if better {
            best = Some(i);
        }
    }
    let best_index = best.ok_or(MatchError::EmptyFeasibleSet)?;
    Ok(ZimSweep { best: map[best_index], best_index, map, objective: opt.objective })
}

/// Anything that can be evaluated between the 50 Ω port and an amplifier.
pub trait PortNetwork {
    fn chain(&self, f: f64) -> Abcd;
    fn load(&self) -> C64;
    fn reference(&self) -> f64;
}

impl PortNetwork for MatchingNetworkDesign {
    fn chain(&self, f: f64) -> Abcd {
        self.abcd(f)
    }
    fn load(&self) -> C64 {
        self.z_an
    }
    fn reference(&self) -> f64 {
        self.z_ref
    }
}

impl PortNetwork for TwoStageMatch {
    fn chain(&self, f: f64) -> Abcd {
        self.abcd(f)
    }
    fn load(&self) -> C64 {
        self.z_an
    }
    fn reference(&self) -> f64 {
        self.z_ref
    }
}

/// −10·log10 G_T from the 50 Ω port into the amplifier, per frequency.
pub fn insertion_loss(design: &impl PortNetwork, grid: &FrequencyGrid) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&f| -linear_to_db(transducer_gain_abcd(&design.chain(f), design.reference(), design.load())))
        .collect()
}

/// Short 50 Ω pad line, ideal apart from a uniform loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpwLine {
    pub length_m: f64,
    pub eps_eff: f64,
    pub loss_db_per_mm: f64,
    pub z0: f64,
}

impl Default for CpwLine {
    fn default() -> Self {
        Self { length_m: 50e-6, eps_eff: 4.0, loss_db_per_mm: 0.0, z0: 50.0 }
    }
}

impl CpwLine {
    pub fn abcd(&self, f: f64) -> Abcd {
        let beta = omega(f) * self.eps_eff.sqrt() / crate::pattern::SPEED_OF_LIGHT;
        let alpha = self.loss_db_per_mm * 1e3 / (20.0 / std::f64::consts::LN_10);
        let gl = C64::new(alpha, beta) * self.length_m;
        Abcd { a: gl.cosh(), b: self.z0 * gl.sinh(), c: gl.sinh() / self.z0, d: gl.cosh() }
    }

    pub fn electrical_length_deg(&self, f: f64) -> f64 {
        (omega(f) * self.eps_eff.sqrt() / crate::pattern::SPEED_OF_LIGHT * self.length_m).to_degrees()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_to_fifty_at_one_gigahertz() {
        let sols = l_match(Immittance::ohms(100.0, 0.0), Immittance::ohms(50.0, 0.0), 1e9).unwrap();
        assert_eq!(sols.len(), 2);
        let s = sols[0];
        assert_eq!(s.topology, LTopology::ShuntAtLoad);
        match (s.shunt, s.series) {
            (Element::Capacitor { farads, .. }, Element::Inductor { henries, .. }) => {
                assert!((farads - 1.5915e-12).abs() < 1e-16, "{farads}");
                assert!((henries - 7.9577e-9).abs() < 1e-13, "{henries}");
            }
            other => panic!("{other:?}"),
        }
        for s in &sols {
            let z = s.input_impedance(C64::new(100.0, 0.0), 1e9);
            assert!((z - C64::new(50.0, 0.0)).norm() / 50.0 < 1e-9);
        }
    }

    #[test]
    fn equal_impedances_are_already_matched() {
        let r = l_match(Immittance::ohms(50.0, 0.0), Immittance::ohms(50.0, 0.0), 1e9);
        assert_eq!(r, Err(MatchError::AlreadyMatched));
    }

    #[test]
    fn zero_resistance_has_no_real_solution() {
        let r = l_match(Immittance::ohms(0.0, 20.0), Immittance::ohms(50.0, 0.0), 1e9);
        assert_eq!(r, Err(MatchError::NoRealSolution));
    }

    #[test]
    fn mutual_inductance_of_fitted_transformer() {
        let t = CoupledInductor::lossless(119e-12, 267e-12, 0.59, 30e9).unwrap();
        assert!((t.mutual() - 105.2e-12).abs() < 0.1e-12);
    }

    #[test]
    fn imn_for_fitted_transformer_is_matched() {
        let t = CoupledInductor::lossless(119e-12, 267e-12, 0.59, 30e9).unwrap();
        let d = synthesize_imn(Immittance::ohms(200.0, -400.0), &t, 30e9).unwrap();
        assert!(d.c1 > 0.0 && d.c3 > 0.0);
        assert!(d.gamma_in_db <= -15.0);
    }

    #[test]
    fn negative_resistance_rejected() {
        let t = CoupledInductor::lossless(119e-12, 267e-12, 0.59, 30e9).unwrap();
        let r = synthesize_imn(Immittance::ohms(-1.0, 0.0), &t, 30e9);
        assert!(matches!(r, Err(MatchError::InvalidImpedance(_))));
    }

    #[test]
    fn matched_line_has_no_loss_without_attenuation() {
        let l = CpwLine::default();
        let g = transducer_gain_abcd(&l.abcd(30e9), 50.0, C64::new(50.0, 0.0));
        assert!((g - 1.0).abs() < 1e-12);
    }
}
