use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex64 as C64;
use phasor_core::matchnet::{
    insertion_loss, synthesize_imn, sweep_zim, CoupledInductor, ElementBounds, ElementQ, MatchError, SweepObjective,
    SweepOptions, ZimGrid, IMN_START_CAPS,
};
use phasor_core::netcore::{gamma_from_z, FrequencyGrid, Immittance, NoiseSpec};
use phasor_core::pattern::{
    directivity, sidelobe_levels, ArrayGeometry, ArrayPattern, Direction, ElementPattern, PatternCut, PatternError,
    SidelobeReport,
};
use phasor_core::rxbudget::{benchmark_fom, chain_budget, parse_benchmark_csv, ChainSpec};
use phasor_core::taper::{planar_taper, taylor_line_taper, PlanarWeights, TaperError, TaperSpec};
use phasor_core::tsio::{extract_metrics, fit_two_tone, parse_nf_csv, parse_touchstone, parse_two_tone_csv};
use serde::Serialize;
use serde_json::json;

use crate::{read_text, CliError, Format, Output, Run};

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn taper_err(e: TaperError) -> CliError {
    match e {
        TaperError::InsufficientSpan { .. } => CliError::Infeasible(e.to_string()),
        _ => invalid(e),
    }
}

fn match_err(e: MatchError) -> CliError {
    match e {
        MatchError::NoFeasibleCapacitors { .. } | MatchError::EmptyFeasibleSet | MatchError::NoRealSolution => {
            CliError::Infeasible(e.to_string())
        }
        _ => invalid(e),
    }
}

fn pattern_err(e: PatternError) -> CliError {
    invalid(e)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

fn choose(format: Format, text: String, json: &str, csv: &str) -> String {
    match format {
        Format::Text => text,
        Format::Json => json.to_string(),
        Format::Csv => csv.to_string(),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TaperArgs {
    /// Elements along each array axis.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Elements along the second axis (defaults to --n).
    #[arg(long)]
    pub ny: Option<usize>,
    /// Side-lobe suppression in dB (positive).
    #[arg(long, default_value_t = 18.0)]
    pub sll: f64,
    /// Number of near-in side lobes held at the design level.
    #[arg(long, default_value_t = TaperSpec::DEFAULT_N_BAR)]
    pub nbar: usize,
}

pub(crate) fn taper(a: &TaperArgs, format: Format) -> Result<Run, CliError> {
    let wx = taylor_line_taper(&TaperSpec::new(a.n, a.sll, a.nbar).map_err(taper_err)?).map_err(taper_err)?;
    let ny = a.ny.unwrap_or(a.n);
    let wy = taylor_line_taper(&TaperSpec::new(ny, a.sll, a.nbar).map_err(taper_err)?).map_err(taper_err)?;
    let planar = planar_taper(&wx, &wy);
    let line_db = wx.dynamic_range_db();
    let planar_db = planar.dynamic_range_db();

    let mut csv = String::from("index,weight\n");
    for (i, w) in wx.amplitudes().iter().enumerate() {
        let _ = writeln!(csv, "{i},{w}");
    }
    let report = json!({
        "n": a.n,
        "ny": ny,
        "sll_db": a.sll,
        "n_bar": a.nbar,
        "weights": wx.amplitudes(),
        "line_dynamic_range_db": line_db,
        "planar_dynamic_range_db": planar_db,
    });
    let json = to_json(&report);
    let mut text = format!("Taylor taper: {} x {} elements, {} dB side lobes, nbar = {}\n", a.n, ny, a.sll, a.nbar);
    for (i, w) in wx.amplitudes().iter().enumerate() {
        let _ = writeln!(text, "  w[{i}] = {w:.6}");
    }
    let _ = writeln!(text, "line dynamic range:   {line_db:.2} dB");
    let _ = writeln!(text, "planar dynamic range: {planar_db:.2} dB (gain control range needed)");
    Ok(Run {
        output: Output {
            stdout: choose(format, text, &json, &csv),
            files: vec![
                ("taper_weights.csv".into(), csv),
                ("planar_weights.csv".into(), planar.to_csv()),
                ("taper_report.json".into(), json),
            ],
        },
        extra: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaperKind {
    Taylor,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    /// Single-element pattern of 3GPP TR 38.901.
    Tr38901,
    Isotropic,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct PatternArgs {
    #[arg(long, default_value_t = 8)]
    pub nx: usize,
    #[arg(long, default_value_t = 8)]
    pub ny: usize,
    #[arg(long, default_value_t = 6.0)]
    pub pitch_mm: f64,
    #[arg(long, default_value_t = 30.0)]
    pub freq_ghz: f64,
    #[arg(long, value_enum, default_value_t = TaperKind::Taylor)]
    pub taper: TaperKind,
    /// Planar weights CSV (as written by `taper`); replaces --taper.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 18.0)]
    pub sll: f64,
    #[arg(long, default_value_t = TaperSpec::DEFAULT_N_BAR)]
    pub nbar: usize,
    #[arg(long, value_enum, default_value_t = ElementKind::Tr38901)]
    pub element: ElementKind,
    /// Steering polar angle in degrees.
    #[arg(long, default_value_t = 0.0)]
    pub theta0: f64,
    /// Steering azimuth in degrees.
    #[arg(long, default_value_t = 0.0)]
    pub phi0: f64,
    /// Quadrature step for directivity, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub step_deg: f64,
    /// Angular step of the principal cuts, degrees.
    #[arg(long, default_value_t = 0.05)]
    pub cut_step_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArrayReport {
    pub directivity_dbi: f64,
    pub worst_sll_phi0_db: f64,
    pub worst_sll_phi90_db: f64,
    pub first_sll_phi0_db: f64,
    /// First side lobe of the array factor alone (isotropic elements), phi = 0.
    pub first_sll_array_factor_db: f64,
    #[serde(skip)]
    cuts: [PatternCut; 2],
    #[serde(skip)]
    lobes: [SidelobeReport; 2],
}

fn analyse(a: &PatternArgs, geom: &ArrayGeometry, w: &PlanarWeights, element: ElementPattern) -> Result<ArrayReport, CliError> {
    let f = a.freq_ghz * 1e9;
    let steer = Direction::new(a.theta0, a.phi0);
    let pat = ArrayPattern::new(geom, w, element, f, steer).map_err(pattern_err)?;
    let d = directivity(|dir| pat.intensity(dir), f, steer, a.step_deg).map_err(pattern_err)?;
    let cut = |p: &ArrayPattern, phi: f64| -> Result<(PatternCut, SidelobeReport), CliError> {
        let c = p.cut(phi, a.cut_step_deg);
        let r = sidelobe_levels(&c.angles_deg, &c.level_db).map_err(pattern_err)?;
        Ok((c, r))
    };
    let (c0, r0) = cut(&pat, 0.0)?;
    let (c90, r90) = cut(&pat, 90.0)?;
    let af = ArrayPattern::new(geom, w, ElementPattern::isotropic(), f, steer).map_err(pattern_err)?;
    let (_, raf) = cut(&af, 0.0)?;
    Ok(ArrayReport {
        directivity_dbi: d.directivity_dbi,
        worst_sll_phi0_db: r0.worst().level_db,
        worst_sll_phi90_db: r90.worst().level_db,
        first_sll_phi0_db: r0.first().level_db,
        first_sll_array_factor_db: raf.first().level_db,
        cuts: [c0, c90],
        lobes: [r0, r90],
    })
}

pub(crate) fn pattern(a: &PatternArgs, format: Format) -> Result<Run, CliError> {
    let geom = ArrayGeometry::new(a.nx, a.ny, a.pitch_mm * 1e-3).map_err(pattern_err)?;
    let weights = match (&a.weights, a.taper) {
        (Some(p), _) => PlanarWeights::from_csv(&read_text(p)?).map_err(taper_err)?,
        (None, TaperKind::Uniform) => PlanarWeights::uniform(a.nx, a.ny),
        (None, TaperKind::Taylor) => {
            let wx = taylor_line_taper(&TaperSpec::new(a.nx, a.sll, a.nbar).map_err(taper_err)?).map_err(taper_err)?;
            let wy = taylor_line_taper(&TaperSpec::new(a.ny, a.sll, a.nbar).map_err(taper_err)?).map_err(taper_err)?;
            planar_taper(&wx, &wy)
        }
    };
    let element = match a.element {
        ElementKind::Tr38901 => ElementPattern::default(),
        ElementKind::Isotropic => ElementPattern::isotropic(),
    };
    let tapered = analyse(a, &geom, &weights, element)?;
    let uniform = analyse(a, &geom, &PlanarWeights::uniform(a.nx, a.ny), element)?;

    let mut cuts = String::from("angle_deg,tapered_phi0_db,tapered_phi90_db,uniform_phi0_db,uniform_phi90_db\n");
    for i in 0..tapered.cuts[0].angles_deg.len() {
        let _ = writeln!(
            cuts,
            "{},{},{},{},{}",
            tapered.cuts[0].angles_deg[i],
            tapered.cuts[0].level_db[i],
            tapered.cuts[1].level_db[i],
            uniform.cuts[0].level_db[i],
            uniform.cuts[1].level_db[i]
        );
    }
    let mut lobes = String::from("array,phi_deg,rank,angle_deg,level_db\n");
    for (name, r) in [("tapered", &tapered), ("uniform", &uniform)] {
        for (phi, rep) in [(0, &r.lobes[0]), (90, &r.lobes[1])] {
            for (k, l) in rep.sidelobes.iter().enumerate() {
                let _ = writeln!(lobes, "{name},{phi},{},{},{}", k + 1, l.angle_deg, l.level_db);
            }
        }
    }
    let summary = json!({ "tapered": tapered, "uniform": uniform });
    let json = to_json(&summary);
    let mut text = format!(
        "{} x {} array, {} mm pitch, {} GHz, {:?} elements\n{:<34}{:>10}{:>10}\n",
        a.nx, a.ny, a.pitch_mm, a.freq_ghz, a.element, "", "tapered", "uniform"
    );
    type Row = (&'static str, fn(&ArrayReport) -> f64);
    let rows: [Row; 5] = [
        ("directivity [dBi]", |r| r.directivity_dbi),
        ("worst side lobe, phi = 0 [dB]", |r| r.worst_sll_phi0_db),
        ("worst side lobe, phi = 90 [dB]", |r| r.worst_sll_phi90_db),
        ("first side lobe, phi = 0 [dB]", |r| r.first_sll_phi0_db),
        ("first side lobe, array factor [dB]", |r| r.first_sll_array_factor_db),
    ];
    for (label, get) in rows {
        let _ = writeln!(text, "{label:<34}{:>10.2}{:>10.2}", get(&tapered), get(&uniform));
    }
    Ok(Run {
        output: Output {
            stdout: choose(format, text, &json, &lobes),
            files: vec![
                ("pattern_cuts.csv".into(), cuts),
                ("sidelobes.csv".into(), lobes),
                ("pattern_summary.json".into(), json),
            ],
        },
        extra: serde_json::Value::Null,
    })
}

pub const INDUCTANCE_NOTE: &str =
    "note: transformer inductances are in pH; values quoted in pF are assumed to mean pH";

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct MatchArgs {
    /// Amplifier input resistance, ohm.
    #[arg(long, default_value_t = 200.0)]
    pub r_an: f64,
    /// Amplifier input reactance, ohm.
    #[arg(long, default_value_t = -400.0)]
    pub x_an: f64,
    #[arg(long, default_value_t = 119.0)]
    pub lp_ph: f64,
    #[arg(long, default_value_t = 267.0)]
    pub ls_ph: f64,
    #[arg(long, default_value_t = 0.59)]
    pub k: f64,
    #[arg(long, default_value_t = 30.0)]
    pub f0_ghz: f64,
    /// Capacitor Q for the lossy evaluation.
    #[arg(long, default_value_t = 50.0)]
    pub cap_q: f64,
    /// Inductor Q for the lossy evaluation.
    #[arg(long, default_value_t = 15.0)]
    pub ind_q: f64,
    #[arg(long, default_value_t = 20.0)]
    pub f_start_ghz: f64,
    #[arg(long, default_value_t = 40.0)]
    pub f_stop_ghz: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

pub(crate) fn matching(a: &MatchArgs, format: Format) -> Result<Run, CliError> {
    let f0 = a.f0_ghz * 1e9;
    let t = CoupledInductor::lossless(a.lp_ph * 1e-12, a.ls_ph * 1e-12, a.k, f0).map_err(match_err)?;
    let design = synthesize_imn(Immittance::ohms(a.r_an, a.x_an), &t, f0).map_err(match_err)?;
    let lossy = design.with_losses(a.cap_q, a.ind_q, a.ind_q);

    let (ckt, port) = design.nodal_circuit(f0).map_err(match_err)?;
    let z_nodal = ckt.input_impedance(port).map_err(invalid)?;
    let nodal_db = db(gamma_from_z(z_nodal, design.z_ref).norm());
    let lossy_db = db(lossy.gamma_in(f0).norm());

    let grid = FrequencyGrid::linspace(a.f_start_ghz * 1e9, a.f_stop_ghz * 1e9, a.points).map_err(invalid)?;
    let il = insertion_loss(&lossy, &grid);
    let il_f0 = insertion_loss(&lossy, &FrequencyGrid::single(f0).map_err(invalid)?)[0];
    let mut csv = String::from("freq_hz,gamma_in_db,gamma_in_lossy_db,il_lossy_db\n");
    for (i, &f) in grid.points().iter().enumerate() {
        let _ = writeln!(csv, "{f},{},{},{}", db(design.gamma_in(f).norm()), db(lossy.gamma_in(f).norm()), il[i]);
    }
    let record = json!({
        "design": design,
        "c1_farads": design.c1,
        "c3_farads": design.c3,
        "gamma_in_db": design.gamma_in_db,
        "gamma_in_nodal_db": nodal_db,
        "gamma_in_lossy_db": lossy_db,
        "insertion_loss_lossy_db": il_f0,
        "capacitor_q": a.cap_q,
        "inductor_q": a.ind_q,
        "inductance_unit": "pH",
    });
    let json = to_json(&record);
    let mut text = format!("{INDUCTANCE_NOTE}\n");
    let _ = writeln!(text, "Z_AN = {} {:+} j ohm, f0 = {} GHz", a.r_an, a.x_an, a.f0_ghz);
    let _ = writeln!(text, "Lp = {} pH, Ls = {} pH, k = {}", a.lp_ph, a.ls_ph, a.k);
    let _ = writeln!(text, "C1 = {:.3} fF (shunt at port)", design.c1 * 1e15);
    let _ = writeln!(text, "C3 = {:.3} fF (shunt at amplifier)", design.c3 * 1e15);
    let _ = writeln!(text, "|Gamma_in| lossless:        {:.2} dB", design.gamma_in_db);
    let _ = writeln!(text, "|Gamma_in| nodal check:     {nodal_db:.2} dB");
    let _ = writeln!(text, "|Gamma_in| Qc={}, Ql={}:    {lossy_db:.2} dB", a.cap_q, a.ind_q);
    let _ = writeln!(text, "insertion loss at f0:       {il_f0:.2} dB");
    Ok(Run {
        output: Output {
            stdout: choose(format, text, &json, &csv),
            files: vec![("match_design.json".into(), json), ("gamma_in.csv".into(), csv)],
        },
        extra: json!({ "start_capacitances_farads": IMN_START_CAPS }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Noise,
    Gain,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ZimArgs {
    #[arg(long, default_value_t = 200.0)]
    pub r_an: f64,
    #[arg(long, default_value_t = -400.0)]
    pub x_an: f64,
    #[arg(long, default_value_t = 30.0)]
    pub f0_ghz: f64,
    /// Amplifier minimum noise figure, dB.
    #[arg(long, default_value_t = 3.0)]
    pub nf_min_db: f64,
    /// Amplifier equivalent noise resistance, ohm.
    #[arg(long, default_value_t = 20.0)]
    pub rn_ohm: f64,
    #[arg(long, default_value_t = 0.3)]
    pub gamma_opt_mag: f64,
    #[arg(long, default_value_t = 60.0)]
    pub gamma_opt_deg: f64,
    #[arg(long, default_value_t = 15.0)]
    pub ind_q: f64,
    #[arg(long, default_value_t = 50.0)]
    pub cap_q: f64,
    #[arg(long, default_value_t = 10.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 400.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 40)]
    pub nr: usize,
    #[arg(long, default_value_t = -500.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 40)]
    pub nx: usize,
    #[arg(long, value_enum, default_value_t = Objective::Noise)]
    pub objective: Objective,
}

pub(crate) fn zim(a: &ZimArgs, format: Format) -> Result<Run, CliError> {
    let noise = NoiseSpec::new(a.nf_min_db, a.rn_ohm, C64::from_polar(a.gamma_opt_mag, a.gamma_opt_deg.to_radians()))
        .map_err(invalid)?;
    let grid = ZimGrid::rect(a.r_min, a.r_max, a.nr, a.x_min, a.x_max, a.nx).map_err(match_err)?;
    let opt = SweepOptions {
        q: ElementQ { inductor: a.ind_q, capacitor: a.cap_q },
        bounds: ElementBounds::default(),
        objective: match a.objective {
            Objective::Noise => SweepObjective::Noise,
            Objective::Gain => SweepObjective::Gain,
        },
    };
    let sweep = sweep_zim(Immittance::ohms(a.r_an, a.x_an), &noise, a.f0_ghz * 1e9, &grid, &opt).map_err(match_err)?;
    let csv = sweep.to_csv();
    let best = &sweep.best;
    let json = to_json(&json!({
        "best_index": sweep.best_index,
        "z_im": best.z_im,
        "nf_db": best.nf_db,
        "loss_db": best.loss_db,
        "score_db": best.score_db,
        "design": best.design,
        "objective": sweep.objective,
    }));
    let mut text = format!("Z_IM sweep: {} points, objective {:?}\n", grid.points().len(), a.objective);
    let _ = writeln!(text, "best Z_IM = {:.2} {:+.2} j ohm (index {})", best.z_im.re, best.z_im.im, sweep.best_index);
    if let (Some(nf), Some(loss)) = (best.nf_db, best.loss_db) {
        let _ = writeln!(text, "NF = {nf:.3} dB, network loss = {loss:.3} dB");
    }
    if let Some(d) = &best.design {
        let _ = writeln!(text, "stage 1 (50 ohm -> Z_IM): {:?}", d.stage1);
        let _ = writeln!(text, "stage 2 (Z_AN -> Z_IM*):  {:?}", d.stage2);
    }
    Ok(Run {
        output: Output {
            stdout: choose(format, text, &json, &csv),
            files: vec![("nf_map.csv".into(), csv), ("zim_best.json".into(), json)],
        },
        extra: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BudgetArgs {
    /// Chain description (JSON).
    pub input: PathBuf,
}

pub(crate) fn budget(a: &BudgetArgs, format: Format) -> Result<Run, CliError> {
    let spec: ChainSpec = serde_json::from_str(&read_text(&a.input)?)
        .map_err(|e| invalid(format!("chain '{}': {e}", a.input.display())))?;
    let b = chain_budget(&spec).map_err(invalid)?;
    let json = to_json(&b);
    let text = b.to_text();
    let csv = format!(
        "total_gain_db,total_nf_db,total_iip3_dbm,total_ip1db_dbm,total_pc_mw\n{},{},{},{},{}\n",
        b.total_gain_db,
        b.total_nf_db,
        b.total_iip3_dbm.unwrap_or(f64::NAN),
        b.total_ip1db_dbm.unwrap_or(f64::NAN),
        b.total_pc_mw
    );
    Ok(Run {
        output: Output {
            stdout: choose(format, text.clone(), &json, &csv),
            files: vec![("budget.json".into(), json), ("budget.txt".into(), text)],
        },
        extra: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExtractArgs {
    /// Two-port Touchstone file.
    pub input: PathBuf,
    /// Noise figure sidecar CSV (freq_hz,nf_db).
    #[arg(long)]
    pub nf: Option<PathBuf>,
    /// Two-tone sweep CSV.
    #[arg(long)]
    pub two_tone: Option<PathBuf>,
}

fn ctx(p: &std::path::Path) -> impl Fn(phasor_core::tsio::TsError) -> CliError + '_ {
    move |e| invalid(format!("'{}': {e}", p.display()))
}

pub(crate) fn extract(a: &ExtractArgs, format: Format) -> Result<Run, CliError> {
    let ds = parse_touchstone(&read_text(&a.input)?).map_err(ctx(&a.input))?;
    let nf = match &a.nf {
        Some(p) => Some(parse_nf_csv(&read_text(p)?).map_err(ctx(p))?),
        None => None,
    };
    let m = extract_metrics(&ds, nf.as_ref()).map_err(ctx(&a.input))?;
    let lin = match &a.two_tone {
        Some(p) => Some(fit_two_tone(&parse_two_tone_csv(&read_text(p)?).map_err(ctx(p))?).map_err(ctx(p))?),
        None => None,
    };
    let json = to_json(&json!({ "metrics": m, "linearity": lin }));
    let mut text = String::new();
    let _ = writeln!(text, "peak gain:      {:.2} dB", m.peak_gain_db);
    let _ = writeln!(text, "centre freq:    {:.4} GHz", m.f_c_hz / 1e9);
    let _ = writeln!(
        text,
        "3 dB bandwidth: {:.4} GHz{}",
        m.bw3db_hz / 1e9,
        if m.band_edge_peak { " (peak at band edge, one-sided)" } else { "" }
    );
    let _ = writeln!(text, "max |S12|:      {:.2} dB", m.s12_max_db);
    if let Some(nf) = m.min_nf_db {
        let _ = writeln!(text, "min NF:         {nf:.2} dB{}", if m.nf_interpolated { " (interpolated)" } else { "" });
    }
    if let Some(l) = &lin {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.2} dBm"));
        let _ = writeln!(text, "IIP3:           {}", opt(l.iip3_dbm));
        let _ = writeln!(text, "IP1dB:          {}", opt(l.ip1db_dbm));
    }
    let csv = format!(
        "peak_gain_db,f_c_hz,bw3db_hz,band_edge_peak,min_nf_db,s12_max_db\n{},{},{},{},{},{}\n",
        m.peak_gain_db,
        m.f_c_hz,
        m.bw3db_hz,
        m.band_edge_peak,
        m.min_nf_db.unwrap_or(f64::NAN),
        m.s12_max_db
    );
    Ok(Run {
        output: Output {
            stdout: choose(format, text, &json, &csv),
            files: vec![("extract.json".into(), json), ("extract.csv".into(), csv)],
        },
        extra: serde_json::Value::Null,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    /// Comparison table CSV.
    pub input: PathBuf,
    /// Work to compare against the others.
    #[arg(long, default_value = "VG-LNA2")]
    pub ours: String,
}

pub(crate) fn bench(a: &BenchArgs, format: Format) -> Result<Run, CliError> {
    let records = parse_benchmark_csv(&read_text(&a.input)?)
        .map_err(|e| invalid(format!("'{}': {e}", a.input.display())))?;
    let report = benchmark_fom(&records, &a.ours).map_err(invalid)?;
    let mut text = report.to_text();
    for c in &report.comparisons {
        let _ = writeln!(text, "≥ {} units vs {}", c.units, c.theirs);
    }
    let mut csv = String::from("ours,theirs,ours_pc_mw,theirs_max_pc_mw,theirs_min_pc_mw,units,units_worst_case\n");
    for c in &report.comparisons {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            c.ours, c.theirs, c.ours_pc_mw, c.theirs_max_pc_mw, c.theirs_min_pc_mw, c.units, c.units_worst_case
        );
    }
    let json = to_json(&report);
    Ok(Run {
        output: Output {
            stdout: choose(format, text.clone(), &json, &csv),
            files: vec![("bench.csv".into(), csv), ("bench.txt".into(), text), ("bench.json".into(), json)],
        },
        extra: serde_json::Value::Null,
    })
}
