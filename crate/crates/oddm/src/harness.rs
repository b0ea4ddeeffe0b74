//! Experiment orchestration: key-value configuration, the five experiment
//! families (waveform dump, PSD, ambiguity, Gram/Lambda, BER), and
//! reproducible output with a hashed manifest.
//!
//! All randomness flows from the configured root seed through labelled
//! derivations (`experiment -> trial -> component`), so re-running with the
//! same configuration and seed rewrites byte-identical outputs. Wall-clock
//! time goes to `run.log`, which is deliberately absent from the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channel::{add_awgn, apply_channel, eva_profile, DdChannel};
use crate::detection::{
    ber_count, effective_channel, mp_detect, qam_hard_decision, LmmseSolver, MpConfig, Pipeline,
    System,
};
use crate::io;
use crate::orthogonality::{
    ambiguity, lambda_metric_analog, lambda_metric_digital, SurfaceKind,
};
use crate::params::OddmParams;
use crate::pulse::{build_ddop, build_ddop_ce_normalized, srrc_pulse};
use crate::rng::{random_bits, SeedStream};
use crate::spectrum::{psd_analytic_analog, psd_analytic_digital, psd_empirical, tone_center_grid};
use crate::{qam_demap, qam_map, OddmError, Result};

/// The experiment families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Waveform,
    Psd,
    Ambiguity,
    Gram,
    Ber,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Waveform => "waveform",
            Experiment::Psd => "psd",
            Experiment::Ambiguity => "ambiguity",
            Experiment::Gram => "gram",
            Experiment::Ber => "ber",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "waveform" => Some(Experiment::Waveform),
            "psd" => Some(Experiment::Psd),
            "ambiguity" => Some(Experiment::Ambiguity),
            "gram" => Some(Experiment::Gram),
            "ber" => Some(Experiment::Ber),
            _ => None,
        }
    }
}

/// Symbol detector selection for the BER experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Mp,
    Lmmse,
}

impl Detector {
    fn name(self) -> &'static str {
        match self {
            Detector::Mp => "mp",
            Detector::Lmmse => "lmmse",
        }
    }
}

/// Channel selection for the BER experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    /// Deterministic four-tap on-grid channel.
    Fixed4,
    /// EVA profile quantized to the grid.
    Eva { fc_hz: f64, speed_kmh: f64 },
}

/// A validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: OddmParams<f64>,
    pub systems: Vec<System>,
    pub ta_factors: Vec<f64>,
    pub ebn0_db: Vec<f64>,
    pub trials: usize,
    pub ber_bits: usize,
    pub detector: Detector,
    pub seed: u64,
    pub kmax: usize,
    pub thresholds_db: Vec<f64>,
    pub channel: ChannelSpec,
    /// Non-fatal observations from validation (printed, not errors).
    pub warnings: Vec<String>,
}

fn parse_kv(text: &str) -> std::result::Result<Vec<(String, String)>, Vec<String>> {
    let mut pairs = Vec::new();
    let mut problems = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => problems.push(format!("line {}: expected `key = value`", lineno + 1)),
        }
    }
    if problems.is_empty() {
        Ok(pairs)
    } else {
        Err(problems)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "preset", "m", "n", "t", "q", "beta", "ns", "lcp", "systems", "ta_factors", "ebn0_db",
    "trials", "ber_bits", "detector", "seed", "kmax", "thresholds_db", "channel", "fc_hz",
    "speed_kmh",
];

/// Parse and validate configuration text plus `--set` overrides into an
/// [`ExperimentConfig`], reporting every problem at once.
pub fn validate_config(
    text: &str,
    experiment: Experiment,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let mut problems = Vec::new();
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    match parse_kv(text) {
        Ok(pairs) => {
            for (k, v) in pairs {
                map.insert(k, v);
            }
        }
        Err(mut p) => problems.append(&mut p),
    }
    for (k, v) in overrides {
        map.insert(k.clone(), v.clone());
    }
    for k in map.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            problems.push(format!("unknown key `{k}`"));
        }
    }

    fn get_num<T: std::str::FromStr>(
        map: &BTreeMap<String, String>,
        key: &str,
        problems: &mut Vec<String>,
    ) -> Option<T> {
        map.get(key).and_then(|v| match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                problems.push(format!("key `{key}`: cannot parse `{v}`"));
                None
            }
        })
    }
    fn get_list<T: std::str::FromStr>(
        map: &BTreeMap<String, String>,
        key: &str,
        problems: &mut Vec<String>,
    ) -> Option<Vec<T>> {
        map.get(key).map(|v| {
            v.split(',')
                .filter(|s| !s.trim().is_empty())
                .filter_map(|s| match s.trim().parse::<T>() {
                    Ok(x) => Some(x),
                    Err(_) => {
                        problems.push(format!("key `{key}`: cannot parse element `{s}`"));
                        None
                    }
                })
                .collect()
        })
    }

    // defaults mirror the full-scale configuration; `preset = desk` selects
    // the fast test scale
    let mut params = match map.get("preset").map(String::as_str) {
        None | Some("full") => OddmParams::<f64>::full_scale(),
        Some("desk") => OddmParams::<f64>::desk_scale(),
        Some(other) => {
            problems.push(format!("key `preset`: unknown preset `{other}`"));
            OddmParams::<f64>::full_scale()
        }
    };
    // PSD analysis follows the CP-less waveform convention
    if experiment == Experiment::Psd {
        params.lcp = 0;
    }
    let m = get_num::<usize>(&map, "m", &mut problems).unwrap_or(params.m);
    let n = get_num::<usize>(&map, "n", &mut problems).unwrap_or(params.n);
    let t = get_num::<f64>(&map, "t", &mut problems).unwrap_or(params.t);
    let q = get_num::<usize>(&map, "q", &mut problems).unwrap_or(params.q);
    let beta = get_num::<f64>(&map, "beta", &mut problems).unwrap_or(params.beta);
    let ns = get_num::<usize>(&map, "ns", &mut problems).unwrap_or(params.ns);
    let default_lcp = if params.lcp >= m { m.saturating_sub(1) } else { params.lcp };
    let lcp = get_num::<usize>(&map, "lcp", &mut problems).unwrap_or(default_lcp);
    let params = match OddmParams::new(m, n, t, q, beta, ns, lcp) {
        Ok(p) => Some(p),
        Err(OddmError::Config(mut msgs)) => {
            problems.append(&mut msgs);
            None
        }
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    };

    let systems = match get_list::<String>(&map, "systems", &mut problems) {
        Some(names) => names
            .iter()
            .filter_map(|s| match s.as_str() {
                "analog" => Some(System::Analog),
                "digital" => Some(System::Digital),
                "otfs" => Some(System::Otfs),
                other => {
                    problems.push(format!("key `systems`: unknown system `{other}`"));
                    None
                }
            })
            .collect(),
        None => match experiment {
            Experiment::Gram => vec![System::Digital],
            _ => vec![System::Analog, System::Digital],
        },
    };
    let ta_factors = get_list::<f64>(&map, "ta_factors", &mut problems)
        .unwrap_or_else(|| vec![0.3, 10.0]);
    let ebn0_db = get_list::<f64>(&map, "ebn0_db", &mut problems)
        .unwrap_or_else(|| vec![0.0, 4.0, 8.0, 12.0]);
    let thresholds_db = get_list::<f64>(&map, "thresholds_db", &mut problems)
        .unwrap_or_else(|| vec![3.0, 7.0, 10.0, 20.0, 30.0, 40.0]);
    let trials = get_num::<usize>(&map, "trials", &mut problems).unwrap_or(1000);
    let ber_bits = get_num::<usize>(&map, "ber_bits", &mut problems).unwrap_or(200_000);
    let detector = match map.get("detector").map(String::as_str) {
        None | Some("mp") => Detector::Mp,
        Some("lmmse") => Detector::Lmmse,
        Some(other) => {
            problems.push(format!("key `detector`: unknown detector `{other}`"));
            Detector::Mp
        }
    };
    let seed = get_num::<u64>(&map, "seed", &mut problems).unwrap_or(1);
    let kmax = get_num::<usize>(&map, "kmax", &mut problems).unwrap_or(2048);
    let fc_hz = get_num::<f64>(&map, "fc_hz", &mut problems).unwrap_or(5.0e9);
    let speed_kmh = get_num::<f64>(&map, "speed_kmh", &mut problems).unwrap_or(500.0);
    let channel = match map.get("channel").map(String::as_str) {
        None | Some("fixed4") => ChannelSpec::Fixed4,
        Some("eva") => ChannelSpec::Eva { fc_hz, speed_kmh },
        Some(other) => {
            problems.push(format!("key `channel`: unknown channel `{other}`"));
            ChannelSpec::Fixed4
        }
    };

    if systems.is_empty() {
        problems.push("`systems` must name at least one system".into());
    }
    if ta_factors.is_empty() {
        problems.push("`ta_factors` must not be empty".into());
    }
    if ebn0_db.is_empty() {
        problems.push("`ebn0_db` must not be empty".into());
    }
    if trials == 0 {
        problems.push("`trials` must be >= 1".into());
    }

    let mut warnings = Vec::new();
    if let Some(p) = &params {
        if experiment == Experiment::Ber {
            let tau_max = match &channel {
                ChannelSpec::Fixed4 => 3.0 * p.tau(),
                ChannelSpec::Eva { .. } => 2510e-9,
            };
            if p.t_cp() < tau_max {
                warnings.push(format!(
                    "cyclic prefix {:.3e} s is shorter than the channel delay spread {:.3e} s",
                    p.t_cp(),
                    tau_max
                ));
            }
        }
        if experiment == Experiment::Ber && p.m * p.n > 1024 {
            warnings.push(
                "ber beyond desk scale calibrates M*N probe runs per system; expect long runtimes"
                    .into(),
            );
        }
    }

    match (problems.is_empty(), params) {
        (true, Some(params)) => Ok(ExperimentConfig {
            experiment,
            params,
            systems,
            ta_factors,
            ebn0_db,
            trials,
            ber_bits,
            detector,
            seed,
            kmax,
            thresholds_db,
            channel,
            warnings,
        }),
        (_, _) => Err(OddmError::Config(problems)),
    }
}

/// Deterministic four-tap on-grid test channel: delays 0..3 bins, Dopplers
/// {0, 1, -1, 2} bins, powers {0, -3, -5, -7} dB, unit total power.
pub fn fixed4_channel(params: &OddmParams<f64>) -> Result<DdChannel<f64>> {
    let specs: [(f64, f64, isize, isize); 4] = [
        (0.0, 0.0, 0, 0),
        (-3.0, 2.094, 1, 1),
        (-5.0, -1.047, 2, -1),
        (-7.0, 2.793, 3, 2),
    ];
    let total: f64 = specs.iter().map(|&(p, _, _, _)| 10f64.powf(p / 10.0)).sum();
    let bins: Vec<(Complex64, isize, isize)> = specs
        .iter()
        .map(|&(p_db, phase, l, k)| {
            let amp = (10f64.powf(p_db / 10.0) / total).sqrt();
            (Complex64::new(phase.cos(), phase.sin()) * amp, l, k)
        })
        .collect();
    DdChannel::on_grid(&bins, params)
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct DerivedQuantities {
    pub tau_s: f64,
    pub doppler_res_hz: f64,
    pub sample_rate_hz: f64,
    pub ta_s: f64,
    pub d_span: usize,
    pub t_cp_s: f64,
}

/// What `run_experiment` writes and records.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub derived: DerivedQuantities,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

struct OutputTracker {
    dir: PathBuf,
    files: Vec<FileEntry>,
    paths: Vec<PathBuf>,
}

impl OutputTracker {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content.as_bytes())?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex(&Sha256::digest(content.as_bytes())),
            bytes: content.len(),
        });
        self.paths.push(path);
        Ok(())
    }

    fn clean_up(&self) {
        for p in &self.paths {
            let _ = fs::remove_file(p);
        }
    }
}

fn config_echo(cfg: &ExperimentConfig) -> BTreeMap<String, String> {
    let p = &cfg.params;
    let mut map = BTreeMap::new();
    map.insert("m".into(), p.m.to_string());
    map.insert("n".into(), p.n.to_string());
    map.insert("t".into(), p.t.to_string());
    map.insert("q".into(), p.q.to_string());
    map.insert("beta".into(), p.beta.to_string());
    map.insert("ns".into(), p.ns.to_string());
    map.insert("lcp".into(), p.lcp.to_string());
    map.insert(
        "systems".into(),
        cfg.systems.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
    );
    map.insert(
        "ta_factors".into(),
        cfg.ta_factors.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    map.insert(
        "ebn0_db".into(),
        cfg.ebn0_db.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    map.insert("trials".into(), cfg.trials.to_string());
    map.insert("ber_bits".into(), cfg.ber_bits.to_string());
    map.insert("detector".into(), cfg.detector.name().into());
    map.insert("seed".into(), cfg.seed.to_string());
    map.insert("kmax".into(), cfg.kmax.to_string());
    map.insert(
        "thresholds_db".into(),
        cfg.thresholds_db.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    map.insert(
        "channel".into(),
        match &cfg.channel {
            ChannelSpec::Fixed4 => "fixed4".into(),
            ChannelSpec::Eva { fc_hz, speed_kmh } => format!("eva(fc={fc_hz},v={speed_kmh})"),
        },
    );
    map
}

/// Run one experiment, writing data CSVs plus `manifest.json` into
/// `out_dir`; `run.log` records wall time outside the manifest. Outputs are
/// deterministic for a fixed configuration and seed; on failure, partial
/// outputs are removed.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir)?;
    let started = std::time::Instant::now();
    let mut tracker = OutputTracker {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
        paths: Vec::new(),
    };
    let mut notes = Vec::new();
    let result = dispatch(cfg, &mut tracker, &mut notes);
    if let Err(e) = result {
        tracker.clean_up();
        return Err(e);
    }
    let p = &cfg.params;
    let manifest = Manifest {
        experiment: cfg.experiment.name().into(),
        version: crate::version().into(),
        seed: cfg.seed,
        config: config_echo(cfg),
        derived: DerivedQuantities {
            tau_s: p.tau(),
            doppler_res_hz: p.doppler_res(),
            sample_rate_hz: p.sample_rate(),
            ta_s: p.ta(),
            d_span: p.d_span(),
            t_cp_s: p.t_cp(),
        },
        notes,
        files: tracker.files,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| OddmError::Io(e.to_string()))?;
    fs::write(out_dir.join("manifest.json"), manifest_json)?;
    let log = format!(
        "experiment={} wall_time_s={:.3} version={}\n",
        cfg.experiment.name(),
        started.elapsed().as_secs_f64(),
        crate::version()
    );
    fs::write(out_dir.join("run.log"), log)?;
    Ok(manifest)
}

fn dispatch(
    cfg: &ExperimentConfig,
    out: &mut OutputTracker,
    notes: &mut Vec<String>,
) -> Result<()> {
    match cfg.experiment {
        Experiment::Waveform => run_waveform(cfg, out),
        Experiment::Psd => run_psd(cfg, out, notes),
        Experiment::Ambiguity => run_ambiguity(cfg, out, notes),
        Experiment::Gram => run_gram(cfg, out),
        Experiment::Ber => run_ber(cfg, out, notes),
    }
}

fn run_waveform(cfg: &ExperimentConfig, out: &mut OutputTracker) -> Result<()> {
    let root = SeedStream::new(cfg.seed).derive("waveform", 0);
    let pulse = srrc_pulse(&cfg.params);
    out.write("pulse.csv", &io::pulse_csv(&pulse))?;
    for (i, &system) in cfg.systems.iter().enumerate() {
        let pl = Pipeline::new(system, cfg.params.clone());
        let mut rng = root.derive("tx", i as u64).rng();
        let grid = crate::rng::random_qam_grid::<f64>(cfg.params.m, cfg.params.n, &mut rng);
        let frame = pl.modulate(&grid)?;
        out.write(&format!("{}_grid.csv", system.name()), &io::grid_csv(&grid))?;
        out.write(&format!("{}_frame.csv", system.name()), &io::waveform_csv(&frame))?;
    }
    Ok(())
}

fn run_psd(cfg: &ExperimentConfig, out: &mut OutputTracker, notes: &mut Vec<String>) -> Result<()> {
    let params = &cfg.params;
    let pulse = srrc_pulse(params);
    let root = SeedStream::new(cfg.seed).derive("psd", 0);
    let f_max = 2.5 * params.m as f64 / params.t;
    let grid_freqs = tone_center_grid(params, f_max);
    let analytic_a = psd_analytic_analog(params, &pulse, &grid_freqs, 1.0, None);
    let analytic_d = psd_analytic_digital(params, &pulse, &grid_freqs, 1.0, None);
    out.write("psd_analog_analytic.csv", &io::psd_csv(&analytic_a))?;
    out.write("psd_digital_analytic.csv", &io::psd_csv(&analytic_d))?;
    let exclusion = (1.0 + params.beta) * params.m as f64 / params.t;
    for (name, curve) in [("analog", &analytic_a), ("digital", &analytic_d)] {
        let report = crate::spectrum::oobe_metrics(curve, &cfg.thresholds_db, exclusion);
        out.write(&format!("oobe_{name}_analytic.csv"), &oobe_csv(&report))?;
    }
    notes.push(
        "empirical curves average |dt*DFT(frame)|^2 over CP-less random frames; \
         levels follow the ensemble energy-spectral-density convention"
            .into(),
    );
    notes.push(format!(
        "analytic tone trains evaluated in closed form; kmax={} applies to truncated-oracle \
         runs only",
        cfg.kmax
    ));
    let fft_len = 2 * params.m * params.n * params.ns;
    for &system in &cfg.systems {
        let pl = Pipeline::new(system, params.clone());
        let frames = (0..cfg.trials).map(|trial| {
            let mut rng = root.derive(system.name(), trial as u64).rng();
            let grid = crate::rng::random_qam_grid::<f64>(params.m, params.n, &mut rng);
            pl.modulate(&grid).expect("modulation of a valid grid cannot fail")
        });
        let emp = psd_empirical(frames, fft_len)?;
        // keep the file to the band of interest
        let keep: Vec<usize> = (0..emp.freqs.len())
            .filter(|&i| emp.freqs[i].abs() <= f_max)
            .collect();
        let curve = crate::spectrum::PsdCurve {
            freqs: keep.iter().map(|&i| emp.freqs[i]).collect(),
            power: keep.iter().map(|&i| emp.power[i]).collect(),
            kind: emp.kind,
        };
        out.write(&format!("psd_{}_empirical.csv", system.name()), &io::psd_csv(&curve))?;
        let report = crate::spectrum::oobe_metrics(&curve, &cfg.thresholds_db, exclusion);
        out.write(&format!("oobe_{}.csv", system.name()), &oobe_csv(&report))?;
    }
    Ok(())
}

fn oobe_csv(report: &crate::spectrum::OobeReport<f64>) -> String {
    let mut text = String::from(
        "threshold_db,bw_one_sided_lo_hz,bw_one_sided_hi_hz,bw_two_sided_hz,peak_sidelobe_db\n",
    );
    for bw in &report.bandwidths {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            bw.threshold_db,
            bw.one_sided_lo.map(|v| v.to_string()).unwrap_or_else(|| "unbounded".into()),
            bw.one_sided_hi.map(|v| v.to_string()).unwrap_or_else(|| "unbounded".into()),
            bw.two_sided().map(|v| v.to_string()).unwrap_or_else(|| "unbounded".into()),
            report
                .peak_sidelobe_db
                .map(|v| v.to_string())
                .unwrap_or_else(|| "none".into()),
        );
    }
    text
}

fn run_ambiguity(
    cfg: &ExperimentConfig,
    out: &mut OutputTracker,
    notes: &mut Vec<String>,
) -> Result<()> {
    let first = *cfg.ta_factors.first().unwrap();
    let last = *cfg.ta_factors.last().unwrap();
    let p_auto = cfg.params.with_ta_factor(first)?;
    let pulse_auto = srrc_pulse(&p_auto);
    let u = build_ddop(&p_auto, &pulse_auto);
    let auto = ambiguity(&u.wf, &u.wf, &p_auto, SurfaceKind::AutoU)?;
    out.write("ambiguity_auto.csv", &io::surface_csv(&auto))?;
    let p_cross = cfg.params.with_ta_factor(last)?;
    let pulse_cross = srrc_pulse(&p_cross);
    // the extended train's first D sub-pulses are its cyclic prefix; the
    // DDOP reference aligns with the train body
    let mut u2 = build_ddop(&p_cross, &pulse_cross);
    u2.wf.t0 += p_cross.d_span() as f64 * p_cross.t;
    let uce = build_ddop_ce_normalized(&p_cross, &pulse_cross);
    let cross = ambiguity(&uce.wf, &u2.wf, &p_cross, SurfaceKind::CrossUceU)?;
    out.write("ambiguity_cross.csv", &io::surface_csv(&cross))?;
    notes.push(format!(
        "auto surface at ta = {first}T; cross surface (unit-energy cyclically extended train \
         against the DDOP) at ta = {last}T"
    ));
    Ok(())
}

fn run_gram(cfg: &ExperimentConfig, out: &mut OutputTracker) -> Result<()> {
    for &ta in &cfg.ta_factors {
        let params = cfg.params.with_ta_factor(ta)?;
        let pulse = srrc_pulse(&params);
        for &system in &cfg.systems {
            let lam = match system {
                System::Digital => lambda_metric_digital(&params, &pulse),
                System::Analog => lambda_metric_analog(&params, &pulse)?,
                System::Otfs => {
                    return Err(OddmError::Domain(
                        "gram experiment supports analog and digital systems".into(),
                    ))
                }
            };
            out.write(
                &format!("lambda_{}_ta{}.csv", system.name(), ta),
                &io::surface_csv(&lam),
            )?;
        }
    }
    Ok(())
}

fn run_ber(cfg: &ExperimentConfig, out: &mut OutputTracker, notes: &mut Vec<String>) -> Result<()> {
    let params = &cfg.params;
    let root = SeedStream::new(cfg.seed).derive("ber", 0);
    let channel = match &cfg.channel {
        ChannelSpec::Fixed4 => fixed4_channel(params)?,
        ChannelSpec::Eva { fc_hz, speed_kmh } => {
            eva_profile(*fc_hz, *speed_kmh, params, root.derive("channel", 0), true)?
        }
    };
    out.write("channel.csv", &io::channel_csv(&channel))?;
    let bits_per_frame = 2 * params.m * params.n;
    let frames_per_point = cfg.ber_bits.div_ceil(bits_per_frame);
    notes.push(format!(
        "{} frames per Eb/N0 point ({} bits each)",
        frames_per_point, bits_per_frame
    ));
    let mut rows = Vec::new();
    for &system in &cfg.systems {
        let pl = Pipeline::new(system, params.clone());
        let h_eff = effective_channel(&channel, &pl, true)?;
        notes.push(format!(
            "{} effective-channel calibration residual {:.3e}",
            system.name(),
            h_eff.calibration_residual
        ));
        for &ebn0 in &cfg.ebn0_db {
            let mut tx_bits = Vec::with_capacity(frames_per_point * bits_per_frame);
            let mut rx_bits = Vec::with_capacity(frames_per_point * bits_per_frame);
            let mut solver: Option<LmmseSolver<f64>> = None;
            for trial in 0..frames_per_point {
                let label = format!("{}-{}", system.name(), ebn0);
                let mut rng = root.derive(&label, trial as u64).rng();
                let bits = random_bits(bits_per_frame, &mut rng);
                let grid = qam_map::<f64>(&bits, params.m, params.n)?;
                let tx = pl.modulate(&grid)?;
                let rx = apply_channel(&tx, &channel)?;
                let es = pl.tx_symbol_energy(1.0);
                let (noisy, meta) = add_awgn(
                    &rx,
                    ebn0,
                    2,
                    es,
                    root.derive(&format!("noise-{label}"), trial as u64),
                );
                let y = pl.demodulate(&noisy)?;
                let noise_var = pl.dd_noise_var(meta.n0);
                let hard = match cfg.detector {
                    Detector::Mp => mp_detect(&y, &h_eff, noise_var, &MpConfig::default())?,
                    Detector::Lmmse => {
                        if solver.is_none() {
                            solver = Some(LmmseSolver::new(&h_eff, noise_var)?);
                        }
                        qam_hard_decision(&solver.as_ref().unwrap().solve(&y)?)
                    }
                };
                tx_bits.extend_from_slice(&bits);
                rx_bits.extend(qam_demap(&hard));
            }
            let report = ber_count(&tx_bits, &rx_bits)?;
            rows.push(io::BerRow {
                ebn0_db: ebn0,
                system: system.name().into(),
                detector: cfg.detector.name().into(),
                report,
            });
        }
    }
    out.write("ber.csv", &io::ber_csv(&rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_full_scale_defaults() {
        let cfg = validate_config("", Experiment::Psd, &[]).unwrap();
        assert_eq!(cfg.params.m, 128);
        assert_eq!(cfg.params.n, 32);
        assert!((cfg.params.beta - 0.15).abs() < 1e-12);
        assert!((cfg.params.t - 1.0 / 15000.0).abs() < 1e-12);
        assert_eq!(cfg.params.lcp, 0); // psd runs CP-less
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn bad_values_are_collected_together() {
        let text = "m = 0\nbeta = 2.5\nbogus = 1\n";
        let err = validate_config(text, Experiment::Psd, &[]).unwrap_err();
        match err {
            OddmError::Config(msgs) => {
                assert!(msgs.len() >= 3, "{msgs:?}");
                assert!(msgs.iter().any(|m| m.contains("bogus")));
            }
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn overrides_win_over_file() {
        let cfg = validate_config(
            "preset = desk\n",
            Experiment::Ber,
            &[("seed".into(), "42".into())],
        )
        .unwrap();
        assert_eq!(cfg.params.m, 32);
        assert_eq!(cfg.seed, 42);
    }

    #[test]
    fn short_cp_raises_a_warning() {
        let cfg = validate_config(
            "preset = desk\nlcp = 1\n",
            Experiment::Ber,
            &[],
        )
        .unwrap();
        assert!(!cfg.warnings.is_empty());
    }

    #[test]
    fn fixed4_channel_is_normalized_and_on_grid() {
        let params = OddmParams::<f64>::desk_scale();
        let ch = fixed4_channel(&params).unwrap();
        assert!(ch.on_grid);
        let power: f64 = ch.taps.iter().map(|t| t.gain.norm_sqr()).sum();
        assert!((power - 1.0).abs() < 1e-12);
        assert!(ch.max_delay() <= params.t_cp());
    }
}
