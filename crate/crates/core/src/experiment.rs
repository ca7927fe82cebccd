//! Parameter sweeps, CSV reports and exponent fitting.
//!
//! Report columns:
//!
//! | column | meaning |
//! |---|---|
//! | `mode` | `build`, `simulate`, `mst` or `walk-study` |
//! | `n`, `D`, `seed` | the cell |
//! | `k_d` | `n^((D-2)/(2D-2))` |
//! | `congestion`, `dilation`, `quality` | measured `c`, `d` (max over large parts) and `c + d` |
//! | `rounds` | simulated rounds (`simulate`, `mst`) |
//! | `detail` | mode-specific: accepted guess, MST phases, walk successes per `k` |
//! | `wall_ms` | wall time, only with `wall_time = true` |
//! | `status`, `reason` | `ok` or `failed` with the error |
//! | `config_hash` | SHA-256 prefix of the constants, generator and cell |

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::congest::{run_with_guessing, SimConfig};
use crate::error::{Error, Result};
use crate::graph::{generate_graph, generate_partition, GeneratorSpec, Graph, Partition, PartitionSpec};
use crate::mst::{kruskal_oracle, mst_via_shortcuts, random_weights, MstConfig, ShortcutSource};
use crate::par::{self, Execution};
use crate::shortcut::{build_and_measure, classify_parts, compute_params, measure_quality, ShortcutParams};
use crate::tree_lab::empirical_walk_study;

pub const CSV_HEADER: &str =
    "mode,n,D,seed,k_d,congestion,dilation,quality,rounds,detail,wall_ms,status,reason,config_hash";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Build,
    Simulate,
    Mst,
    WalkStudy,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Build => "build",
            Mode::Simulate => "simulate",
            Mode::Mst => "mst",
            Mode::WalkStudy => "walk-study",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "build" => Ok(Mode::Build),
            "simulate" => Ok(Mode::Simulate),
            "mst" => Ok(Mode::Mst),
            "walk-study" | "walk_study" => Ok(Mode::WalkStudy),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// Graph family of a sweep; `n` and `D` come from the cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GeneratorKind {
    /// `layered[:avg_degree]`, default degree 6.
    Layered { avg_degree: f64 },
    /// `hub[:base_degree]`, default degree 4.
    Hub { base_degree: f64 },
}

impl GeneratorKind {
    pub fn spec(self, n: usize, d: u32) -> GeneratorSpec {
        match self {
            GeneratorKind::Layered { avg_degree } => GeneratorSpec::layered_with_degree(n, d, avg_degree),
            GeneratorKind::Hub { base_degree } => GeneratorSpec::HubAugmented { n, d, base_degree },
        }
    }
}

impl std::fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeneratorKind::Layered { avg_degree } => write!(f, "layered:{avg_degree}"),
            GeneratorKind::Hub { base_degree } => write!(f, "hub:{base_degree}"),
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let degree = |default: f64| -> Result<f64> {
            let v = match arg {
                None => default,
                Some(a) => a.parse().map_err(|_| Error::Config(format!("bad generator degree {a:?}")))?,
            };
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Config(format!("generator degree must be positive, got {v}")))
            }
        };
        match name {
            "layered" => Ok(GeneratorKind::Layered { avg_degree: degree(6.0)? }),
            "hub" => Ok(GeneratorKind::Hub { base_degree: degree(4.0)? }),
            _ => Err(Error::Config(format!("unknown generator {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    pub c_p: f64,
    pub c_cong: f64,
    pub c_walk: f64,
    pub c_phase: f64,
    pub round_cap_factor: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c_p: 1.0,
            c_cong: 4.0,
            c_walk: 8.0,
            c_phase: 1.0,
            round_cap_factor: 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub generator: GeneratorKind,
    pub ns: Vec<usize>,
    pub ds: Vec<u32>,
    pub seeds: Vec<u64>,
    pub constants: Constants,
    /// Trials per cell in walk-study mode.
    pub walk_trials: usize,
    pub out: Option<PathBuf>,
    pub wall_time: bool,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Build,
            generator: GeneratorKind::Layered { avg_degree: 6.0 },
            ns: Vec::new(),
            ds: Vec::new(),
            seeds: Vec::new(),
            constants: Constants::default(),
            walk_trials: 50,
            out: None,
            wall_time: false,
            exec: Execution::default(),
        }
    }
}

/// `4096`, `2^12`, or an exclusive range `a..b` (only for plain integers).
fn parse_list<T: TryFrom<u64>>(key: &str, value: &str) -> Result<Vec<T>> {
    let bad = || Error::Config(format!("bad value for {key}: {value:?}"));
    let one = |s: &str| -> Result<u64> {
        let s = s.trim();
        match s.split_once('^') {
            Some((b, e)) => {
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                let e: u32 = e.trim().parse().map_err(|_| bad())?;
                b.checked_pow(e).ok_or_else(bad)
            }
            None => s.parse().map_err(|_| bad()),
        }
    };
    let mut out = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                for v in one(a)?..one(b)? {
                    out.push(T::try_from(v).map_err(|_| bad())?);
                }
            }
            None => out.push(T::try_from(one(item)?).map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl ExperimentConfig {
    /// Sets one `key = value` pair; keys match the file format.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let c = &mut self.constants;
        match key.trim().replace('-', "_").as_str() {
            "mode" => self.mode = value.trim().parse()?,
            "gen" | "generator" => self.generator = value.trim().parse()?,
            "n" => self.ns = parse_list(key, value)?,
            "d" | "D" => self.ds = parse_list(key, value)?,
            "seeds" => self.seeds = parse_list(key, value)?,
            "c_p" => c.c_p = parse_num(key, value)?,
            "c_cong" => c.c_cong = parse_num(key, value)?,
            "c_walk" => c.c_walk = parse_num(key, value)?,
            "c_phase" => c.c_phase = parse_num(key, value)?,
            "round_cap_factor" => c.round_cap_factor = parse_num(key, value)?,
            "walk_trials" => self.walk_trials = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "wall_time" => self.wall_time = parse_num(key, value)?,
            "parallel" => {
                self.exec = if parse_num::<bool>(key, value)? {
                    Execution::Parallel
                } else {
                    Execution::Sequential
                }
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_kv(text)?;
        Ok(config)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [("n", self.ns.is_empty()), ("d", self.ds.is_empty()), ("seeds", self.seeds.is_empty())] {
            if empty {
                return Err(Error::Config(format!("{name} list is empty")));
            }
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 8) {
            return Err(Error::Config(format!("n must be at least 8, got {n}")));
        }
        if let Some(&d) = self.ds.iter().find(|&&d| d < 3) {
            return Err(Error::Config(format!("D must be at least 3, got {d}")));
        }
        let c = &self.constants;
        for (name, v) in [
            ("c_cong", c.c_cong),
            ("c_walk", c.c_walk),
            ("c_phase", c.c_phase),
            ("round_cap_factor", c.round_cap_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(c.c_p.is_finite() && c.c_p >= 0.0) {
            return Err(Error::Config(format!("c_p must be non-negative, got {}", c.c_p)));
        }
        if self.mode == Mode::WalkStudy && self.walk_trials == 0 {
            return Err(Error::Config("walk_trials must be positive".into()));
        }
        Ok(())
    }

    fn sim_config(&self, seed: u64) -> SimConfig {
        SimConfig {
            c_phase: self.constants.c_phase,
            round_cap_factor: self.constants.round_cap_factor,
            c_p: self.constants.c_p,
            c_cong: self.constants.c_cong,
            seed,
            exec: self.exec,
            ..SimConfig::default()
        }
    }

    /// Hex SHA-256 prefix of everything that determines a row.
    pub fn fingerprint(&self, n: usize, d: u32, seed: u64) -> String {
        let c = &self.constants;
        let text = format!(
            "{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}",
            self.mode.name(),
            self.generator,
            c.c_p,
            c.c_cong,
            c.c_walk,
            c.c_phase,
            c.round_cap_factor,
            self.walk_trials,
            n,
            d,
            seed
        );
        Sha256::digest(text.as_bytes())[..8]
            .iter()
            .fold(String::new(), |mut s, b| {
                write!(s, "{b:02x}").unwrap();
                s
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub mode: Mode,
    pub n: usize,
    pub d: u32,
    pub seed: u64,
    pub k_d: f64,
    pub congestion: Option<u32>,
    /// `None` is written as empty, an infinite dilation as `inf`.
    pub dilation: Option<crate::shortcut::Dilation>,
    pub rounds: Option<u64>,
    pub detail: String,
    pub wall_ms: Option<u128>,
    /// `Err(reason)` for failed rows.
    pub status: std::result::Result<(), String>,
    pub config_hash: String,
}

impl Row {
    pub fn quality(&self) -> Option<u64> {
        Some(self.congestion? as u64 + self.dilation?.finite()? as u64)
    }

    pub fn ok(&self) -> bool {
        self.status.is_ok()
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let (status, reason) = match &self.status {
            Ok(()) => ("ok", String::new()),
            Err(r) => ("failed", r.replace([',', '\n'], ";")),
        };
        format!(
            "{},{},{},{},{:.6},{},{},{},{},{},{},{},{},{}",
            self.mode.name(),
            self.n,
            self.d,
            self.seed,
            self.k_d,
            opt(self.congestion.map(|c| c.to_string())),
            opt(self.dilation.map(|d| d.to_string())),
            opt(self.quality().map(|q| q.to_string())),
            opt(self.rounds.map(|r| r.to_string())),
            self.detail,
            opt(self.wall_ms.map(|w| w.to_string())),
            status,
            reason,
            self.config_hash
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }
}

/// Graph and partition of one cell: `max(1, N/4)` parts of sizes
/// `floor(k_D) + 1 ..= 2 floor(k_D) + 2`, graph and partition seeded by `seed`.
pub fn instance(generator: GeneratorKind, n: usize, d: u32, seed: u64, c_p: f64) -> Result<(Graph, Partition, ShortcutParams)> {
    let params = compute_params(n, d, c_p)?;
    let graph = generate_graph(&generator.spec(n, d), seed)?;
    let k = params.k_d.floor() as usize;
    let spec = PartitionSpec {
        count: (params.big_n / 4).max(1),
        min_size: k + 1,
        max_size: 2 * k + 2,
    };
    let partition = generate_partition(&graph, spec, seed)?;
    Ok((graph, partition, params))
}

struct Measured {
    congestion: Option<u32>,
    dilation: Option<crate::shortcut::Dilation>,
    rounds: Option<u64>,
    detail: String,
}

fn run_cell(config: &ExperimentConfig, n: usize, d: u32, seed: u64) -> Result<Measured> {
    let (graph, partition, params) = instance(config.generator, n, d, seed, config.constants.c_p)?;
    match config.mode {
        Mode::Build => {
            let classified = classify_parts(&partition, &params);
            let report = build_and_measure(&graph, &classified, &params, seed, config.exec)?;
            Ok(Measured {
                congestion: Some(report.max_congestion),
                dilation: Some(report.max_large_dilation()),
                rounds: None,
                detail: format!("large={}", classified.large_parts().len()),
            })
        }
        Mode::Simulate => {
            let result = run_with_guessing(&graph, &partition, config.sim_config(seed))?;
            let accepted = result.accepted.expect("run_with_guessing returns accepted results");
            let params = result.params.unwrap();
            let classified = classify_parts(&partition, &params);
            let report = measure_quality(&graph, &classified, result.shortcuts.as_ref().unwrap());
            Ok(Measured {
                congestion: Some(report.max_congestion),
                dilation: Some(report.max_large_dilation()),
                rounds: Some(result.rounds),
                detail: format!("accepted={accepted};guesses={}", result.guesses.len()),
            })
        }
        Mode::Mst => {
            let graph = random_weights(graph, (n as u64).saturating_mul(n as u64), seed)?;
            let mst_config = MstConfig {
                c_p: config.constants.c_p,
                source: ShortcutSource::Centralized,
                exec: config.exec,
            };
            let result = mst_via_shortcuts(&graph, &mst_config, seed)?;
            if result.edges != kruskal_oracle(&graph)? {
                return Err(Error::InvalidParameter("MST differs from the Kruskal oracle".into()));
            }
            Ok(Measured {
                congestion: None,
                dilation: None,
                rounds: Some(result.rounds),
                detail: format!("phases={};weight={}", result.phases, result.weight),
            })
        }
        Mode::WalkStudy => {
            let trials: Vec<u64> = (0..config.walk_trials as u64)
                .map(|j| seed.wrapping_mul(1_000_003).wrapping_add(j))
                .collect();
            let classified = classify_parts(&partition, &params);
            let study = empirical_walk_study(&graph, &classified, &params, &trials, config.constants.c_walk, config.exec)?;
            let detail = study
                .rows
                .iter()
                .map(|r| format!("k{}={}/{}", r.k, r.successes, r.trials))
                .collect::<Vec<_>>()
                .join(";");
            Ok(Measured {
                congestion: None,
                dilation: None,
                rounds: None,
                detail,
            })
        }
    }
}

/// Runs every `(n, D, seed)` cell in config order. Only an invalid config
/// is an error; failing cells become failed rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let cells: Vec<(usize, u32, u64)> = config
        .ns
        .iter()
        .flat_map(|&n| {
            config
                .ds
                .iter()
                .flat_map(move |&d| config.seeds.iter().map(move |&s| (n, d, s)))
        })
        .collect();
    let rows = par::map_collect(config.exec, &cells, |&(n, d, seed)| {
        let start = Instant::now();
        let outcome = run_cell(config, n, d, seed);
        let k_d = compute_params(n, d, config.constants.c_p).map_or(f64::NAN, |p| p.k_d);
        let mut row = Row {
            mode: config.mode,
            n,
            d,
            seed,
            k_d,
            congestion: None,
            dilation: None,
            rounds: None,
            detail: String::new(),
            wall_ms: config.wall_time.then(|| start.elapsed().as_millis()),
            status: Ok(()),
            config_hash: config.fingerprint(n, d, seed),
        };
        match outcome {
            Ok(m) => {
                row.congestion = m.congestion;
                row.dilation = m.dilation;
                row.rounds = m.rounds;
                row.detail = m.detail;
            }
            Err(e) => row.status = Err(e.to_string()),
        }
        row
    });
    Ok(Report { rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub points: usize,
}

/// Least-squares fit of `log2(quality)` against `log2(n)` over the median
/// quality of each `n`. Needs at least 4 distinct `n`.
pub fn fit_exponent(samples: &[(usize, f64)]) -> Result<Fit> {
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = std::collections::BTreeMap::new();
    for &(n, q) in samples {
        if !(q.is_finite() && q > 0.0) || n == 0 {
            return Err(Error::InvalidParameter(format!("quality must be finite and positive, got {q} at n = {n}")));
        }
        by_n.entry(n).or_default().push(q);
    }
    if by_n.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 distinct n, got {}",
            by_n.len()
        )));
    }
    let points: Vec<(f64, f64)> = by_n
        .into_iter()
        .map(|(n, mut qs)| {
            qs.sort_by(f64::total_cmp);
            let m = qs.len();
            let median = if m % 2 == 1 { qs[m / 2] } else { (qs[m / 2 - 1] + qs[m / 2]) / 2.0 };
            ((n as f64).log2(), median.log2())
        })
        .collect();
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    Ok(Fit {
        slope,
        intercept,
        max_residual,
        points: points.len(),
    })
}

/// `(n, quality)` of the ok rows with diameter `d` and a finite quality.
pub fn quality_samples(report: &Report, d: u32) -> Vec<(usize, f64)> {
    report
        .rows
        .iter()
        .filter(|r| r.d == d && r.ok())
        .filter_map(|r| Some((r.n, r.quality()? as f64)))
        .collect()
}

/// Reads `(D, n, quality)` triples back from a report CSV. Rows without a
/// quality, or with a status other than `ok`, are skipped.
pub fn parse_quality_csv(text: &str) -> Result<Vec<(u32, usize, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Config(format!("bad CSV header: {e}")))?
        .clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("CSV has no {name} column")))
    };
    let (cn, cd, cq) = (col("n")?, col("D")?, col("quality")?);
    let status = header.iter().position(|h| h == "status");
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let field = |c: usize| record.get(c).unwrap_or("");
        if status.is_some_and(|s| field(s) != "ok") || field(cq).is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse {
            line,
            msg: format!("bad {what}"),
        };
        out.push((
            field(cd).parse().map_err(|_| bad("D"))?,
            field(cn).parse().map_err(|_| bad("n"))?,
            field(cq).parse().map_err(|_| bad("quality"))?,
        ));
    }
    Ok(out)
}
