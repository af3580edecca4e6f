//! The `partsent` command-line front end.
//!
//! Every subcommand writes a JSON report. A report holds `schema_version`, the
//! echoed inputs, the results and any warnings. Reports carry no timestamps and
//! do not depend on the thread count, so the same arguments give the same bytes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use partsent::coset::{
    coset_partition, subadditivity_slack, symmetrize_pdf, Side, SubadditivityVariant,
};
use partsent::entropy::{nats_to_bits, shannon_entropy, DiscretePdf, Pdf};
use partsent::geometry::Body;
use partsent::groups::{FiniteGroup, GroupJson, GroupKind};
use partsent::kinematic::{
    containment, convergence_csv, convergence_table, mc_motion_volume, parts_entropy_obstacle, pkf,
    MotionVolumeEstimate, MotionVolumeMode, PartsEntropyMethod, MIN_SAMPLES,
};
use partsent::replication::{
    dosr, simulate_generations, symmetrize_shape, Aggregation, ComplexityLedger, GenerationStats,
    ShapeSample,
};
use partsent::rng;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default directory for reports.
pub const OUT_DIR_ENV: &str = "PARTSENT_OUT_DIR";

/// Slack below this counts as a violation of subadditivity.
const SLACK_TOL: f64 = -1e-12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: partsent::Error,
    },
    #[error(transparent)]
    Core(#[from] partsent::Error),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(partsent::Error::Infeasible { .. }) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "partsent", version, about = "Parts entropy, kinematic formulas and symmetry analyses")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Report path. Defaults to `$PARTSENT_OUT_DIR/<subcommand>.json`, else stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Units for entropy-valued outputs.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
    /// Worker threads for data-parallel work. Does not change any result.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats_to_bits(nats),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Collision,
    Containment,
}

impl From<Mode> for MotionVolumeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Collision => MotionVolumeMode::Collision,
            Mode::Containment => MotionVolumeMode::Containment,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AggregationArg {
    Max,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Correction {
    Uncorrected,
    Corrected,
    Both,
}

/// Optional Monte Carlo cross-check.
#[derive(Debug, Args)]
pub struct McCheck {
    /// Sample count for a Monte Carlo cross-check (at least 1000).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for the Monte Carlo cross-check.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl McCheck {
    fn resolve(&self) -> CliResult<Option<(usize, u64)>> {
        match (self.n, self.seed) {
            (None, None) => Ok(None),
            (Some(n), Some(seed)) => Ok(Some((check_n(n)?, seed))),
            (Some(_), None) => Err(CliError::Usage("--seed is required with --n".into())),
            (None, Some(_)) => Err(CliError::Usage("--n is required with --seed".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal kinematic formula: motion volume of placements where two bodies touch.
    Pkf {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        mc: McCheck,
    },
    /// Containment formula for body `a` moving inside container `b`.
    Containment {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        mc: McCheck,
    },
    /// Monte Carlo motion volume, compared with the matching closed form.
    Mc {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Write a convergence table (n, estimate, se) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Entropy of the free motions of a part in a container, around an optional obstacle.
    PartsEntropy {
        #[arg(long)]
        part: PathBuf,
        #[arg(long)]
        container: PathBuf,
        #[arg(long)]
        obstacle: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Mc)]
        method: Method,
        /// Required with `--method analytic`: the part can reach every position around the obstacle.
        #[arg(long)]
        assume_no_jamming: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Entropy of a pdf file, and optionally its KL divergence from a reference pdf.
    Entropy {
        #[arg(long)]
        pdf: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Check coset, double-coset and nested subadditivity on random pdfs over a finite group.
    Theorems {
        /// `octahedral`, `cyclic:6`, ..., or a group JSON file.
        #[arg(long)]
        group: String,
        /// Subgroup name (`cN`, `e`, `g`).
        #[arg(long)]
        subgroup: String,
        /// Right subgroup for the double-coset check. Defaults to `--subgroup`.
        #[arg(long)]
        right: Option<String>,
        /// Subgroup of `--subgroup` for the nested check.
        #[arg(long)]
        inner: Option<String>,
        #[arg(long)]
        pdfs: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Average a discrete pdf over a subgroup, or a shape over its symmetry group.
    Symmetrize {
        #[arg(long, required_unless_present = "shape", conflicts_with = "shape")]
        pdf: Option<PathBuf>,
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, required_unless_present = "shape")]
        group: Option<String>,
        #[arg(long, required_unless_present = "shape")]
        subgroup: Option<String>,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Degree of self-replication.
    Dosr {
        #[arg(long)]
        system: f64,
        /// Comma-separated part complexities.
        #[arg(long, value_delimiter = ',', required = true)]
        parts: Vec<f64>,
        #[arg(long, value_enum, default_value_t = AggregationArg::Max)]
        aggregation: AggregationArg,
    },
    /// Copy a part over many generations with and without symmetrization.
    Generations {
        /// Shape file. Without it, a regular polygon with `--regular` sides under its cyclic group.
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        regular: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        generations: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Correction::Both)]
        mode: Correction,
        /// Write the per-generation table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pkf { .. } => "pkf",
            Command::Containment { .. } => "containment",
            Command::Mc { .. } => "mc",
            Command::PartsEntropy { .. } => "parts-entropy",
            Command::Entropy { .. } => "entropy",
            Command::Theorems { .. } => "theorems",
            Command::Symmetrize { .. } => "symmetrize",
            Command::Dosr { .. } => "dosr",
            Command::Generations { .. } => "generations",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Infeasible,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub status: Status,
    pub units: Units,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(command: &str, units: Units, inputs: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            status: Status::Ok,
            units,
            inputs,
            results: Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Infeasible => 2,
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Parse `args` (including the program name), run, write the report and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli).and_then(|report| {
        emit(&cli, &report)?;
        Ok(report.exit_code())
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command, honoring `--threads`.
pub fn execute(cli: &Cli) -> CliResult<Report> {
    match cli.common.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

/// Where the report goes: `--out`, else the env directory, else stdout (`None`).
pub fn report_path(cli: &Cli) -> Option<PathBuf> {
    cli.common.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{}.json", cli.command.name())))
    })
}

fn emit(cli: &Cli, report: &Report) -> CliResult<()> {
    let text = report.to_json_string();
    match report_path(cli) {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Read and validate a geometry file.
pub fn load_geometry(path: &Path) -> CliResult<Body> {
    let text = read_file(path)?;
    Body::from_json_str(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_pdf(path: &Path) -> CliResult<Pdf> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        source: e.into(),
    })
}

/// `kind`, `kind:n` (for cyclic and dihedral), or a path to a group JSON file.
pub fn load_group(text: &str) -> CliResult<FiniteGroup> {
    if text.ends_with(".json") {
        let path = Path::new(text);
        let text = read_file(path)?;
        let input = |source: partsent::Error| CliError::Input {
            path: path.to_path_buf(),
            source,
        };
        let json: GroupJson = serde_json::from_str(&text).map_err(|e| input(e.into()))?;
        return FiniteGroup::from_json(json).map_err(input);
    }
    let (kind, n) = match text.split_once(':') {
        Some((k, n)) => (
            k,
            n.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad group order in `{text}`")))?,
        ),
        None => (text, 0),
    };
    let kind: GroupKind = kind.parse()?;
    if matches!(kind, GroupKind::Cyclic | GroupKind::Dihedral) && n == 0 {
        return Err(CliError::Usage(format!("group `{text}` needs an order, e.g. `{kind}:4`")));
    }
    Ok(FiniteGroup::construct(kind, n)?)
}

fn check_n(n: usize) -> CliResult<usize> {
    if n < MIN_SAMPLES {
        return Err(CliError::Usage(format!("--n must be at least {MIN_SAMPLES}, got {n}")));
    }
    Ok(n)
}

fn geometry_input(path: &Path, body: &Body) -> Value {
    json!({ "path": path.display().to_string(), "geometry": body.to_json() })
}

fn estimate_json(e: &MotionVolumeEstimate) -> Value {
    json!({
        "value": e.value,
        "std_error": e.std_error,
        "ci95": [e.ci_low, e.ci_high],
        "n_samples": e.n_samples,
        "seed": e.seed,
        "hit_count": e.hit_count,
        "sampling_volume": e.sampling_volume,
    })
}

fn outside_ci_warning(what: &str, value: f64, e: &MotionVolumeEstimate) -> Option<String> {
    (!e.ci_contains(value)).then(|| {
        format!(
            "{what} value {value} lies outside the Monte Carlo 95% CI [{}, {}]",
            e.ci_low, e.ci_high
        )
    })
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    let units = cli.common.units;
    let name = cli.command.name();
    match &cli.command {
        Command::Pkf { a, b, mc } => {
            let check = mc.resolve()?;
            let (ba, bb) = (load_geometry(a)?, load_geometry(b)?);
            let mut report = Report::new(
                name,
                units,
                json!({ "a": geometry_input(a, &ba), "b": geometry_input(b, &bb), "n": check.map(|c| c.0), "seed": check.map(|c| c.1) }),
            );
            let analytic = pkf(&ba, &bb)?;
            let mut results = json!({ "analytic": analytic });
            if let Some((n, seed)) = check {
                let e = mc_motion_volume(MotionVolumeMode::Collision, &ba, &bb, n, seed)?;
                report.warnings.extend(outside_ci_warning("kinematic formula", analytic, &e));
                results["monte_carlo"] = estimate_json(&e);
            }
            report.results = results;
            Ok(report)
        }
        Command::Containment { a, b, mc } => {
            let check = mc.resolve()?;
            let (part, cont) = (load_geometry(a)?, load_geometry(b)?);
            let mut report = Report::new(
                name,
                units,
                json!({ "a": geometry_input(a, &part), "b": geometry_input(b, &cont), "n": check.map(|c| c.0), "seed": check.map(|c| c.1) }),
            );
            let mut formula = containment(&part, &cont)?;
            let mut results = json!({});
            if let Some((n, seed)) = check {
                let e = mc_motion_volume(MotionVolumeMode::Containment, &part, &cont, n, seed)?;
                formula = formula.check_against(&e);
                report.warnings.extend(outside_ci_warning("containment formula", formula.formula_value, &e));
                results["monte_carlo"] = estimate_json(&e);
            }
            results["formula"] = json!(formula.formula_value);
            results["formula_warning"] = json!(formula.warning);
            report.warnings.splice(0..0, formula.reasons);
            report.results = results;
            Ok(report)
        }
        Command::Mc { mode, a, b, n, seed, csv } => {
            let n = check_n(*n)?;
            let (ba, bb) = (load_geometry(a)?, load_geometry(b)?);
            let mode = MotionVolumeMode::from(*mode);
            let mut report = Report::new(
                name,
                units,
                json!({ "mode": mode, "a": geometry_input(a, &ba), "b": geometry_input(b, &bb), "n": n, "seed": seed }),
            );
            let e = mc_motion_volume(mode, &ba, &bb, n, *seed)?;
            let (label, formula, flagged) = match mode {
                MotionVolumeMode::Collision => ("kinematic formula", pkf(&ba, &bb)?, false),
                MotionVolumeMode::Containment => {
                    let f = containment(&ba, &bb)?.check_against(&e);
                    report.warnings.extend(f.reasons.iter().cloned());
                    ("containment formula", f.formula_value, f.warning)
                }
            };
            let outside = !e.ci_contains(formula);
            report.warnings.extend(outside_ci_warning(label, formula, &e));
            let mut results = json!({
                "estimate": estimate_json(&e),
                "formula": formula,
                "formula_in_ci": !outside,
                "formula_warning": flagged || outside,
            });
            if let Some(path) = csv {
                let sizes = convergence_sizes(n);
                let rows = convergence_table(mode, &ba, &bb, &sizes, *seed)?;
                write_file(path, &convergence_csv(&rows))?;
                results["convergence_csv"] = json!(path.display().to_string());
            }
            report.results = results;
            Ok(report)
        }
        Command::PartsEntropy {
            part,
            container,
            obstacle,
            method,
            assume_no_jamming,
            n,
            seed,
        } => {
            let method = match method {
                Method::Analytic => {
                    if !assume_no_jamming {
                        return Err(CliError::Usage(
                            "--method analytic requires --assume-no-jamming".into(),
                        ));
                    }
                    PartsEntropyMethod::AnalyticNoJamming
                }
                Method::Mc => {
                    let (Some(n), Some(seed)) = (n, seed) else {
                        return Err(CliError::Usage("--method mc requires --n and --seed".into()));
                    };
                    PartsEntropyMethod::MonteCarlo {
                        n_samples: check_n(*n)?,
                        seed: *seed,
                    }
                }
            };
            let bp = load_geometry(part)?;
            let bc = load_geometry(container)?;
            let bo = obstacle.as_deref().map(load_geometry).transpose()?;
            let mut inputs = json!({
                "part": geometry_input(part, &bp),
                "container": geometry_input(container, &bc),
                "method": method,
            });
            if let (Some(path), Some(body)) = (obstacle, &bo) {
                inputs["obstacle"] = geometry_input(path, body);
            }
            let mut report = Report::new(name, units, inputs);
            match parts_entropy_obstacle(&bp, &bc, bo.as_ref(), method) {
                Ok(pe) => {
                    let mut results = json!({
                        "entropy": units.convert(pe.value),
                        "free_volume": pe.free_volume,
                        "containment_volume": pe.containment_volume,
                        "collision_volume": pe.collision_volume,
                    });
                    if let Some(se) = pe.std_error {
                        results["std_error"] = json!(units.convert(se));
                    }
                    if let Some([lo, hi]) = pe.ci {
                        results["ci95"] = json!([units.convert(lo), units.convert(hi)]);
                    }
                    if let Some(e) = &pe.free_volume_estimate {
                        results["free_volume_estimate"] = estimate_json(e);
                    }
                    report.warnings = pe.warnings;
                    report.results = results;
                }
                Err(partsent::Error::Infeasible {
                    free,
                    containment,
                    collision,
                }) => {
                    report.status = Status::Infeasible;
                    report.results = json!({
                        "free_volume": free,
                        "containment_volume": containment,
                        "collision_volume": collision,
                    });
                    report
                        .warnings
                        .push(format!("free motion volume {free} is not positive, so the entropy is undefined"));
                }
                Err(e) => return Err(e.into()),
            }
            Ok(report)
        }
        Command::Entropy { pdf, reference } => {
            let p = load_pdf(pdf)?;
            let mut inputs = json!({ "pdf": pdf.display().to_string() });
            let mut results = json!({ "entropy": units.convert(p.entropy()) });
            if let Some(r) = reference {
                let q = load_pdf(r)?;
                inputs["reference"] = json!(r.display().to_string());
                results["kl_divergence"] = json!(units.convert(p.kl_divergence(&q)?));
            }
            let mut report = Report::new(name, units, inputs);
            report.results = results;
            Ok(report)
        }
        Command::Theorems {
            group,
            subgroup,
            right,
            inner,
            pdfs,
            seed,
        } => {
            if *pdfs == 0 {
                return Err(CliError::Usage("--pdfs must be positive".into()));
            }
            let g = load_group(group)?;
            let k = g.named_subgroup(subgroup)?;
            let h = match right {
                Some(r) => g.named_subgroup(r)?,
                None => k.clone(),
            };
            let mut variants = vec![
                (format!("coset:{subgroup}"), SubadditivityVariant::Coset { h: k.clone() }),
                (
                    format!("double_coset:{subgroup}\\G/{}", right.as_deref().unwrap_or(subgroup)),
                    SubadditivityVariant::DoubleCoset { k: k.clone(), h },
                ),
            ];
            if let Some(name) = inner {
                let hi = g.named_subgroup(name)?;
                variants.push((format!("coset:{name}"), SubadditivityVariant::Coset { h: hi.clone() }));
                variants.push((
                    format!("nested:{name}<{subgroup}"),
                    SubadditivityVariant::Nested { k: k.clone(), h: hi },
                ));
            }
            let samples: Vec<DiscretePdf> = (0..*pdfs)
                .into_par_iter()
                .map(|i| random_pdf(g.order(), *seed, i as u64))
                .collect::<partsent::Result<_>>()?;
            let mut results = serde_json::Map::new();
            let mut all_ok = true;
            let mut report = Report::new(
                name,
                units,
                json!({ "group": group, "order": g.order(), "subgroup": subgroup, "right": right, "inner": inner, "pdfs": pdfs, "seed": seed }),
            );
            for (label, variant) in &variants {
                let slacks: Vec<f64> = samples
                    .par_iter()
                    .map(|f| subadditivity_slack(f, &g, variant))
                    .collect::<partsent::Result<_>>()?;
                let (argmin, min) = slacks
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
                let violations = slacks.iter().filter(|&&s| s < SLACK_TOL).count();
                all_ok &= violations == 0;
                if violations > 0 {
                    report.warnings.push(format!("{label}: {violations} pdfs with negative slack"));
                }
                let mean = slacks.iter().sum::<f64>() / slacks.len() as f64;
                results.insert(
                    label.clone(),
                    json!({
                        "min_slack": units.convert(min),
                        "argmin_pdf": argmin,
                        "mean_slack": units.convert(mean),
                        "violations": violations,
                    }),
                );
            }
            report.results = json!({ "variants": results, "all_nonnegative": all_ok, "tolerance": SLACK_TOL });
            Ok(report)
        }
        Command::Symmetrize {
            pdf,
            shape,
            group,
            subgroup,
            side,
        } => {
            if let Some(path) = shape {
                let (s, input) = load_shape(path)?;
                let sym = symmetrize_shape(&s);
                let mut report = Report::new(name, units, json!({ "shape": input }));
                report.results = json!({
                    "vertices": sym.vertices(),
                    "asymmetry_before": s.asymmetry(),
                    "asymmetry_after": sym.asymmetry(),
                    "deviation_before": s.deviation(),
                    "deviation_after": sym.deviation(),
                });
                return Ok(report);
            }
            let (Some(pdf), Some(group), Some(subgroup)) = (pdf, group, subgroup) else {
                return Err(CliError::Usage("symmetrize needs --pdf, --group and --subgroup, or --shape".into()));
            };
            let g = load_group(group)?;
            let k = g.named_subgroup(subgroup)?;
            let side = match side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let probs = match load_pdf(pdf)? {
                Pdf::Discrete { probs, .. } => probs,
                Pdf::Grid(_) => {
                    return Err(CliError::Usage("symmetrize works on discrete pdfs over a finite group".into()))
                }
            };
            let sym = symmetrize_pdf(&probs, &g, &k, side)?;
            let dec = coset_partition(&g, &k, side)?;
            let mut report = Report::new(
                name,
                units,
                json!({ "pdf": pdf.display().to_string(), "group": group, "subgroup": subgroup, "side": side }),
            );
            report.results = json!({
                "pdf": Pdf::Discrete { domain: Some(g.name().to_string()), probs: sym.clone() },
                "entropy_before": units.convert(shannon_entropy(&probs)),
                "entropy_after": units.convert(shannon_entropy(&sym)),
                "cosets": dec.dump(),
            });
            Ok(report)
        }
        Command::Dosr {
            system,
            parts,
            aggregation,
        } => {
            let aggregation = match aggregation {
                AggregationArg::Max => Aggregation::Max,
                AggregationArg::Mean => Aggregation::Mean,
            };
            let ledger = ComplexityLedger::new(*system, parts.clone(), aggregation)?;
            let mut report = Report::new(name, units, serde_json::to_value(&ledger).expect("ledger serializes"));
            let value = dosr(&ledger)?;
            if value < 1.0 {
                report
                    .warnings
                    .push(format!("degree of self-replication {value} is below 1"));
            }
            report.results = json!({ "dosr": value, "part_complexity": ledger.part_complexity() });
            Ok(report)
        }
        Command::Generations {
            shape,
            regular,
            sigma,
            generations,
            trials,
            seed,
            mode,
            csv,
        } => {
            let trials = check_n(*trials)
                .map_err(|_| CliError::Usage(format!("--trials must be at least {MIN_SAMPLES}")))?;
            let (s, shape_input) = match shape {
                Some(path) => load_shape(path)?,
                None => regular_polygon(*regular)?,
            };
            let mut report = Report::new(
                name,
                units,
                json!({ "shape": shape_input, "sigma": sigma, "generations": generations, "trials": trials, "seed": seed, "mode": format!("{mode:?}").to_lowercase() }),
            );
            let run = |corrected| simulate_generations(&s, *sigma, *generations, corrected, trials, *seed);
            let mut runs: Vec<GenerationStats> = Vec::new();
            if *mode != Correction::Corrected {
                runs.push(run(false)?);
            }
            if *mode != Correction::Uncorrected {
                runs.push(run(true)?);
            }
            let mut results = json!({});
            for st in &runs {
                let key = if st.corrected { "corrected" } else { "uncorrected" };
                results[key] = json!({
                    "rows": st.rows,
                    "msd_slope": st.msd_slope(),
                    "log_log_slope": st.log_log_slope(),
                });
            }
            if let [u, c] = runs.as_slice() {
                results["msd_slope_ratio"] = json!(u.msd_slope() / c.msd_slope());
            }
            if let Some(path) = csv {
                let mut text = String::new();
                for (i, st) in runs.iter().enumerate() {
                    let body = st.to_csv();
                    text.push_str(if i == 0 { &body } else { body.split_once('\n').map_or("", |x| x.1) });
                }
                write_file(path, &text)?;
                results["csv"] = json!(path.display().to_string());
            }
            report.results = results;
            Ok(report)
        }
    }
}

/// Geometric sample sizes from 1000 up to `n`.
fn convergence_sizes(n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut m = MIN_SAMPLES;
    while m < n {
        sizes.push(m);
        m *= 10;
    }
    sizes.push(n);
    sizes
}

/// A random pdf with a per-pdf concentration, drawn from stream `index` of `seed`.
fn random_pdf(order: usize, seed: u64, index: u64) -> partsent::Result<DiscretePdf> {
    let mut r = rng::stream(seed, index);
    let power = 1.0 + 7.0 * r.random::<f64>();
    let sparse = r.random::<f64>() < 0.25;
    let weights: Vec<f64> = (0..order)
        .map(|_| {
            let w = r.random::<f64>().powf(power);
            if sparse && r.random::<f64>() < 0.5 {
                0.0
            } else {
                w
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return DiscretePdf::delta(order, 0);
    }
    DiscretePdf::from_weights(&weights)
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeFile {
    dim: usize,
    group: String,
    nominal: Vec<Vec<f64>>,
    #[serde(default)]
    vertices: Option<Vec<Vec<f64>>>,
}

fn load_shape(path: &Path) -> CliResult<(ShapeSample, Value)> {
    let text = read_file(path)?;
    let input = |source: partsent::Error| CliError::Input {
        path: path.to_path_buf(),
        source,
    };
    let file: ShapeFile = serde_json::from_str(&text).map_err(|e| input(e.into()))?;
    let g = load_group(&file.group)?;
    let mut s = ShapeSample::new(file.dim, &file.nominal, &g).map_err(input)?;
    if let Some(v) = &file.vertices {
        s = s.with_vertices(v).map_err(input)?;
    }
    Ok((
        s,
        json!({ "path": path.display().to_string(), "dim": file.dim, "group": file.group, "nominal": file.nominal, "vertices": file.vertices }),
    ))
}

fn regular_polygon(n: usize) -> CliResult<(ShapeSample, Value)> {
    if n < 3 {
        return Err(CliError::Usage(format!("--regular needs at least 3 sides, got {n}")));
    }
    let nominal: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let g = FiniteGroup::cyclic(n)?;
    let s = ShapeSample::new(2, &nominal, &g)?;
    Ok((s, json!({ "regular": n, "group": format!("cyclic:{n}"), "nominal": nominal })))
}
