//! Command-line front end shared by the `noisy-vqe` binary and the tests.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::fold::{fold_experiment_with, FOLD_DEFAULT_M_MAX, FOLD_DEFAULT_NOISE, FOLD_DEFAULT_P2};
use super::landscape::{dimer2_minima, landscape_raster_for, periodic_grid};
use super::output::{
    write_branches_csv, write_distribution_csv, write_file, write_paired_csv, write_scan_csv, Manifest,
};
use super::scan::{compare_perturbative, linspace, scan_noise_with, ScanTable, DEFAULT_CLUSTER_TOL};
use super::transition::{detect_transition, TransitionMethod, TransitionReport, TransitionSettings};
use crate::ansatz::AnsatzVariant;
use crate::cost::{CostContext, CostKind};
use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, exact_ground, SpinChainSpec};
use crate::noise::{CnotNoise, NoiseModel};
use crate::optimize::OptimizerConfig;
use crate::qcore::C64;

#[derive(Debug, Parser)]
#[command(name = "noisy-vqe", version, about = "Noisy VQE experiments on Heisenberg chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact ground energy and state of the chain
    Exact(Opts),
    /// Raster of the two-parameter dimer cost
    Landscape(Opts),
    /// Multi-start scan over the bit-flip rate with transition detection
    Scan(Opts),
    /// Exact and first-order cost scans side by side
    ComparePert(Opts),
    /// Minima energies under CNOT folding
    Fold(Opts),
    /// Every multi-start solution energy per bit-flip rate
    Distribution(Opts),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exact(_) => "exact",
            Command::Landscape(_) => "landscape",
            Command::Scan(_) => "scan",
            Command::ComparePert(_) => "compare-pert",
            Command::Fold(_) => "fold",
            Command::Distribution(_) => "distribution",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Command::Exact(o)
            | Command::Landscape(o)
            | Command::Scan(o)
            | Command::ComparePert(o)
            | Command::Fold(o)
            | Command::Distribution(o) => o,
        }
    }
}

/// Flags; the same keys are accepted in the `--config` file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Opts {
    /// Number of spins
    #[arg(long)]
    n: Option<usize>,
    /// Ansatz layers (general variant)
    #[arg(long)]
    layers: Option<usize>,
    /// dimer8, dimer2, general or general(N,L)
    #[arg(long)]
    variant: Option<String>,
    /// Exchange coupling J
    #[arg(long)]
    coupling: Option<f64>,
    /// Field h
    #[arg(long)]
    field: Option<f64>,
    #[arg(long = "px-min")]
    px_min: Option<f64>,
    #[arg(long = "px-max")]
    px_max: Option<f64>,
    #[arg(long = "px-steps")]
    px_steps: Option<usize>,
    /// Read --px-min/--px-max as p_x·n_layers·N
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    scaled: Option<bool>,
    /// Bit-flip rate of the landscape raster
    #[arg(long)]
    px: Option<f64>,
    /// Raster points per axis
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "cluster-tol")]
    cluster_tol: Option<f64>,
    /// continuation or distribution-crossover
    #[arg(long)]
    method: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Flat TOML file with the same keys as the flags
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    /// Per-CNOT error rate for fold
    #[arg(long)]
    p2: Option<f64>,
    /// local-depolarizing, depolarizing2 or bitflip
    #[arg(long = "cnot-noise")]
    cnot_noise: Option<String>,
}

impl Opts {
    /// Flags take precedence over the file.
    fn over(self, file: Opts) -> Opts {
        macro_rules! pick {
            ($($f:ident),*) => { Opts { $($f: self.$f.or(file.$f),)* config: self.config } };
        }
        pick!(
            n, layers, variant, coupling, field, px_min, px_max, px_steps, scaled, px, grid, starts, seed,
            max_iter, cluster_tol, method, out_dir, m_max, p2, cnot_noise
        )
    }
}

fn load_config(path: &Path) -> Result<Opts> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Fully resolved run settings, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub variant: AnsatzVariant,
    pub chain: SpinChainSpec,
    pub px_grid: Vec<f64>,
    pub landscape_px: f64,
    pub grid: usize,
    pub optimizer: OptimizerConfig,
    pub cluster_tolerance: f64,
    pub method: TransitionMethod,
    pub out_dir: PathBuf,
    pub m_max: usize,
    pub p2: f64,
    pub cnot_noise: CnotNoise,
}

fn parse_method(s: &str) -> Result<TransitionMethod> {
    match s {
        "continuation" => Ok(TransitionMethod::Continuation),
        "distribution-crossover" | "distribution" => Ok(TransitionMethod::DistributionCrossover),
        "slope-change" => Ok(TransitionMethod::SlopeChange),
        other => Err(Error::Config(format!("unknown transition method `{other}`"))),
    }
}

fn resolve(o: &Opts) -> Result<Settings> {
    let variant = match o.variant.as_deref() {
        Some("general") => AnsatzVariant::General {
            num_qubits: o.n.unwrap_or(2),
            num_layers: o.layers.unwrap_or(1),
        },
        Some(s) => s.parse()?,
        None => match (o.n, o.layers) {
            (None | Some(2), None | Some(1)) => AnsatzVariant::Dimer8,
            (n, l) => AnsatzVariant::General {
                num_qubits: n.unwrap_or(2),
                num_layers: l.unwrap_or(1),
            },
        },
    };
    let n = o.n.unwrap_or(variant.num_qubits());
    if n != variant.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: variant.num_qubits(),
            actual: n,
        });
    }
    let chain = SpinChainSpec::new(n, o.coupling.unwrap_or(1.0), o.field.unwrap_or(1.0))?;
    let general = matches!(variant, AnsatzVariant::General { .. });
    let scaled = o.scaled.unwrap_or(general);
    let (lo_default, hi_default) = match (scaled, general) {
        (true, _) => (0.0, 0.5),
        (false, false) => (0.0, 0.12),
        (false, true) => (0.0, 0.5 / variant.noise_scale()),
    };
    let lo = o.px_min.unwrap_or(lo_default);
    let hi = o.px_max.unwrap_or(hi_default);
    let steps = o.px_steps.unwrap_or(25);
    if steps == 0 {
        return Err(Error::Config("--px-steps must be at least 1".into()));
    }
    let factor = if scaled { variant.noise_scale() } else { 1.0 };
    let px_grid: Vec<f64> = linspace(lo, hi, steps).into_iter().map(|v| v / factor).collect();
    let mut optimizer = OptimizerConfig::default()
        .with_starts(o.starts.unwrap_or(128))
        .with_seed(o.seed.unwrap_or(0));
    if let Some(m) = o.max_iter {
        optimizer.max_iterations = m;
    }
    optimizer.validate()?;
    let p2 = o.p2.unwrap_or(FOLD_DEFAULT_P2);
    Ok(Settings {
        variant,
        chain,
        px_grid,
        landscape_px: o.px.unwrap_or(0.0),
        grid: o.grid.unwrap_or(400),
        optimizer,
        cluster_tolerance: o.cluster_tol.unwrap_or(DEFAULT_CLUSTER_TOL),
        method: parse_method(o.method.as_deref().unwrap_or("continuation"))?,
        out_dir: o.out_dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        m_max: o.m_max.unwrap_or(FOLD_DEFAULT_M_MAX),
        p2,
        cnot_noise: match o.cnot_noise.as_deref() {
            Some(s) => s.parse()?,
            None => FOLD_DEFAULT_NOISE,
        },
    })
}

fn format_amplitude(a: C64) -> String {
    if a.im.abs() < 1e-12 {
        format!("{:+.12}", a.re)
    } else {
        format!("{:+.12}{:+.12}i", a.re, a.im)
    }
}

fn run_exact(s: &Settings) -> Result<()> {
    let h = build_hamiltonian(&s.chain)?;
    let g = exact_ground(&h)?;
    let n = s.chain.num_spins;
    println!("N = {n}, J = {}, h = {}", s.chain.coupling, s.chain.field);
    println!("E_g = {:.15}", g.energy);
    println!("degeneracy = {}", g.degeneracy());
    // Fix the global phase so the largest amplitude is real and positive.
    let amps = g.state.amplitudes();
    let lead = amps
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    println!("ground state amplitudes (qubit 0 leftmost):");
    for (k, a) in amps.iter().enumerate() {
        let a = a * phase;
        if a.norm() > 1e-12 {
            println!("  |{:0width$b}>  {}", k, format_amplitude(a), width = n.max(1));
        }
    }
    Ok(())
}

fn print_transition(t: &TransitionReport) {
    match (t.threshold_px, t.threshold_scaled) {
        (Some(p), Some(sc)) => println!("threshold p_x = {p:.6} (scaled {sc:.6}) [{}]", t.method),
        _ => println!("threshold: none [{}]", t.method),
    }
    println!(
        "branch slopes: low {:.6}, high {:.6}",
        t.branch_low_slope, t.branch_high_slope
    );
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    best_energies: Vec<f64>,
    overlaps: Vec<f64>,
    transition: Option<&'a TransitionReport>,
    warnings: &'a [String],
}

fn scan_table(s: &Settings, cost: CostKind) -> Result<ScanTable> {
    scan_noise_with(s.variant, &s.chain, &s.px_grid, &s.optimizer, cost, s.cluster_tolerance)
}

fn print_rows(table: &ScanTable) {
    println!("{:>12} {:>10} {:>16} {:>9} {:>8}", "p_x", "scaled", "best_energy", "overlap", "clusters");
    for r in &table.rows {
        println!(
            "{:>12.6} {:>10.5} {:>16.10} {:>9.5} {:>8}",
            r.p_x,
            r.scaled_px,
            r.best_energy,
            r.best_overlap,
            r.branches.len()
        );
    }
    for w in &table.warnings {
        println!("warning: {w}");
    }
}

fn run_scan(s: &Settings, name: &str) -> Result<()> {
    let table = scan_table(s, CostKind::Exact)?;
    print_rows(&table);
    let mut outputs = vec![write_file(&s.out_dir, "scan.csv", |w| write_scan_csv(&table, w))?];
    let transition = if table.rows.len() >= 4 {
        let t = detect_transition(&table, s.method, &s.optimizer, &TransitionSettings::default())?;
        print_transition(&t);
        if let Some(c) = &t.curves {
            outputs.push(write_file(&s.out_dir, "branches.csv", |w| write_branches_csv(c, w))?);
        }
        Some(t)
    } else {
        None
    };
    if name == "distribution" {
        outputs.push(write_file(&s.out_dir, "distribution.csv", |w| write_distribution_csv(&table, w))?);
    }
    let summary = ScanSummary {
        best_energies: table.best_energies(),
        overlaps: table.overlaps(),
        transition: transition.as_ref(),
        warnings: &table.warnings,
    };
    finish(s, name, outputs, summary)
}

fn run_compare(s: &Settings) -> Result<()> {
    let pair = compare_perturbative(s.variant, &s.chain, &s.px_grid, &s.optimizer)?;
    println!("{:>12} {:>18} {:>18}", "p_x", "exact", "perturbative");
    for (a, b) in pair.exact.rows.iter().zip(&pair.perturbative.rows) {
        println!("{:>12.6} {:>18.12} {:>18.12}", a.p_x, a.best_energy, b.best_energy);
    }
    println!("max |exact - perturbative| = {:.3e}", pair.max_gap());
    let outputs = vec![write_file(&s.out_dir, "scan.csv", |w| write_paired_csv(&pair, w))?];
    let summary = serde_json::json!({ "max_gap": pair.max_gap() });
    finish(s, "compare-pert", outputs, summary)
}

fn run_landscape(s: &Settings) -> Result<()> {
    if s.variant != AnsatzVariant::Dimer2 && s.variant != AnsatzVariant::Dimer8 {
        return Err(Error::Config("landscape is defined for the dimer only".into()));
    }
    if s.grid == 0 {
        return Err(Error::Config("--grid must be at least 1".into()));
    }
    let ctx = CostContext::new(AnsatzVariant::Dimer2, &s.chain, NoiseModel::bit_flip(s.landscape_px))?;
    let g = periodic_grid(s.grid);
    let raster = landscape_raster_for(&ctx, &g, &g)?;
    let a = raster.argmin();
    println!("grid minimum E = {:.10} at (t0, t1) = ({:.4}, {:.4})", a.energy, a.t0, a.t1);
    let basins = raster.basins(1e-3);
    println!("basins deeper than 1e-3: {}", basins.len());
    for (k, b) in basins.iter().enumerate() {
        println!(
            "  minimum {}: E = {:.6} at ({:.4}, {:.4}), depth {:.4}",
            k + 1,
            b.minimum.energy,
            b.minimum.t0,
            b.minimum.t1,
            b.depth
        );
    }
    let outputs = vec![write_file(&s.out_dir, "landscape.csv", |w| raster.to_csv(w))?];
    finish(s, "landscape", outputs, serde_json::json!({ "argmin": a, "basins": basins }))
}

fn run_fold(s: &Settings) -> Result<()> {
    let (m1, m2) = dimer2_minima(s.grid)?;
    println!("minimum 1: E = {:.10} at ({:.6}, {:.6})", m1.energy, m1.theta[0], m1.theta[1]);
    println!("minimum 2: E = {:.10} at ({:.6}, {:.6})", m2.energy, m2.theta[0], m2.theta[1]);
    let ms: Vec<usize> = (0..=s.m_max).collect();
    let report = fold_experiment_with(&m1.theta, &m2.theta, &ms, s.p2, s.cnot_noise)?;
    match report.crossover_m {
        Some(m) => println!("crossover_m = {m}"),
        None => println!("crossover_m = none"),
    }
    let (a, b) = report.pre_crossover_slopes();
    println!("pre-crossover slopes: min1 {a:.3e}, min2 {b:.3e}");
    let outputs = vec![write_file(&s.out_dir, "fold.csv", |w| report.to_csv(w))?];
    let summary = serde_json::json!({
        "minimum1": m1, "minimum2": m2, "crossover_m": report.crossover_m,
    });
    finish(s, "fold", outputs, summary)
}

fn finish<S: Serialize>(s: &Settings, name: &str, outputs: Vec<PathBuf>, summary: S) -> Result<()> {
    let names = outputs
        .iter()
        .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
        .collect();
    let path = Manifest::new(name, s, names, summary).write(&s.out_dir)?;
    for p in outputs.iter().chain([&path]) {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn dispatch(command: &Command) -> Result<()> {
    let cli_opts = command.opts().clone();
    let opts = match &cli_opts.config {
        Some(path) => {
            let file = load_config(path)?;
            cli_opts.over(file)
        }
        None => cli_opts,
    };
    let s = resolve(&opts)?;
    match command {
        Command::Exact(_) => run_exact(&s),
        Command::Landscape(_) => run_landscape(&s),
        Command::Scan(_) => run_scan(&s, "scan"),
        Command::Distribution(_) => run_scan(&s, "distribution"),
        Command::ComparePert(_) => run_compare(&s),
        Command::Fold(_) => run_fold(&s),
    }
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit status: 0 success, 2 usage, 3 invalid physics parameters,
/// 4 numerical failure, 1 I/O.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error ({}): {e}", cli.command.name());
            e.exit_code()
        }
    }
}
