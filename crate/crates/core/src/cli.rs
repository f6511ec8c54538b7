//! Command-line front end: `solve`, `figures`, `sweep-hbar` and `poles`.
//!
//! Every command writes plain CSV (`%.12g` numbers, LF endings) into the
//! output directory and optionally an SVG next to it. Failures map to exit
//! codes: 2 for configuration problems, 3 when the energy is not an
//! eigenvalue, 4 when a solver gives up.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::classical::{classical_action, classical_momentum};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SnappedGrid};
use crate::milne::{classical_limit_sweep, FamilyMember, FamilySolution};
use crate::oracle::numerov_solve;
use crate::polar::{moebius_two_sided, reconstruct_psi_antithetic, QmfTrace};
use crate::potentials::{AnalyticState, PotentialModel, System, TabulatedPotential, UnitsConfig};
use crate::quad;
use crate::svg;

pub const DEFAULT_COUNT: usize = 2001;
const TAIL_ACTION: f64 = 27.0;

#[derive(Debug, Parser)]
#[command(name = "qhje", version, about = "Bound states from the quantum Hamilton-Jacobi equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one bound state and write solution.csv
    Solve(Options),
    /// Write the data behind figures 1-4 (fig1.csv ... fig4.csv)
    Figures {
        /// Figure numbers, 1 to 4
        #[arg(required = true, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: Vec<u8>,
        #[command(flatten)]
        options: Options,
    },
    /// Track X' against the classical momentum as hbar shrinks; writes sweep.csv
    SweepHbar {
        /// Decreasing hbar values, comma separated
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        hbar_list: Option<Vec<f64>>,
        /// Energy held fixed across the sweep
        #[arg(long)]
        target_energy: Option<f64>,
        #[command(flatten)]
        options: Options,
    },
    /// Locate the poles of the quantum momentum function; writes poles.csv
    Poles(Options),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// harmonic, morse or tabulated
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub omega: Option<f64>,
    /// Morse well depth
    #[arg(long = "D")]
    pub depth: Option<f64>,
    /// Morse range parameter
    #[arg(long = "a")]
    pub range: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Energy to solve at; required for tabulated potentials
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    /// x_min:x_max:count (count odd, at least 101)
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// family, polar or both
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, svg or csv,svg
    #[arg(long)]
    pub emit: Option<String>,
    /// key=value file; flags win over its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Two-column x V table for the tabulated potential
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Family,
    Polar,
    Both,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "family" => Ok(Self::Family),
            "polar" => Ok(Self::Polar),
            "both" => Ok(Self::Both),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: System,
    pub n: usize,
    pub energy: Option<f64>,
    pub grid: Option<GridSpec>,
    pub method: Method,
    pub out: PathBuf,
    pub emit_csv: bool,
    pub emit_svg: bool,
    pub hbar_list: Option<Vec<f64>>,
    pub target_energy: Option<f64>,
}

/// Parses a `key=value` file; `#` starts a comment. Keys may use `-` or `_`.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", k + 1)))?;
        map.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(map)
}

fn lookup<T: FromStr>(file: &HashMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|e| Error::Parse(format!("config {key} = '{v}': {e}"))))
        .transpose()
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("hbar list '{s}': {e}"))))
        .collect()
}

impl RunConfig {
    pub fn resolve(opts: &Options) -> Result<Self> {
        Self::resolve_with(opts, None, None)
    }

    fn resolve_with(opts: &Options, hbar_list: Option<Vec<f64>>, target: Option<f64>) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => parse_config_file(
                &fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
            )?,
            None => HashMap::new(),
        };
        macro_rules! pick {
            ($field:expr, $key:literal) => {
                match $field.clone() {
                    Some(v) => Some(v),
                    None => lookup(&file, $key)?,
                }
            };
        }
        let potential: String = pick!(opts.potential, "potential").unwrap_or_else(|| "harmonic".into());
        let units = UnitsConfig::new(pick!(opts.hbar, "hbar").unwrap_or(1.0), pick!(opts.mass, "mass").unwrap_or(1.0))?;
        let model = match potential.as_str() {
            "harmonic" => PotentialModel::harmonic(pick!(opts.omega, "omega").unwrap_or(1.0))?,
            "morse" => PotentialModel::morse(
                pick!(opts.depth, "D").unwrap_or(10.0),
                pick!(opts.range, "a").unwrap_or(1.0),
            )?,
            "tabulated" => {
                let path: PathBuf = pick!(opts.table, "table")
                    .ok_or_else(|| Error::Argument("tabulated potential needs --table".into()))?;
                PotentialModel::Tabulated(TabulatedPotential::from_file(&path)?)
            }
            other => return Err(Error::Argument(format!("unknown potential '{other}'"))),
        };
        let grid = match pick!(opts.grid, "grid") {
            Some(s) => {
                let spec: GridSpec = String::as_str(&s).parse()?;
                if spec.count < 101 || spec.count.is_multiple_of(2) {
                    return Err(Error::Argument(format!("grid count {} must be odd and at least 101", spec.count)));
                }
                Some(spec)
            }
            None => None,
        };
        let emit: String = pick!(opts.emit, "emit").unwrap_or_else(|| "csv".into());
        let mut emit_csv = false;
        let mut emit_svg = false;
        for part in emit.split(',') {
            match part.trim() {
                "csv" => emit_csv = true,
                "svg" => emit_svg = true,
                other => return Err(Error::Argument(format!("unknown emit kind '{other}'"))),
            }
        }
        let hbar_list = match hbar_list {
            Some(list) => Some(list),
            None => file.get("hbar-list").map(|s| parse_list(s)).transpose()?,
        };
        let target_energy = match target {
            Some(e) => Some(e),
            None => lookup(&file, "target-energy")?,
        };
        Ok(Self {
            system: System::new(model, units),
            n: pick!(opts.n, "n").unwrap_or(0),
            energy: pick!(opts.energy, "energy"),
            grid,
            method: pick!(opts.method, "method").map(|s: String| s.parse()).transpose()?.unwrap_or(Method::Family),
            out: pick!(opts.out, "out").unwrap_or_else(|| PathBuf::from(".")),
            emit_csv,
            emit_svg,
            hbar_list,
            target_energy,
        })
    }

    /// Energy of level `n`, checking that `n` is bound.
    pub fn energy(&self) -> Result<f64> {
        if let Some(count) = self.system.bound_state_count() {
            if self.n >= count {
                return Err(Error::Unbound { n: self.n, count });
            }
        }
        match self.energy {
            Some(e) => Ok(e),
            None => match self.system.eigenenergy(self.n) {
                Err(Error::Unsupported(_)) => {
                    Err(Error::Argument("tabulated potentials need --energy".into()))
                }
                other => other.map(|l| l.energy),
            },
        }
    }

    fn grid_for(&self, energy: f64) -> Result<GridSpec> {
        match self.grid {
            Some(g) => Ok(g),
            None => auto_grid(&self.system, energy, DEFAULT_COUNT),
        }
    }
}

/// Grid reaching a WKB action of about 27 past each turning point (or the
/// edge of a tabulated potential).
pub fn auto_grid(system: &System, energy: f64, count: usize) -> Result<GridSpec> {
    let tp = system.turning_points(energy)?;
    let (dmin, dmax) = system.domain();
    let h = tp.width() / 400.0;
    let reach = |start: f64, dir: f64| {
        let mut x = start;
        let mut action = 0.0;
        while action < TAIL_ACTION {
            let next = x + dir * h;
            if next <= dmin || next >= dmax {
                return if dir < 0.0 { dmin } else { dmax };
            }
            x = next;
            action += h * system.kappa_squared(energy, x).max(0.0).sqrt();
        }
        x
    };
    GridSpec::new(reach(tp.x_left, -1.0), reach(tp.x_right, 1.0), count)
}

/// C-style `%.12g`.
pub fn format_g(v: f64) -> String {
    if !v.is_finite() {
        return String::new();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{v:.*}", (11 - exp) as usize))
    }
}

/// Header plus rows of optional numbers; `None` prints as an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.map(format_g).unwrap_or_default()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn write(&self, dir: &Path, stem: &str, title: &str, cfg: &RunConfig) -> Result<()> {
        fs::create_dir_all(dir)?;
        if cfg.emit_csv {
            fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        }
        if cfg.emit_svg {
            fs::write(dir.join(format!("{stem}.svg")), svg::line_plot(title, &self.header, &self.rows))?;
        }
        Ok(())
    }
}

/// Reference wave function on `grid`: closed form where one exists,
/// Numerov otherwise.
fn oracle_psi(cfg: &RunConfig, energy: f64, spec: &GridSpec, grid: &[f64]) -> Result<Vec<f64>> {
    match cfg.system.model {
        PotentialModel::Tabulated(_) => {
            let uniform = spec.points();
            let sol = numerov_solve(&cfg.system, energy, &uniform)?;
            Ok(grid.iter().map(|&x| quad::interpolate(&uniform, &sol.psi, x)).collect())
        }
        _ => {
            let st = AnalyticState::new(&cfg.system, cfg.n)?;
            Ok(grid.iter().map(|&x| st.value(x)).collect())
        }
    }
}

fn polar_trace(system: &System, energy: f64, grid: &SnappedGrid) -> Result<QmfTrace> {
    let xm = 0.5 * (grid.x[grid.left] + grid.x[grid.right]);
    moebius_two_sided(system, energy, &grid.x, xm)
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<()> {
    let system = &cfg.system;
    let energy = cfg.energy()?;
    let spec = cfg.grid_for(energy)?;
    let tp = system.turning_points(energy)?;
    let grid = SnappedGrid::new(&spec, &tp)?;
    let n = grid.x.len();
    let oracle = oracle_psi(cfg, energy, &spec, &grid.x)?;

    let mut psi = vec![None; n];
    let mut action = vec![[None; 3]; n];
    let mut p_im = vec![None; n];
    println!("potential {}  n = {}  E = {}", system.model.name(), cfg.n, format_g(energy));
    println!("turning points {} {}", format_g(tp.x_left), format_g(tp.x_right));

    if cfg.method != Method::Polar {
        let sol = FamilySolution::new(system, energy, &spec, FamilyMember::Anchored)?;
        let wf = sol.wavefunction(&system.units)?;
        let a = &sol.action;
        for k in 0..a.grid.len() {
            action[grid.left + k] = [Some(a.real_action[k]), Some(a.real_momentum[k]), Some(a.imag_action[k])];
        }
        let defect = a.total_action() - (cfg.n as f64 + 0.5) * std::f64::consts::PI * system.units.hbar;
        println!("quantization defect {}", format_g(defect));
        println!("family max|psi - psi_oracle| {}", format_g(linf(&wf.psi, &oracle)));
        psi = wf.psi.iter().map(|&v| Some(v)).collect();
    }
    if cfg.method != Method::Family {
        let trace = polar_trace(system, energy, &grid)?;
        for (slot, (p, ok)) in p_im.iter_mut().zip(trace.p_l.iter().zip(&trace.regular)) {
            *slot = if *ok && p.im.is_finite() { Some(p.im) } else { None };
        }
        let estimates: Vec<f64> = trace.poles.iter().map(|p| p.x0).collect();
        let rec = reconstruct_psi_antithetic(&trace, &system.units, &estimates)?;
        println!("polar poles in allowed region {}", trace.poles_in(tp.x_left, tp.x_right).len());
        println!("polar max|psi - psi_oracle| {}", format_g(linf(&rec.psi, &oracle)));
        if cfg.method == Method::Polar {
            psi = rec.psi.iter().map(|&v| Some(v)).collect();
        }
    }

    let rows = (0..n)
        .map(|i| {
            let x = grid.x[i];
            let [xa, xp, y] = action[i];
            Ok(vec![Some(x), Some(system.eval_potential(x)?), psi[i], Some(oracle[i]), xa, xp, y, p_im[i]])
        })
        .collect::<Result<Vec<_>>>()?;
    let table = Table { header: vec!["x", "V", "psi", "psi_oracle", "X", "Xp", "Y", "pL_im"], rows };
    table.write(&cfg.out, "solution", "solution", cfg)
}

/// Data series behind one of the four figures.
pub fn figure_table(which: u8, cfg: &RunConfig) -> Result<Table> {
    let units = cfg.system.units;
    let (system, n) = match which {
        1..=3 => {
            let omega = match cfg.system.model {
                PotentialModel::Harmonic { omega } => omega,
                _ => 1.0,
            };
            (System::new(PotentialModel::harmonic(omega)?, units), 2)
        }
        4 => {
            let (d, a) = match cfg.system.model {
                PotentialModel::Morse { depth, range } => (depth, range),
                _ => (10.0, 1.0),
            };
            (System::new(PotentialModel::morse(d, a)?, units), 2)
        }
        other => return Err(Error::Argument(format!("figure index {other} not in 1..4"))),
    };
    let energy = system.eigenenergy(n)?.energy;
    let spec = auto_grid(&system, energy, DEFAULT_COUNT)?;
    let sol = FamilySolution::new(&system, energy, &spec, FamilyMember::Anchored)?;
    let wf = sol.wavefunction(&system.units)?;
    let a = &sol.action;
    let some = |v: f64| Some(v);
    let table = match which {
        1 => {
            let w0 = classical_action(&system, energy, &a.grid)?.w0;
            Table {
                header: vec!["x", "X", "W0"],
                rows: (0..a.grid.len()).map(|k| vec![some(a.grid[k]), some(a.real_action[k]), some(w0[k])]).collect(),
            }
        }
        2 => Table {
            header: vec!["x", "Xp", "pC"],
            rows: (0..a.grid.len())
                .map(|k| {
                    let pc = classical_momentum(&system, energy, a.grid[k]).re;
                    vec![some(a.grid[k]), some(a.real_momentum[k]), some(pc)]
                })
                .collect(),
        },
        3 => {
            let scale = wf.amplitude / system.units.hbar.sqrt();
            Table {
                header: vec!["x", "envelope", "phase_factor", "product"],
                rows: (0..a.grid.len())
                    .map(|k| {
                        let envelope = scale * a.amplitude[k];
                        let phase = (a.real_action[k] / a.hbar + a.phase_offset).sin();
                        vec![some(a.grid[k]), some(envelope), some(phase), some(envelope * phase)]
                    })
                    .collect(),
            }
        }
        _ => {
            let g = &sol.grid;
            let rows = (0..g.x.len())
                .map(|i| {
                    let y1 = (i <= g.left).then(|| sol.left.y[g.left - i]);
                    let y3 = (i >= g.right).then(|| sol.right.y[i - g.right]);
                    let x_act = (g.left..=g.right).contains(&i).then(|| a.real_action[i - g.left]);
                    vec![some(g.x[i]), y1, y3, x_act, some(wf.psi[i])]
                })
                .collect();
            Table { header: vec!["x", "Y1", "Y3", "X", "psi"], rows }
        }
    };
    Ok(table)
}

const FIGURE_TITLES: [&str; 4] = [
    "X(x) and W0(x), harmonic n=2",
    "X'(x) and p_C(x), harmonic n=2",
    "envelope, phase factor and product, harmonic n=2",
    "Y1, Y3, X and psi, Morse n=2",
];

pub fn cmd_figures(which: &[u8], cfg: &RunConfig) -> Result<()> {
    for &k in which {
        let table = figure_table(k, cfg)?;
        table.write(&cfg.out, &format!("fig{k}"), FIGURE_TITLES[(k - 1) as usize], cfg)?;
        println!("fig{k}: {} rows", table.rows.len());
    }
    Ok(())
}

pub fn cmd_sweep_hbar(cfg: &RunConfig) -> Result<()> {
    let list = cfg.hbar_list.clone().unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.1]);
    let target = cfg.target_energy.unwrap_or(2.5);
    let rows = classical_limit_sweep(&cfg.system, target, &list, DEFAULT_COUNT)?;
    println!("hbar n E sup|Xp-pC| sup|Yp| phase_offset");
    for r in &rows {
        println!(
            "{} {} {} {} {} {}",
            format_g(r.hbar),
            r.n,
            format_g(r.energy),
            format_g(r.sup_xp_minus_pc),
            format_g(r.sup_yp),
            format_g(r.phase_offset)
        );
    }
    let table = Table {
        header: vec!["hbar", "sup_Xp_minus_pc", "sup_Yp"],
        rows: rows.iter().map(|r| vec![Some(r.hbar), Some(r.sup_xp_minus_pc), Some(r.sup_yp)]).collect(),
    };
    table.write(&cfg.out, "sweep", "classical-limit sweep", cfg)
}

pub fn cmd_poles(cfg: &RunConfig) -> Result<()> {
    if cfg.method == Method::Family {
        return Err(Error::Argument("poles needs --method polar or both".into()));
    }
    let energy = cfg.energy()?;
    let spec = cfg.grid_for(energy)?;
    let tp = cfg.system.turning_points(energy)?;
    let grid = SnappedGrid::new(&spec, &tp)?;
    let trace = polar_trace(&cfg.system, energy, &grid)?;
    let poles = trace.poles_in(tp.x_left, tp.x_right);
    let spurious = trace.poles.len() - poles.len();
    for p in &poles {
        println!("pole x0 = {}  residue = ({}, {})", format_g(p.x0), format_g(p.residue.re), format_g(p.residue.im));
    }
    if spurious > 0 {
        println!("{spurious} pole(s) outside the allowed region from the classical-momentum start");
    }
    let table = Table {
        header: vec!["x0", "residue_re", "residue_im"],
        rows: poles.iter().map(|p| vec![Some(p.x0), Some(p.residue.re), Some(p.residue.im)]).collect(),
    };
    table.write(&cfg.out, "poles", "poles", cfg)
}

/// Exit code for a failure class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotEigenvalue { .. } => 3,
        Error::Stiffness { .. }
        | Error::Unresolved { .. }
        | Error::FamilyDegeneracy(_)
        | Error::Refinement { .. }
        | Error::BadNodeEstimate { .. } => 4,
        _ => 2,
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(opts) => cmd_solve(&RunConfig::resolve(&opts)?),
        Command::Figures { which, options } => cmd_figures(&which, &RunConfig::resolve(&options)?),
        Command::SweepHbar { hbar_list, target_energy, options } => {
            cmd_sweep_hbar(&RunConfig::resolve_with(&options, hbar_list, target_energy)?)
        }
        Command::Poles(opts) => cmd_poles(&RunConfig::resolve(&opts)?),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
