//! The batch commands behind the `rdtm` binary.
//!
//! Each command turns a [`RunConfig`] into report text; [`run`] adds file
//! handling and maps failures onto exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | configuration or usage error |
//! | 3 | grid interior exhausted |
//! | 4 | internal invariant failure, including a nonzero exact residual |
//!
//! Output files are written to a temporary sibling and renamed into place,
//! so a failing command never leaves partial output behind.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{BackendKind, ExactBackend, FieldAlgebra, FieldNorm};
use crate::config::{parse_config, GridConfig, OutputFormat, Precision, RunConfig};
use crate::exact::rat;
use crate::grid::{Grid, GridBackend, GridField};
use crate::real::{DoubleDouble, Real};
use crate::series::{self, InitialCondition, SeriesSolution};
use crate::verify::{self, TableRow};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Read { .. } => EXIT_CONFIG,
            CommandError::Write { .. } => EXIT_INVARIANT,
            CommandError::Core(e) => match e {
                Error::Config { .. }
                | Error::InvalidSpec(_)
                | Error::InvalidGrid(_)
                | Error::UnsupportedStencil { .. } => EXIT_CONFIG,
                Error::DomainExhausted { .. } | Error::OutOfRegion { .. } => EXIT_DOMAIN,
                Error::Invariant(_)
                | Error::ScaleMismatch { .. }
                | Error::IndexOutOfRange { .. }
                | Error::GridMismatch => EXIT_INVARIANT,
            },
        }
    }
}

pub type CommandResult<T> = std::result::Result<T, CommandError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Table,
    Residual,
    Compare,
}

/// Command-line settings that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub backend: Option<BackendKind>,
    pub out: Option<PathBuf>,
    /// Test hook: perturb `U_k` before the residual check.
    pub corrupt: Option<usize>,
}

fn cli_err(message: impl Into<String>) -> Error {
    Error::Config {
        line: 0,
        message: message.into(),
    }
}

/// Applies `--order` and `--backend`. Switching to the exact backend drops
/// the grid geometry; switching to the grid backend requires it.
pub fn apply_overrides(mut cfg: RunConfig, ov: &Overrides) -> crate::Result<RunConfig> {
    if let Some(order) = ov.order {
        cfg.solve.order = order;
    }
    match ov.backend {
        Some(BackendKind::Exact) => {
            if !cfg.ic.family.is_hyperbolic_polynomial() {
                return Err(cli_err(format!(
                    "ic family `{}` requires the grid backend",
                    cfg.ic.family.name()
                )));
            }
            cfg.solve.backend = BackendKind::Exact;
            cfg.solve.grid = None;
        }
        Some(BackendKind::Grid) => {
            if cfg.solve.grid.is_none() {
                return Err(cli_err("--backend grid needs a [grid] section in the config"));
            }
            cfg.solve.backend = BackendKind::Grid;
        }
        None => {}
    }
    Ok(cfg)
}

// ---------------------------------------------------------------- formatting

/// Scientific notation with exactly ten significant digits, e.g. `1.251447262e-6`.
pub fn format_value(v: f64) -> String {
    format!("{v:.9e}")
}

/// Shortest scientific form with at least one fractional digit, e.g. `1.0e-5`.
pub fn format_parameter(v: f64) -> String {
    let s = format!("{v:e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !mantissa.contains('.') => format!("{mantissa}.0e{exp}"),
        _ => s,
    }
}

/// Shortest round-tripping decimal, e.g. `0.5`.
pub fn format_coordinate(v: f64) -> String {
    format!("{v:?}")
}

pub const TABLE_HEADER: &str = "lambda,x,y,t,u_rdtm,self_error,ref_error";

pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = format!("{TABLE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},",
            format_parameter(r.lambda),
            format_coordinate(r.x),
            format_coordinate(r.y),
            format_parameter(r.t),
            format_value(r.rdtm_value),
            format_value(r.self_error)
        );
    }
    out
}

pub fn render_plot(rows: &[TableRow]) -> String {
    let mut out = String::from("x,y,self_error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_coordinate(r.x),
            format_coordinate(r.y),
            format_value(r.self_error)
        );
    }
    out
}

// ---------------------------------------------------------------- solving

fn exact_solution(cfg: &RunConfig, order: usize) -> crate::Result<SeriesSolution<crate::HyperPoly>> {
    series::solve_exact(&cfg.pde, &cfg.ic.exact()?, order)
}

fn grid_of(cfg: &RunConfig) -> crate::Result<&GridConfig> {
    cfg.solve
        .grid
        .as_ref()
        .ok_or_else(|| cli_err("this command needs a [grid] section"))
}

fn grid_solution<T: Real>(
    cfg: &RunConfig,
    geometry: &GridConfig,
    order: usize,
) -> crate::Result<(GridBackend<T>, SeriesSolution<GridField<T>>)> {
    let grid = Arc::new(Grid::square(geometry.min, geometry.max, geometry.points)?);
    let backend = GridBackend::<T>::new(grid, geometry.accuracy)?;
    let ic = InitialCondition::with_amplitude(backend.sample(cfg.ic.sampler::<T>()), cfg.ic.amplitude.clone());
    let solution = series::solve(&backend, &cfg.pde, &ic, order)?;
    Ok((backend, solution))
}

fn amplitude(cfg: &RunConfig) -> f64 {
    f64::from_rational(&cfg.ic.amplitude)
}

// ---------------------------------------------------------------- commands

/// Coefficient dump. Exact backend: one row per term of each `U_k`,
/// `k,s_exp,c_exp,numerator,denominator`, over the common denominator of
/// `U_k`. Grid backend: per-`k` field statistics on the valid interior.
pub fn cmd_solve(cfg: &RunConfig) -> crate::Result<String> {
    match cfg.solve.backend {
        BackendKind::Exact => {
            let s = exact_solution(cfg, cfg.solve.order)?;
            let mut out = String::from("k,s_exp,c_exp,numerator,denominator\n");
            for (k, u) in s.coeffs().iter().enumerate() {
                let (den, terms) = u.common_denominator();
                for (m, num) in terms {
                    let _ = writeln!(out, "{k},{},{},{num},{den}", m.sinh, m.cosh);
                }
            }
            Ok(out)
        }
        BackendKind::Grid => {
            let geometry = grid_of(cfg)?;
            match geometry.precision {
                Precision::F64 => grid_stats::<f64>(cfg, geometry),
                Precision::DoubleDouble => grid_stats::<DoubleDouble>(cfg, geometry),
            }
        }
    }
}

fn grid_stats<T: Real>(cfg: &RunConfig, geometry: &GridConfig) -> crate::Result<String> {
    let (_, s) = grid_solution::<T>(cfg, geometry, cfg.solve.order)?;
    let mut out = String::from("k,margin_x,margin_y,min,max,max_abs\n");
    for (k, u) in s.coeffs().iter().enumerate() {
        let (mx, my) = u.margins();
        let (lo, hi) = u.range();
        let _ = writeln!(
            out,
            "{k},{mx},{my},{},{},{}",
            format_value(lo),
            format_value(hi),
            format_value(u.max_abs())
        );
    }
    Ok(out)
}

/// `ũ_K` and `|ũ_{K+2} − ũ_K|` at each evaluation point.
pub fn cmd_table(cfg: &RunConfig) -> crate::Result<String> {
    let order = cfg.solve.order;
    let rows = match cfg.solve.backend {
        BackendKind::Exact => {
            let s = exact_solution(cfg, order + 2)?;
            verify::table_rows_from(&ExactBackend, &s, order, amplitude(cfg), &cfg.eval)?
        }
        BackendKind::Grid => {
            let geometry = grid_of(cfg)?;
            match geometry.precision {
                Precision::F64 => grid_table::<f64>(cfg, geometry)?,
                Precision::DoubleDouble => grid_table::<DoubleDouble>(cfg, geometry)?,
            }
        }
    };
    Ok(match cfg.output.format {
        OutputFormat::Table => render_table(&rows),
        OutputFormat::Plot => render_plot(&rows),
    })
}

fn grid_table<T: Real>(cfg: &RunConfig, geometry: &GridConfig) -> crate::Result<Vec<TableRow>> {
    let order = cfg.solve.order;
    let (backend, s) = grid_solution::<T>(cfg, geometry, order + 2)?;
    verify::table_rows_from(&backend, &s, order, amplitude(cfg), &cfg.eval)
}

/// Series residual report; a nonzero exact residual is an invariant failure.
pub fn cmd_residual(cfg: &RunConfig, corrupt: Option<usize>) -> crate::Result<String> {
    let order = cfg.solve.order;
    if let Some(k) = corrupt {
        if k > order {
            return Err(cli_err(format!("cannot corrupt U_{k} of a series of order {order}")));
        }
    }
    match cfg.solve.backend {
        BackendKind::Exact => {
            let mut s = exact_solution(cfg, order)?;
            if let Some(k) = corrupt {
                let bumped = verify::perturb_coefficient(&s.coeffs()[k], s.coeffs()[0].mu(), &rat(1, 1 << 52));
                s = s.with_coefficient(k, bumped)?;
            }
            let report = verify::residual_series_exact(&cfg.pde, &s)?;
            let flags = report.exact_zero_flags();
            if let Some(k) = flags.iter().position(|z| !z) {
                return Err(Error::Invariant(format!(
                    "series residual R_{k} is not identically zero"
                )));
            }
            let mut out = String::from("k,exact_zero\n");
            for (k, z) in flags.iter().enumerate() {
                let _ = writeln!(out, "{k},{z}");
            }
            Ok(out)
        }
        BackendKind::Grid => {
            let geometry = grid_of(cfg)?;
            match geometry.precision {
                Precision::F64 => grid_residual::<f64>(cfg, geometry, corrupt),
                Precision::DoubleDouble => grid_residual::<DoubleDouble>(cfg, geometry, corrupt),
            }
        }
    }
}

fn grid_residual<T: Real>(cfg: &RunConfig, geometry: &GridConfig, corrupt: Option<usize>) -> crate::Result<String> {
    let (backend, mut s) = grid_solution::<T>(cfg, geometry, cfg.solve.order)?;
    if let Some(k) = corrupt {
        let u = &s.coeffs()[k];
        let bump = backend.sample(|_, _| T::from_f64(1e-3 * u.max_abs().max(1.0)));
        s = s.with_coefficient(k, backend.add(u, &bump)?)?;
    }
    let report = verify::residual_series(&backend, &cfg.pde, &s, T::EPSILON)?;
    let mut out = String::from("k,max_abs,bound,within_bound\n");
    for (k, (norm, bound)) in report.norms.iter().zip(&report.bounds).enumerate() {
        let max_abs = match norm {
            FieldNorm::Sampled { max_abs } => *max_abs,
            FieldNorm::Exact { .. } => unreachable!("grid backend reports sampled norms"),
        };
        let within = max_abs <= *bound;
        if !within {
            return Err(Error::Invariant(format!(
                "grid residual R_{k} = {max_abs:e} exceeds its roundoff allowance {bound:e}"
            )));
        }
        let _ = writeln!(out, "{k},{},{},{within}", format_value(max_abs), format_value(*bound));
    }
    Ok(out)
}

/// Grid against exact coefficients: `k,spacing,max_error,observed_order`.
/// With `refine = true` the grid is solved again at half the spacing and
/// the observed order is reported on the refined rows.
pub fn cmd_compare(cfg: &RunConfig) -> crate::Result<String> {
    let geometry = grid_of(cfg)?;
    let exact = exact_solution(cfg, cfg.solve.order)?;
    let mut levels = vec![geometry.clone()];
    if geometry.refine {
        levels.push(geometry.refined());
    }
    let errors = levels
        .iter()
        .map(|g| match g.precision {
            Precision::F64 => compare_level::<f64>(cfg, g, &exact),
            Precision::DoubleDouble => compare_level::<DoubleDouble>(cfg, g, &exact),
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut out = String::from("k,spacing,max_error,observed_order\n");
    for (level, errs) in errors.iter().enumerate() {
        for (k, e) in errs.iter().enumerate() {
            let order = if level == 0 {
                String::new()
            } else {
                format!("{:.3}", verify::observed_order(errors[level - 1][k], *e))
            };
            let _ = writeln!(
                out,
                "{k},{},{},{order}",
                format_parameter(levels[level].spacing()),
                format_value(*e)
            );
        }
    }
    Ok(out)
}

fn compare_level<T: Real>(
    cfg: &RunConfig,
    geometry: &GridConfig,
    exact: &SeriesSolution<crate::HyperPoly>,
) -> crate::Result<Vec<f64>> {
    let (_, s) = grid_solution::<T>(cfg, geometry, cfg.solve.order)?;
    let (lo, hi) = geometry.check.map_or((f64::NEG_INFINITY, f64::INFINITY), |c| (-c, c));
    exact
        .coeffs()
        .iter()
        .zip(s.coeffs())
        .map(|(u, field)| {
            if geometry.check.is_some() && !verify::interior_covers_box(field, lo, hi) {
                let (margin_x, margin_y) = field.margins();
                return Err(Error::DomainExhausted {
                    margin_x,
                    margin_y,
                    nx: field.grid().nx(),
                    ny: field.grid().ny(),
                });
            }
            verify::max_error_in_box(u, field, lo, hi)
        })
        .collect()
}

// ---------------------------------------------------------------- driver

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn load_config(path: &Path, overrides: &Overrides) -> CommandResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| CommandError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(apply_overrides(parse_config(&text)?, overrides)?)
}

/// Runs one command end to end and returns the report text together with
/// where it was written, if anywhere.
pub fn execute(
    command: Command,
    config_path: &Path,
    overrides: &Overrides,
) -> CommandResult<(String, Option<PathBuf>)> {
    let cfg = load_config(config_path, overrides)?;
    let report = match command {
        Command::Solve => cmd_solve(&cfg)?,
        Command::Table => cmd_table(&cfg)?,
        Command::Residual => cmd_residual(&cfg, overrides.corrupt)?,
        Command::Compare => cmd_compare(&cfg)?,
    };
    let target = overrides
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    if let Some(path) = &target {
        write_atomic(path, &report).map_err(|source| CommandError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok((report, target))
}

/// [`execute`] with reporting: the report goes to stdout unless written to
/// a file, errors go to stderr. Returns the process exit code.
pub fn run(command: Command, config_path: &Path, overrides: &Overrides) -> i32 {
    match execute(command, config_path, overrides) {
        Ok((report, None)) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(report.as_bytes()).is_err() {
                return EXIT_INVARIANT;
            }
            EXIT_OK
        }
        Ok((_, Some(_))) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const ZK22: &str = "[pde]\na = 1\nb = 1/8\nk = 1/8\nn = 2\n[ic]\nfamily = cosh_squared\ncoefficient = -4/3\namplitude = 1e-5\nscale = 1\n";

    #[test]
    fn parameter_and_value_formats() {
        assert_eq!(format_parameter(1e-5), "1.0e-5");
        assert_eq!(format_parameter(1e-3), "1.0e-3");
        assert_eq!(format_parameter(2.5e-4), "2.5e-4");
        assert_eq!(format_parameter(0.0), "0.0e0");
        assert_eq!(format_value(1.2514472616888e-6), "1.251447262e-6");
        assert_eq!(format_value(-1.695387292855e-5), "-1.695387293e-5");
        assert_eq!(format_value(0.0), "0.000000000e0");
        assert_eq!(format_coordinate(0.5), "0.5");
        assert_eq!(format_coordinate(0.0), "0.0");
    }

    #[test]
    fn zk22_table_rows() {
        let cfg = parse_config(ZK22).unwrap();
        let csv = cmd_table(&cfg).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], TABLE_HEADER);
        assert_eq!(lines.len(), 10);
        assert!(
            lines[2].starts_with("1.0e-5,0.0,0.5,1.0e-3,-1.695387293e-5,"),
            "{}",
            lines[2]
        );
        assert!(lines[2].ends_with(','));
    }

    #[test]
    fn zero_amplitude_table_is_all_zero() {
        let cfg = parse_config(&ZK22.replace("amplitude = 1e-5", "amplitude = 0")).unwrap();
        for line in cmd_table(&cfg).unwrap().lines().skip(1) {
            let cols: Vec<_> = line.split(',').collect();
            assert_eq!(cols[0], "0.0e0");
            assert_eq!((cols[4], cols[5]), ("0.000000000e0", "0.000000000e0"));
        }
    }

    #[test]
    fn solve_dump_for_order_zero_is_the_initial_condition() {
        let cfg = apply_overrides(
            parse_config(&ZK22.replace("amplitude = 1e-5", "amplitude = 1")).unwrap(),
            &Overrides {
                order: Some(0),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(
            cmd_solve(&cfg).unwrap(),
            "k,s_exp,c_exp,numerator,denominator\n0,0,2,-4,3\n"
        );
    }

    #[test]
    fn residual_command_detects_corruption() {
        let cfg = parse_config(ZK22).unwrap();
        assert_eq!(
            cmd_residual(&cfg, None).unwrap(),
            "k,exact_zero\n0,true\n1,true\n2,true\n3,true\n"
        );
        assert!(matches!(cmd_residual(&cfg, Some(2)), Err(Error::Invariant(_))));
        assert!(matches!(cmd_residual(&cfg, Some(9)), Err(Error::Config { .. })));
    }

    #[test]
    fn overrides_enforce_grid_geometry() {
        let cfg = parse_config(ZK22).unwrap();
        let err = apply_overrides(
            cfg.clone(),
            &Overrides {
                backend: Some(BackendKind::Grid),
                ..Overrides::default()
            },
        )
        .unwrap_err();
        assert_eq!(CommandError::from(err).exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn grid_commands_on_a_small_grid() {
        let text = format!("{ZK22}[solve]\norder = 2\nbackend = grid\n[grid]\nmin = -3\nmax = 3\npoints = 61\naccuracy = 4\nrefine = true\ncheck = 1\n");
        let cfg = parse_config(&text).unwrap();
        let stats = cmd_solve(&cfg).unwrap();
        assert!(stats.starts_with("k,margin_x,margin_y,min,max,max_abs\n0,0,0,"));
        let report = cmd_compare(&cfg).unwrap();
        let last = report.lines().last().unwrap();
        let order: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert!((3.5..4.5).contains(&order), "{report}");
        cmd_residual(&cfg, None).unwrap();
        assert!(matches!(cmd_residual(&cfg, Some(1)), Err(Error::Invariant(_))));

        let tight = parse_config(
            &text
                .replace("points = 61", "points = 13")
                .replace("check = 1", "check = 2.5"),
        )
        .unwrap();
        let err = cmd_compare(&tight).unwrap_err();
        assert_eq!(CommandError::from(err).exit_code(), EXIT_DOMAIN);
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
