//! Run configuration files.
//!
//! The format is sectioned `key = value` text:
//!
//! ```text
//! # ZK(3,3) worked example
//! [pde]
//! a = 1
//! b = 2
//! k = 2
//! n = 3
//!
//! [ic]
//! family = sinh
//! coefficient = 3/2
//! amplitude = 1e-5
//! scale = 1/6
//!
//! [solve]
//! order = 4
//! backend = exact
//! ```
//!
//! Rational-valued keys accept `p/q`, integers and decimal or scientific
//! notation, all read exactly. A `[grid]` section is required exactly when
//! `backend = grid`. An absent `[eval]` section means the 3×3 lattice
//! `{0, 0.5, 1}²` at `t = 0.001`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::algebra::BackendKind;
use crate::exact::{parse_rational, rat, HyperPoly, Rational};
use crate::real::Real;
use crate::series::{InitialCondition, PdeSpec};
use crate::{Error, Result};

/// Shape of the initial profile `coefficient · λ · g(μ (x + y))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcFamily {
    Sinh,
    Cosh,
    CoshSquared,
    /// `sech²`, grid backend only.
    SechSquared,
    /// `exp(−s²)`, grid backend only.
    Gaussian,
}

impl IcFamily {
    pub const ALL: [IcFamily; 5] = [
        IcFamily::Sinh,
        IcFamily::Cosh,
        IcFamily::CoshSquared,
        IcFamily::SechSquared,
        IcFamily::Gaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IcFamily::Sinh => "sinh",
            IcFamily::Cosh => "cosh",
            IcFamily::CoshSquared => "cosh_squared",
            IcFamily::SechSquared => "sech_squared",
            IcFamily::Gaussian => "gaussian",
        }
    }

    /// Whether the profile has a closed form in the exact backend.
    pub fn is_hyperbolic_polynomial(self) -> bool {
        matches!(self, IcFamily::Sinh | IcFamily::Cosh | IcFamily::CoshSquared)
    }

    /// `g(s)` in the scalar type `T`.
    pub fn profile<T: Real>(self, s: T) -> T {
        match self {
            IcFamily::Sinh => s.sinh(),
            IcFamily::Cosh => s.cosh(),
            IcFamily::CoshSquared => s.cosh() * s.cosh(),
            IcFamily::SechSquared => {
                let c = s.cosh();
                T::one() / (c * c)
            }
            IcFamily::Gaussian => (-(s * s)).exp(),
        }
    }
}

impl FromStr for IcFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        IcFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown ic family `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IcConfig {
    pub family: IcFamily,
    pub coefficient: Rational,
    /// `λ`
    pub amplitude: Rational,
    /// `μ`
    pub scale: Rational,
}

impl IcConfig {
    /// Closed-form initial condition, for the hyperbolic families.
    pub fn exact(&self) -> Result<InitialCondition<HyperPoly>> {
        let (c, l, m) = (self.coefficient.clone(), self.amplitude.clone(), self.scale.clone());
        match self.family {
            IcFamily::Sinh => Ok(InitialCondition::sinh(c, l, m)),
            IcFamily::Cosh => Ok(InitialCondition::cosh_pow(c, l, m, 1)),
            IcFamily::CoshSquared => Ok(InitialCondition::cosh_pow(c, l, m, 2)),
            f => Err(Error::InvalidSpec(format!(
                "ic family `{}` has no exact form",
                f.name()
            ))),
        }
    }

    /// The profile as a pointwise function, for sampling onto a grid.
    pub fn sampler<T: Real>(&self) -> impl Fn(T, T) -> T + Sync {
        let factor = T::from_rational(&(&self.coefficient * &self.amplitude));
        let mu = T::from_rational(&self.scale);
        let family = self.family;
        move |x: T, y: T| factor * family.profile(mu * (x + y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F64,
    DoubleDouble,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::F64 => "f64",
            Precision::DoubleDouble => "double_double",
        }
    }
}

/// Uniform square grid `[min, max]²` and its stencil settings.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub accuracy: u32,
    pub precision: Precision,
    /// Also solve at half the spacing and report the observed order.
    pub refine: bool,
    /// Half-width of the box `[−c, c]²` used for error measurement.
    pub check: Option<f64>,
}

impl GridConfig {
    /// Same extent at half the spacing.
    pub fn refined(&self) -> GridConfig {
        GridConfig {
            points: 2 * (self.points - 1) + 1,
            ..self.clone()
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub order: usize,
    pub backend: BackendKind,
    pub grid: Option<GridConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    /// One row per evaluation point.
    Table,
    /// `x,y,self_error` lattice for external plotting.
    Plot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pde: PdeSpec,
    pub ic: IcConfig,
    pub solve: SolveConfig,
    /// `(x, y, t)` evaluation points, in output order.
    pub eval: Vec<(f64, f64, f64)>,
    pub output: OutputConfig,
}

pub const DEFAULT_EVAL_TIME: f64 = 1e-3;
pub const DEFAULT_LATTICE: [f64; 3] = [0.0, 0.5, 1.0];

/// `x`-outer product of `axis` with itself at time `t`.
pub fn lattice(axis: &[f64], t: f64) -> Vec<(f64, f64, f64)> {
    axis.iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y, t)))
        .collect()
}

struct Entry {
    line: usize,
    value: String,
}

#[derive(Default)]
struct Section {
    line: usize,
    keys: BTreeMap<String, Vec<Entry>>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("pde", &["a", "b", "k", "n"]),
    ("ic", &["family", "coefficient", "amplitude", "scale"]),
    ("solve", &["order", "backend"]),
    (
        "grid",
        &["min", "max", "points", "accuracy", "precision", "refine", "check"],
    ),
    ("eval", &["t", "lattice", "point"]),
    ("output", &["path", "format"]),
];

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| cfg_err(line, "unterminated section header"))?
                .trim();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(cfg_err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(cfg_err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.to_string(),
                Section {
                    line,
                    ..Section::default()
                },
            );
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| cfg_err(line, format!("expected `key = value`, found `{body}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let section = current
            .as_ref()
            .ok_or_else(|| cfg_err(line, "key outside of any section"))?;
        let allowed = KNOWN.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(cfg_err(line, format!("unknown key `{key}` in [{section}]")));
        }
        if value.is_empty() {
            return Err(cfg_err(line, format!("empty value for `{key}`")));
        }
        let entries = sections
            .get_mut(section)
            .expect("section exists")
            .keys
            .entry(key.to_string())
            .or_default();
        if key != "point" && !entries.is_empty() {
            return Err(cfg_err(line, format!("duplicate key `{key}` in [{section}]")));
        }
        entries.push(Entry {
            line,
            value: value.to_string(),
        });
    }
    Ok(sections)
}

struct Reader<'a> {
    name: &'static str,
    section: Option<&'a Section>,
}

impl<'a> Reader<'a> {
    fn line(&self) -> usize {
        self.section.map_or(0, |s| s.line)
    }

    fn raw(&self, key: &str) -> Option<&'a Entry> {
        self.section.and_then(|s| s.keys.get(key)).and_then(|v| v.first())
    }

    fn required(&self, key: &str) -> Result<&'a Entry> {
        self.raw(key)
            .ok_or_else(|| cfg_err(self.line(), format!("missing `{key}` in [{}]", self.name)))
    }

    fn parsed<T>(
        &self,
        key: &str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<(T, usize)>> {
        self.raw(key)
            .map(|e| {
                parse(&e.value)
                    .map(|v| (v, e.line))
                    .map_err(|m| cfg_err(e.line, format!("`{key}`: {m}")))
            })
            .transpose()
    }

    fn req_parsed<T>(&self, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<(T, usize)> {
        self.required(key)?;
        Ok(self.parsed(key, parse)?.expect("present"))
    }
}

fn rational(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a rational number"))
}

fn float(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn integer<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{s}` is not `true` or `false`")),
    }
}

fn float_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|p| float(p.trim())).collect()
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let sections = split_sections(text)?;
    let reader = |name: &'static str| Reader {
        name,
        section: sections.get(name),
    };

    let pde = reader("pde");
    if pde.section.is_none() {
        return Err(cfg_err(0, "missing [pde] section"));
    }
    let (a, _) = pde.req_parsed("a", rational)?;
    let (b, b_line) = pde.req_parsed("b", rational)?;
    let (k, k_line) = pde.req_parsed("k", rational)?;
    let (n, n_line) = pde.req_parsed("n", integer::<u32>)?;
    if n < 2 {
        return Err(cfg_err(n_line, format!("`n` must be at least 2, got {n}")));
    }
    if b <= rat(0, 1) {
        return Err(cfg_err(b_line, format!("`b` must be positive, got {b}")));
    }
    if k <= rat(0, 1) {
        return Err(cfg_err(k_line, format!("`k` must be positive, got {k}")));
    }
    let spec = PdeSpec::new(a, b, k, n).map_err(|e| cfg_err(pde.line(), e.to_string()))?;

    let ic = reader("ic");
    if ic.section.is_none() {
        return Err(cfg_err(0, "missing [ic] section"));
    }
    let (family, family_line) = ic.req_parsed("family", |s| s.parse::<IcFamily>())?;
    let coefficient = ic.parsed("coefficient", rational)?.map_or(rat(1, 1), |(v, _)| v);
    let (amplitude, _) = ic.req_parsed("amplitude", rational)?;
    let scale = ic.parsed("scale", rational)?.map_or(rat(1, 1), |(v, _)| v);

    let solve = reader("solve");
    let order = solve.parsed("order", integer::<usize>)?.map_or(4, |(v, _)| v);
    let (backend, backend_line) = solve
        .parsed("backend", |s| match s {
            "exact" => Ok(BackendKind::Exact),
            "grid" => Ok(BackendKind::Grid),
            _ => Err(format!("`{s}` is not `exact` or `grid`")),
        })?
        .unwrap_or((BackendKind::Exact, solve.line()));

    let grid_reader = reader("grid");
    let grid = match (backend, grid_reader.section) {
        (BackendKind::Exact, Some(s)) => {
            return Err(cfg_err(s.line, "[grid] given but backend is exact"));
        }
        (BackendKind::Grid, None) => {
            return Err(cfg_err(backend_line, "backend = grid requires a [grid] section"));
        }
        (BackendKind::Exact, None) => None,
        (BackendKind::Grid, Some(_)) => Some(parse_grid(&grid_reader)?),
    };
    if backend == BackendKind::Exact && !family.is_hyperbolic_polynomial() {
        return Err(cfg_err(
            family_line,
            format!("ic family `{}` requires backend = grid", family.name()),
        ));
    }

    let eval = reader("eval");
    let points = if let Some(section) = eval.section {
        let explicit: Vec<(f64, f64, f64)> = section
            .keys
            .get("point")
            .map(|entries| {
                entries
                    .iter()
                    .map(|e| match float_list(&e.value) {
                        Ok(v) if v.len() == 3 => Ok((v[0], v[1], v[2])),
                        Ok(_) => Err(cfg_err(e.line, "`point` needs `x, y, t`")),
                        Err(m) => Err(cfg_err(e.line, format!("`point`: {m}"))),
                    })
                    .collect::<Result<_>>()
            })
            .transpose()?
            .unwrap_or_default();
        let axis = eval.parsed("lattice", float_list)?;
        let t = eval.parsed("t", float)?;
        if !explicit.is_empty() {
            if let Some(line) = axis.as_ref().map(|(_, l)| *l).or(t.as_ref().map(|(_, l)| *l)) {
                return Err(cfg_err(line, "`point` cannot be combined with `lattice` or `t`"));
            }
            explicit
        } else {
            let axis = axis.map_or(DEFAULT_LATTICE.to_vec(), |(v, _)| v);
            lattice(&axis, t.map_or(DEFAULT_EVAL_TIME, |(v, _)| v))
        }
    } else {
        lattice(&DEFAULT_LATTICE, DEFAULT_EVAL_TIME)
    };

    let output = reader("output");
    let path = output.raw("path").map(|e| e.value.clone());
    let format = output
        .parsed("format", |s| match s {
            "table" => Ok(OutputFormat::Table),
            "plot" => Ok(OutputFormat::Plot),
            _ => Err(format!("`{s}` is not `table` or `plot`")),
        })?
        .map_or(OutputFormat::Table, |(v, _)| v);

    Ok(RunConfig {
        pde: spec,
        ic: IcConfig {
            family,
            coefficient,
            amplitude,
            scale,
        },
        solve: SolveConfig { order, backend, grid },
        eval: points,
        output: OutputConfig { path, format },
    })
}

fn parse_grid(r: &Reader<'_>) -> Result<GridConfig> {
    let (min, _) = r.req_parsed("min", float)?;
    let (max, max_line) = r.req_parsed("max", float)?;
    let (points, points_line) = r.req_parsed("points", integer::<usize>)?;
    let (accuracy, acc_line) = r.parsed("accuracy", integer::<u32>)?.unwrap_or((8, r.line()));
    let precision = r
        .parsed("precision", |s| match s {
            "f64" => Ok(Precision::F64),
            "double_double" => Ok(Precision::DoubleDouble),
            _ => Err(format!("`{s}` is not `f64` or `double_double`")),
        })?
        .map_or(Precision::F64, |(v, _)| v);
    let refine = r.parsed("refine", boolean)?.is_some_and(|(v, _)| v);
    let check = match r.parsed("check", float)? {
        Some((c, line)) if c <= 0.0 => return Err(cfg_err(line, "`check` must be positive")),
        other => other.map(|(v, _)| v),
    };
    if max <= min {
        return Err(cfg_err(max_line, "`max` must exceed `min`"));
    }
    if points < 3 {
        return Err(cfg_err(points_line, "`points` must be at least 3"));
    }
    if ![2, 4, 6, 8].contains(&accuracy) {
        return Err(cfg_err(
            acc_line,
            format!("`accuracy` must be 2, 4, 6 or 8, got {accuracy}"),
        ));
    }
    Ok(GridConfig {
        min,
        max,
        points,
        accuracy,
        precision,
        refine,
        check,
    })
}

impl RunConfig {
    /// Text that [`parse_config`] maps back to `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let p = &self.pde;
        let _ = writeln!(
            out,
            "[pde]\na = {}\nb = {}\nk = {}\nn = {}\n",
            p.advection(),
            p.dispersion_x(),
            p.dispersion_y(),
            p.power()
        );
        let ic = &self.ic;
        let _ = writeln!(
            out,
            "[ic]\nfamily = {}\ncoefficient = {}\namplitude = {}\nscale = {}\n",
            ic.family.name(),
            ic.coefficient,
            ic.amplitude,
            ic.scale
        );
        let _ = writeln!(
            out,
            "[solve]\norder = {}\nbackend = {}\n",
            self.solve.order, self.solve.backend
        );
        if let Some(g) = &self.solve.grid {
            let _ = writeln!(
                out,
                "[grid]\nmin = {:?}\nmax = {:?}\npoints = {}\naccuracy = {}\nprecision = {}\nrefine = {}",
                g.min,
                g.max,
                g.points,
                g.accuracy,
                g.precision.name(),
                g.refine
            );
            if let Some(c) = g.check {
                let _ = writeln!(out, "check = {c:?}");
            }
            out.push('\n');
        }
        out.push_str("[eval]\n");
        for (x, y, t) in &self.eval {
            let _ = writeln!(out, "point = {x:?}, {y:?}, {t:?}");
        }
        out.push_str("\n[output]\n");
        if let Some(path) = &self.output.path {
            let _ = writeln!(out, "path = {path}");
        }
        let _ = writeln!(
            out,
            "format = {}",
            match self.output.format {
                OutputFormat::Table => "table",
                OutputFormat::Plot => "plot",
            }
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ZK33: &str = "\
# ZK(3,3)
[pde]
a = 1
b = 2
k = 2
n = 3

[ic]
family = sinh
coefficient = 3/2
amplitude = 1e-5   # λ
scale = 1/6
";

    #[test]
    fn parses_zk33_example() {
        let c = parse_config(ZK33).unwrap();
        assert_eq!(c.pde, PdeSpec::zk33());
        assert_eq!(c.ic.amplitude, rat(1, 100_000));
        assert_eq!(c.ic.scale, rat(1, 6));
        assert_eq!(c.solve.order, 4);
        assert_eq!(c.solve.backend, BackendKind::Exact);
        assert_eq!(c.eval, lattice(&[0.0, 0.5, 1.0], 1e-3));
        assert_eq!(c.eval[1], (0.0, 0.5, 1e-3));
        let ic = c.ic.exact().unwrap();
        assert_eq!(ic.value, HyperPoly::sinh(rat(1, 6), rat(3, 200_000)));
    }

    fn err_line(text: &str) -> usize {
        match parse_config(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn validation_errors_carry_line_numbers() {
        assert_eq!(err_line(&ZK33.replace("n = 3", "n = 1")), 6);
        assert_eq!(err_line(&ZK33.replace("b = 2", "b = 0")), 4);
        assert_eq!(err_line(&ZK33.replace("k = 2", "k = -1/2")), 5);
        assert_eq!(err_line(&ZK33.replace("family = sinh", "family = tanh")), 9);
        assert_eq!(err_line(&ZK33.replace("family = sinh", "family = gaussian")), 9);
        assert_eq!(err_line(&ZK33.replace("scale = 1/6", "scale 1/6")), 12);
        assert_eq!(err_line(&ZK33.replace("scale = 1/6", "scale = one")), 12);
        assert_eq!(err_line(&format!("{ZK33}[solve]\nbackend = grid\n")), 14);
        assert_eq!(
            err_line(&format!(
                "{ZK33}[solve]\nbackend = exact\n[grid]\nmin = 0\nmax = 1\npoints = 5\n"
            )),
            15
        );
        assert_eq!(err_line(&format!("{ZK33}[eval]\nt = 0.1\npoint = 0, 0, 0\n")), 14);
        assert_eq!(err_line(&format!("{ZK33}[bogus]\n")), 13);
        assert_eq!(err_line("a = 1\n"), 1);
    }

    #[test]
    fn grid_section_parses() {
        let text = format!(
            "{}[solve]\norder = 2\nbackend = grid\n[grid]\nmin = -3\nmax = 3\npoints = 301\nprecision = double_double\nrefine = true\ncheck = 2\n",
            ZK33.replace("family = sinh", "family = sech_squared")
        );
        let c = parse_config(&text).unwrap();
        let g = c.solve.grid.clone().unwrap();
        assert_eq!(
            (g.points, g.accuracy, g.precision, g.refine, g.check),
            (301, 8, Precision::DoubleDouble, true, Some(2.0))
        );
        assert!((g.spacing() - 0.02).abs() < 1e-15);
        assert_eq!(g.refined().points, 601);
        assert_eq!(err_line(&text.replace("points = 301", "points = 2")), 19);
        assert_eq!(err_line(&text.replace("check = 2", "accuracy = 5")), 22);
    }

    #[test]
    fn samplers_match_closed_forms() {
        let c = parse_config(ZK33).unwrap();
        let f = c.ic.sampler::<f64>();
        let exact = c.ic.exact().unwrap().value;
        for (x, y) in [(0.3, -0.2), (1.0, 2.0)] {
            assert!((f(x, y) - exact.eval(x, y)).abs() < 1e-20);
        }
        let ic = IcConfig {
            family: IcFamily::Gaussian,
            coefficient: rat(2, 1),
            amplitude: rat(1, 1),
            scale: rat(1, 1),
        };
        assert!((ic.sampler::<f64>()(0.5, 0.5) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    fn any_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| rat(n, d))
    }

    fn positive_rational() -> impl Strategy<Value = Rational> {
        (1i64..1000, 1i64..1000).prop_map(|(n, d)| rat(n, d))
    }

    fn any_config() -> impl Strategy<Value = RunConfig> {
        let pde = (any_rational(), positive_rational(), positive_rational(), 2u32..6)
            .prop_map(|(a, b, k, n)| PdeSpec::new(a, b, k, n).unwrap());
        let grid = proptest::option::of((
            -10.0f64..0.0,
            0.5f64..10.0,
            3usize..500,
            prop_oneof![Just(2u32), Just(4), Just(6), Just(8)],
            any::<bool>(),
            any::<bool>(),
            proptest::option::of(0.1f64..5.0),
        ));
        let points = proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0, 0.0f64..1.0), 1..6);
        (
            pde,
            0usize..5,
            any_rational(),
            positive_rational(),
            any_rational(),
            0usize..10,
            grid,
            points,
            proptest::option::of("[a-z]{1,8}\\.csv"),
            any::<bool>(),
        )
            .prop_map(
                |(pde, fam, coefficient, amplitude, scale, order, grid, eval, path, plot)| {
                    let grid = grid.map(|(min, max, points, accuracy, dd, refine, check)| GridConfig {
                        min,
                        max,
                        points,
                        accuracy,
                        precision: if dd { Precision::DoubleDouble } else { Precision::F64 },
                        refine,
                        check,
                    });
                    let family = if grid.is_some() {
                        IcFamily::ALL[fam]
                    } else {
                        IcFamily::ALL[fam % 3]
                    };
                    RunConfig {
                        pde,
                        ic: IcConfig {
                            family,
                            coefficient,
                            amplitude,
                            scale,
                        },
                        solve: SolveConfig {
                            order,
                            backend: if grid.is_some() {
                                BackendKind::Grid
                            } else {
                                BackendKind::Exact
                            },
                            grid,
                        },
                        eval,
                        output: OutputConfig {
                            path,
                            format: if plot { OutputFormat::Plot } else { OutputFormat::Table },
                        },
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn render_round_trips(c in any_config()) {
            prop_assert_eq!(parse_config(&c.render()).unwrap(), c);
        }
    }
}
