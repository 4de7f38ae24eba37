//! Convergence studies on the benchmark domains: reference eigenvalues,
//! per-level tables, observed orders, CSV and plot data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::eigensolve::EigenOptions;
use crate::estimators::{extrapolate, EstimateReport, LevelSolution};
use crate::mesh::{Domain, Mesh, Point};
use crate::quadrature::TriangleRule;
use crate::spaces::SpaceKind;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceMode {
    Exact,
    Extrapolated,
    File(PathBuf),
}

impl FromStr for ReferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "extrapolated" => Ok(Self::Extrapolated),
            _ => match s.strip_prefix("file=") {
                Some(p) if !p.is_empty() => Ok(Self::File(PathBuf::from(p))),
                _ => Err(Error::Config(format!("reference mode `{s}`: use exact, extrapolated or file=PATH"))),
            },
        }
    }
}

/// Reference value for one eigenvalue index.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub value: f64,
    /// Distance to the previous extrapolation, for extrapolated references.
    pub uncertainty: Option<f64>,
    pub source: &'static str,
}

/// Known closed-form eigenvalues, by 1-based index.
pub fn exact_eigenvalues(domain: Domain, nev: usize) -> BTreeMap<usize, f64> {
    let pi2 = PI * PI;
    let sorted = |f: &dyn Fn(f64, f64) -> f64| {
        let mut v: Vec<f64> = (1..=2 * nev + 2)
            .flat_map(|m| (1..=2 * nev + 2).map(move |n| (m, n)))
            .map(|(m, n)| f(m as f64, n as f64) * pi2)
            .collect();
        v.sort_by(f64::total_cmp);
        v.into_iter().take(nev).enumerate().map(|(i, x)| (i + 1, x)).collect()
    };
    match domain {
        Domain::Square => sorted(&|m, n| m * m + n * n),
        Domain::SquareNeumann => sorted(&|k, n| (k - 0.5).powi(2) + n * n),
        Domain::Triangle => BTreeMap::from([(1, 16.0 * pi2 / 3.0)]),
        Domain::LShape => [(3, 2.0 * pi2), (8, 4.0 * pi2)].into_iter().filter(|(i, _)| *i <= nev).collect(),
        Domain::HShape | Domain::Hollow => BTreeMap::new(),
    }
}

/// `index value` lines; `#` starts a comment.
pub fn parse_reference_file(text: &str) -> Result<BTreeMap<usize, f64>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let bad = || Error::Config(format!("reference file line {}: expected `index value`", n + 1));
        let i: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v: f64 = it.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if it.next().is_some() || i == 0 {
            return Err(bad());
        }
        out.insert(i, v);
    }
    Ok(out)
}

/// Extrapolated references from the CR eigenvalues of the computed levels
/// (coarse to fine).
pub fn extrapolated_references(cr_levels: &[Vec<f64>]) -> Result<BTreeMap<usize, Reference>> {
    if cr_levels.len() < 2 {
        return Err(Error::Config("extrapolated references need at least two levels".into()));
    }
    let n = cr_levels.len();
    let (fine, coarse) = (&cr_levels[n - 1], &cr_levels[n - 2]);
    Ok((0..fine.len().min(coarse.len()))
        .map(|j| {
            let value = extrapolate(fine[j], coarse[j]);
            let uncertainty = (n >= 3).then(|| (value - extrapolate(coarse[j], cr_levels[n - 3][j])).abs());
            (j + 1, Reference { value, uncertainty, source: "extrapolated" })
        })
        .collect())
}

pub fn reference_eigenvalues(
    domain: Domain,
    nev: usize,
    mode: &ReferenceMode,
    cr_levels: &[Vec<f64>],
) -> Result<BTreeMap<usize, Reference>> {
    match mode {
        ReferenceMode::Exact => {
            let e = exact_eigenvalues(domain, nev);
            if e.is_empty() {
                return Err(Error::Config(format!("no closed-form eigenvalues for `{domain}`")));
            }
            Ok(e.into_iter().map(|(i, value)| (i, Reference { value, uncertainty: None, source: "exact" })).collect())
        }
        ReferenceMode::Extrapolated => extrapolated_references(cr_levels),
        ReferenceMode::File(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(parse_reference_file(&text)?
                .into_iter()
                .map(|(i, value)| (i, Reference { value, uncertainty: None, source: "file" }))
                .collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub elements: Vec<SpaceKind>,
    pub levels: (usize, usize),
    pub nev: usize,
    /// Quantity tags or tag prefixes to keep; empty keeps everything.
    pub estimators: Vec<String>,
    pub theta: f64,
    pub max_iter: usize,
    /// Defaults per domain, see [`default_reference`].
    pub reference: Option<ReferenceMode>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            domain: Domain::Square,
            elements: vec![SpaceKind::CR, SpaceKind::ECR, SpaceKind::P1],
            levels: (1, 5),
            nev: 1,
            estimators: Vec::new(),
            theta: 0.3,
            max_iter: 25,
            reference: None,
            out: None,
            seed: EigenOptions::default().seed,
        }
    }
}

pub fn parse_levels(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("levels `{s}`: expected a..b or a single level"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let a = s.trim().parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn parse_elements(s: &str) -> Result<Vec<SpaceKind>> {
    s.split(',').map(|t| t.trim().parse::<SpaceKind>()).collect::<Result<Vec<_>>>().and_then(|v| {
        if v.is_empty() {
            Err(Error::Config("empty element list".into()))
        } else {
            Ok(v)
        }
    })
}

impl ExperimentConfig {
    /// Set one `key = value` pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |what: &str| Error::Config(format!("{key}: `{value}` is not a valid {what}"));
        match key {
            "domain" => self.domain = value.parse()?,
            "element" | "elements" => self.elements = parse_elements(value)?,
            "levels" => self.levels = parse_levels(value)?,
            "nev" => self.nev = value.parse().map_err(|_| num("count"))?,
            "estimators" => {
                self.estimators = value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            "theta" => self.theta = value.parse().map_err(|_| num("number"))?,
            "max_iter" => self.max_iter = value.parse().map_err(|_| num("count"))?,
            "reference" => self.reference = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            "seed" => self.seed = value.parse().map_err(|_| num("integer"))?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Flat `key = value` text, `#` comments.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.nev == 0 {
            return Err(Error::Config("nev must be positive".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("theta must lie in (0, 1)".into()));
        }
        if self.reference_mode() == ReferenceMode::Exact && exact_eigenvalues(self.domain, self.nev).is_empty() {
            return Err(Error::Config(format!("no closed-form eigenvalues for `{}`; use extrapolated", self.domain)));
        }
        Ok(())
    }

    pub fn reference_mode(&self) -> ReferenceMode {
        self.reference.clone().unwrap_or_else(|| default_reference(self.domain))
    }

    fn keeps(&self, tag: &str) -> bool {
        tag.starts_with("lambda_")
            || self.estimators.is_empty()
            || self.estimators.iter().any(|e| tag.starts_with(e.as_str()))
    }
}

/// Closed forms where the first eigenvalue is known, extrapolation elsewhere.
pub fn default_reference(domain: Domain) -> ReferenceMode {
    match domain {
        Domain::Square | Domain::SquareNeumann | Domain::Triangle => ReferenceMode::Exact,
        Domain::LShape | Domain::HShape | Domain::Hollow => ReferenceMode::Extrapolated,
    }
}

/// Mesh of the given level (level one is the domain's initial triangulation).
pub fn mesh_at_level(domain: Domain, level: usize) -> Mesh {
    let mut m = domain.build();
    for _ in 1..level {
        m = m.refine_uniform();
    }
    m
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub domain: Domain,
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub eig_index: usize,
    pub quantity: String,
    pub value: f64,
    pub error: Option<f64>,
    pub order: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub rows: Vec<Row>,
    pub references: BTreeMap<usize, Reference>,
    /// Levels at which solving failed, with the message.
    pub failures: Vec<(usize, String)>,
}

pub const CSV_HEADER: &str = "domain,level,h,ndof,eig_index,quantity,value,error,order";

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.12e}")).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.12e},{},{},{},{:.15e},{},{}",
                r.domain,
                r.level,
                r.h,
                r.ndof,
                r.eig_index,
                r.quantity,
                r.value,
                opt(r.error),
                opt(r.order)
            );
        }
        s
    }

    /// `(h, error)` pairs of one quantity, coarse to fine.
    pub fn series(&self, quantity: &str, index: usize) -> Vec<(usize, f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.quantity == quantity && r.eig_index == index)
            .filter_map(|r| r.error.map(|e| (r.level, r.h, e)))
            .collect()
    }

    pub fn value(&self, quantity: &str, index: usize, level: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.quantity == quantity && r.eig_index == index && r.level == level).map(|r| r.value)
    }
}

/// Run the configured uniform-refinement study.
pub fn run_uniform(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let opts = EigenOptions { seed: cfg.seed, ..Default::default() };
    let mut reports: Vec<EstimateReport> = Vec::new();
    let mut failures = Vec::new();
    let mut mesh = mesh_at_level(cfg.domain, cfg.levels.0);
    for level in cfg.levels.0..=cfg.levels.1 {
        let m = Arc::new(mesh.clone());
        match LevelSolution::solve(m, &cfg.elements, cfg.nev, &opts).and_then(|s| EstimateReport::compute(&s)) {
            Ok(r) => reports.push(r),
            Err(e) => {
                failures.push((level, e.to_string()));
                break;
            }
        }
        if level < cfg.levels.1 {
            mesh = mesh.refine_uniform();
        }
    }
    // extrapolations from consecutive levels
    for i in 1..reports.len() {
        let (prev, cur) = (reports[i - 1].clone(), &mut reports[i]);
        for rec in cur.records.iter_mut() {
            let p = &prev.records[rec.index - 1];
            for (base, tag) in [("lambda_CR", "EXP_CR"), ("lambda_ECR", "EXP_ECR"), ("lambda_P1", "EXP_P1")] {
                if let (Some(a), Some(b)) = (rec.get(base), p.get(base)) {
                    rec.quantities.push((tag.to_string(), extrapolate(a, b)));
                }
            }
        }
    }
    let cr_levels: Vec<Vec<f64>> = reports
        .iter()
        .filter_map(|r| r.records.iter().map(|x| x.get("lambda_CR")).collect::<Option<Vec<f64>>>())
        .collect();
    let mode = cfg.reference_mode();
    let references = match reference_eigenvalues(cfg.domain, cfg.nev, &mode, &cr_levels) {
        Ok(r) => r,
        Err(e) if mode == ReferenceMode::Extrapolated => {
            failures.push((cfg.levels.1, e.to_string()));
            BTreeMap::new()
        }
        Err(e) => return Err(e),
    };
    let mut rows = Vec::new();
    let mut last_error: BTreeMap<(usize, String), f64> = BTreeMap::new();
    for rep in &reports {
        for rec in &rep.records {
            let reference = references.get(&rec.index).map(|r| r.value);
            for (tag, value) in &rec.quantities {
                if !cfg.keeps(tag) {
                    continue;
                }
                let error = reference.map(|l| value - l);
                let key = (rec.index, tag.clone());
                let order = match (error, last_error.get(&key)) {
                    (Some(e), Some(&p)) if e != 0.0 && p != 0.0 => Some((p.abs() / e.abs()).log2()),
                    _ => None,
                };
                if let Some(e) = error {
                    last_error.insert(key, e);
                }
                rows.push(Row {
                    domain: cfg.domain,
                    level: rep.level,
                    h: rep.h,
                    ndof: rep.ndof_for(tag),
                    eig_index: rec.index,
                    quantity: tag.clone(),
                    value: *value,
                    error,
                    order,
                });
            }
        }
    }
    for (level, msg) in &failures {
        rows.push(Row {
            domain: cfg.domain,
            level: *level,
            h: f64::NAN,
            ndof: 0,
            eig_index: 0,
            quantity: format!("solver_failure: {}", msg.replace(',', ";")),
            value: f64::NAN,
            error: None,
            order: None,
        });
    }
    Ok(Table { rows, references, failures })
}

/// Least-squares slope of `log|e|` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, e)| *x > 0.0 && *e != 0.0).map(|(x, e)| (x.ln(), e.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Observed order over a range of levels: regression slope of `log|e|` in `h`.
pub fn regression_order(table: &Table, quantity: &str, index: usize, levels: (usize, usize)) -> Option<f64> {
    let pts: Vec<(f64, f64)> = table
        .series(quantity, index)
        .into_iter()
        .filter(|(l, _, _)| *l >= levels.0 && *l <= levels.1)
        .map(|(_, h, e)| (h, e))
        .collect();
    loglog_slope(&pts)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    /// `(log10 x, log10 |error|)`.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
}

impl PlotSeries {
    pub fn to_dat(&self, xlabel: &str) -> String {
        let mut s = format!("# {}\n# log10_{xlabel} log10_abs_error\n", self.name);
        if let Some(k) = self.slope {
            let _ = writeln!(s, "# slope {k:.4}");
        }
        for (x, y) in &self.points {
            let _ = writeln!(s, "{x:.10} {y:.10}");
        }
        s
    }
}

/// One series per (quantity, index) against `h`.
pub fn plot_series(table: &Table) -> Vec<PlotSeries> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in &table.rows {
        if r.error.is_some() && !keys.iter().any(|(q, i)| *q == r.quantity && *i == r.eig_index) {
            keys.push((r.quantity.clone(), r.eig_index));
        }
    }
    keys.into_iter()
        .map(|(q, i)| {
            let raw: Vec<(f64, f64)> =
                table.series(&q, i).into_iter().filter(|(_, _, e)| *e != 0.0).map(|(_, h, e)| (h, e)).collect();
            PlotSeries {
                name: format!("{q}_{i}"),
                points: raw.iter().map(|(h, e)| (h.log10(), e.abs().log10())).collect(),
                slope: loglog_slope(&raw),
            }
        })
        .collect()
}

/// Write `<dir>/<quantity>_<index>.dat` files; returns the paths.
pub fn emit_plot_data(table: &Table, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for s in plot_series(table) {
        let p = dir.join(format!("{}.dat", s.name));
        std::fs::write(&p, s.to_dat("h"))?;
        out.push(p);
    }
    Ok(out)
}

/// Closed-form first eigenfunction of the equilateral triangle benchmark.
pub fn triangle_mode(x: Point) -> f64 {
    let s3 = 3f64.sqrt();
    let c = 2.0 * 12f64.powf(0.25) / 3.0;
    c * ((4.0 * PI * x[1] / s3).sin()
        + (2.0 * PI * (x[0] - x[1] / s3)).sin()
        + (2.0 * PI * (1.0 - x[0] - x[1] / s3)).sin())
}

/// Gradient and Laplacian of [`triangle_mode`].
pub fn triangle_mode_derivatives(x: Point) -> ([f64; 2], f64) {
    let s3 = 3f64.sqrt();
    let c = 2.0 * 12f64.powf(0.25) / 3.0;
    let waves =
        [([0.0, 4.0 * PI / s3], 0.0), ([2.0 * PI, -2.0 * PI / s3], 0.0), ([-2.0 * PI, -2.0 * PI / s3], 2.0 * PI)];
    let mut g = [0.0; 2];
    let mut lap = 0.0;
    for (k, b) in waves {
        let a = k[0] * x[0] + k[1] * x[1] + b;
        g[0] += c * k[0] * a.cos();
        g[1] += c * k[1] * a.cos();
        lap -= c * (k[0] * k[0] + k[1] * k[1]) * a.sin();
    }
    (g, lap)
}

/// A candidate triangle: vertices, and which edges (by local index, edge `i`
/// opposite vertex `i`) carry a Neumann condition.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleCandidate {
    pub name: &'static str,
    pub vertices: [Point; 3],
    pub neumann: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryCheck {
    pub candidate: TriangleCandidate,
    pub dirichlet_residual: f64,
    pub neumann_residual: f64,
    /// `max |Δu + λu| / (λ max|u|)` on interior samples.
    pub pde_residual: f64,
    /// `u` keeps one sign inside, so `λ` is the first eigenvalue.
    pub single_signed: bool,
    pub passes: bool,
}

pub fn triangle_candidates() -> Vec<TriangleCandidate> {
    let s3 = 3f64.sqrt();
    vec![
        TriangleCandidate { name: "literal", vertices: [[1.0, 0.0], [1.0, s3], [0.5, 0.5 * s3]], neumann: vec![2] },
        TriangleCandidate { name: "equilateral", vertices: [[0.0, 0.0], [1.0, 0.0], [0.5, 0.5 * s3]], neumann: vec![] },
        TriangleCandidate {
            name: "half-equilateral",
            vertices: [[0.5, 0.0], [1.0, 0.0], [0.5, 0.5 * s3]],
            neumann: vec![1],
        },
    ]
}

const GEOMETRY_TOL: f64 = 1e-9;

pub fn check_triangle(c: &TriangleCandidate) -> GeometryCheck {
    let lambda = 16.0 * PI * PI / 3.0;
    let v = c.vertices;
    let (mut dres, mut nres) = (0.0f64, 0.0f64);
    let samples = 200;
    for i in 0..3 {
        let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        let t = [b[0] - a[0], b[1] - a[1]];
        let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
        let n = [t[1] / len, -t[0] / len];
        for s in 0..=samples {
            let s = s as f64 / samples as f64;
            let x = [a[0] + s * t[0], a[1] + s * t[1]];
            if c.neumann.contains(&i) {
                let (g, _) = triangle_mode_derivatives(x);
                nres = nres.max((g[0] * n[0] + g[1] * n[1]).abs());
            } else {
                dres = dres.max(triangle_mode(x).abs());
            }
        }
    }
    let (mut pres, mut umax) = (0.0f64, 0.0f64);
    let (mut pos, mut neg) = (false, false);
    let m = 40;
    for i in 1..m {
        for j in 1..m - i {
            let l = [i as f64 / m as f64, j as f64 / m as f64, (m - i - j) as f64 / m as f64];
            let x =
                [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]];
            let u = triangle_mode(x);
            let (_, lap) = triangle_mode_derivatives(x);
            pres = pres.max((lap + lambda * u).abs());
            umax = umax.max(u.abs());
            pos |= u > 1e-12;
            neg |= u < -1e-12;
        }
    }
    let pde_residual = pres / (lambda * umax.max(f64::MIN_POSITIVE));
    let single_signed = !(pos && neg);
    let passes = dres <= GEOMETRY_TOL && nres <= GEOMETRY_TOL && pde_residual <= GEOMETRY_TOL && single_signed;
    GeometryCheck {
        candidate: c.clone(),
        dirichlet_residual: dres,
        neumann_residual: nres,
        pde_residual,
        single_signed,
        passes,
    }
}

/// Pick the first candidate on which the closed-form eigenfunction satisfies
/// the boundary conditions, the equation, and is the ground state.
pub fn verify_triangle_geometry() -> Result<(GeometryCheck, Vec<GeometryCheck>)> {
    let all: Vec<GeometryCheck> = triangle_candidates().iter().map(check_triangle).collect();
    match all.iter().find(|c| c.passes) {
        Some(c) => Ok((c.clone(), all.clone())),
        None => {
            let mut msg = String::from("no triangle candidate passes:");
            for c in &all {
                let _ = write!(
                    msg,
                    " {} (D {:.2e}, N {:.2e}, pde {:.2e}, single-signed {})",
                    c.candidate.name, c.dirichlet_residual, c.neumann_residual, c.pde_residual, c.single_signed
                );
            }
            Err(Error::InvalidMesh(msg))
        }
    }
}

/// `‖u‖_{0,T}` of the closed-form eigenfunction on a triangle, by a collapsed rule.
pub fn triangle_mode_norm(v: &[Point; 3]) -> f64 {
    let rule = TriangleRule::collapsed(24);
    let area = 0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs();
    rule.integrate(v, area, |x| triangle_mode(x).powi(2)).sqrt()
}
