//! `nceig`: convergence studies, adaptive runs and mesh utilities.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use nceig::adaptivity::{adapt_loop, AdaptOptions};
use nceig::assembly::{assemble_mass, assemble_stiffness};
use nceig::eigensolve::EigenOptions;
use nceig::experiment::{self, ExperimentConfig, ReferenceMode};
use nceig::{Domain, Space, SpaceKind};

#[derive(Parser)]
#[command(name = "nceig", version, about = "Laplacian eigenvalues with P1, CR and ECR elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform refinement study, written as CSV.
    Uniform(StudyArgs),
    /// Adaptive CR refinement; writes the iteration history as CSV.
    Adapt(StudyArgs),
    /// Check the candidate geometries for the triangle example.
    VerifyTriangle,
    /// Write the mesh of a domain at a given level.
    Mesh {
        #[arg(long)]
        domain: Domain,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the reduced stiffness or mass matrix as `i j value` triplets.
    DumpMatrix {
        #[arg(long)]
        domain: Domain,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value = "CR")]
        element: SpaceKind,
        #[arg(long, default_value = "stiffness", value_parser = ["stiffness", "mass"])]
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StudyArgs {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    /// Comma-separated list of P1, CR, ECR.
    #[arg(long)]
    element: Option<String>,
    /// `a..b`.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    nev: Option<String>,
    /// Quantity tags or prefixes to keep, comma separated.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// `exact`, `extrapolated` or `file=PATH`.
    #[arg(long)]
    reference: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Directory for per-quantity `.dat` series.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
}

impl StudyArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            cfg.apply_text(&text).with_context(|| format!("in {}", p.display()))?;
        }
        let flags = [
            ("domain", &self.domain),
            ("elements", &self.element),
            ("levels", &self.levels),
            ("nev", &self.nev),
            ("estimators", &self.estimators),
            ("theta", &self.theta),
            ("max_iter", &self.max_iter),
            ("reference", &self.reference),
            ("seed", &self.seed),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v).with_context(|| format!("--{}", k.replace('_', "-")))?;
            }
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        Ok(cfg)
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn uniform(args: &StudyArgs) -> Result<bool> {
    let cfg = args.config()?;
    let table = experiment::run_uniform(&cfg)?;
    write_out(cfg.out.as_ref(), &table.to_csv())?;
    for (i, r) in &table.references {
        match r.uncertainty {
            Some(u) => eprintln!("reference λ_{i} = {:.12} ({}, ±{u:.2e})", r.value, r.source),
            None => eprintln!("reference λ_{i} = {:.12} ({})", r.value, r.source),
        }
    }
    if let Some(dir) = &args.plot_dir {
        let files = experiment::emit_plot_data(&table, dir)?;
        eprintln!("wrote {} series to {}", files.len(), dir.display());
    }
    for (level, msg) in &table.failures {
        eprintln!("level {level} failed: {msg}");
    }
    Ok(table.failures.is_empty())
}

fn adapt(args: &StudyArgs) -> Result<bool> {
    let cfg = args.config()?;
    if cfg.theta <= 0.0 || cfg.theta >= 1.0 {
        bail!("theta must lie in (0, 1)");
    }
    let opts = AdaptOptions {
        theta: cfg.theta,
        max_iter: cfg.max_iter,
        index: cfg.nev,
        eigen: EigenOptions { seed: cfg.seed, ..Default::default() },
        ..Default::default()
    };
    let st = adapt_loop(cfg.domain.build(), &opts, false);
    let mut csv = st.history_csv();
    let reference = match &cfg.reference_mode() {
        ReferenceMode::Exact => experiment::exact_eigenvalues(cfg.domain, cfg.nev).get(&cfg.nev).copied(),
        ReferenceMode::File(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            experiment::parse_reference_file(&text)?.get(&cfg.nev).copied()
        }
        ReferenceMode::Extrapolated => None,
    };
    if let Some(l) = reference {
        let mut lines = csv.lines();
        let mut out = format!("{},error,error_R_CR2_Gh\n", lines.next().unwrap());
        for (line, r) in lines.zip(&st.history) {
            out.push_str(&format!("{line},{:.12e},{:.12e}\n", r.lambda - l, r.recovered() - l));
        }
        csv = out;
    }
    write_out(cfg.out.as_ref(), &csv)?;
    if let Some(e) = &st.failure {
        eprintln!("adaptive loop stopped at iteration {}: {e}", st.k);
        return Ok(false);
    }
    Ok(true)
}

fn verify_triangle() -> Result<bool> {
    let all: Vec<_> = experiment::triangle_candidates().iter().map(experiment::check_triangle).collect();
    for c in &all {
        println!(
            "{:18} dirichlet {:.2e}  neumann {:.2e}  pde {:.2e}  single-signed {}  {}",
            c.candidate.name,
            c.dirichlet_residual,
            c.neumann_residual,
            c.pde_residual,
            c.single_signed,
            if c.passes { "pass" } else { "fail" }
        );
    }
    match experiment::verify_triangle_geometry() {
        Ok((c, _)) => {
            println!("selected {} {:?}", c.candidate.name, c.candidate.vertices);
            Ok(true)
        }
        Err(e) => {
            eprintln!("{e}");
            Ok(false)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Uniform(a) => uniform(&a),
        Command::Adapt(a) => adapt(&a),
        Command::VerifyTriangle => verify_triangle(),
        Command::Mesh { domain, level, out } => {
            let m = experiment::mesh_at_level(domain, level);
            write_out(out.as_ref(), &nceig::mesh::write_mesh(&m))?;
            Ok(true)
        }
        Command::DumpMatrix { domain, level, element, which, out } => {
            let space = Space::new(element, Arc::new(experiment::mesh_at_level(domain, level)));
            let a = if which == "mass" { assemble_mass(&space) } else { assemble_stiffness(&space) };
            write_out(out.as_ref(), &a.to_coo_string())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
