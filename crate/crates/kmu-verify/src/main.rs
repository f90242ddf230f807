//! Batch front end over the geometry library: generate model files,
//! run the full check suite against them, and compute the plane-
//! minimum invariant, with text or JSON output and CI-friendly exit
//! codes (0 pass, 1 violation, 2 invalid input).

mod checks;
mod delta_cmd;
mod gen;
mod model;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmu_geometry::{Domain, ShapeVariant, SigmaMode};

use checks::{CheckConfig, EXIT_INVALID};
use gen::AmbientSpec;
use model::ModelFile;

#[derive(Parser)]
#[command(name = "kmu-verify", version, about = "Generate and check curvature-inequality models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a model file built by one of the library generators
    Generate {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Run the full check suite against a model file
    Check {
        #[command(flatten)]
        cfg: RunFlags,
    },
    /// Compute the plane-minimum invariant of a model
    Delta {
        #[command(flatten)]
        cfg: RunFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    All,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Contact,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Shape1,
    Shape1prime,
}

#[derive(Args)]
struct RunFlags {
    /// Model file to read
    #[arg(long)]
    model: PathBuf,
    /// Inequality satisfaction tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Equality detection tolerance
    #[arg(long = "eq-tol", default_value_t = 1e-6)]
    eq_tol: f64,
    /// Seed for probe and plane sampling (flag beats KMU_VERIFY_SEED)
    #[arg(long, env = "KMU_VERIFY_SEED", default_value_t = 0)]
    seed: u64,
    /// Random probes per curvature identity
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Optimizer restarts
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Grid oracle resolution for delta (0 disables the oracle)
    #[arg(long = "grid-resolution", default_value_t = 0)]
    grid_resolution: usize,
    /// Plane domain for delta
    #[arg(long, value_enum, default_value_t = DomainArg::All)]
    domain: DomainArg,
    /// Validation discipline; defaults to the model's meta.mode
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Skip input validation; violations then surface as failures
    #[arg(long, default_value_t = false)]
    unchecked: bool,
}

#[derive(Subcommand)]
enum GenKind {
    /// Sasakian ambient (kappa = 1, free c) with a random submanifold
    Sasakian {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "sigma-scale", default_value_t = 0.6)]
        sigma_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Non-Sasakian ambient (kappa < 1 pins c and mu) with a random submanifold
    Kmu {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "sigma-scale", default_value_t = 0.6)]
        sigma_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random submanifold with explicit ambient parameters and sigma mode
    RandomSub {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// Curvature scalar; required iff kappa = 1
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Contact)]
        mode: ModeArg,
        #[arg(long = "sigma-scale", default_value_t = 0.6)]
        sigma_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Submanifold with a phi-invariant tangent space (odd n)
    InvariantSub {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "sigma-scale", default_value_t = 0.0)]
        sigma_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sigma in one of the equality normal forms on a clean base
    EqualityCase {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Shape1)]
        variant: VariantArg,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        a: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        b: f64,
        /// Flat (c_r, d_r) pairs for the remaining normal directions
        #[arg(long, allow_hyphen_values = true, num_args = 0.., value_delimiter = ',')]
        cd: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Umbilical sigma on an invariant base (h-norm 0 = totally geodesic)
    Umbilical {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<f64>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "h-norm", default_value_t = 0.0, allow_hyphen_values = true)]
        h_norm: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn warn_on_odd_tolerances(tol: f64, eq_tol: f64) {
    if eq_tol < tol {
        eprintln!(
            "warning: eq-tol ({eq_tol:e}) is tighter than tol ({tol:e}); \
             equality flags will be stricter than satisfaction"
        );
    }
}

fn load_model(path: &Path) -> Result<(ModelFile, kmu_geometry::SubmanifoldPoint), String> {
    let file = ModelFile::load(path)?;
    let sub = file.instantiate()?;
    Ok((file, sub))
}

fn report_path(model: &Path) -> PathBuf {
    let mut name = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string());
    name.push_str(".report.json");
    model.with_file_name(name)
}

fn cmd_generate(kind: GenKind) -> u8 {
    let built = match kind {
        GenKind::Sasakian {
            m,
            c,
            n,
            seed,
            sigma_scale,
            out,
        } => gen::sasakian(m, c, n, seed, sigma_scale).map(|f| (f, out)),
        GenKind::Kmu {
            m,
            kappa,
            n,
            seed,
            sigma_scale,
            out,
        } => gen::kmu(m, kappa, n, seed, sigma_scale).map(|f| (f, out)),
        GenKind::RandomSub {
            m,
            kappa,
            c,
            n,
            seed,
            mode,
            sigma_scale,
            out,
        } => gen::random_sub(
            &AmbientSpec { m, kappa, c },
            n,
            seed,
            match mode {
                ModeArg::Contact => SigmaMode::Contact,
                ModeArg::Raw => SigmaMode::Raw,
            },
            sigma_scale,
        )
        .map(|f| (f, out)),
        GenKind::InvariantSub {
            m,
            kappa,
            c,
            n,
            seed,
            sigma_scale,
            out,
        } => gen::invariant_sub(&AmbientSpec { m, kappa, c }, n, seed, sigma_scale)
            .map(|f| (f, out)),
        GenKind::EqualityCase {
            m,
            kappa,
            c,
            n,
            seed,
            variant,
            a,
            b,
            cd,
            out,
        } => gen::equality_case(
            &AmbientSpec { m, kappa, c },
            n,
            seed,
            match variant {
                VariantArg::Shape1 => ShapeVariant::Shape1,
                VariantArg::Shape1prime => ShapeVariant::Shape1Prime,
            },
            a,
            b,
            &cd,
        )
        .map(|f| (f, out)),
        GenKind::Umbilical {
            m,
            kappa,
            c,
            n,
            seed,
            h_norm,
            out,
        } => gen::umbilical(&AmbientSpec { m, kappa, c }, n, seed, h_norm).map(|f| (f, out)),
    };
    match built {
        Ok((file, out)) => {
            if let Err(msg) = file.save(&out) {
                eprintln!("{msg}");
                return EXIT_INVALID as u8;
            }
            // Round trip: the written file must reload and rebuild.
            match ModelFile::load(&out).and_then(|f| f.instantiate().map(|_| ())) {
                Ok(()) => {
                    println!("wrote {}", out.display());
                    0
                }
                Err(msg) => {
                    eprintln!("round trip failed: {msg}");
                    EXIT_INVALID as u8
                }
            }
        }
        Err(e) => {
            eprintln!("generation failed: {e}");
            EXIT_INVALID as u8
        }
    }
}

fn cmd_check(flags: RunFlags) -> u8 {
    warn_on_odd_tolerances(flags.tol, flags.eq_tol);
    let (file, sub) = match load_model(&flags.model) {
        Ok(pair) => pair,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_INVALID as u8;
        }
    };
    let mode = match flags.mode {
        Some(ModeArg::Contact) => SigmaMode::Contact,
        Some(ModeArg::Raw) => SigmaMode::Raw,
        None => match file.meta.sigma_mode() {
            Ok(m) => m,
            Err(msg) => {
                eprintln!("{msg}");
                return EXIT_INVALID as u8;
            }
        },
    };
    let cfg = CheckConfig {
        tol: flags.tol,
        eq_tol: flags.eq_tol,
        seed: flags.seed,
        trials: flags.trials,
        restarts: flags.restarts,
        mode,
        unchecked: flags.unchecked,
    };
    let outcome = checks::run_checks(&sub, &cfg);
    let json = report::render_json(&outcome.items);
    let out_path = report_path(&flags.model);
    if let Err(e) = std::fs::write(&out_path, json.clone() + "\n") {
        eprintln!("cannot write report {}: {e}", out_path.display());
    }
    match flags.format {
        FormatArg::Text => print!("{}", report::render_text(&outcome.items)),
        FormatArg::Json => println!("{json}"),
    }
    outcome.exit as u8
}

fn cmd_delta(flags: RunFlags) -> u8 {
    warn_on_odd_tolerances(flags.tol, flags.eq_tol);
    let (file, sub) = match load_model(&flags.model) {
        Ok(pair) => pair,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_INVALID as u8;
        }
    };
    if !flags.unchecked {
        let sv = kmu_geometry::validate_structure(sub.structure(), flags.tol);
        if !sv.passed() {
            eprintln!(
                "invalid input: structure validation failed (worst residual {:.3e})",
                sv.max_residual()
            );
            return EXIT_INVALID as u8;
        }
        let mode = match file.meta.sigma_mode() {
            Ok(m) => m,
            Err(msg) => {
                eprintln!("{msg}");
                return EXIT_INVALID as u8;
            }
        };
        let mv = sub.validate(flags.tol, mode);
        if !mv.passed() {
            eprintln!(
                "invalid input: submanifold validation failed (worst residual {:.3e})",
                mv.max_residual()
            );
            return EXIT_INVALID as u8;
        }
    }
    let cfg = delta_cmd::DeltaConfig {
        seed: flags.seed,
        restarts: flags.restarts,
        grid_resolution: flags.grid_resolution,
        domain: match flags.domain {
            DomainArg::All => Domain::All,
            DomainArg::D => Domain::D,
        },
    };
    match delta_cmd::run_delta(&sub, &cfg) {
        Ok((report, exit)) => {
            match flags.format {
                FormatArg::Text => print!("{}", delta_cmd::render_text(&report)),
                FormatArg::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("delta report serializes")
                ),
            }
            exit as u8
        }
        Err((exit, msg)) => {
            eprintln!("{msg}");
            exit as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Generate { kind } => cmd_generate(kind),
        Cmd::Check { cfg } => cmd_check(cfg),
        Cmd::Delta { cfg } => cmd_delta(cfg),
    };
    ExitCode::from(code)
}
