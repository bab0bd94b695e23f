//! `moebius`: command-line driver for the Möbius disjointness toolkit.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use moebius_core::symbolic::{RankOneParams, Tower};

use config::{quote, CommandKind, ExperimentConfig, Violation};

#[derive(Parser)]
#[command(
    name = "moebius",
    version,
    about = "Möbius disjointness experiments for rank-one systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Default)]
struct System {
    /// Rank-one parameter file, or a built-in name (chacon, infinite, odometer).
    #[arg(long)]
    params: Option<String>,
    /// Built-in system: chacon, infinite, odometer, integer-shift, boole.
    #[arg(long)]
    system: Option<String>,
}

#[derive(Args, Default)]
struct Output {
    /// Directory for CSV files and summary.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct Orbit {
    /// cylinder, centered, mobius, interval or cauchy.
    #[arg(long)]
    observable: Option<String>,
    /// Cylinder word.
    #[arg(long)]
    word: Option<String>,
    /// Cylinder position.
    #[arg(long, allow_hyphen_values = true)]
    position: Option<i64>,
    /// Interval endpoints a,b for the Boole map.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    interval: Option<Vec<f64>>,
    /// Boole map starting point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Starting integer of the shift orbit.
    #[arg(long, allow_hyphen_values = true)]
    start: Option<i64>,
    /// Base point of the rank-one orbit: canonical or ones.
    #[arg(long)]
    base: Option<String>,
    /// Ascending checkpoints, comma separated.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
}

#[derive(Args, Default)]
struct Plan {
    /// Gap between plan stages (n_j = step·j + offset).
    #[arg(long)]
    plan_step: Option<usize>,
    #[arg(long)]
    plan_offset: Option<usize>,
    /// Number of plan stages.
    #[arg(long)]
    plan_count: Option<usize>,
    /// m_j formula: last-offset or as-printed.
    #[arg(long)]
    reading: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Möbius/Liouville sieve, Mertens values and twisted sums.
    Sieve {
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        /// Grid size for the twisted-sum scan.
        #[arg(long)]
        grid: Option<usize>,
        /// Write μ to a binary cache file.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Building blocks W_n with heights and symbol counts.
    Words {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        length_cap: Option<usize>,
        /// Also write the materialized words.
        #[arg(long)]
        dump_words: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Cylinder frequencies and the infinite-measure/periodicity diagnostics.
    Measure {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        max_period: Option<usize>,
        #[arg(long)]
        length_cap: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Weighted ergodic averages (1/N) Σ w(n) f(Tⁿx).
    Avg {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        orbit: Orbit,
        /// mobius, liouville or none.
        #[arg(long)]
        weight: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Hopf ratio averages Σ w(n) f(Tⁿx) / Σ p(Tⁿx).
    Hopf {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        orbit: Orbit,
        #[arg(long)]
        weight: Option<String>,
        /// Cylinder word of the denominator (rank-one systems).
        #[arg(long)]
        density_word: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Correlations (1/N) Σ f(T^{pn}x) f(T^{qn}x) and the Hellinger bound.
    Dkbsz {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        orbit: Orbit,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        /// Grid size for the bound (power of two above 2·max(p, q)·N).
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Riesz product coefficients and grid density.
    Spectra {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Hellinger affinity of the pseudo-dilations σ_(p), σ_(q).
    Hellinger {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        stages: Option<usize>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Subsequence Riesz product coefficients at the frequencies m_j.
    Klemes {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        plan: Plan,
        #[command(flatten)]
        out: Output,
    },
    /// Truncated (Br1)/(Br2) series for σ_(p) against σ_(q).
    Peyriere {
        #[command(flatten)]
        system: System,
        #[command(flatten)]
        plan: Plan,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        truncation: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Partial sums of 1/p_n² by residue class.
    Divergence {
        #[command(flatten)]
        system: System,
        #[arg(long)]
        modulus: Option<usize>,
        #[arg(long)]
        horizon: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Runs an experiment file.
    Run {
        config: PathBuf,
        /// Overrides the file's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lists precondition violations of an experiment file or parameter file.
    Validate { file: PathBuf },
}

impl System {
    fn apply(self, cfg: &mut ExperimentConfig) {
        cfg.system = self.system;
        if let Some(p) = self.params {
            if RankOneParams::builtin(&p).is_some() && !Path::new(&p).exists() {
                cfg.system = Some(p);
            } else {
                cfg.params = Some(p.into());
            }
        }
    }
}

impl Orbit {
    fn apply(self, cfg: &mut ExperimentConfig) {
        cfg.observable = self.observable;
        cfg.word = self.word;
        cfg.position = self.position;
        // anything but two endpoints is left for validation to reject
        cfg.interval = self
            .interval
            .map(|v| v.try_into().unwrap_or([f64::NAN, f64::NAN]));
        cfg.x0 = self.x0;
        cfg.start = self.start;
        cfg.base = self.base;
        cfg.checkpoints = self.checkpoints;
    }
}

impl Plan {
    fn apply(self, cfg: &mut ExperimentConfig) {
        cfg.plan_step = self.plan_step;
        cfg.plan_offset = self.plan_offset;
        cfg.plan_count = self.plan_count;
        cfg.reading = self.reading;
    }
}

fn config_from(cmd: Cmd) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let kind = match cmd {
        Cmd::Sieve {
            limit,
            checkpoints,
            grid,
            cache,
            out,
        } => {
            cfg.limit = limit;
            cfg.checkpoints = checkpoints;
            cfg.grid = grid;
            cfg.cache = cache;
            cfg.out = out.out;
            CommandKind::Sieve
        }
        Cmd::Words {
            system,
            stages,
            length_cap,
            dump_words,
            out,
        } => {
            system.apply(&mut cfg);
            cfg.stages = stages;
            cfg.length_cap = length_cap;
            cfg.dump_words = Some(dump_words);
            cfg.out = out.out;
            CommandKind::Words
        }
        Cmd::Measure {
            system,
            word,
            stages,
            threshold,
            max_period,
            length_cap,
            out,
        } => {
            system.apply(&mut cfg);
            cfg.word = word;
            cfg.stages = stages;
            cfg.threshold = threshold;
            cfg.max_period = max_period;
            cfg.length_cap = length_cap;
            cfg.out = out.out;
            CommandKind::Measure
        }
        Cmd::Avg {
            system,
            orbit,
            weight,
            out,
        } => {
            system.apply(&mut cfg);
            orbit.apply(&mut cfg);
            cfg.weight = weight;
            cfg.out = out.out;
            CommandKind::Avg
        }
        Cmd::Hopf {
            system,
            orbit,
            weight,
            density_word,
            out,
        } => {
            system.apply(&mut cfg);
            orbit.apply(&mut cfg);
            cfg.weight = weight;
            cfg.density_word = density_word;
            cfg.out = out.out;
            CommandKind::Hopf
        }
        Cmd::Dkbsz {
            system,
            orbit,
            p,
            q,
            grid,
            out,
        } => {
            system.apply(&mut cfg);
            orbit.apply(&mut cfg);
            (cfg.p, cfg.q, cfg.grid) = (p, q, grid);
            cfg.out = out.out;
            CommandKind::Dkbsz
        }
        Cmd::Spectra {
            system,
            stages,
            grid,
            out,
        } => {
            system.apply(&mut cfg);
            (cfg.stages, cfg.grid) = (stages, grid);
            cfg.out = out.out;
            CommandKind::Spectra
        }
        Cmd::Hellinger {
            system,
            stages,
            p,
            q,
            grid,
            out,
        } => {
            system.apply(&mut cfg);
            (cfg.stages, cfg.p, cfg.q, cfg.grid) = (stages, p, q, grid);
            cfg.out = out.out;
            CommandKind::Hellinger
        }
        Cmd::Klemes { system, plan, out } => {
            system.apply(&mut cfg);
            plan.apply(&mut cfg);
            cfg.out = out.out;
            CommandKind::Klemes
        }
        Cmd::Peyriere {
            system,
            plan,
            p,
            q,
            truncation,
            out,
        } => {
            system.apply(&mut cfg);
            plan.apply(&mut cfg);
            (cfg.p, cfg.q, cfg.truncation) = (p, q, truncation);
            cfg.out = out.out;
            CommandKind::Peyriere
        }
        Cmd::Divergence {
            system,
            modulus,
            horizon,
            out,
        } => {
            system.apply(&mut cfg);
            (cfg.modulus, cfg.horizon) = (modulus, horizon);
            cfg.out = out.out;
            CommandKind::Divergence
        }
        Cmd::Run { .. } | Cmd::Validate { .. } => unreachable!("handled by the caller"),
    };
    cfg.command = Some(kind);
    cfg
}

/// Exit codes: 1 runtime failure, 2 validation failure.
enum Failure {
    Validation(Vec<Violation>),
    Runtime { kind: &'static str, message: String },
}

impl Failure {
    fn line(&self) -> String {
        match self {
            Failure::Validation(v) => format!(
                "error kind=validation violations={} {}",
                v.len(),
                v.first().map_or(String::new(), |v| v.to_string())
            ),
            Failure::Runtime { kind, message } => {
                format!("error kind={kind} reason={}", quote(message))
            }
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Runtime { .. } => 1,
        }
    }
}

fn io_failure(message: String) -> Failure {
    Failure::Runtime {
        kind: "io",
        message,
    }
}

fn execute(cfg: ExperimentConfig) -> Result<(), Failure> {
    let cfg = cfg.with_defaults();
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(Failure::Validation(violations));
    }
    let start = Instant::now();
    let report = commands::run(&cfg).map_err(|e| Failure::Runtime {
        kind: e.kind(),
        message: e.to_string(),
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    let files = match &cfg.out {
        Some(dir) => report.write_tables(dir).map_err(io_failure)?,
        None => Vec::new(),
    };
    let summary = report.render(elapsed, &files);
    if let Some(dir) = &cfg.out {
        let path = dir.join("summary.txt");
        std::fs::write(&path, &summary)
            .map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    }
    print!("{summary}");
    Ok(())
}

/// Experiment file (has a `command`) or rank-one parameter file.
fn validate_file(path: &Path) -> Result<Vec<Violation>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_failure(format!("{}: {e}", path.display())))?;
    let is_experiment = text
        .parse::<toml::Table>()
        .is_ok_and(|t| t.contains_key("command"));
    if is_experiment {
        return Ok(match ExperimentConfig::from_file(path) {
            Ok(cfg) => cfg.with_defaults().validate(),
            Err(reason) => vec![Violation {
                field: "config".into(),
                reason,
            }],
        });
    }
    let params = match RankOneParams::from_file(path) {
        Ok(p) => p,
        Err(e) => {
            return Ok(vec![Violation {
                field: "params".into(),
                reason: e.to_string(),
            }])
        }
    };
    Ok(match Tower::build(&params, 8) {
        Ok(_) => Vec::new(),
        Err(e) => vec![Violation {
            field: "params".into(),
            reason: e.to_string(),
        }],
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Validate { file } => match validate_file(&file) {
            Ok(v) if v.is_empty() => {
                println!("ok");
                Ok(())
            }
            Ok(v) => {
                for violation in &v {
                    println!("violation {violation}");
                }
                return ExitCode::from(2);
            }
            Err(f) => Err(f),
        },
        Cmd::Run { config, out } => match ExperimentConfig::from_file(&config) {
            Ok(mut cfg) => {
                if out.is_some() {
                    cfg.out = out;
                }
                execute(cfg)
            }
            Err(reason) => Err(Failure::Validation(vec![Violation {
                field: "config".into(),
                reason,
            }])),
        },
        cmd => execute(config_from(cmd)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}
