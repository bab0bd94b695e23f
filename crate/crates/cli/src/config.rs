//! Experiment configuration shared by command-line flags and config files.

use std::fmt;
use std::path::{Path, PathBuf};

use moebius_core::averages::{BasePoint, Observable, OrbitModel, Weight};
use moebius_core::numtheory::{is_prime, DEFAULT_CHECKPOINTS};
use moebius_core::spectral::{MjReading, SubsequencePlan, DEFAULT_COEFF_BUDGET};
use moebius_core::symbolic::{RankOneParams, Tower, DEFAULT_LENGTH_CAP};
use serde::{Deserialize, Serialize};

/// Overrides the sparse-convolution budget.
pub const BUDGET_ENV: &str = "MOEBIUS_COEFF_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Sieve,
    Words,
    Measure,
    Avg,
    Hopf,
    Dkbsz,
    Spectra,
    Hellinger,
    Klemes,
    Peyriere,
    Divergence,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Sieve => "sieve",
            CommandKind::Words => "words",
            CommandKind::Measure => "measure",
            CommandKind::Avg => "avg",
            CommandKind::Hopf => "hopf",
            CommandKind::Dkbsz => "dkbsz",
            CommandKind::Spectra => "spectra",
            CommandKind::Hellinger => "hellinger",
            CommandKind::Klemes => "klemes",
            CommandKind::Peyriere => "peyriere",
            CommandKind::Divergence => "divergence",
        }
    }

    fn needs_rank_one(self) -> bool {
        !matches!(
            self,
            CommandKind::Sieve | CommandKind::Avg | CommandKind::Hopf | CommandKind::Dkbsz
        )
    }

    fn uses_orbit(self) -> bool {
        matches!(
            self,
            CommandKind::Avg | CommandKind::Hopf | CommandKind::Dkbsz
        )
    }
}

/// Everything a run needs. Unset fields take per-command defaults in
/// [`ExperimentConfig::with_defaults`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    /// Built-in system: chacon, infinite, odometer, integer-shift or boole.
    pub system: Option<String>,
    /// Rank-one parameter file.
    pub params: Option<PathBuf>,
    pub limit: Option<usize>,
    pub checkpoints: Option<Vec<u64>>,
    pub stages: Option<usize>,
    /// cylinder, centered, mobius, interval or cauchy.
    pub observable: Option<String>,
    pub word: Option<String>,
    pub position: Option<i64>,
    /// Cylinder word of the Hopf denominator on rank-one systems.
    pub density_word: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub weight: Option<String>,
    /// canonical or ones.
    pub base: Option<String>,
    pub x0: Option<f64>,
    pub start: Option<i64>,
    pub p: Option<u64>,
    pub q: Option<u64>,
    pub grid: Option<usize>,
    pub plan_step: Option<usize>,
    pub plan_offset: Option<usize>,
    pub plan_count: Option<usize>,
    /// last-offset or as-printed.
    pub reading: Option<String>,
    pub truncation: Option<usize>,
    pub modulus: Option<usize>,
    pub horizon: Option<usize>,
    pub threshold: Option<f64>,
    pub max_period: Option<usize>,
    pub length_cap: Option<usize>,
    pub cache: Option<PathBuf>,
    pub dump_words: Option<bool>,
    pub out: Option<PathBuf>,
}

/// A precondition that would make the run fail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "field={} reason={}", self.field, quote(&self.reason))
    }
}

/// Double-quoted, single-line rendering of free text.
pub fn quote(s: &str) -> String {
    format!("{:?}", s.replace('\n', " "))
}

fn is_power_of_two(n: usize) -> bool {
    n.is_power_of_two() && n >= 2
}

impl ExperimentConfig {
    /// Reads a TOML experiment file; a relative `params` path is taken
    /// relative to the file.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| e.message().to_string())?;
        if let (Some(p), Some(dir)) = (&cfg.params, path.parent()) {
            if p.is_relative() {
                cfg.params = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Fills unset fields with the defaults of the command.
    pub fn with_defaults(mut self) -> Self {
        let Some(cmd) = self.command else {
            return self;
        };
        let orbit_kind = self.orbit_kind();
        macro_rules! default {
            ($field:ident, $value:expr) => {
                if self.$field.is_none() {
                    self.$field = Some($value);
                }
            };
        }
        match cmd {
            CommandKind::Sieve => {
                default!(limit, 1_000_000);
                let limit = self.limit.unwrap() as u64;
                let mut cps: Vec<u64> = DEFAULT_CHECKPOINTS
                    .iter()
                    .copied()
                    .filter(|&c| c < limit)
                    .collect();
                cps.push(limit);
                default!(checkpoints, cps);
            }
            CommandKind::Words => {
                default!(stages, 6);
                default!(dump_words, false);
            }
            CommandKind::Measure => {
                default!(stages, 10);
                default!(word, "0".into());
                default!(threshold, 100.0);
                default!(max_period, 8);
            }
            CommandKind::Avg | CommandKind::Hopf | CommandKind::Dkbsz => {
                default!(checkpoints, vec![1_000, 10_000, 100_000]);
                match orbit_kind {
                    OrbitKind::RankOne => {
                        default!(base, "canonical".into());
                        if cmd == CommandKind::Hopf {
                            default!(observable, "cylinder".into());
                            default!(density_word, "0".into());
                        } else {
                            default!(observable, "centered".into());
                        }
                        default!(word, "0".into());
                        default!(position, 0);
                    }
                    OrbitKind::IntegerShift => {
                        default!(observable, "mobius".into());
                        default!(start, 0);
                    }
                    OrbitKind::Boole => {
                        default!(observable, "interval".into());
                        default!(interval, [-1.0, 1.0]);
                        default!(x0, 1.5);
                    }
                }
                if cmd == CommandKind::Dkbsz {
                    default!(p, 2);
                    default!(q, 3);
                } else {
                    default!(weight, "mobius".into());
                }
            }
            CommandKind::Spectra => {
                default!(stages, 4);
                default!(grid, 1 << 15);
            }
            CommandKind::Hellinger => {
                default!(stages, 4);
                default!(p, 2);
                default!(q, 3);
                default!(grid, 1 << 15);
            }
            CommandKind::Klemes => {
                default!(plan_step, 3);
                default!(plan_offset, 0);
                default!(plan_count, 10);
                default!(reading, "last-offset".into());
            }
            CommandKind::Peyriere => {
                default!(plan_step, 3);
                default!(plan_offset, 0);
                default!(truncation, self.plan_count.map_or(50, |c| c.min(50)));
                default!(plan_count, self.truncation.unwrap());
                default!(p, 2);
                default!(q, 3);
            }
            CommandKind::Divergence => {
                default!(modulus, 3);
                default!(horizon, 1_000);
            }
        }
        if cmd.needs_rank_one() || orbit_kind == OrbitKind::RankOne {
            default!(length_cap, DEFAULT_LENGTH_CAP);
        }
        self
    }

    fn orbit_kind(&self) -> OrbitKind {
        match self.system.as_deref() {
            Some("integer-shift") => OrbitKind::IntegerShift,
            Some("boole") => OrbitKind::Boole,
            _ => OrbitKind::RankOne,
        }
    }

    /// Rank-one parameters from `params` or a built-in `system`.
    pub fn rank_one(&self) -> Result<RankOneParams, Violation> {
        let bad = |field: &str, reason: String| Violation {
            field: field.into(),
            reason,
        };
        match (&self.params, &self.system) {
            (Some(path), _) => RankOneParams::from_file(path)
                .map_err(|e| bad("params", format!("{}: {e}", path.display()))),
            (None, Some(name)) => RankOneParams::builtin(name).ok_or_else(|| {
                bad(
                    "system",
                    format!("{name:?} is not a built-in rank-one system"),
                )
            }),
            (None, None) => Err(bad(
                "params",
                "a parameter file or built-in system is required".into(),
            )),
        }
    }

    pub fn model(&self) -> Result<OrbitModel<f64>, Violation> {
        Ok(match self.orbit_kind() {
            OrbitKind::IntegerShift => OrbitModel::IntegerShift {
                start: self.start.unwrap_or(0),
            },
            OrbitKind::Boole => OrbitModel::BooleMap {
                x0: self.x0.unwrap_or(1.5),
            },
            OrbitKind::RankOne => OrbitModel::RankOneSubshift {
                params: self.rank_one()?,
                base: match self.base.as_deref() {
                    None | Some("canonical") => BasePoint::Canonical,
                    Some("ones") => BasePoint::Ones,
                    Some(other) => {
                        return Err(Violation {
                            field: "base".into(),
                            reason: format!("unknown base point {other:?}"),
                        })
                    }
                },
            },
        })
    }

    fn cylinder_word(&self, word: Option<&str>, field: &str) -> Result<String, Violation> {
        let word = word.unwrap_or("0");
        if word.is_empty() || !word.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Violation {
                field: field.into(),
                reason: format!("{word:?} is not a nonempty 0/1 word"),
            });
        }
        Ok(word.into())
    }

    pub fn observable(&self) -> Result<Observable<f64>, Violation> {
        let bad = |reason: String| Violation {
            field: "observable".into(),
            reason,
        };
        let kind = self.observable.as_deref().unwrap_or("cylinder");
        let model = self.orbit_kind();
        let position = self.position.unwrap_or(0);
        let f = match kind {
            "cylinder" | "centered" => {
                let word = self.cylinder_word(self.word.as_deref(), "word")?;
                if model != OrbitKind::RankOne {
                    return Err(bad(format!("{kind} needs a rank-one system")));
                }
                if kind == "cylinder" {
                    Observable::cylinder(&word, position)
                } else {
                    Observable::centered_cylinder(&word, position)
                }
                .map_err(|e| bad(e.to_string()))?
            }
            "mobius" if model == OrbitKind::IntegerShift => Observable::Mobius,
            "interval" if model == OrbitKind::Boole => {
                let [a, b] = self.interval.unwrap_or([-1.0, 1.0]);
                if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
                    return Err(Violation {
                        field: "interval".into(),
                        reason: if a.is_nan() || b.is_nan() {
                            "interval needs two endpoints a,b".into()
                        } else {
                            format!("[{a}, {b}] is empty")
                        },
                    });
                }
                Observable::IndicatorInterval { a, b }
            }
            "cauchy" if model == OrbitKind::Boole => Observable::cauchy(),
            "mobius" | "interval" | "cauchy" => {
                return Err(bad(format!(
                    "{kind} is not defined on system {}",
                    self.system.as_deref().unwrap_or("rank-one")
                )))
            }
            other => return Err(bad(format!("unknown observable {other:?}"))),
        };
        Ok(f)
    }

    /// Denominator of the Hopf ratio.
    pub fn density_observable(&self) -> Result<Observable<f64>, Violation> {
        match self.orbit_kind() {
            OrbitKind::RankOne => {
                let word = self.cylinder_word(self.density_word.as_deref(), "density_word")?;
                Observable::cylinder(&word, self.position.unwrap_or(0)).map_err(|e| Violation {
                    field: "density_word".into(),
                    reason: e.to_string(),
                })
            }
            OrbitKind::Boole => Ok(Observable::cauchy()),
            OrbitKind::IntegerShift => Err(Violation {
                field: "system".into(),
                reason: "hopf ratios need a rank-one system or the Boole map".into(),
            }),
        }
    }

    pub fn weight(&self) -> Result<Weight, Violation> {
        self.weight
            .as_deref()
            .unwrap_or("none")
            .parse()
            .map_err(|e: moebius_core::Error| Violation {
                field: "weight".into(),
                reason: e.to_string(),
            })
    }

    pub fn reading(&self) -> Result<MjReading, Violation> {
        match self.reading.as_deref() {
            None | Some("last-offset") => Ok(MjReading::LastOffset),
            Some("as-printed") => Ok(MjReading::AsPrinted),
            Some(other) => Err(Violation {
                field: "reading".into(),
                reason: format!("unknown m_j reading {other:?} (last-offset or as-printed)"),
            }),
        }
    }

    pub fn plan(&self) -> Result<SubsequencePlan, Violation> {
        SubsequencePlan::arithmetic(
            self.plan_step.unwrap_or(3),
            self.plan_offset.unwrap_or(0),
            self.plan_count.unwrap_or(1),
        )
        .map_err(|e| Violation {
            field: "plan_step".into(),
            reason: e.to_string(),
        })
    }

    pub fn budget() -> Result<usize, Violation> {
        match std::env::var(BUDGET_ENV) {
            Err(_) => Ok(DEFAULT_COEFF_BUDGET),
            Ok(v) => v.trim().parse().map_err(|_| Violation {
                field: BUDGET_ENV.into(),
                reason: format!("{v:?} is not a nonnegative integer"),
            }),
        }
    }

    /// Every precondition violation, without running anything.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, reason: String| {
            out.push(Violation {
                field: field.into(),
                reason,
            })
        };
        let Some(cmd) = self.command else {
            push("command", "no command given".into());
            return out;
        };
        let positive = |v: Option<usize>| v.is_none_or(|v| v > 0);

        if let Some(sys) = &self.system {
            let known = ["chacon", "infinite", "odometer", "integer-shift", "boole"];
            if !known.contains(&sys.as_str()) {
                push("system", format!("unknown system {sys:?}"));
            }
        }
        if cmd.needs_rank_one() && self.orbit_kind() != OrbitKind::RankOne {
            push("system", format!("{} needs a rank-one system", cmd.name()));
        } else if cmd.needs_rank_one()
            || (cmd.uses_orbit() && self.orbit_kind() == OrbitKind::RankOne)
        {
            match self.rank_one() {
                Err(v) => push(&v.field, v.reason),
                Ok(params) => {
                    let depth = self.stages.unwrap_or(1).clamp(1, 64);
                    if let Err(e) = Tower::build(&params, depth) {
                        push("params", e.to_string());
                    }
                }
            }
        }

        if let Some(cps) = &self.checkpoints {
            if cps.is_empty() || cps[0] == 0 || cps.windows(2).any(|w| w[0] >= w[1]) {
                push(
                    "checkpoints",
                    "checkpoints must be positive and strictly ascending".into(),
                );
            }
        }
        if let Some(grid) = self.grid {
            if !is_power_of_two(grid) {
                push("grid", format!("grid size {grid} is not a power of two"));
            }
        }
        if !positive(self.limit) {
            push("limit", "limit must be positive".into());
        }
        if let (Some(limit), Some(cps)) = (self.limit, &self.checkpoints) {
            if cps.last().is_some_and(|&c| c as usize > limit) {
                push(
                    "checkpoints",
                    format!("checkpoints exceed the sieve limit {limit}"),
                );
            }
        }
        if !positive(self.stages) {
            push("stages", "stages must be positive".into());
        }
        if !positive(self.length_cap) {
            push("length_cap", "length cap must be positive".into());
        }
        if let Err(e) = Self::budget() {
            push(&e.field, e.reason);
        }

        if cmd.uses_orbit() {
            if let Err(v) = self.observable() {
                push(&v.field, v.reason);
            }
            if let Err(v) = self.model() {
                push(&v.field, v.reason);
            }
            if cmd == CommandKind::Hopf {
                if let Err(v) = self.density_observable() {
                    push(&v.field, v.reason);
                }
            }
            if cmd != CommandKind::Dkbsz {
                if let Err(v) = self.weight() {
                    push(&v.field, v.reason);
                }
            }
            if let (Some(x0), OrbitKind::Boole) = (self.x0, self.orbit_kind()) {
                if x0 == 0.0 || !x0.is_finite() {
                    push("x0", "the Boole orbit needs a finite nonzero start".into());
                }
            }
        }

        if matches!(cmd, CommandKind::Hellinger | CommandKind::Peyriere) {
            for (field, v) in [("p", self.p), ("q", self.q)] {
                if v == Some(0) {
                    push(field, "dilation factors must be positive".into());
                }
            }
        }
        if cmd == CommandKind::Dkbsz {
            let (p, q) = (self.p.unwrap_or(2), self.q.unwrap_or(3));
            for (field, v) in [("p", p), ("q", q)] {
                if !is_prime(v) {
                    push(field, format!("{v} is not prime"));
                }
            }
            if p == q {
                push("q", format!("p and q must be distinct (both {p})"));
            }
            if let (Some(grid), Some(cps)) = (self.grid, &self.checkpoints) {
                let top = self.p.unwrap_or(2).max(self.q.unwrap_or(3)) as usize;
                let n = cps.last().copied().unwrap_or(0) as usize;
                if grid <= 2 * top * n {
                    push(
                        "grid",
                        format!(
                            "grid size {grid} must exceed 2·max(p, q)·N = {}",
                            2 * top * n
                        ),
                    );
                }
                if n / top == 0 {
                    push(
                        "checkpoints",
                        format!("largest checkpoint must be at least max(p, q) = {top}"),
                    );
                }
            }
        }
        if matches!(cmd, CommandKind::Klemes | CommandKind::Peyriere) {
            if let Err(v) = self.plan() {
                push(&v.field, v.reason);
            }
            if !positive(self.plan_count) {
                push("plan_count", "the plan needs at least one stage".into());
            }
            if let Err(v) = self.reading() {
                push(&v.field, v.reason);
            }
        }
        if cmd == CommandKind::Peyriere {
            if let (Some(t), Some(c)) = (self.truncation, self.plan_count) {
                if t == 0 || t > c {
                    push("truncation", format!("truncation {t} must lie in 1..={c}"));
                }
            }
        }
        if cmd == CommandKind::Divergence {
            let m = self.modulus.unwrap_or(3);
            if m == 0 {
                push("modulus", "modulus must be positive".into());
            }
            if self.horizon.unwrap_or(0) < m {
                push(
                    "horizon",
                    format!("horizon must be at least the modulus {m}"),
                );
            }
        }
        if cmd == CommandKind::Measure {
            if let Err(v) = self.cylinder_word(self.word.as_deref(), "word") {
                push(&v.field, v.reason);
            }
            if self.stages.is_some_and(|s| s < 3) {
                push(
                    "stages",
                    "the infinity diagnostic needs at least three stages".into(),
                );
            }
            if !positive(self.max_period) {
                push("max_period", "max_period must be positive".into());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OrbitKind {
    RankOne,
    IntegerShift,
    Boole,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: CommandKind) -> ExperimentConfig {
        ExperimentConfig {
            command: Some(cmd),
            system: Some("chacon".into()),
            ..Default::default()
        }
        .with_defaults()
    }

    #[test]
    fn defaults_validate() {
        for cmd in [
            CommandKind::Words,
            CommandKind::Measure,
            CommandKind::Avg,
            CommandKind::Hopf,
            CommandKind::Dkbsz,
            CommandKind::Spectra,
            CommandKind::Hellinger,
            CommandKind::Klemes,
            CommandKind::Peyriere,
            CommandKind::Divergence,
        ] {
            assert_eq!(cfg(cmd).validate(), vec![], "{cmd:?}");
        }
        let sieve = ExperimentConfig {
            command: Some(CommandKind::Sieve),
            ..Default::default()
        }
        .with_defaults();
        assert_eq!(
            sieve.checkpoints,
            Some(vec![1_000, 10_000, 100_000, 1_000_000])
        );
        assert_eq!(sieve.validate(), vec![]);
    }

    #[test]
    fn single_violations() {
        let mut c = cfg(CommandKind::Spectra);
        c.grid = Some(1000);
        let v = c.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "grid");

        let mut c = cfg(CommandKind::Dkbsz);
        c.q = Some(2);
        let v = c.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "q");

        let mut c = cfg(CommandKind::Klemes);
        c.plan_step = Some(2);
        assert_eq!(c.validate()[0].field, "plan_step");

        let c = ExperimentConfig {
            command: Some(CommandKind::Avg),
            system: Some("boole".into()),
            observable: Some("mobius".into()),
            ..Default::default()
        }
        .with_defaults();
        assert_eq!(c.validate()[0].field, "observable");
    }

    #[test]
    fn toml_round_trip() {
        let c = cfg(CommandKind::Peyriere);
        let back: ExperimentConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert!(toml::from_str::<ExperimentConfig>("gird = 3").is_err());
    }
}
