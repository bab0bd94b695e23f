//! Cutting and spacer parameters of a rank-one system, and the parameter file
//! format.
//!
//! A parameter file is TOML:
//!
//! ```toml
//! name = "chacon"
//!
//! [cutting]
//! kind = "constant"      # or "list" (values = [...]) or "rule" (expr = "n + 2")
//! value = 3
//!
//! [spacers]
//! kind = "table"         # or "rule" (exprs = ["0", "h_n"], default = "0")
//! rows = [[0, 1, 0]]
//! ```
//!
//! Table rows are indexed by stage; stages past the last row reuse it, so a
//! single row describes a stationary construction. Rules may use integer
//! constants, `n`, `p_n`, `h_n`, `+`, `*` and parentheses (cutting rules may
//! not reference `p_n`).

use std::fmt;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic rule over `n`, `p_n` and `h_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Const(BigUint),
    Stage,
    Cutting,
    Height,
    Add(Box<Rule>, Box<Rule>),
    Mul(Box<Rule>, Box<Rule>),
}

impl Rule {
    pub fn parse(src: &str) -> Result<Rule> {
        let tokens = tokenize(src)?;
        let mut parser = Parser { tokens, pos: 0 };
        let rule = parser.sum()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Parse(format!("trailing input in rule {src:?}")));
        }
        Ok(rule)
    }

    pub fn constant(c: u64) -> Rule {
        Rule::Const(BigUint::from(c))
    }

    fn uses_cutting(&self) -> bool {
        match self {
            Rule::Cutting => true,
            Rule::Add(a, b) | Rule::Mul(a, b) => a.uses_cutting() || b.uses_cutting(),
            _ => false,
        }
    }

    /// Evaluates at stage `n`. `cutting` is `None` while p_n is being computed.
    pub fn eval(&self, n: usize, cutting: Option<u64>, height: &BigUint) -> Result<BigUint> {
        Ok(match self {
            Rule::Const(c) => c.clone(),
            Rule::Stage => BigUint::from(n),
            Rule::Cutting => BigUint::from(cutting.ok_or_else(|| Error::InvalidParameters {
                stage: n,
                reason: "cutting rule may not reference p_n".into(),
            })?),
            Rule::Height => height.clone(),
            Rule::Add(a, b) => a.eval(n, cutting, height)? + b.eval(n, cutting, height)?,
            Rule::Mul(a, b) => a.eval(n, cutting, height)? * b.eval(n, cutting, height)?,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Const(c) => write!(f, "{c}"),
            Rule::Stage => f.write_str("n"),
            Rule::Cutting => f.write_str("p_n"),
            Rule::Height => f.write_str("h_n"),
            Rule::Add(a, b) => write!(f, "({a} + {b})"),
            Rule::Mul(a, b) => write!(f, "{a} * {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Num(BigUint),
    Ident(String),
    Plus,
    Star,
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' => {
                chars.next();
            }
            '+' => {
                chars.next();
                out.push(Token::Plus);
            }
            '*' | '·' => {
                chars.next();
                out.push(Token::Star);
            }
            '(' => {
                chars.next();
                out.push(Token::Open);
            }
            ')' => {
                chars.next();
                out.push(Token::Close);
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() || d == '_' {
                        if d != '_' {
                            s.push(d);
                        }
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Num(s.parse().unwrap()));
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token::Ident(s));
            }
            other => {
                return Err(Error::Parse(format!(
                    "unexpected character {other:?} in rule {src:?}"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<Rule> {
        let mut lhs = self.product()?;
        while self.peek() == Some(&Token::Plus) {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Rule::Add(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Rule> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let rhs = self.atom()?;
            lhs = Rule::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Rule> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of rule".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Rule::Const(v)),
            Token::Ident(id) => match id.as_str() {
                "n" => Ok(Rule::Stage),
                "p_n" | "p" => Ok(Rule::Cutting),
                "h_n" | "h" => Ok(Rule::Height),
                _ => Err(Error::Parse(format!("unknown symbol {id:?} in rule"))),
            },
            Token::Open => {
                let inner = self.sum()?;
                if self.peek() != Some(&Token::Close) {
                    return Err(Error::Parse("missing ')' in rule".into()));
                }
                self.pos += 1;
                Ok(inner)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?} in rule"))),
        }
    }
}

/// How p_n is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cutting {
    Constant(i64),
    List(Vec<i64>),
    Rule(Rule),
}

/// How s(n, i) is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Spacers {
    /// Row n gives s(n, ·); the last row repeats.
    Table(Vec<Vec<i64>>),
    /// `exprs[i]` gives s(n, i); indices past the list use `default`.
    Rule { exprs: Vec<Rule>, default: Rule },
}

/// Parameters of a symbolic rank-one system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneParams {
    pub name: String,
    pub cutting: Cutting,
    pub spacers: Spacers,
}

/// Resolved parameters of one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSpec {
    pub cutting: u64,
    pub spacers: Vec<BigUint>,
}

impl StageSpec {
    pub fn spacer_total(&self) -> BigUint {
        self.spacers.iter().sum()
    }

    /// s(n, p_n − 1).
    pub fn last_spacer(&self) -> &BigUint {
        self.spacers.last().expect("p_n >= 2")
    }
}

impl RankOneParams {
    /// Chacon: p_n = 3, s(n, ·) = (0, 1, 0).
    pub fn chacon() -> Self {
        RankOneParams {
            name: "chacon".into(),
            cutting: Cutting::Constant(3),
            spacers: Spacers::Table(vec![vec![0, 1, 0]]),
        }
    }

    /// p_n = 2, s(n, ·) = (0, h_n): h_n = 3^n and the spacer symbol has
    /// infinite measure.
    pub fn infinite_family() -> Self {
        RankOneParams {
            name: "infinite".into(),
            cutting: Cutting::Constant(2),
            spacers: Spacers::Rule {
                exprs: vec![Rule::constant(0), Rule::Height],
                default: Rule::constant(0),
            },
        }
    }

    /// Constant cutting p with no spacers (the p-adic odometer).
    pub fn odometer(p: i64) -> Self {
        RankOneParams {
            name: format!("odometer-{p}"),
            cutting: Cutting::Constant(p),
            spacers: Spacers::Rule {
                exprs: vec![],
                default: Rule::constant(0),
            },
        }
    }

    /// Constant cutting with a fixed spacer row.
    pub fn stationary(name: &str, p: i64, row: Vec<i64>) -> Self {
        RankOneParams {
            name: name.into(),
            cutting: Cutting::Constant(p),
            spacers: Spacers::Table(vec![row]),
        }
    }

    /// Built-in systems by name: `chacon`, `infinite`, `odometer`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "chacon" => Some(Self::chacon()),
            "infinite" => Some(Self::infinite_family()),
            "odometer" => Some(Self::odometer(2)),
            _ => None,
        }
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let file: ParamsFile =
            toml::from_str(src).map_err(|e| Error::Parse(e.message().to_string()))?;
        file.try_into()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ParamsFile::from(self);
        toml::to_string(&file).expect("parameter file serializes")
    }

    /// p_n and s(n, ·) given h_n.
    pub fn stage(&self, n: usize, height: &BigUint) -> Result<StageSpec> {
        let bad = |reason: String| Error::InvalidParameters { stage: n, reason };
        let p: i64 = match &self.cutting {
            Cutting::Constant(p) => *p,
            Cutting::List(ps) => *ps
                .get(n)
                .ok_or_else(|| bad(format!("cutting list has only {} entries", ps.len())))?,
            Cutting::Rule(rule) => rule
                .eval(n, None, height)?
                .to_i64()
                .ok_or_else(|| bad("cutting rule value does not fit in 64 bits".into()))?,
        };
        if p < 2 {
            return Err(bad(format!("p_n = {p} < 2")));
        }
        let p_u = p as u64;
        let spacers = match &self.spacers {
            Spacers::Table(rows) => {
                let row = rows
                    .get(n)
                    .or_else(|| rows.last())
                    .ok_or_else(|| bad("empty spacer table".into()))?;
                if row.len() as u64 != p_u {
                    return Err(bad(format!(
                        "spacer row has {} entries but p_n = {p}",
                        row.len()
                    )));
                }
                row.iter()
                    .enumerate()
                    .map(|(i, &s)| {
                        if s < 0 {
                            Err(bad(format!("s(n, {i}) = {s} < 0")))
                        } else {
                            Ok(BigUint::from(s as u64))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            Spacers::Rule { exprs, default } => {
                if exprs.len() as u64 > p_u {
                    return Err(bad(format!("{} spacer rules but p_n = {p}", exprs.len())));
                }
                (0..p_u as usize)
                    .map(|i| exprs.get(i).unwrap_or(default).eval(n, Some(p_u), height))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(StageSpec {
            cutting: p_u,
            spacers,
        })
    }
}

/// Stage parameters and heights h_0..=h_K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    /// `stages[n]` for n < K.
    pub stages: Vec<StageSpec>,
    /// `heights[n]` = h_n for n ≤ K.
    pub heights: Vec<BigUint>,
}

impl Tower {
    pub fn build(params: &RankOneParams, stages: usize) -> Result<Tower> {
        let mut heights = vec![BigUint::from(1u32)];
        let mut specs = Vec::with_capacity(stages);
        for n in 0..stages {
            let spec = params.stage(n, &heights[n])?;
            let next = &heights[n] * spec.cutting + spec.spacer_total();
            specs.push(spec);
            heights.push(next);
        }
        Ok(Tower {
            stages: specs,
            heights,
        })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// Copy offsets j·h_n + s̃(n, j) with s̃(n, j) = Σ_{k<j} s(n, k).
    pub fn offsets(&self, n: usize) -> Vec<BigUint> {
        let spec = &self.stages[n];
        let h = &self.heights[n];
        let mut acc = BigUint::zero();
        let mut out = Vec::with_capacity(spec.cutting as usize);
        for j in 0..spec.cutting as usize {
            out.push(h * j + &acc);
            acc += &spec.spacers[j];
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    #[serde(default)]
    name: String,
    cutting: CuttingFile,
    spacers: SpacersFile,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CuttingFile {
    Constant { value: i64 },
    List { values: Vec<i64> },
    Rule { expr: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpacersFile {
    Table {
        rows: Vec<Vec<i64>>,
    },
    Rule {
        #[serde(default)]
        exprs: Vec<String>,
        #[serde(default = "zero_rule")]
        default: String,
    },
}

fn zero_rule() -> String {
    "0".into()
}

impl TryFrom<ParamsFile> for RankOneParams {
    type Error = Error;

    fn try_from(f: ParamsFile) -> Result<Self> {
        let cutting = match f.cutting {
            CuttingFile::Constant { value } => Cutting::Constant(value),
            CuttingFile::List { values } => Cutting::List(values),
            CuttingFile::Rule { expr } => {
                let rule = Rule::parse(&expr)?;
                if rule.uses_cutting() {
                    return Err(Error::Parse("cutting rule may not reference p_n".into()));
                }
                Cutting::Rule(rule)
            }
        };
        let spacers = match f.spacers {
            SpacersFile::Table { rows } => {
                if rows.is_empty() {
                    return Err(Error::Parse("spacer table needs at least one row".into()));
                }
                Spacers::Table(rows)
            }
            SpacersFile::Rule { exprs, default } => Spacers::Rule {
                exprs: exprs
                    .iter()
                    .map(|e| Rule::parse(e))
                    .collect::<Result<_>>()?,
                default: Rule::parse(&default)?,
            },
        };
        Ok(RankOneParams {
            name: f.name,
            cutting,
            spacers,
        })
    }
}

impl From<&RankOneParams> for ParamsFile {
    fn from(p: &RankOneParams) -> Self {
        ParamsFile {
            name: p.name.clone(),
            cutting: match &p.cutting {
                Cutting::Constant(v) => CuttingFile::Constant { value: *v },
                Cutting::List(v) => CuttingFile::List { values: v.clone() },
                Cutting::Rule(r) => CuttingFile::Rule {
                    expr: r.to_string(),
                },
            },
            spacers: match &p.spacers {
                Spacers::Table(rows) => SpacersFile::Table { rows: rows.clone() },
                Spacers::Rule { exprs, default } => SpacersFile::Rule {
                    exprs: exprs.iter().map(|e| e.to_string()).collect(),
                    default: default.to_string(),
                },
            },
        }
    }
}
