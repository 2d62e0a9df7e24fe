//! XWCNF reading and writing, plus the solver output format.
//!
//! XWCNF is the 2022-style WCNF format (no `p` header) with one extension:
//! a line `x h <lits> 0` is a hard XOR clause whose literals must have odd
//! parity. Negative literals flip the parity, so every XOR is expressible.
//!
//! ```text
//! c a comment
//! h 1 -2 0
//! x h 1 2 3 0
//! 10 -4 0
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Assignment, Instance, Lit, SolveResult, Var, Verdict, XorClause};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("invalid token `{0}`")]
    BadToken(String),
    #[error("clause is missing its terminating 0")]
    MissingTerminator,
    #[error("tokens after the terminating 0")]
    TrailingTokens,
    #[error("soft clause weight must be positive")]
    ZeroWeight,
    #[error("`p` header lines (pre-2022 WCNF) are not supported")]
    LegacyHeader,
    #[error("XOR lines must be hard (`x h ...`)")]
    SoftXor,
}

/// One non-comment line of an XWCNF file, literals exactly as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Line {
    Hard(Vec<i32>),
    Xor(Vec<i32>),
    Soft(u64, Vec<i32>),
}

/// A parsed file: comments, raw clause lines, and the resolved instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct XwcnfDocument {
    pub comments: Vec<String>,
    pub lines: Vec<Line>,
    pub instance: Instance,
}

impl XwcnfDocument {
    pub fn parse(text: &str) -> Result<XwcnfDocument, ParseError> {
        let mut doc = XwcnfDocument::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('c') {
                doc.comments.push(rest.trim().to_string());
                continue;
            }
            let parsed = parse_line(line).map_err(|kind| ParseError { line: i + 1, kind })?;
            doc.push(parsed);
        }
        Ok(doc)
    }

    /// A document holding exactly the clauses of `inst`, XORs written natively.
    pub fn from_instance(inst: &Instance) -> XwcnfDocument {
        let mut doc = XwcnfDocument::default();
        for c in &inst.hard_cnf {
            doc.lines.push(Line::Hard(dimacs(c.lits())));
        }
        for x in &inst.hard_xor {
            doc.lines.push(Line::Xor(xor_line(x)));
        }
        for s in &inst.soft {
            doc.lines.push(Line::Soft(s.weight, dimacs(s.clause.lits())));
        }
        doc.instance = inst.clone();
        doc
    }

    fn push(&mut self, line: Line) {
        let lits = |v: &[i32]| v.iter().map(|&i| Lit::from_dimacs(i)).collect::<Vec<_>>();
        match &line {
            Line::Hard(v) => self.instance.add_hard(lits(v)),
            Line::Xor(v) => self.instance.add_xor(XorClause::from_dimacs(v, true)),
            Line::Soft(w, v) => {
                // weight was checked while parsing
                self.instance.add_soft(lits(v), *w).expect("positive weight");
            }
        }
        // an XOR like `x h 1 -1 0` cancels to nothing but still names var 1
        let max = match &line {
            Line::Hard(v) | Line::Xor(v) | Line::Soft(_, v) => v.iter().map(|i| i.unsigned_abs()).max().unwrap_or(0),
        };
        self.instance.num_vars = self.instance.num_vars.max(max);
        self.lines.push(line);
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            if c.is_empty() {
                out.push_str("c\n");
            } else {
                let _ = writeln!(out, "c {c}");
            }
        }
        for l in &self.lines {
            match l {
                Line::Hard(v) => write_lits(&mut out, "h", v),
                Line::Xor(v) => write_lits(&mut out, "x h", v),
                Line::Soft(w, v) => write_lits(&mut out, &w.to_string(), v),
            }
        }
        out
    }
}

fn parse_line(line: &str) -> Result<Line, ParseErrorKind> {
    let mut toks = line.split_whitespace().peekable();
    let head = toks.next().expect("line is non-empty");
    let kind = match head {
        "p" => return Err(ParseErrorKind::LegacyHeader),
        "h" => 0,
        "x" => match toks.next() {
            Some("h") => 1,
            Some(t) if t.parse::<u64>().is_ok() => return Err(ParseErrorKind::SoftXor),
            Some(t) => return Err(ParseErrorKind::BadToken(t.to_string())),
            None => return Err(ParseErrorKind::MissingTerminator),
        },
        w => {
            let w: u64 = w.parse().map_err(|_| ParseErrorKind::BadToken(w.to_string()))?;
            if w == 0 {
                return Err(ParseErrorKind::ZeroWeight);
            }
            let lits = parse_lits(toks)?;
            return Ok(Line::Soft(w, lits));
        }
    };
    let lits = parse_lits(toks)?;
    Ok(if kind == 0 { Line::Hard(lits) } else { Line::Xor(lits) })
}

fn parse_lits<'a>(toks: impl Iterator<Item = &'a str>) -> Result<Vec<i32>, ParseErrorKind> {
    let mut lits = Vec::new();
    let mut toks = toks;
    loop {
        let t = toks.next().ok_or(ParseErrorKind::MissingTerminator)?;
        let i: i32 = t.parse().map_err(|_| ParseErrorKind::BadToken(t.to_string()))?;
        if i == 0 {
            break;
        }
        if i == i32::MIN {
            return Err(ParseErrorKind::BadToken(t.to_string()));
        }
        lits.push(i);
    }
    if toks.next().is_some() {
        return Err(ParseErrorKind::TrailingTokens);
    }
    Ok(lits)
}

fn dimacs(lits: &[Lit]) -> Vec<i32> {
    lits.iter().map(|l| l.to_dimacs()).collect()
}

/// Literals of an XOR in the rhs-true file convention: an even-parity XOR
/// is written with its first variable negated.
fn xor_line(x: &XorClause) -> Vec<i32> {
    let mut v: Vec<i32> = x.vars().iter().map(|v| v.get() as i32).collect();
    if !x.rhs() {
        // normalized XORs with rhs=false are never empty (that is the tautology)
        v[0] = -v[0];
    }
    v
}

fn write_lits(out: &mut String, prefix: &str, lits: &[i32]) {
    out.push_str(prefix);
    for l in lits {
        let _ = write!(out, " {l}");
    }
    out.push_str(" 0\n");
}

/// Parses XWCNF text into an instance; `num_vars` is the largest variable
/// mentioned.
pub fn parse_xwcnf(text: &str) -> Result<Instance, ParseError> {
    XwcnfDocument::parse(text).map(|d| d.instance)
}

/// Writes `inst` as XWCNF with native XOR lines.
pub fn write_xwcnf(inst: &Instance) -> String {
    XwcnfDocument::from_instance(inst).write()
}

/// Writes `inst` as plain WCNF, each XOR of length n replaced by its
/// 2^(n-1) CNF clauses.
pub fn write_wcnf_expanded(inst: &Instance) -> String {
    write_xwcnf(&inst.expand_xors())
}

/// Status line of a solver output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    OptimumFound,
    Satisfiable,
    Unsatisfiable,
    Unknown,
}

/// What a solver printed: status, best cost and model, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionReport {
    pub status: Status,
    pub cost: Option<u64>,
    pub model: Option<Assignment>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionError {
    #[error("no `s` status line")]
    MissingStatus,
    #[error("more than one `s` status line")]
    DuplicateStatus,
    #[error("unknown status `{0}`")]
    BadStatus(String),
    #[error("line {0}: malformed `o` line")]
    BadCost(usize),
    #[error("line {0}: malformed `v` line")]
    BadModel(usize),
    #[error("line {0}: unexpected line")]
    Unexpected(usize),
}

/// Formats a solve result as `s`/`o`/`v` lines. The `v` line is a bit
/// string with one character per variable `1..=num_vars`.
pub fn write_solution(r: &SolveResult, num_vars: u32) -> String {
    let mut out = String::new();
    let status = match r.verdict {
        Verdict::OptimumFound => "OPTIMUM FOUND",
        Verdict::Unsatisfiable => "UNSATISFIABLE",
        Verdict::Unknown => "UNKNOWN",
    };
    let _ = writeln!(out, "s {status}");
    if r.verdict != Verdict::Unsatisfiable {
        if let (Some(c), Some(m)) = (r.cost, &r.model) {
            let _ = writeln!(out, "o {c}");
            out.push_str("v ");
            for v in 1..=num_vars {
                out.push(if m.value(Var::new(v)) == Some(true) { '1' } else { '0' });
            }
            out.push('\n');
        }
    }
    out
}

/// Parses solver output. Both bit-string `v` lines and the older
/// literal-list form (`v 1 -2 3`) are accepted; with several `o` lines the
/// last one wins. Lines other than `c`/`s`/`o`/`v` are rejected.
pub fn parse_solution(text: &str) -> Result<SolutionReport, SolutionError> {
    let mut status = None;
    let mut cost = None;
    let mut bits: Option<Vec<bool>> = None;
    let mut lits: Option<Assignment> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let (head, rest) = line.split_at(1);
        let rest = rest.trim();
        match head {
            "s" => {
                if status.is_some() {
                    return Err(SolutionError::DuplicateStatus);
                }
                let words: Vec<&str> = rest.split_whitespace().collect();
                status = Some(match words.join(" ").as_str() {
                    "OPTIMUM FOUND" => Status::OptimumFound,
                    "SATISFIABLE" => Status::Satisfiable,
                    "UNSATISFIABLE" => Status::Unsatisfiable,
                    "UNKNOWN" => Status::Unknown,
                    other => return Err(SolutionError::BadStatus(other.to_string())),
                });
            }
            "o" => cost = Some(rest.parse::<u64>().map_err(|_| SolutionError::BadCost(n))?),
            "v" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let is_bits = toks.len() == 1 && toks[0].bytes().all(|b| b == b'0' || b == b'1');
                if is_bits && lits.is_none() {
                    let b = bits.get_or_insert_with(Vec::new);
                    b.extend(toks[0].bytes().map(|c| c == b'1'));
                    continue;
                }
                if bits.is_some() {
                    return Err(SolutionError::BadModel(n));
                }
                let a = lits.get_or_insert_with(|| Assignment::new(0));
                for t in toks {
                    let l: i32 = t.parse().map_err(|_| SolutionError::BadModel(n))?;
                    if l == 0 {
                        continue;
                    }
                    if l == i32::MIN {
                        return Err(SolutionError::BadModel(n));
                    }
                    let l = Lit::from_dimacs(l);
                    a.set(l.var(), l.is_positive());
                }
            }
            _ => return Err(SolutionError::Unexpected(n)),
        }
    }
    let status = status.ok_or(SolutionError::MissingStatus)?;
    let model = bits.map(Assignment::from_bools).or(lits);
    Ok(SolutionReport { status, cost, model })
}
