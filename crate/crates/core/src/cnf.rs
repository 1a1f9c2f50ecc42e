//! Propositional variables, literals and CNF formulas with a designated
//! sampling set, plus DIMACS serialization.
//!
//! The sampling set is written as `c ind ... 0` comment lines, the
//! independent-support convention understood by common uniform samplers.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Not;

use thiserror::Error;

/// A propositional variable. Ids are 1-based, matching DIMACS.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    /// Zero-based index for array storage.
    pub fn index(self) -> usize {
        debug_assert!(self.0 > 0);
        (self.0 - 1) as usize
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: a variable together with a polarity, stored as a nonzero
/// DIMACS-style signed integer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(v: Var) -> Lit {
        Lit(v.0 as i32)
    }

    pub fn negative(v: Var) -> Lit {
        Lit(-(v.0 as i32))
    }

    /// Literal asserting that `v` takes `value`.
    pub fn with_value(v: Var, value: bool) -> Lit {
        if value {
            Lit::positive(v)
        } else {
            Lit::negative(v)
        }
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Parses a DIMACS integer; `0` is the clause terminator, not a literal.
    pub fn from_dimacs(x: i32) -> Option<Lit> {
        if x == 0 {
            None
        } else {
            Some(Lit(x))
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl From<Var> for Lit {
    fn from(v: Var) -> Lit {
        Lit::positive(v)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A CNF formula: clause list, variable count and the designated sampling
/// (projection) set.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    sampling_set: Vec<Var>,
}

impl Cnf {
    pub fn new(num_vars: u32) -> Cnf {
        Cnf {
            num_vars,
            clauses: Vec::new(),
            sampling_set: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn sampling_set(&self) -> &[Var] {
        &self.sampling_set
    }

    /// Allocates a fresh auxiliary variable.
    pub fn fresh_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    /// Adds a clause. Empty clauses and out-of-range literals indicate a
    /// construction bug and panic.
    pub fn add_clause(&mut self, lits: Vec<Lit>) {
        assert!(!lits.is_empty(), "empty clause added to CNF");
        for l in &lits {
            assert!(
                l.var().0 <= self.num_vars,
                "literal {} out of range (num_vars = {})",
                l,
                self.num_vars
            );
        }
        self.clauses.push(lits);
    }

    /// Sets the sampling set; ids are sorted and deduplicated.
    pub fn set_sampling_set(&mut self, mut vars: Vec<Var>) {
        vars.sort();
        vars.dedup();
        if let Some(last) = vars.last() {
            assert!(last.0 <= self.num_vars, "sampling var {} out of range", last);
        }
        self.sampling_set = vars;
    }

    /// Writes the formula in DIMACS format. Sampling-set variables are
    /// emitted first as `c ind ... 0` lines, at most ten ids per line.
    pub fn write_dimacs<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for chunk in self.sampling_set.chunks(10) {
            write!(w, "c ind")?;
            for v in chunk {
                write!(w, " {}", v)?;
            }
            writeln!(w, " 0")?;
        }
        writeln!(w, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for l in clause {
                write!(w, "{} ", l)?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }

    /// Parses a DIMACS file, collecting `c ind ... 0` lines into the
    /// sampling set. Clauses may span lines.
    pub fn read_dimacs<R: BufRead>(r: R) -> Result<Cnf, DimacsError> {
        let mut num_vars: Option<u32> = None;
        let mut declared_clauses = 0usize;
        let mut cnf = Cnf::new(0);
        let mut sampling = Vec::new();
        let mut current: Vec<Lit> = Vec::new();

        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(DimacsError::Io)?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("c") {
                let rest = rest.trim_start();
                if let Some(ids) = rest.strip_prefix("ind") {
                    for tok in ids.split_whitespace() {
                        let id: i64 = tok.parse().map_err(|_| DimacsError::Malformed {
                            line: lineno + 1,
                            reason: format!("bad sampling id {:?}", tok),
                        })?;
                        if id == 0 {
                            break;
                        }
                        if id < 0 {
                            return Err(DimacsError::Malformed {
                                line: lineno + 1,
                                reason: "negative sampling id".into(),
                            });
                        }
                        sampling.push(Var(id as u32));
                    }
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("p") {
                let mut it = rest.split_whitespace();
                if it.next() != Some("cnf") {
                    return Err(DimacsError::Malformed {
                        line: lineno + 1,
                        reason: "expected `p cnf`".into(),
                    });
                }
                let v: u32 = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(DimacsError::Malformed {
                        line: lineno + 1,
                        reason: "bad variable count".into(),
                    })?;
                let c: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(DimacsError::Malformed {
                        line: lineno + 1,
                        reason: "bad clause count".into(),
                    })?;
                num_vars = Some(v);
                declared_clauses = c;
                cnf.num_vars = v;
                continue;
            }
            if num_vars.is_none() {
                return Err(DimacsError::Malformed {
                    line: lineno + 1,
                    reason: "clause before `p cnf` header".into(),
                });
            }
            for tok in line.split_whitespace() {
                let x: i32 = tok.parse().map_err(|_| DimacsError::Malformed {
                    line: lineno + 1,
                    reason: format!("bad literal {:?}", tok),
                })?;
                match Lit::from_dimacs(x) {
                    Some(l) => {
                        if l.var().0 > cnf.num_vars {
                            return Err(DimacsError::Malformed {
                                line: lineno + 1,
                                reason: format!("literal {} exceeds declared variables", x),
                            });
                        }
                        current.push(l);
                    }
                    None => {
                        if current.is_empty() {
                            return Err(DimacsError::Malformed {
                                line: lineno + 1,
                                reason: "empty clause".into(),
                            });
                        }
                        cnf.clauses.push(std::mem::take(&mut current));
                    }
                }
            }
        }
        if num_vars.is_none() {
            return Err(DimacsError::MissingHeader);
        }
        if !current.is_empty() {
            return Err(DimacsError::UnterminatedClause);
        }
        if cnf.clauses.len() != declared_clauses {
            return Err(DimacsError::ClauseCountMismatch {
                declared: declared_clauses,
                found: cnf.clauses.len(),
            });
        }
        cnf.set_sampling_set(sampling);
        Ok(cnf)
    }
}

#[derive(Debug, Error)]
pub enum DimacsError {
    #[error("i/o error: {0}")]
    Io(io::Error),
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("last clause is not terminated by 0")]
    UnterminatedClause,
    #[error("header declares {declared} clauses but {found} found")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("malformed DIMACS at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}
