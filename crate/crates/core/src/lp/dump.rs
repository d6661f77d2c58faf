//! Plain-text LP dump, one record per line:
//!
//! ```text
//! lp v1
//! sense min|max
//! vars <n>
//! obj <c_1> ... <c_n>
//! const <c0>
//! lower <l_1> ... <l_n>
//! upper <u_1> ... <u_n>
//! row <=|= <rhs> : <a_1> ... <a_n>
//! ```

use std::fmt::Write;

use thiserror::Error;

use super::{Constraint, LinearProgram, Relation, Sense};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
#[error("lp dump line {line}: {msg}")]
pub struct DumpError {
    pub line: usize,
    pub msg: String,
}

fn join<T: Scalar>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub(super) fn write_dump<T: Scalar>(lp: &LinearProgram<T>) -> String {
    let mut s = String::new();
    let sense = match lp.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let _ = writeln!(s, "lp v1");
    let _ = writeln!(s, "sense {sense}");
    let _ = writeln!(s, "vars {}", lp.n_vars());
    let _ = writeln!(s, "obj {}", join(&lp.objective));
    let _ = writeln!(s, "const {}", lp.objective_constant);
    let _ = writeln!(s, "lower {}", join(&lp.var_lower));
    let _ = writeln!(s, "upper {}", join(&lp.var_upper));
    for c in &lp.constraints {
        let rel = match c.relation {
            Relation::Eq => "=",
            Relation::Leq => "<=",
        };
        let _ = writeln!(s, "row {rel} {} : {}", c.rhs, join(&c.coeffs));
    }
    s
}

fn nums<T: Scalar>(tokens: &[&str], line: usize) -> Result<Vec<T>, DumpError> {
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| DumpError { line, msg: format!("bad number {t:?}") })
        })
        .collect()
}

/// Parses the output of [`LinearProgram::dump`].
pub fn parse_dump<T: Scalar>(text: &str) -> Result<LinearProgram<T>, DumpError> {
    let mut lp = LinearProgram::new(Sense::Minimize, Vec::new(), Vec::new(), Vec::new());
    let mut n = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some((&head, rest)) = toks.split_first() else { continue };
        let err = |msg: &str| DumpError { line, msg: msg.to_string() };
        match head {
            "lp" => {}
            "sense" => {
                lp.sense = match rest {
                    ["min"] => Sense::Minimize,
                    ["max"] => Sense::Maximize,
                    _ => return Err(err("expected `sense min` or `sense max`")),
                }
            }
            "vars" => {
                n = Some(rest.first().and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err("bad count"))?)
            }
            "obj" => lp.objective = nums(rest, line)?,
            "const" => {
                lp.objective_constant = *nums::<T>(rest, line)?.first().ok_or_else(|| err("missing constant"))?
            }
            "lower" => lp.var_lower = nums(rest, line)?,
            "upper" => lp.var_upper = nums(rest, line)?,
            "row" => {
                let relation = match rest.first() {
                    Some(&"<=") => Relation::Leq,
                    Some(&"=") => Relation::Eq,
                    _ => return Err(err("expected `<=` or `=`")),
                };
                if rest.get(2) != Some(&":") {
                    return Err(err("expected `:` after the right-hand side"));
                }
                let rhs = nums::<T>(&rest[1..2], line)?[0];
                lp.constraints.push(Constraint { coeffs: nums(&rest[3..], line)?, rhs, relation });
            }
            other => return Err(err(&format!("unknown record {other:?}"))),
        }
    }
    if n != Some(lp.n_vars()) {
        return Err(DumpError { line: 0, msg: "`vars` does not match the objective length".into() });
    }
    Ok(lp)
}
