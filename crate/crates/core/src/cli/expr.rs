//! Scalar expressions such as `sin(PI*x) * exp(-t)` declared in scenario files.

use std::sync::Arc;

use exmex::{Express, FlatEx};

use crate::hyperbolic::{SpaceFn, SpaceTimeFn};

/// Parsed expression over a fixed list of allowed variable names.
#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    flat: FlatEx<f64>,
    // for each variable of the expression, its position among the allowed names
    slots: Vec<usize>,
}

impl Expr {
    /// Parses `source`; every variable must be one of `allowed`.
    pub fn parse(source: &str, allowed: &[&str]) -> std::result::Result<Self, String> {
        let flat = exmex::parse::<f64>(source).map_err(|e| format!("cannot parse `{source}`: {e}"))?;
        let mut slots = Vec::new();
        for name in flat.var_names() {
            match allowed.iter().position(|a| a == name) {
                Some(p) => slots.push(p),
                None => {
                    return Err(format!(
                        "`{source}` uses unknown variable `{name}` (allowed: {})",
                        allowed.join(", ")
                    ))
                }
            }
        }
        Ok(Self { source: source.to_string(), flat, slots })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates with values given in the order of the allowed names.
    pub fn eval(&self, args: &[f64]) -> f64 {
        let mut vars = [0.0; 4];
        for (k, &s) in self.slots.iter().enumerate() {
            vars[k] = args[s];
        }
        self.flat.eval(&vars[..self.slots.len()]).unwrap_or(f64::NAN)
    }

    pub fn space_fn(&self) -> SpaceFn {
        let e = self.clone();
        Arc::new(move |x| e.eval(&[x]))
    }

    pub fn space_time_fn(&self) -> SpaceTimeFn {
        let e = self.clone();
        Arc::new(move |a, b| e.eval(&[a, b]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_follow_allowed_order() {
        let e = Expr::parse("x - 2*t", &["x", "t"]).unwrap();
        assert_eq!(e.eval(&[1.0, 3.0]), -5.0);
        let e = Expr::parse("t", &["x", "t"]).unwrap();
        assert_eq!(e.space_time_fn()(1.0, 3.0), 3.0);
        let e = Expr::parse("2.5", &["x"]).unwrap();
        assert_eq!(e.space_fn()(9.0), 2.5);
        let e = Expr::parse("sin(PI*x)", &["x"]).unwrap();
        assert!((e.eval(&[0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_variables_and_syntax_errors() {
        assert!(Expr::parse("x + y", &["x", "t"]).unwrap_err().contains("`y`"));
        assert!(Expr::parse("sin(", &["x"]).is_err());
    }
}
