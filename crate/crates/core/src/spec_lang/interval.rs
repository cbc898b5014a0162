//! Interval enclosure of a signal over the declared variable box.

use thiserror::Error;

use super::ast::{BinOp, Bounds, Expr, VarDecl};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("signal is never negative over the declared ranges (bounds [{lo}, {hi}])")]
    TriviallySatisfied { lo: f64, hi: f64 },
    #[error("signal is never positive over the declared ranges (bounds [{lo}, {hi}])")]
    TriviallyViolated { lo: f64, hi: f64 },
    #[error("signal is unbounded: {0}")]
    UnboundedSignal(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn hull(values: [f64; 4]) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { lo, hi }
    }
}

/// Natural interval extension of `expr`. A difference of two structurally
/// identical operands encloses to exactly `[0, 0]`.
pub fn enclose(expr: &Expr, decls: &[VarDecl]) -> Result<Interval, BoundsError> {
    Ok(match expr {
        Expr::Num(v) => Interval::point(*v),
        Expr::Var { name, index } => {
            let d = decls
                .get(*index)
                .ok_or_else(|| BoundsError::UnboundedSignal(format!("undeclared `{name}`")))?;
            Interval { lo: d.lo, hi: d.hi }
        }
        Expr::Neg(e) => {
            let i = enclose(e, decls)?;
            Interval { lo: -i.hi, hi: -i.lo }
        }
        Expr::Bin(BinOp::Sub, a, b) if a == b => Interval::point(0.0),
        Expr::Bin(op, a, b) => {
            let (a, b) = (enclose(a, decls)?, enclose(b, decls)?);
            match op {
                BinOp::Add => Interval {
                    lo: a.lo + b.lo,
                    hi: a.hi + b.hi,
                },
                BinOp::Sub => Interval {
                    lo: a.lo - b.hi,
                    hi: a.hi - b.lo,
                },
                BinOp::Mul => Interval::hull([a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]),
                BinOp::Div => {
                    if b.contains(0.0) {
                        return Err(BoundsError::UnboundedSignal(format!(
                            "divisor ranges over [{}, {}], which contains 0",
                            b.lo, b.hi
                        )));
                    }
                    Interval::hull([a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi])
                }
            }
        }
        Expr::Abs(e) => {
            let i = enclose(e, decls)?;
            if i.lo >= 0.0 {
                i
            } else if i.hi <= 0.0 {
                Interval {
                    lo: -i.hi,
                    hi: -i.lo,
                }
            } else {
                Interval {
                    lo: 0.0,
                    hi: i.hi.max(-i.lo),
                }
            }
        }
        Expr::Min(args) | Expr::Max(args) => {
            let is_min = matches!(expr, Expr::Min(_));
            let mut acc: Option<Interval> = None;
            for a in args {
                let i = enclose(a, decls)?;
                acc = Some(match acc {
                    None => i,
                    Some(p) if is_min => Interval {
                        lo: p.lo.min(i.lo),
                        hi: p.hi.min(i.hi),
                    },
                    Some(p) => Interval {
                        lo: p.lo.max(i.lo),
                        hi: p.hi.max(i.hi),
                    },
                });
            }
            acc.ok_or_else(|| BoundsError::UnboundedSignal("empty min/max".into()))?
        }
    })
}

fn check(lo: f64, hi: f64) -> Result<Bounds, BoundsError> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(BoundsError::UnboundedSignal(format!(
            "non-finite bounds [{lo}, {hi}]"
        )));
    }
    if lo >= 0.0 {
        return Err(BoundsError::TriviallySatisfied { lo, hi });
    }
    if hi <= 0.0 {
        return Err(BoundsError::TriviallyViolated { lo, hi });
    }
    Ok(Bounds { lo, hi })
}

/// Signal bounds `[l, u]` with `l < 0 < u`. An explicit annotation overrides
/// inference but must satisfy the same condition.
pub fn infer_bounds(
    f: &Expr,
    decls: &[VarDecl],
    explicit: Option<(f64, f64)>,
) -> Result<Bounds, BoundsError> {
    match explicit {
        Some((lo, hi)) => check(lo, hi),
        None => {
            let i = enclose(f, decls)?;
            check(i.lo, i.hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(lo: f64, hi: f64) -> Vec<VarDecl> {
        vec![VarDecl::new("v", lo, hi)]
    }

    /// Grid-sampling oracle: min/max of a one-variable signal on 10_001 points.
    fn sampled(f: &Expr, lo: f64, hi: f64) -> (f64, f64) {
        (0..=10_000)
            .map(|k| f.eval(&[lo + (hi - lo) * k as f64 / 10_000.0]))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
                (a.min(y), b.max(y))
            })
    }

    #[test]
    fn speed_cap_bounds() {
        let f = Expr::sub(Expr::Num(3.5), Expr::var("v", 0));
        let b = infer_bounds(&f, &v(0.0, 10.0), None).unwrap();
        assert_eq!((b.lo, b.hi), (-6.5, 3.5));
        let (lo, hi) = sampled(&f, 0.0, 10.0);
        assert!((lo - b.lo).abs() < 1e-12 && (hi - b.hi).abs() < 1e-12);
    }

    #[test]
    fn steering_band_bounds() {
        let f = Expr::sub(Expr::Num(0.1), Expr::Abs(Box::new(Expr::var("alpha", 0))));
        let b = infer_bounds(&f, &v(-1.0, 1.0), None).unwrap();
        assert!((b.lo + 0.9).abs() < 1e-15 && (b.hi - 0.1).abs() < 1e-15);
        let (lo, hi) = sampled(&f, -1.0, 1.0);
        assert!((lo - b.lo).abs() < 1e-12 && (hi - b.hi).abs() < 1e-12);
    }

    #[test]
    fn self_difference_is_trivially_satisfied() {
        let f = Expr::sub(Expr::var("v", 0), Expr::var("v", 0));
        assert_eq!(
            infer_bounds(&f, &v(-3.0, 7.0), None),
            Err(BoundsError::TriviallySatisfied { lo: 0.0, hi: 0.0 })
        );
    }

    #[test]
    fn trivially_violated_and_unbounded() {
        let f = Expr::sub(Expr::Num(-1.0), Expr::var("v", 0));
        assert!(matches!(
            infer_bounds(&f, &v(0.0, 1.0), None),
            Err(BoundsError::TriviallyViolated { .. })
        ));
        let f = Expr::bin(BinOp::Div, Expr::Num(1.0), Expr::var("v", 0));
        assert!(matches!(
            infer_bounds(&f, &v(-1.0, 1.0), None),
            Err(BoundsError::UnboundedSignal(_))
        ));
    }

    #[test]
    fn explicit_bounds_override() {
        let f = Expr::bin(BinOp::Div, Expr::Num(1.0), Expr::var("v", 0));
        let b = infer_bounds(&f, &v(-1.0, 1.0), Some((-2.0, 2.0))).unwrap();
        assert_eq!((b.lo, b.hi), (-2.0, 2.0));
        assert!(infer_bounds(&f, &v(-1.0, 1.0), Some((0.5, 2.0))).is_err());
    }

    #[test]
    fn min_and_products() {
        let decls = vec![VarDecl::new("a", -1.0, 2.0), VarDecl::new("b", 0.5, 3.0)];
        let f = Expr::Min(vec![
            Expr::bin(BinOp::Mul, Expr::var("a", 0), Expr::var("b", 1)),
            Expr::var("b", 1),
        ]);
        let i = enclose(&f, &decls).unwrap();
        assert_eq!((i.lo, i.hi), (-3.0, 3.0));
    }
}
