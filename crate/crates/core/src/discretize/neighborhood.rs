use crate::syntax::{BinOp, BoolExpr, CmpOp, DdeSpec, Expr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeighborhoodError {
    #[error("equality atom `{0}` has no neighbourhood")]
    UnsupportedAtom(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborhoodKind {
    Widen,
    Shrink,
    Shifted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodPredicate {
    pub pred: BoolExpr,
    pub kind: NeighborhoodKind,
}

/// `c + delta`, folded when `c` is a literal.
fn offset(c: &Expr, delta: f64) -> Expr {
    match c {
        Expr::Num(v) => Expr::Num(v + delta),
        _ if delta >= 0.0 => Expr::add(c.clone(), Expr::Num(delta)),
        _ => Expr::sub(c.clone(), Expr::Num(-delta)),
    }
}

/// Moves every atom boundary by `eps`; positive `eps` grows the satisfied set.
fn relax(b: &BoolExpr, eps: f64) -> Result<BoolExpr, NeighborhoodError> {
    Ok(match b {
        BoolExpr::True | BoolExpr::False => b.clone(),
        BoolExpr::Cmp(a, op, c) => match op {
            CmpOp::Lt | CmpOp::Le => BoolExpr::Cmp(a.clone(), *op, offset(c, eps)),
            CmpOp::Gt | CmpOp::Ge => BoolExpr::Cmp(a.clone(), *op, offset(c, -eps)),
            CmpOp::Eq | CmpOp::Ne => {
                return Err(NeighborhoodError::UnsupportedAtom(crate::syntax::bool_str(b)))
            }
        },
        BoolExpr::Not(_) => unreachable!("input is in negation normal form"),
        BoolExpr::And(a, c) => BoolExpr::and(relax(a, eps)?, relax(c, eps)?),
        BoolExpr::Or(a, c) => BoolExpr::or(relax(a, eps)?, relax(c, eps)?),
    })
}

/// The `eps`-neighbourhood of `b`: every atom is loosened by `eps`.
pub fn widen(b: &BoolExpr, eps: f64) -> Result<NeighborhoodPredicate, NeighborhoodError> {
    Ok(NeighborhoodPredicate {
        pred: relax(&b.nnf(), eps)?,
        kind: NeighborhoodKind::Widen,
    })
}

/// Inner approximation of `b`: every atom is tightened by `eps`.
pub fn shrink(b: &BoolExpr, eps: f64) -> Result<NeighborhoodPredicate, NeighborhoodError> {
    Ok(NeighborhoodPredicate {
        pred: relax(&b.nnf(), -eps)?,
        kind: NeighborhoodKind::Shrink,
    })
}

/// `x + h·f(x, x_r)` for each evolved variable.
pub fn euler_increment(spec: &DdeSpec, h: f64) -> Vec<(String, Expr)> {
    spec.vars
        .iter()
        .zip(&spec.rhs)
        .map(|(x, f)| {
            let step = Expr::bin(BinOp::Mul, Expr::Num(h), f.clone());
            (x.clone(), Expr::add(Expr::var(x), step))
        })
        .collect()
}

/// The widened predicate evaluated one Euler step ahead.
pub fn shifted(
    b: &BoolExpr,
    eps: f64,
    h: f64,
    spec: &DdeSpec,
) -> Result<NeighborhoodPredicate, NeighborhoodError> {
    let next = euler_increment(spec, h);
    let pred = widen(b, eps)?.pred.substitute(&|x| {
        next.iter().find(|(v, _)| v == x).map(|(_, e)| e.clone())
    });
    Ok(NeighborhoodPredicate {
        pred,
        kind: NeighborhoodKind::Shifted,
    })
}

/// Conjunction with literal simplification.
pub fn and_simpl(a: BoolExpr, b: BoolExpr) -> BoolExpr {
    match (a, b) {
        (BoolExpr::True, x) | (x, BoolExpr::True) => x,
        (BoolExpr::False, _) | (_, BoolExpr::False) => BoolExpr::False,
        (a, b) => BoolExpr::and(a, b),
    }
}

pub fn not_simpl(a: BoolExpr) -> BoolExpr {
    match a {
        BoolExpr::True => BoolExpr::False,
        BoolExpr::False => BoolExpr::True,
        a => BoolExpr::not(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{eval_bool, Valuation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Point(f64, f64);

    impl Valuation<f64> for Point {
        fn value(&self, x: &str) -> Option<f64> {
            match x {
                "x" => Some(self.0),
                "y" => Some(self.1),
                _ => None,
            }
        }
        fn delayed(&self, _x: &str, _r: f64) -> Option<f64> {
            None
        }
    }

    fn gt(x: &str, c: f64, op: CmpOp) -> BoolExpr {
        BoolExpr::cmp(Expr::var(x), op, Expr::Num(c))
    }

    #[test]
    fn widening_moves_the_boundary() {
        let b = gt("x", 2.0, CmpOp::Gt);
        assert_eq!(widen(&b, 0.5).unwrap().pred, gt("x", 1.5, CmpOp::Gt));
        assert_eq!(shrink(&b, 0.5).unwrap().pred, gt("x", 2.5, CmpOp::Gt));
        assert_eq!(widen(&BoolExpr::True, 0.5).unwrap().pred, BoolExpr::True);
    }

    #[test]
    fn conjunction_example() {
        let b = BoolExpr::and(gt("x", 5.9, CmpOp::Ge), gt("y", 1.0, CmpOp::Le));
        let w = widen(&b, 0.2).unwrap().pred;
        let BoolExpr::And(l, r) = &w else { panic!("{w:?}") };
        let BoolExpr::Cmp(_, CmpOp::Ge, Expr::Num(a)) = **l else { panic!() };
        let BoolExpr::Cmp(_, CmpOp::Le, Expr::Num(c)) = **r else { panic!() };
        assert!((a - 5.7).abs() < 1e-12 && (c - 1.2).abs() < 1e-12);

        let s = shrink(&b, 0.2).unwrap().pred;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let p = Point(rng.gen_range(4.0..8.0), rng.gen_range(-1.0..3.0));
            let inb = eval_bool(&b, &p).unwrap();
            assert!(!inb || eval_bool(&w, &p).unwrap());
            assert!(!eval_bool(&s, &p).unwrap() || inb);
        }
    }

    #[test]
    fn negations_are_normalised_first() {
        let b = BoolExpr::not(gt("x", 1.0, CmpOp::Lt));
        assert_eq!(widen(&b, 0.25).unwrap().pred, gt("x", 0.75, CmpOp::Ge));
    }

    #[test]
    fn equality_is_rejected() {
        let b = gt("x", 1.0, CmpOp::Eq);
        assert!(matches!(widen(&b, 0.1), Err(NeighborhoodError::UnsupportedAtom(_))));
    }

    #[test]
    fn shifted_substitutes_the_euler_step() {
        let spec = DdeSpec::scalar("x", Expr::Num(1.0));
        let b = gt("x", 2.0, CmpOp::Lt);
        let s = shifted(&b, 0.5, 0.1, &spec).unwrap().pred;
        let want = BoolExpr::cmp(
            Expr::add(Expr::var("x"), Expr::bin(BinOp::Mul, Expr::Num(0.1), Expr::Num(1.0))),
            CmpOp::Lt,
            Expr::Num(2.5),
        );
        assert_eq!(s, want);
    }
}
