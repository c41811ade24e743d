use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceKind<S> {
    Const(S),
    /// Cubic Hermite interpolant between two knots with slopes.
    Hermite { x0: S, x1: S, m0: S, m1: S },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<S> {
    pub t0: f64,
    pub t1: f64,
    pub kind: PieceKind<S>,
}

impl<S: Scalar> Piece<S> {
    pub fn value_at(&self, t: f64) -> S {
        match self.kind {
            PieceKind::Const(v) => v,
            PieceKind::Hermite { x0, x1, m0, m1 } => {
                let span = self.t1 - self.t0;
                if span <= 0.0 {
                    return x1;
                }
                let s = ((t - self.t0) / span).clamp(0.0, 1.0);
                hermite(x0, x1, m0, m1, S::lit(span), S::lit(s))
            }
        }
    }
}

pub fn hermite<S: Scalar>(x0: S, x1: S, m0: S, m1: S, span: S, s: S) -> S {
    let one = S::one();
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + one;
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * x0 + h10 * span * m0 + h01 * x1 + h11 * span * m1
}

/// Piecewise dense history of one variable.
///
/// Lookups before the first piece return the value holding at its start time,
/// which realises a constant initial function; lookups after the last piece hold
/// its final value.
#[derive(Debug, Clone, PartialEq)]
pub struct History<S> {
    pieces: Vec<Piece<S>>,
}

impl<S: Scalar> History<S> {
    pub fn constant(t0: f64, v: S) -> History<S> {
        History {
            pieces: vec![Piece {
                t0,
                t1: t0,
                kind: PieceKind::Const(v),
            }],
        }
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    pub fn push_const(&mut self, t: f64, v: S) {
        self.pieces.push(Piece {
            t0: t,
            t1: t,
            kind: PieceKind::Const(v),
        });
    }

    pub fn push_hermite(&mut self, t0: f64, t1: f64, x0: S, x1: S, m0: S, m1: S) {
        self.pieces.push(Piece {
            t0,
            t1,
            kind: PieceKind::Hermite { x0, x1, m0, m1 },
        });
    }

    pub fn value_at(&self, t: f64) -> S {
        let first = self.pieces[0].t0;
        let t = t.max(first);
        let idx = self.pieces.partition_point(|p| p.t0 <= t);
        self.pieces[idx.saturating_sub(1)].value_at(t)
    }

    pub fn last_value(&self) -> S {
        let p = self.pieces.last().expect("history is never empty");
        p.value_at(p.t1)
    }

    /// Drops pieces that end before `t`, keeping at least the last one.
    pub fn prune_before(&mut self, t: f64) {
        let keep_from = self.pieces.partition_point(|p| p.t1 < t);
        let keep_from = keep_from.min(self.pieces.len() - 1);
        if keep_from > 0 {
            self.pieces.drain(..keep_from);
        }
    }
}
