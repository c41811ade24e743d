use std::fmt;
use std::ops::{Add, AddAssign, Sub};

/// Simulation time in integer picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ticks(pub i64);

impl Ticks {
    pub const PER_SEC: i64 = 1_000_000_000_000;
    pub const ZERO: Ticks = Ticks(0);

    pub fn from_secs(s: f64) -> Ticks {
        Ticks((s * Self::PER_SEC as f64).round() as i64)
    }

    pub fn secs(self) -> f64 {
        self.0 as f64 / Self::PER_SEC as f64
    }

    pub fn min(self, other: Ticks) -> Ticks {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Ticks) -> Ticks {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Smallest multiple of `step` strictly greater than `self`.
    pub fn next_multiple(self, step: Ticks) -> Ticks {
        debug_assert!(step.0 > 0);
        Ticks((self.0.div_euclid(step.0) + 1) * step.0)
    }

    pub fn is_multiple_of(self, step: Ticks) -> bool {
        step.0 > 0 && self.0.rem_euclid(step.0) == 0
    }
}

impl Add for Ticks {
    type Output = Ticks;
    fn add(self, rhs: Ticks) -> Ticks {
        Ticks(self.0 + rhs.0)
    }
}

impl AddAssign for Ticks {
    fn add_assign(&mut self, rhs: Ticks) {
        self.0 += rhs.0;
    }
}

impl Sub for Ticks {
    type Output = Ticks;
    fn sub(self, rhs: Ticks) -> Ticks {
        Ticks(self.0 - rhs.0)
    }
}

impl fmt::Display for Ticks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.secs())
    }
}
