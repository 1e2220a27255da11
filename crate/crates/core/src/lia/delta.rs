use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{Signed, Zero};

use crate::formula::Rational;

/// `r + d·δ` for an infinitesimal positive `δ`; ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Delta {
    pub r: Rational,
    pub d: Rational,
}

impl Delta {
    pub fn new(r: Rational, d: Rational) -> Self {
        Self { r, d }
    }

    pub fn real(r: Rational) -> Self {
        Self { r, d: Rational::zero() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.d.is_zero()
    }

    pub fn scale(&self, k: &Rational) -> Delta {
        Delta::new(&self.r * k, &self.d * k)
    }

    pub fn div(&self, k: &Rational) -> Delta {
        Delta::new(&self.r / k, &self.d / k)
    }

    pub fn add_scaled(&mut self, other: &Delta, k: &Rational) {
        self.r += &other.r * k;
        self.d += &other.d * k;
    }

    pub fn is_negative(&self) -> bool {
        self.r.is_negative() || (self.r.is_zero() && self.d.is_negative())
    }

    pub fn is_positive(&self) -> bool {
        self.r.is_positive() || (self.r.is_zero() && self.d.is_positive())
    }

    /// Materializes the value for a concrete `δ`.
    pub fn at(&self, delta: &Rational) -> Rational {
        &self.r + &self.d * delta
    }
}

impl Add for &Delta {
    type Output = Delta;
    fn add(self, rhs: &Delta) -> Delta {
        Delta::new(&self.r + &rhs.r, &self.d + &rhs.d)
    }
}

impl Sub for &Delta {
    type Output = Delta;
    fn sub(self, rhs: &Delta) -> Delta {
        Delta::new(&self.r - &rhs.r, &self.d - &rhs.d)
    }
}

impl Neg for &Delta {
    type Output = Delta;
    fn neg(self) -> Delta {
        Delta::new(-&self.r, -&self.d)
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d.is_zero() {
            write!(f, "{}", self.r)
        } else {
            write!(f, "{}+{}d", self.r, self.d)
        }
    }
}

/// Largest `δ ≤ 1` such that `lo ≤ hi` still holds after materialization,
/// given that it holds symbolically.
pub fn delta_room(lo: &Delta, hi: &Delta, current: &Rational) -> Rational {
    if lo.r < hi.r && lo.d > hi.d {
        let room = (&hi.r - &lo.r) / (&lo.d - &hi.d);
        if &room < current {
            return room;
        }
    }
    current.clone()
}
