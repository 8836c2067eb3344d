use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default denominator cap when approximating a real flux by a fraction.
pub const DEFAULT_Q_MAX: i64 = 64;

/// Magnetic flux per plaquette in units of the flux quantum, as a reduced
/// fraction `p/q` with `q >= 1` and `gcd(|p|, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalFlux {
    p: i64,
    q: i64,
}

impl RationalFlux {
    /// Accepts only fractions that are already reduced.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q < 1 {
            return Err(Error::invalid(format!("flux denominator must be >= 1, got {q}")));
        }
        let gcd = p.abs().gcd(&q);
        if gcd != 1 {
            return Err(Error::NotReduced { p, q, gcd });
        }
        Ok(RationalFlux { p, q })
    }

    /// Reduces an arbitrary fraction, normalising the sign onto the numerator.
    pub fn reduced(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("flux denominator must be nonzero"));
        }
        let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
        let g = p.abs().gcd(&q);
        Ok(RationalFlux { p: p / g, q: q / g })
    }

    pub const fn zero() -> Self {
        RationalFlux { p: 0, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Fiber dimension of the magnetic Bloch reduction.
    pub fn dim(&self) -> usize {
        self.q as usize
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Representative with `0 <= p < q`.
    pub fn wrapped(&self) -> Self {
        RationalFlux { p: self.p.rem_euclid(self.q), q: self.q }
    }

    pub fn negated(&self) -> Self {
        RationalFlux { p: -self.p, q: self.q }
    }

    /// Adds an integer number of flux quanta.
    pub fn shifted(&self, n: i64) -> Self {
        RationalFlux { p: self.p + n * self.q, q: self.q }
    }

    /// Best continued-fraction convergent of `x` with denominator at most `q_max`.
    pub fn approximate(x: f64, q_max: i64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("cannot approximate non-finite flux {x}")));
        }
        if q_max < 1 {
            return Err(Error::invalid("q_max must be >= 1"));
        }
        // Convergents h_n / k_n of the continued fraction of x.
        let (mut h_prev, mut h) = (1i64, x.floor() as i64);
        let (mut k_prev, mut k) = (0i64, 1i64);
        let mut frac = x - x.floor();
        while frac > 1e-12 {
            let inv = 1.0 / frac;
            let a = inv.floor() as i64;
            let h_next = a * h + h_prev;
            let k_next = a * k + k_prev;
            if k_next > q_max {
                break;
            }
            (h_prev, h) = (h, h_next);
            (k_prev, k) = (k, k_next);
            frac = inv - inv.floor();
        }
        RationalFlux::reduced(h, k)
    }

    /// All reduced fractions `p/q` with `1 <= q <= q_max` and `0 <= p <= q`,
    /// ordered by `q`, then `p`. Both `0/1` and `1/1` are included.
    pub fn farey_up_to(q_max: i64) -> Vec<Self> {
        let mut out = Vec::new();
        for q in 1..=q_max {
            for p in 0..=q {
                if p.gcd(&q) == 1 {
                    out.push(RationalFlux { p, q });
                }
            }
        }
        out
    }
}

impl fmt::Display for RationalFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalFlux {
    type Err = Error;

    /// Parses `p/q` or a bare integer. The fraction must already be reduced.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::invalid(format!("cannot parse flux {s:?}: expected p/q")))
        };
        match s.split_once('/') {
            Some((p, q)) => RationalFlux::new(parse(p)?, parse(q)?),
            None => RationalFlux::new(parse(s)?, 1),
        }
    }
}

impl Serialize for RationalFlux {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalFlux {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
