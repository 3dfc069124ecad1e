//! Exact dyadic rationals for verification margins.

use core::fmt;

/// The value `num / 2^shift`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: i128,
    shift: u32,
}

impl Dyadic {
    pub fn new(num: i128, shift: u32) -> Dyadic {
        let mut d = Dyadic { num, shift };
        d.normalize();
        d
    }

    pub fn integer(v: i128) -> Dyadic {
        Dyadic { num: v, shift: 0 }
    }

    fn normalize(&mut self) {
        while self.shift > 0 && self.num % 2 == 0 {
            self.num /= 2;
            self.shift -= 1;
        }
    }

    /// Exact conversion of a finite `f64`. Returns `None` for non-finite
    /// values or magnitudes that do not fit.
    pub fn from_f64(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::integer(0));
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
        if e >= 0 {
            if e > 70 {
                return None;
            }
            Some(Dyadic::integer(sign * (mant << e)))
        } else {
            Some(Dyadic::new(sign * mant, (-e) as u32))
        }
    }

    pub fn numerator(self) -> i128 {
        self.num
    }

    /// Exponent of the power-of-two denominator.
    pub fn shift(self) -> u32 {
        self.shift
    }

    pub fn is_positive(self) -> bool {
        self.num > 0
    }

    pub fn mul_pow2(self, k: u32) -> Dyadic {
        if k <= self.shift {
            Dyadic::new(self.num, self.shift - k)
        } else {
            Dyadic::integer(self.num << (k - self.shift))
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / libm::exp2(self.shift as f64)
    }

    /// Checks `after <= before - self` for integer `before`/`after`.
    pub fn decrease_holds(self, before: i128, after: i128) -> bool {
        (after << self.shift) <= (before << self.shift) - self.num
    }

    pub fn parse(s: &str) -> Option<Dyadic> {
        match s.split_once('/') {
            None => s.trim().parse().ok().map(Dyadic::integer),
            Some((n, d)) => {
                let num: i128 = n.trim().parse().ok()?;
                let den: u128 = d.trim().parse().ok()?;
                if den == 0 || !den.is_power_of_two() {
                    return None;
                }
                Some(Dyadic::new(num, den.trailing_zeros()))
            }
        }
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.shift == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.shift)
        }
    }
}
