//! Fixed-point money and exact prices.
//!
//! Account balances and transfers are integers so that conservation checks
//! are bit-exact over arbitrarily long runs. Compensatory prices are kept as
//! exact fractions until a trade settles, at which point they are rounded to
//! whole currency units in the direction that protects the quoting side.

use core::cmp::Ordering;
use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Number of micro-units in one unit of money.
pub const MICROS_PER_UNIT: i64 = 1_000_000;

/// An amount of money with six decimal places, stored as micro-units.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units * MICROS_PER_UNIT)
    }

    /// Rounds to the nearest micro-unit. Non-finite input maps to zero.
    pub fn from_f64(value: f64) -> Self {
        if !value.is_finite() {
            return Money::ZERO;
        }
        Money(libm::round(value * MICROS_PER_UNIT as f64) as i64)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_UNIT as f64
    }

    pub fn max(self, other: Money) -> Money {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({})", self)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / MICROS_PER_UNIT as u64;
        let frac = abs % MICROS_PER_UNIT as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let mut digits = [0u8; 6];
            let mut rest = frac;
            for slot in digits.iter_mut().rev() {
                *slot = b'0' + (rest % 10) as u8;
                rest /= 10;
            }
            let mut len = 6;
            while digits[len - 1] == b'0' {
                len -= 1;
            }
            let text = core::str::from_utf8(&digits[..len]).unwrap_or("0");
            write!(f, "{sign}{whole}.{text}")
        }
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for Money {
    type Output = Money;
    fn mul(self, rhs: i64) -> Money {
        Money(self.0 * rhs)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

/// An exact price in micro-units, `num / den` with `den > 0`.
///
/// Quotes are compared as fractions; rounding only happens at settlement.
#[derive(Copy, Clone, Debug)]
pub struct Price {
    num: i128,
    den: i128,
}

impl Price {
    pub const ZERO: Price = Price { num: 0, den: 1 };

    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "price denominator must be non-zero");
        if den < 0 {
            Price { num: -num, den: -den }
        } else {
            Price { num, den }
        }
    }

    pub fn from_money(m: Money) -> Self {
        Price {
            num: m.micros() as i128,
            den: 1,
        }
    }

    pub fn numer(&self) -> i128 {
        self.num
    }

    pub fn denom(&self) -> i128 {
        self.den
    }

    pub fn abs(self) -> Price {
        Price {
            num: self.num.abs(),
            den: self.den,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64 / MICROS_PER_UNIT as f64
    }

    /// Smallest whole number of `unit`-sized currency units worth at least this price.
    pub fn ceil_units(&self, unit: Money) -> i64 {
        let den = self.den * unit.micros() as i128;
        div_ceil(self.num, den) as i64
    }

    /// Largest whole number of `unit`-sized currency units worth at most this price.
    pub fn floor_units(&self, unit: Money) -> i64 {
        let den = self.den * unit.micros() as i128;
        div_floor(self.num, den) as i64
    }
}

impl PartialEq for Price {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Price {}

impl PartialOrd for Price {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Price {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn display_trims_fraction() {
        assert_eq!(Money::from_units(402).to_string(), "402");
        assert_eq!(Money::from_f64(773.25).to_string(), "773.25");
        assert_eq!(Money::from_f64(-0.5).to_string(), "-0.5");
    }

    #[test]
    fn rounding_directions() {
        let p = Price::new(7, 2); // 3.5 micros
        assert_eq!(p.ceil_units(Money::from_micros(1)), 4);
        assert_eq!(p.floor_units(Money::from_micros(1)), 3);
        let n = Price::new(-7, 2);
        assert_eq!(n.ceil_units(Money::from_micros(1)), -3);
        assert_eq!(n.floor_units(Money::from_micros(1)), -4);
        let unit = Money::from_f64(2.5);
        assert_eq!(Price::from_money(Money::from_units(10)).floor_units(unit), 4);
        assert_eq!(Price::from_money(Money::from_units(11)).ceil_units(unit), 5);
    }

    #[test]
    fn price_ordering_is_exact() {
        assert!(Price::new(1, 3) < Price::new(1, 2));
        assert_eq!(Price::new(2, 4), Price::new(1, 2));
        assert_eq!(Price::new(1, -2), Price::new(-1, 2));
    }
}
