//! Working scalar types.
//!
//! Everything numeric in this crate is generic over [`Real`], which is
//! implemented for `f64` (53 significand bits) and for [`MpFloat`], an
//! MPFR-backed float whose significand width is chosen at construction.
//! Binary operations between two `MpFloat`s of different widths produce a
//! result at the wider of the two.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::ops::Pow;
use rug::Float;

/// Significand bits of IEEE double precision.
pub const DOUBLE_BITS: u32 = 53;

/// A real scalar at a fixed working precision.
///
/// Constants must be created through [`Real::from_f64`], [`Real::from_i64`]
/// or [`Real::parse`] with an explicit precision, so that extended-precision
/// computations are not silently truncated to double.
pub trait Real:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    fn from_f64(x: f64, prec: u32) -> Self;
    fn from_i64(x: i64, prec: u32) -> Self;
    /// Rounds an extended-precision value to `prec` bits (nearest).
    fn from_mp(x: &MpFloat, prec: u32) -> Self;
    /// Parses a decimal literal, rounding once to `prec` bits.
    fn parse(s: &str, prec: u32) -> Option<Self>;

    fn precision(&self) -> u32;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powi(&self, n: i32) -> Self;

    /// Shortest decimal rendering that reads back to the same value at the
    /// same precision.
    fn to_round_trip_string(&self) -> String;

    fn zero(prec: u32) -> Self {
        Self::from_i64(0, prec)
    }

    fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    /// Unit roundoff `2^(1 - prec)`.
    fn epsilon(prec: u32) -> Self {
        Self::from_i64(2, prec).powi(1 - prec as i32)
    }

    fn is_zero(&self) -> bool {
        self.to_f64() == 0.0 && self.is_finite()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

/// Unit roundoff at `prec` bits as a double (it underflows only for
/// precisions beyond ~1000 bits, where callers should use [`Real::epsilon`]).
pub fn eps_f64(prec: u32) -> f64 {
    2f64.powi(1 - prec as i32)
}

impl Real for f64 {
    fn from_f64(x: f64, _prec: u32) -> Self {
        x
    }

    fn from_i64(x: i64, _prec: u32) -> Self {
        x as f64
    }

    fn parse(s: &str, _prec: u32) -> Option<Self> {
        s.trim().parse().ok()
    }

    fn precision(&self) -> u32 {
        DOUBLE_BITS
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_mp(x: &MpFloat, _prec: u32) -> Self {
        x.0.to_f64()
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }

    fn to_round_trip_string(&self) -> String {
        format!("{:e}", self)
    }
}

/// Extended-precision float backed by MPFR.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct MpFloat(Float);

impl MpFloat {
    pub fn new(x: f64, prec: u32) -> Self {
        MpFloat(Float::with_val(prec, x))
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }

    pub fn into_inner(self) -> Float {
        self.0
    }
}

impl From<Float> for MpFloat {
    fn from(f: Float) -> Self {
        MpFloat(f)
    }
}

impl fmt::Debug for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_round_trip_string())
    }
}

impl fmt::Display for MpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident, $atr:ident, $amethod:ident, $op:tt) => {
        impl<'a> $tr<&'a MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $method(mut self, rhs: &'a MpFloat) -> MpFloat {
                if self.0.prec() >= rhs.0.prec() {
                    self.0 $op &rhs.0;
                    self
                } else {
                    let mut out = Float::with_val(rhs.0.prec(), &self.0);
                    out $op &rhs.0;
                    MpFloat(out)
                }
            }
        }

        impl $tr<MpFloat> for MpFloat {
            type Output = MpFloat;
            fn $method(self, rhs: MpFloat) -> MpFloat {
                self.$method(&rhs)
            }
        }

        impl<'a> $atr<&'a MpFloat> for MpFloat {
            fn $amethod(&mut self, rhs: &'a MpFloat) {
                if self.0.prec() < rhs.0.prec() {
                    self.0.set_prec(rhs.0.prec());
                }
                self.0 $op &rhs.0;
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign, +=);
mp_binop!(Sub, sub, SubAssign, sub_assign, -=);
mp_binop!(Mul, mul, MulAssign, mul_assign, *=);
mp_binop!(Div, div, DivAssign, div_assign, /=);

impl Neg for MpFloat {
    type Output = MpFloat;
    fn neg(self) -> MpFloat {
        MpFloat(-self.0)
    }
}

impl Real for MpFloat {
    fn from_f64(x: f64, prec: u32) -> Self {
        MpFloat(Float::with_val(prec, x))
    }

    fn from_i64(x: i64, prec: u32) -> Self {
        MpFloat(Float::with_val(prec, x))
    }

    fn parse(s: &str, prec: u32) -> Option<Self> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(MpFloat(Float::with_val(prec, parsed)))
    }

    fn precision(&self) -> u32 {
        self.0.prec()
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    fn from_mp(x: &MpFloat, prec: u32) -> Self {
        MpFloat(Float::with_val(prec, &x.0))
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    fn abs(&self) -> Self {
        MpFloat(self.0.clone().abs())
    }

    fn sqrt(&self) -> Self {
        MpFloat(self.0.clone().sqrt())
    }

    fn exp(&self) -> Self {
        MpFloat(self.0.clone().exp())
    }

    fn sin(&self) -> Self {
        MpFloat(self.0.clone().sin())
    }

    fn cos(&self) -> Self {
        MpFloat(self.0.clone().cos())
    }

    fn powi(&self, n: i32) -> Self {
        MpFloat(self.0.clone().pow(n))
    }

    fn to_round_trip_string(&self) -> String {
        self.0.to_string_radix(10, None)
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}
