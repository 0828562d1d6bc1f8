//! Exact 2x2 matrices: integer matrices and matrices of the form
//! `R / sqrt(D)` with `R` rational.

use std::fmt;
use std::ops::Mul;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{square_decompose, Rational};

/// Integer 2x2 matrix `(a b; c d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl IntMatrix {
    pub const IDENTITY: IntMatrix = IntMatrix { a: 1, b: 0, c: 0, d: 1 };

    pub const fn new(a: i128, b: i128, c: i128, d: i128) -> Self {
        IntMatrix { a, b, c, d }
    }

    pub fn translation(t: i128) -> Self {
        IntMatrix::new(1, t, 0, 1)
    }

    pub fn det(&self) -> i128 {
        self.a * self.d - self.b * self.c
    }

    /// Adjugate; equals the inverse for determinant-one matrices.
    pub fn adjugate(&self) -> Self {
        IntMatrix::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Self {
        IntMatrix::new(-self.a, -self.b, -self.c, -self.d)
    }

    /// Membership in `Gamma_0(level)`.
    pub fn in_gamma0(&self, level: u64) -> bool {
        self.det() == 1 && self.c % level as i128 == 0
    }

    /// Moebius action on `p/q`, as a reduced fraction with nonnegative
    /// denominator (`1/0` is infinity).
    pub fn act(&self, p: i128, q: i128) -> (i128, i128) {
        let num = self.a * p + self.b * q;
        let den = self.c * p + self.d * q;
        normalize_fraction(num, den)
    }
}

/// Reduce `p/q` to lowest terms with `q >= 0`; infinity becomes `1/0`.
pub fn normalize_fraction(p: i128, q: i128) -> (i128, i128) {
    use num_integer::Integer;
    if q == 0 {
        return (1, 0);
    }
    let g = p.gcd(&q);
    let (mut p, mut q) = (p / g, q / g);
    if q < 0 {
        p = -p;
        q = -q;
    }
    (p, q)
}

impl Mul for IntMatrix {
    type Output = IntMatrix;
    fn mul(self, o: IntMatrix) -> IntMatrix {
        IntMatrix::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// Real 2x2 matrix `entries / sqrt(surd)` with rational entries.
///
/// Scaling matrices keep determinant one, which here means the rational
/// determinant equals `surd`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdMatrix {
    /// Row-major `[a, b, c, d]`.
    pub entries: [Rational; 4],
    pub surd: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurdMatrixJson {
    pub entries: [String; 4],
    pub surd: u64,
}

impl SurdMatrix {
    pub fn new(entries: [Rational; 4], surd: u64) -> Self {
        assert!(surd >= 1, "surd must be positive");
        SurdMatrix { entries, surd }.reduced()
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        SurdMatrix {
            entries: [m.a, m.b, m.c, m.d].map(Rational::from_integer),
            surd: 1,
        }
    }

    /// `diag(sqrt(h), 1/sqrt(h))`, stored as `diag(h, 1) / sqrt(h)`.
    pub fn width_normalizer(h: u64) -> Self {
        SurdMatrix::new(
            [
                Rational::from_integer(h as i128),
                Rational::zero(),
                Rational::zero(),
                Rational::one(),
            ],
            h,
        )
    }

    /// `(1 alpha; 0 1)`.
    pub fn shift(alpha: Rational) -> Self {
        SurdMatrix {
            entries: [Rational::one(), alpha, Rational::zero(), Rational::one()],
            surd: 1,
        }
    }

    /// Pull square factors out of the surd so it is squarefree.
    pub fn reduced(self) -> Self {
        let (k, d) = square_decompose(self.surd);
        if k == 1 {
            return self;
        }
        let k = Rational::from_integer(k as i128);
        SurdMatrix { entries: self.entries.map(|e| e / k), surd: d }
    }

    /// Determinant of the stored rational matrix.
    pub fn rational_det(&self) -> Rational {
        let [a, b, c, d] = &self.entries;
        a * d - b * c
    }

    /// Determinant of the represented real matrix is exactly one.
    pub fn is_unimodular(&self) -> bool {
        self.rational_det() == Rational::from_integer(self.surd as i128)
    }

    /// Inverse of a determinant-one matrix: the adjugate, same surd.
    pub fn inverse(&self) -> Self {
        debug_assert!(self.is_unimodular());
        let [a, b, c, d] = self.entries;
        SurdMatrix { entries: [d, -b, -c, a], surd: self.surd }
    }

    /// Image of infinity, `a / c`; `None` means infinity.
    pub fn image_of_infinity(&self) -> Option<Rational> {
        let [a, _, c, _] = &self.entries;
        (!c.is_zero()).then(|| a / c)
    }

    /// Exact equality with an integer matrix.
    pub fn equals_int(&self, m: &IntMatrix) -> bool {
        self.clone().reduced() == SurdMatrix::from_int(m)
    }

    /// Integer matrix when the represented matrix has integer entries.
    pub fn to_int(&self) -> Option<IntMatrix> {
        let r = self.clone().reduced();
        if r.surd != 1 || !r.entries.iter().all(|e| e.is_integer()) {
            return None;
        }
        let [a, b, c, d] = r.entries.map(|e| e.to_integer());
        Some(IntMatrix::new(a, b, c, d))
    }

    /// Floating-point entries of the represented real matrix.
    pub fn to_f64(&self) -> [f64; 4] {
        let s = (self.surd as f64).sqrt();
        self.entries
            .map(|e| (*e.numer() as f64 / *e.denom() as f64) / s)
    }

    pub fn to_json(&self) -> SurdMatrixJson {
        SurdMatrixJson {
            entries: self.entries.map(|e| format!("{}/{}", e.numer(), e.denom())),
            surd: self.surd,
        }
    }
}

impl Mul for &SurdMatrix {
    type Output = SurdMatrix;
    fn mul(self, o: &SurdMatrix) -> SurdMatrix {
        let [a, b, c, d] = &self.entries;
        let [e, f, g, h] = &o.entries;
        SurdMatrix {
            entries: [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h],
            surd: self.surd * o.surd,
        }
        .reduced()
    }
}

impl Mul<&IntMatrix> for &SurdMatrix {
    type Output = SurdMatrix;
    fn mul(self, o: &IntMatrix) -> SurdMatrix {
        self * &SurdMatrix::from_int(o)
    }
}

impl fmt::Display for SurdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.entries;
        write!(f, "({a} {b}; {c} {d})/sqrt({})", self.surd)
    }
}
