//! Exact arithmetic: rationals, univariate polynomials with Lagrange
//! interpolation, and rational linear systems.
//!
//! Everything here is exact; there is no floating point anywhere in the crate.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Arbitrary precision rational number, always normalised.
pub type Rational = BigRational;

/// Builds the rational `n/d`.
///
/// # Panics
/// Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses the `"p/q"` or `"p"` format produced by [`format_rational`].
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("{t:?}: {e}")))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let q = parse_int(q)?;
            if q.is_zero() {
                return Err(Error::Parse(format!("{s:?}: zero denominator")));
            }
            Ok(Rational::new(parse_int(p)?, q))
        }
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    /// Serializes a rational as a string.
    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    /// Deserializes a rational from a string.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Univariate polynomial with rational coefficients in ascending degree.
///
/// The coefficient list never has a trailing zero; the zero polynomial has
/// an empty list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    /// The zero polynomial.
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    /// Builds a polynomial from ascending coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// The constant polynomial `c`.
    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// Ascending coefficients.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Evaluates the polynomial at `x` by Horner's rule.
    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
            .collect();
        Self::from_coeffs(coeffs)
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::from_coeffs(coeffs)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Rational) -> UniPoly {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "({})*r", format_rational(c))?,
                _ => write!(f, "({})*r^{}", format_rational(c), i)?,
            }
        }
        Ok(())
    }
}

/// Returns the unique polynomial of degree below `points.len()` through
/// every point.
pub fn lagrange_interpolate(points: &[(Rational, Rational)]) -> Result<UniPoly> {
    if points.is_empty() {
        return Err(Error::EmptyInput("interpolation points"));
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(Error::DegenerateNodes);
        }
    }
    // Newton divided differences, then expansion into the monomial basis.
    let n = points.len();
    let mut dd: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = &dd[i] - &dd[i - 1];
            let den = &points[i].0 - &points[i - level].0;
            dd[i] = num / den;
        }
    }
    let mut poly = UniPoly::constant(dd[n - 1].clone());
    for i in (0..n - 1).rev() {
        let factor = UniPoly::from_coeffs(vec![-points[i].0.clone(), Rational::one()]);
        poly = poly.mul(&factor).add(&UniPoly::constant(dd[i].clone()));
    }
    Ok(poly)
}

/// Dense rational matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    /// The `rows × cols` zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    /// The `n × n` identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// Builds a matrix from rows, which must all have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(RatMatrix {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    /// Overwrites entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.reduce().len()
    }

    /// Reduces in place to reduced row echelon form and returns the pivot columns.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.entries.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).recip();
            for j in c..self.cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j) - &f * self.get(r, j);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}

/// Outcome of an exact linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// The system has exactly one solution.
    Unique(Vec<Rational>),
    /// The system has no solution.
    Inconsistent,
    /// The system has infinitely many solutions: one particular solution
    /// plus a basis of the kernel.
    NonUnique {
        /// A particular solution.
        particular: Vec<Rational>,
        /// Basis of the kernel of the matrix.
        kernel: Vec<Vec<Rational>>,
    },
}

/// Solves `A x = b` exactly by Gauss–Jordan elimination.
pub fn solve_rational_system(a: &RatMatrix, b: &[Rational]) -> Result<SolveOutcome> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, right-hand side has {} entries",
            a.rows,
            b.len()
        )));
    }
    let mut aug = RatMatrix::zeros(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, a.cols, b[i].clone());
    }
    let pivots = aug.reduce();
    if pivots.last() == Some(&a.cols) {
        return Ok(SolveOutcome::Inconsistent);
    }
    let mut particular = vec![Rational::zero(); a.cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = aug.get(r, a.cols).clone();
    }
    if pivots.len() == a.cols {
        return Ok(SolveOutcome::Unique(particular));
    }
    let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); a.cols];
            v[f] = Rational::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -aug.get(r, f).clone();
            }
            v
        })
        .collect();
    Ok(SolveOutcome::NonUnique { particular, kernel })
}

/// Least common multiple of positive integers; the empty list gives 1.
pub fn lcm_list(values: &[i64]) -> Result<i64> {
    values.iter().try_fold(1i64, |acc, &v| {
        if v <= 0 {
            Err(Error::NonPositive(v))
        } else {
            Ok(acc.lcm(&v))
        }
    })
}

/// `n!` as a rational.
pub fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

/// Returns `true` when the rational is a (possibly negative) integer.
pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// Absolute value helper for rationals.
pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_interpolation() {
        let pts = vec![(int(0), int(1)), (int(1), int(1)), (int(2), int(1))];
        assert_eq!(lagrange_interpolate(&pts).unwrap(), UniPoly::constant(int(1)));
    }

    #[test]
    fn quadratic_interpolation() {
        let pts = vec![(int(1), int(1)), (int(2), int(4)), (int(3), int(9))];
        let p = lagrange_interpolate(&pts).unwrap();
        assert_eq!(p.coeffs(), &[int(0), int(0), int(1)]);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let pts = vec![(int(1), int(1)), (int(1), int(2))];
        let err = lagrange_interpolate(&pts).unwrap_err();
        assert_eq!(err.to_string(), "degenerate nodes");
    }

    #[test]
    fn identity_solve() {
        let b = vec![rat(3, 2), int(-7)];
        let out = solve_rational_system(&RatMatrix::identity(2), &b).unwrap();
        assert_eq!(out, SolveOutcome::Unique(b));
    }

    #[test]
    fn singular_consistent_solve() {
        let a = RatMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        match solve_rational_system(&a, &[int(1), int(2)]).unwrap() {
            SolveOutcome::NonUnique { kernel, particular } => {
                assert_eq!(kernel.len(), 1);
                assert_eq!(a.mul_vec(&kernel[0]).unwrap(), vec![int(0), int(0)]);
                assert_eq!(a.mul_vec(&particular).unwrap(), vec![int(1), int(2)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_solve() {
        let a = RatMatrix::from_rows(vec![vec![int(1), int(2)], vec![int(2), int(4)]]).unwrap();
        assert_eq!(
            solve_rational_system(&a, &[int(1), int(3)]).unwrap(),
            SolveOutcome::Inconsistent
        );
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_list(&[3, 1]).unwrap(), 3);
        assert_eq!(lcm_list(&[2, 2]).unwrap(), 2);
        assert_eq!(lcm_list(&[]).unwrap(), 1);
        assert!(lcm_list(&[2, 0]).is_err());
    }

    #[test]
    fn rational_format_roundtrip() {
        for q in [rat(3, 2), int(-7), rat(-1, 24), int(0)] {
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&int(5)), "5");
    }
}
