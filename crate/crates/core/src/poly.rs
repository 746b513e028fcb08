//! Sparse graded polynomials in up to six variables.
//!
//! Variables are ordered `(q1, .., qd, p1, .., pd)` so that the Poisson
//! bracket pairs variable `i` with variable `i + d`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::NumAssign;

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 6;
/// Coefficients with magnitude at or below this are not stored.
pub const ZERO_THRESHOLD: f64 = 1e-16;

/// Exponent tuple. Unused trailing slots stay zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Monomial([u8; MAX_VARS]);

impl Monomial {
    pub fn new(exps: &[u8]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} exponents");
        let mut e = [0u8; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        Monomial(e)
    }

    pub fn unit(i: usize) -> Self {
        let mut e = [0u8; MAX_VARS];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exps(&self) -> &[u8; MAX_VARS] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&k| k as u32).sum()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
        Monomial(e)
    }

    /// Largest index with a nonzero exponent, used to check variable counts.
    fn highest_var(&self) -> Option<usize> {
        self.0.iter().rposition(|&k| k > 0)
    }

    fn label(&self, nvars: usize) -> String {
        self.0[..nvars]
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic: lower degree first, then larger leading exponents.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Scalar field of a series: `f64` or `Complex64`.
pub trait Coefficient:
    NumAssign + Neg<Output = Self> + Copy + fmt::Debug + Send + Sync + nalgebra::Scalar + 'static
{
    fn from_f64(x: f64) -> Self;
    fn magnitude(&self) -> f64;
    fn write_text(&self, out: &mut String);
    fn parse_text(fields: &[&str]) -> Option<Self>;
}

impl Coefficient for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn write_text(&self, out: &mut String) {
        out.push_str(&format!("{:.17e}", self));
    }
    fn parse_text(fields: &[&str]) -> Option<Self> {
        match fields {
            [re] => re.parse().ok(),
            _ => None,
        }
    }
}

impl Coefficient for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn write_text(&self, out: &mut String) {
        out.push_str(&format!("{:.17e} {:.17e}", self.re, self.im));
    }
    fn parse_text(fields: &[&str]) -> Option<Self> {
        match fields {
            [re] => Some(Complex64::new(re.parse().ok()?, 0.0)),
            [re, im] => Some(Complex64::new(re.parse().ok()?, im.parse().ok()?)),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct Series<T> {
    nvars: usize,
    max_degree: u32,
    terms: BTreeMap<Monomial, T>,
}

pub type RealSeries = Series<f64>;
pub type ComplexSeries = Series<Complex64>;

impl<T: Coefficient> fmt::Debug for Series<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("nvars", &self.nvars)
            .field("max_degree", &self.max_degree)
            .field("terms", &self.terms)
            .finish()
    }
}

fn keep<T: Coefficient>(c: &T) -> bool {
    c.magnitude() > ZERO_THRESHOLD
}

fn collect<T: Coefficient>(acc: HashMap<Monomial, T>) -> BTreeMap<Monomial, T> {
    acc.into_iter().filter(|(_, c)| keep(c)).collect()
}

impl<T: Coefficient> Series<T> {
    /// # Panics
    /// If `nvars` is zero or larger than [`MAX_VARS`].
    pub fn zero(nvars: usize, max_degree: u32) -> Self {
        assert!(
            (1..=MAX_VARS).contains(&nvars),
            "series need 1..={MAX_VARS} variables"
        );
        Series {
            nvars,
            max_degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, max_degree: u32, c: T) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        s.add_term(Monomial::default(), c);
        s
    }

    pub fn variable(nvars: usize, max_degree: u32, i: usize) -> Self {
        assert!(i < nvars);
        let mut s = Self::zero(nvars, max_degree);
        s.add_term(Monomial::unit(i), T::one());
        s
    }

    pub fn monomial(nvars: usize, max_degree: u32, exps: &[u8], c: T) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        s.add_term(Monomial::new(exps), c);
        s
    }

    pub fn from_terms<I>(nvars: usize, max_degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, T)>,
    {
        let mut acc: HashMap<Monomial, T> = HashMap::new();
        for (m, c) in terms {
            assert!(
                m.highest_var().map_or(true, |v| v < nvars),
                "exponent beyond variable count"
            );
            if m.degree() <= max_degree {
                *acc.entry(m).or_insert_with(T::zero) += c;
            }
        }
        Series {
            nvars,
            max_degree,
            terms: collect(acc),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn get(&self, m: &Monomial) -> Option<&T> {
        self.terms.get(m)
    }

    /// Coefficient of the monomial with the given exponents, zero if absent.
    pub fn coeff(&self, exps: &[u8]) -> T {
        self.terms
            .get(&Monomial::new(exps))
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// Adds `c` to the coefficient of `m`, dropping it if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: T) {
        assert!(m.highest_var().map_or(true, |v| v < self.nvars));
        if m.degree() > self.max_degree {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(T::zero);
        *entry += c;
        if !keep(entry) {
            self.terms.remove(&m);
        }
    }

    pub fn remove(&mut self, m: &Monomial) -> Option<T> {
        self.terms.remove(m)
    }

    /// Highest total degree present.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn degree_part(&self, k: u32) -> Self {
        self.filter(|m, _| m.degree() == k)
    }

    pub fn filter(&self, mut pred: impl FnMut(&Monomial, &T) -> bool) -> Self {
        Series {
            nvars: self.nvars,
            max_degree: self.max_degree,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| pred(m, c))
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Same terms with a new grading; terms above `n` are dropped.
    pub fn with_max_degree(&self, n: u32) -> Self {
        let mut s = self.filter(|m, _| m.degree() <= n);
        s.max_degree = n;
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn map<U: Coefficient>(&self, mut f: impl FnMut(&T) -> U) -> Series<U> {
        Series::from_terms(
            self.nvars,
            self.max_degree,
            self.terms.iter().map(|(m, c)| (*m, f(c))),
        )
    }

    /// Applies `f` to each coefficient with access to its monomial.
    pub fn map_terms(&self, mut f: impl FnMut(&Monomial, T) -> T) -> Self {
        Series::from_terms(
            self.nvars,
            self.max_degree,
            self.terms.iter().map(|(m, c)| (*m, f(m, *c))),
        )
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VariableMismatch(self.nvars, other.nvars));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: T) -> Result<Self> {
        self.check_same(other)?;
        let max_degree = self.max_degree.min(other.max_degree);
        let mut out = self.with_max_degree(max_degree);
        for (m, c) in other.terms.iter() {
            out.add_term(*m, *c * sign);
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, T::one())
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -T::one())
    }

    /// Product truncated at the smaller of the two gradings.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let max_degree = self.max_degree.min(other.max_degree);
        let mut acc: HashMap<Monomial, T> = HashMap::new();
        for (ma, ca) in self.terms.iter() {
            let da = ma.degree();
            for (mb, cb) in other.terms.iter() {
                if da + mb.degree() > max_degree {
                    continue;
                }
                *acc.entry(ma.times(mb)).or_insert_with(T::zero) += *ca * *cb;
            }
        }
        Ok(Series {
            nvars: self.nvars,
            max_degree,
            terms: collect(acc),
        })
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| *v * c)
    }

    pub fn derivative(&self, i: usize) -> Self {
        assert!(i < self.nvars);
        let terms = self.terms.iter().filter(|(m, _)| m.0[i] > 0).map(|(m, c)| {
            let mut e = m.0;
            let k = e[i];
            e[i] -= 1;
            (Monomial(e), *c * T::from_f64(k as f64))
        });
        Series::from_terms(self.nvars, self.max_degree, terms)
    }

    /// `{f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i`, truncated at the
    /// smaller grading.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        if self.nvars % 2 != 0 {
            return Err(Error::OddVariables(self.nvars));
        }
        let d = self.nvars / 2;
        let max_degree = self.max_degree.min(other.max_degree);
        let mut acc: HashMap<Monomial, T> = HashMap::new();
        for (ma, ca) in self.terms.iter() {
            let da = ma.degree();
            for (mb, cb) in other.terms.iter() {
                if da + mb.degree() < 2 || da + mb.degree() - 2 > max_degree {
                    continue;
                }
                let prod = *ca * *cb;
                for i in 0..d {
                    let w = ma.0[i] as i32 * mb.0[i + d] as i32
                        - ma.0[i + d] as i32 * mb.0[i] as i32;
                    if w == 0 {
                        continue;
                    }
                    let mut e = ma.times(mb).0;
                    e[i] -= 1;
                    e[i + d] -= 1;
                    *acc.entry(Monomial(e)).or_insert_with(T::zero) += prod * T::from_f64(w as f64);
                }
            }
        }
        Ok(Series {
            nvars: self.nvars,
            max_degree,
            terms: collect(acc),
        })
    }

    /// Composition with the linear map `old_i = sum_j m[(i, j)] new_j`.
    pub fn substitute_linear(&self, m: &DMatrix<T>) -> Result<Self> {
        let n = self.nvars;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                rows: m.nrows(),
                cols: m.ncols(),
                nvars: n,
            });
        }
        let forms: Vec<Vec<(usize, T)>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| keep(&m[(i, j)]))
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        let Some(top) = self.degree() else {
            return Ok(self.clone());
        };

        // Each needed product P(k) = prod_i L_i^{k_i} is built as P(k - e_j) * L_j
        // with j the first nonzero exponent, one degree at a time.
        let pred = |k: &Monomial| -> (Monomial, usize) {
            let j = k.0.iter().position(|&e| e > 0).unwrap();
            let mut e = k.0;
            e[j] -= 1;
            (Monomial(e), j)
        };
        let mut needed: Vec<Vec<Monomial>> = vec![Vec::new(); top as usize + 1];
        for k in self.terms.keys() {
            needed[k.degree() as usize].push(*k);
        }
        for d in (1..=top as usize).rev() {
            let mut below: Vec<Monomial> = needed[d].iter().map(|k| pred(k).0).collect();
            below.extend(needed[d - 1].iter().copied());
            below.sort_unstable();
            below.dedup();
            needed[d - 1] = below;
        }

        let mut acc: HashMap<Monomial, T> = HashMap::new();
        let mut prev: HashMap<Monomial, Vec<(Monomial, T)>> = HashMap::new();
        prev.insert(Monomial::default(), vec![(Monomial::default(), T::one())]);
        for d in 0..=top as usize {
            let current: HashMap<Monomial, Vec<(Monomial, T)>> = if d == 0 {
                prev.clone()
            } else {
                needed[d]
                    .iter()
                    .map(|k| {
                        let (base, j) = pred(k);
                        let mut prod: HashMap<Monomial, T> = HashMap::new();
                        for (mb, cb) in prev[&base].iter() {
                            for &(v, cv) in forms[j].iter() {
                                let mut e = mb.0;
                                e[v] += 1;
                                *prod.entry(Monomial(e)).or_insert_with(T::zero) += *cb * cv;
                            }
                        }
                        (*k, prod.into_iter().collect())
                    })
                    .collect()
            };
            for (k, c) in self.terms.iter().filter(|(k, _)| k.degree() as usize == d) {
                for (mp, cp) in current[k].iter() {
                    *acc.entry(*mp).or_insert_with(T::zero) += *c * *cp;
                }
            }
            prev = current;
        }
        Ok(Series {
            nvars: n,
            max_degree: self.max_degree,
            terms: collect(acc),
        })
    }

    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars);
        let mut total = T::zero();
        for (m, c) in self.terms.iter() {
            let mut v = *c;
            for (i, &k) in m.0[..self.nvars].iter().enumerate() {
                for _ in 0..k {
                    v *= x[i];
                }
            }
            total += v;
        }
        total
    }

    /// One term per line: exponents, then the coefficient (`re` or `re im`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (m, c) in self.terms.iter() {
            out.push_str(&m.label(self.nvars));
            out.push(' ');
            c.write_text(&mut out);
            out.push('\n');
        }
        out
    }

    /// Parses [`Series::to_text`] output. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, nvars: usize, max_degree: u32) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| Error::Parse {
                line: idx + 1,
                msg: msg.to_string(),
            };
            if fields.len() <= nvars {
                return Err(err("too few fields"));
            }
            let mut exps = [0u8; MAX_VARS];
            for (slot, f) in exps.iter_mut().zip(&fields[..nvars]) {
                *slot = f.parse().map_err(|_| err("bad exponent"))?;
            }
            let c = T::parse_text(&fields[nvars..]).ok_or_else(|| err("bad coefficient"))?;
            terms.push((Monomial(exps), c));
        }
        Ok(Self::from_terms(nvars, max_degree, terms))
    }
}

impl Series<f64> {
    pub fn to_complex(&self) -> Series<Complex64> {
        self.map(|c| Complex64::new(*c, 0.0))
    }
}

impl Series<Complex64> {
    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Real part, after checking every imaginary part is at most `tol`.
    pub fn real_part_checked(&self, tol: f64) -> Result<Series<f64>> {
        let im = self.max_imag();
        if im > tol {
            return Err(Error::ImaginaryResidue(im));
        }
        Ok(self.map(|c| c.re))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<T: Coefficient> $tr for &Series<T> {
            type Output = Series<T>;
            /// # Panics
            /// On a variable-count mismatch.
            fn $method(self, rhs: &Series<T>) -> Series<T> {
                self.$checked(rhs).expect("series variable counts differ")
            }
        }
        impl<T: Coefficient> $tr for Series<T> {
            type Output = Series<T>;
            fn $method(self, rhs: Series<T>) -> Series<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl<T: Coefficient> Neg for &Series<T> {
    type Output = Series<T>;
    fn neg(self) -> Series<T> {
        self.scale(-T::one())
    }
}

/// True for the constant series `1`.
pub fn is_one<T: Coefficient>(s: &Series<T>) -> bool {
    s.len() == 1 && (s.coeff(&[]) - T::one()).magnitude() <= ZERO_THRESHOLD
}
