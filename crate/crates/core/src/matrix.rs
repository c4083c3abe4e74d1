//! Exact matrices over the integers and rationals.
//!
//! Fraction-free (Bareiss) elimination is used for ranks and determinants so
//! every result is exact no matter how fast the entries grow along long
//! Rauzy paths. Rational elimination backs kernel and solve routines.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Dense matrix with arbitrary-precision integer entries, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Int::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Int) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| Int::from(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    /// Row operation `row[target] += row[source]`, the building block of the
    /// path representation: left-multiplication by `I + E_{target,source}`.
    pub fn add_row_to_row(&mut self, source: usize, target: usize) {
        assert_ne!(source, target);
        for j in 0..self.cols {
            let s = self.get(source, j).clone();
            let t = self.get(target, j).clone();
            self.set(target, j, t + s);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a * b);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j) - other.get(i, j)
        })
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert_eq!(self.rows, self.cols);
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|e| !e.is_negative())
    }

    /// Exact determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a = self.clone();
        let mut sign = 1i32;
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&p| !a.get(p, k).is_zero()) {
                    Some(p) => {
                        a.swap_rows(k, p);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a.get(k, k) * a.get(i, j) - a.get(i, k) * a.get(k, j);
                    a.set(i, j, num / &prev);
                }
                a.set(i, k, Int::zero());
            }
            prev = a.get(k, k).clone();
        }
        let d = a.get(n - 1, n - 1).clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Exact rank by Bareiss elimination with leftmost-column pivoting.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let (rows, cols) = (a.rows, a.cols);
        let mut prev = Int::one();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let pivot = match (r..rows).find(|&p| !a.get(p, c).is_zero()) {
                Some(p) => p,
                None => continue,
            };
            a.swap_rows(r, pivot);
            for i in r + 1..rows {
                for j in c + 1..cols {
                    let num = a.get(r, c) * a.get(i, j) - a.get(i, c) * a.get(r, j);
                    a.set(i, j, num / &prev);
                }
                a.set(i, c, Int::zero());
            }
            prev = a.get(r, c).clone();
            r += 1;
        }
        r
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// k-th compound matrix: entries are the k-minors, index sets in
    /// lexicographic order. Its largest singular value is the product
    /// `sigma_1 ... sigma_k` of the original matrix.
    pub fn compound(&self, k: usize) -> Self {
        assert_eq!(self.rows, self.cols);
        let subsets = k_subsets(self.rows, k);
        let m = subsets.len();
        Self::from_fn(m, m, |i, j| self.minor(&subsets[i], &subsets[j]))
    }

    fn minor(&self, rows: &[usize], cols: &[usize]) -> Int {
        let k = rows.len();
        IntMatrix::from_fn(k, k, |i, j| self.get(rows[i], cols[j]).clone()).det()
    }

    /// Float image `M / 2^shift` together with the shift, chosen so the
    /// largest entry stays comfortably inside f64 range.
    pub fn to_scaled_f64(&self) -> (DMatrix<f64>, i64) {
        let max_bits = self
            .data
            .iter()
            .map(|e| e.bits())
            .max()
            .unwrap_or(0);
        let shift = max_bits.saturating_sub(500) as i64;
        let m = DMatrix::from_fn(self.rows, self.cols, |i, j| {
            let e = self.get(i, j);
            if shift == 0 {
                e.to_f64().unwrap_or(0.0)
            } else {
                (e >> (shift as u64)).to_f64().unwrap_or(0.0)
            }
        });
        (m, shift)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("entry exceeds f64 range")
        })
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| {
            Rat::from_integer(self.get(i, j).clone())
        })
    }

    /// Natural logarithm of the largest singular value, robust to entries far
    /// beyond f64 range (top bits are extracted with a recorded exponent).
    pub fn log_sigma_1(&self) -> f64 {
        let (m, shift) = self.to_scaled_f64();
        let s = m.singular_values()[0];
        s.ln() + shift as f64 * std::f64::consts::LN_2
    }

    /// Logs of all singular values via compound matrices:
    /// `ln sigma_k = ln sigma_1(compound_k) - ln sigma_1(compound_{k-1})`.
    /// Exact-integer compounds keep this meaningful even when the singular
    /// values span thousands of orders of magnitude.
    pub fn log_singular_values(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut prod_logs = Vec::with_capacity(n + 1);
        prod_logs.push(0.0);
        for k in 1..=n {
            prod_logs.push(self.compound(k).log_sigma_1());
        }
        (1..=n).map(|k| prod_logs[k] - prod_logs[k - 1]).collect()
    }

    /// Integer coefficients of det(xI - M), degree n first coefficient 1,
    /// by the Faddeev-LeVerrier recursion (divisions are exact).
    pub fn char_poly(&self) -> Vec<Int> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![Int::zero(); n + 1];
        coeffs[n] = Int::one();
        let mut m = IntMatrix::identity(n);
        for k in 1..=n {
            m = self.mul(&m);
            let c = -m.trace() / Int::from(k as i64);
            for i in 0..n {
                let d = m.get(i, i).clone();
                m.set(i, i, d + &c);
            }
            coeffs[n - k] = c;
        }
        coeffs
    }

    pub fn trace(&self) -> Int {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .sum()
    }

    pub fn entries_as_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }
}

/// Natural log of a positive big integer, robust far beyond f64 range.
pub fn ln_positive_int(v: &Int) -> f64 {
    debug_assert!(v.is_positive());
    let bits = v.bits();
    let shift = bits.saturating_sub(500);
    let reduced = (v >> shift).to_f64().expect("reduced value fits f64");
    reduced.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Multiplicity of 1 as a root of an integer polynomial (coefficients low to
/// high), by repeated synthetic division by (x - 1).
pub fn root_one_multiplicity(poly: &[Int]) -> usize {
    let mut p: Vec<Int> = poly.to_vec();
    let mut mult = 0;
    loop {
        let value: Int = p.iter().sum();
        if !value.is_zero() || p.len() <= 1 {
            return mult;
        }
        // p(x) = (x-1) q(x); synthetic division from the top coefficient.
        let n = p.len() - 1;
        let mut q = vec![Int::zero(); n];
        let mut carry = Int::zero();
        for i in (0..n).rev() {
            carry = &p[i + 1] + &carry;
            q[i] = carry.clone();
        }
        p = q;
        mult += 1;
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Dense matrix with exact rational entries, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(r, c, |i, j| Rat::from_integer(Int::from(rows[i][j])))
    }

    pub fn column(v: &[Rat]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col_vec(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur + a * b);
                }
            }
        }
        out
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    /// Rank via row scaling to integers followed by Bareiss elimination.
    pub fn rank(&self) -> usize {
        self.to_int_row_scaled().rank()
    }

    fn to_int_row_scaled(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let mut lcm = Int::one();
            for j in 0..self.cols {
                let d = self.get(i, j).denom();
                lcm = num_integer::lcm(lcm, d.clone());
            }
            for j in 0..self.cols {
                let e = self.get(i, j);
                out.set(i, j, e.numer() * (&lcm / e.denom()));
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let pivot = match (r..self.rows).find(|&p| !self.get(p, c).is_zero()) {
                Some(p) => p,
                None => continue,
            };
            if pivot != r {
                for j in 0..self.cols {
                    let a = self.get(r, j).clone();
                    let b = self.get(pivot, j).clone();
                    self.set(r, j, b);
                    self.set(pivot, j, a);
                }
            }
            let inv = {
                let p = self.get(r, c).clone();
                p.recip()
            };
            for j in c..self.cols {
                let v = self.get(r, j).clone() * &inv;
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j).clone() - &f * self.get(r, j);
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Exact kernel basis: columns span { v : M v = 0 }.
    pub fn kernel(&self) -> RatMatrix {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = RatMatrix::zeros(self.cols, free.len());
        for (idx, &f) in free.iter().enumerate() {
            out.set(f, idx, Rat::one());
            for (row, &p) in pivots.iter().enumerate() {
                out.set(p, idx, -m.get(row, f).clone());
            }
        }
        out
    }

    /// Exact solution of `self * x = b` (free variables set to zero).
    /// Returns None when the system is inconsistent.
    pub fn solve(&self, b: &RatMatrix) -> Option<RatMatrix> {
        assert_eq!(self.rows, b.rows);
        let mut aug = self.hstack(b);
        let pivots = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = RatMatrix::zeros(self.cols, b.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(p, j, aug.get(row, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("rational exceeds f64 range")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows)
    }

    #[test]
    fn det_and_rank_basics() {
        assert_eq!(IntMatrix::identity(4).det(), Int::from(1));
        assert_eq!(IntMatrix::identity(4).rank(), 4);
        let a = m(&[vec![2, 1], vec![1, 1]]);
        assert_eq!(a.det(), Int::from(1));
        let sing = m(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(sing.det(), Int::from(0));
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn det_with_row_swaps() {
        let a = m(&[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]]);
        // Expansion by hand: det = 0*(0*8-3*(-3)) - 1*(8-12) + 2*(-3-0) = 4 - 6 = -2
        assert_eq!(a.det(), Int::from(-2));
    }

    #[test]
    fn rank_nullity_on_random_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let r = rng.random_range(1..5usize);
            let c = rng.random_range(1..6usize);
            let a = RatMatrix::from_fn(r, c, |_, _| {
                Rat::from_integer(Int::from(rng.random_range(-3..4i64)))
            });
            let rank = a.rank();
            let ker = a.kernel();
            assert_eq!(rank + ker.cols(), c);
            if ker.cols() > 0 {
                assert!(a.mul(&ker).is_zero());
            }
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = RatMatrix::from_i64_rows(&[vec![1, 2], vec![3, 4]]);
        let b = RatMatrix::from_i64_rows(&[vec![5], vec![11]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        let sing = RatMatrix::from_i64_rows(&[vec![1, 1], vec![1, 1]]);
        let bad = RatMatrix::from_i64_rows(&[vec![0], vec![1]]);
        assert!(sing.solve(&bad).is_none());
    }

    #[test]
    fn char_poly_and_unit_root_multiplicity() {
        // [[2,1],[1,1]]: x^2 - 3x + 1
        let a = m(&[vec![2, 1], vec![1, 1]]);
        let p = a.char_poly();
        assert_eq!(p, vec![Int::from(1), Int::from(-3), Int::from(1)]);
        // Parabolic [[1,1],[0,1]]: (x-1)^2
        let u = m(&[vec![1, 1], vec![0, 1]]);
        assert_eq!(root_one_multiplicity(&u.char_poly()), 2);
        assert_eq!(root_one_multiplicity(&a.char_poly()), 0);
    }

    #[test]
    fn compound_sigma_products() {
        let a = m(&[vec![3, 0], vec![0, 2]]);
        // sigma_1 = 3, sigma_2 = 2; compound_2 = det = 6.
        let logs = a.log_singular_values();
        assert!((logs[0] - 3f64.ln()).abs() < 1e-9);
        assert!((logs[1] - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn scaled_f64_handles_huge_entries() {
        let a = m(&[vec![2, 1], vec![1, 1]]);
        let big = a.pow(5000); // entries ~ phi^10000, far beyond f64
        let log_s1 = big.log_sigma_1();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // log sigma_1(A^n) = n * 2 ln phi for this symmetric matrix
        assert!((log_s1 - 10000.0 * phi.ln()).abs() < 1e-6 * log_s1.abs());
    }
}
