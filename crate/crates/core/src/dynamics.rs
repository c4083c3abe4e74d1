//! The interval exchange map and its renormalization dynamics: single
//! Rauzy induction steps, Zorich-accelerated steps (maximal same-kind runs
//! collapsed into one step with an exactly accumulated cocycle matrix),
//! suspension cones and the invertible skew-product step, and the invariant
//! line fields of a suspended orbit.
//!
//! States come in two flavours picked per run and never mixed: exact
//! rationals for identity checks and short orbits, plain `f64` for long
//! Lyapunov runs. Ties between the two candidate lengths are detected by
//! exact equality only and surface as `KeaneViolation`; length data with
//! rationally independent coordinates never ties, so induction runs
//! forever on random real input.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::matrix::{Int, IntMatrix, Rat, RatMatrix};
use crate::perm::Permutation;
use crate::rauzy::{apply_bottom, apply_top, make_arrow, Arrow, ArrowKind};
use crate::symplectic::{h_basis, omega, SymplecticError};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DynError {
    #[error("Rauzy induction undefined: the two candidate lengths are exactly equal")]
    KeaneViolation,
    #[error("Zorich run exceeded the cap of {0} Rauzy steps")]
    RunCapExceeded(u64),
    #[error("suspension vector left its cone (implementation bug)")]
    ConeViolation,
    #[error("point outside the interval")]
    OutOfDomain,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Scalar operations needed by the induction; implemented for `f64` and
/// exact rationals.
pub trait LengthScalar: Clone + PartialOrd + std::fmt::Debug {
    fn zero() -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn is_positive(&self) -> bool;
    fn mul_u64(&self, k: u64) -> Self;
    /// Largest j >= 0 with j * den < num, assuming num, den > 0; saturates.
    fn strict_div_count(num: &Self, den: &Self) -> u64;
}

impl LengthScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn mul_u64(&self, k: u64) -> Self {
        self * k as f64
    }
    fn strict_div_count(num: &Self, den: &Self) -> u64 {
        let r = num / den;
        if !r.is_finite() || r >= u64::MAX as f64 {
            return u64::MAX;
        }
        let f = r.floor();
        if f < 1.0 {
            return 0;
        }
        if f == r {
            f as u64 - 1
        } else {
            f as u64
        }
    }
}

impl LengthScalar for Rat {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn mul_u64(&self, k: u64) -> Self {
        self * BigRational::from_integer(Int::from(k))
    }
    fn strict_div_count(num: &Self, den: &Self) -> u64 {
        let q = (num / den).floor();
        let qi = q.to_integer();
        let exact = &q * den == *num;
        let j = if exact { qi - 1 } else { qi };
        if Signed::is_negative(&j) {
            0
        } else {
            j.to_u64().unwrap_or(u64::MAX)
        }
    }
}

/// Length data plus combinatorial data.
#[derive(Debug, Clone, PartialEq)]
pub struct IetState<T> {
    pub lambda: Vec<T>,
    pub perm: Permutation,
}

/// One Zorich step: a maximal run of same-kind Rauzy arrows. The winner is
/// shared by the whole run, so the accumulated cocycle matrix is determined
/// by how many times each letter lost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub kind: ArrowKind,
    pub winner: u8,
    /// Number of Rauzy steps collapsed into this Zorich step.
    pub m: u64,
    /// How many times each letter (by index) lost during the run.
    pub loser_counts: Vec<u64>,
}

impl StepRecord {
    /// The Zorich cocycle matrix `B^Z = I + sum_l count_l E_{l, winner}`.
    pub fn bz_matrix(&self) -> IntMatrix {
        let d = self.loser_counts.len();
        let mut m = IntMatrix::identity(d);
        for (l, &c) in self.loser_counts.iter().enumerate() {
            if c > 0 {
                m.set(l, self.winner as usize, Int::from(c));
            }
        }
        m
    }

    /// `ln` of the max-column-sum norm of `B^Z`, which is `1 + m`.
    pub fn log_norm(&self) -> f64 {
        (1.0 + self.m as f64).ln()
    }

    /// Apply `B^Z` to a d x k column-major float frame in place.
    pub fn apply_to_frame(&self, frame: &mut [f64], d: usize, k: usize) {
        let w = self.winner as usize;
        for col in 0..k {
            let base = col * d;
            let vw = frame[base + w];
            if vw == 0.0 {
                continue;
            }
            for (l, &c) in self.loser_counts.iter().enumerate() {
                if c > 0 {
                    frame[base + l] += c as f64 * vw;
                }
            }
        }
    }
}

impl<T: LengthScalar> IetState<T> {
    pub fn new(lambda: Vec<T>, perm: Permutation) -> Result<Self, DynError> {
        if lambda.len() != perm.d() {
            return Err(DynError::InvalidInput(
                "length vector size != alphabet size".into(),
            ));
        }
        if !lambda.iter().all(|l| l.is_positive()) {
            return Err(DynError::InvalidInput("lengths must be positive".into()));
        }
        if !perm.is_irreducible() {
            return Err(DynError::InvalidInput("permutation must be irreducible".into()));
        }
        Ok(IetState { lambda, perm })
    }

    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn total_length(&self) -> T {
        self.lambda
            .iter()
            .fold(T::zero(), |acc, l| acc.add_ref(l))
    }

    /// Translation vector: `delta = Omega(pi) . lambda`, computed directly
    /// from the two rows.
    pub fn translation_vector(&self) -> Vec<T> {
        let d = self.d();
        let mut before_top = vec![T::zero(); d];
        let mut before_bottom = vec![T::zero(); d];
        let mut acc = T::zero();
        for &l in self.perm.top_row() {
            before_top[l as usize] = acc.clone();
            acc = acc.add_ref(&self.lambda[l as usize]);
        }
        acc = T::zero();
        for &l in self.perm.bottom_row() {
            before_bottom[l as usize] = acc.clone();
            acc = acc.add_ref(&self.lambda[l as usize]);
        }
        (0..d)
            .map(|x| before_bottom[x].sub_ref(&before_top[x]))
            .collect()
    }

    /// Evaluate the exchange at a point of `[0, total)`.
    pub fn apply(&self, t: &T) -> Result<T, DynError> {
        if !t.is_positive() && *t != T::zero() {
            return Err(DynError::OutOfDomain);
        }
        let delta = self.translation_vector();
        let mut acc = T::zero();
        for &l in self.perm.top_row() {
            let next = acc.add_ref(&self.lambda[l as usize]);
            if *t < next {
                return Ok(t.add_ref(&delta[l as usize]));
            }
            acc = next;
        }
        Err(DynError::OutOfDomain)
    }

    fn compare_last(&self) -> Result<ArrowKind, DynError> {
        let x = self.perm.last_top() as usize;
        let y = self.perm.last_bottom() as usize;
        if self.lambda[x] == self.lambda[y] {
            return Err(DynError::KeaneViolation);
        }
        Ok(if self.lambda[x] > self.lambda[y] {
            ArrowKind::Top
        } else {
            ArrowKind::Bottom
        })
    }

    /// One step of Rauzy induction: the longer of the two last subintervals
    /// wins, its length shrinks by the loser's, and the combinatorics moves
    /// along the corresponding arrow.
    pub fn rauzy_step(&mut self) -> Result<Arrow, DynError> {
        let kind = self.compare_last()?;
        let arrow = make_arrow(&self.perm, kind);
        let (w, l) = (arrow.winner as usize, arrow.loser as usize);
        self.lambda[w] = self.lambda[w].sub_ref(&self.lambda[l]);
        self.perm = arrow.end.clone();
        Ok(arrow)
    }

    /// One Zorich step: apply Rauzy induction through a maximal run of
    /// same-kind arrows (the following arrow, of the other kind, is NOT
    /// consumed). Runs whose winner laps the same loser cycle many times are
    /// jumped in one exact division instead of stepped one by one.
    pub fn zorich_step(&mut self, run_cap: u64) -> Result<StepRecord, DynError> {
        let d = self.d();
        let run_start = self.perm.clone();
        let kind = self.compare_last()?;
        let mut counts = vec![0u64; d];
        let mut m: u64 = 0;
        let mut cycle_done = false;

        loop {
            // do one step of the run
            let (w, l) = match kind {
                ArrowKind::Top => (self.perm.last_top(), self.perm.last_bottom()),
                ArrowKind::Bottom => (self.perm.last_bottom(), self.perm.last_top()),
            };
            self.lambda[w as usize] = self.lambda[w as usize].sub_ref(&self.lambda[l as usize]);
            self.perm = match kind {
                ArrowKind::Top => apply_top(&self.perm),
                ArrowKind::Bottom => apply_bottom(&self.perm),
            };
            counts[l as usize] += 1;
            m += 1;
            if m > run_cap {
                return Err(DynError::RunCapExceeded(run_cap));
            }

            // jump whole loser cycles once the first one has been observed
            if !cycle_done && self.perm == run_start {
                cycle_done = true;
                let w = match kind {
                    ArrowKind::Top => self.perm.last_top(),
                    ArrowKind::Bottom => self.perm.last_bottom(),
                } as usize;
                let cycle_len: u64 = counts.iter().sum();
                let mut cycle_sum = T::zero();
                for (l, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        cycle_sum = cycle_sum.add_ref(&self.lambda[l].mul_u64(c));
                    }
                }
                let avail = self.lambda[w].sub_ref(&cycle_sum);
                let mut k = if avail.is_positive() {
                    T::strict_div_count(&avail, &cycle_sum)
                } else {
                    0
                };
                // guard the jump: the leftover must still dominate one cycle
                while k > 0
                    && !self.lambda[w]
                        .sub_ref(&cycle_sum.mul_u64(k))
                        .sub_ref(&cycle_sum)
                        .is_positive()
                {
                    k -= 1;
                }
                if k > 0 {
                    if k.checked_mul(cycle_len).is_none_or(|j| j > run_cap - m) {
                        return Err(DynError::RunCapExceeded(run_cap));
                    }
                    self.lambda[w] = self.lambda[w].sub_ref(&cycle_sum.mul_u64(k));
                    for c in counts.iter_mut() {
                        if *c > 0 {
                            *c += (*c) * k; // each cycle loser lost once per lap
                        }
                    }
                    m += k * cycle_len;
                }
            }

            // peek at the next step; stop when the kind flips
            let next = self.compare_last()?;
            if next != kind {
                break;
            }
        }

        let winner = match kind {
            ArrowKind::Top => run_start.last_top(),
            ArrowKind::Bottom => run_start.last_bottom(),
        };
        Ok(StepRecord {
            kind,
            winner,
            m,
            loser_counts: counts,
        })
    }
}

/// Membership in the suspension cone: positive proper prefix sums along the
/// top row, negative ones along the bottom row.
pub fn cone_contains<T: LengthScalar>(perm: &Permutation, tau: &[T]) -> bool {
    let d = perm.d();
    if tau.len() != d {
        return false;
    }
    let mut acc = T::zero();
    for k in 0..d - 1 {
        acc = acc.add_ref(&tau[perm.top_row()[k] as usize]);
        if !acc.is_positive() {
            return false;
        }
    }
    acc = T::zero();
    for k in 0..d - 1 {
        acc = acc.add_ref(&tau[perm.bottom_row()[k] as usize]);
        let neg = acc < T::zero();
        if !neg {
            return false;
        }
    }
    true
}

/// A canonical interior point of the suspension cone: the difference of the
/// two position functions. Irreducibility makes every prefix inequality
/// strict.
pub fn canonical_tau(perm: &Permutation) -> Vec<i64> {
    (0..perm.d())
        .map(|x| perm.bottom_pos(x as u8) as i64 - perm.top_pos(x as u8) as i64)
        .collect()
}

/// Suspended state: exact-rational length data plus a suspension vector
/// constrained to the cone of its permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuspensionState {
    pub iet: IetState<Rat>,
    pub tau: Vec<Rat>,
}

impl SuspensionState {
    pub fn new(iet: IetState<Rat>, tau: Vec<Rat>) -> Result<Self, DynError> {
        if !cone_contains(&iet.perm, &tau) {
            return Err(DynError::InvalidInput(
                "suspension vector outside the cone of its permutation".into(),
            ));
        }
        Ok(SuspensionState { iet, tau })
    }

    /// One invertible skew-product step: lengths move by Rauzy induction and
    /// the suspension vector by the inverse-transpose of the arrow matrix,
    /// which is the same winner-minus-loser update. The image cone
    /// membership is checked and reported as `ConeViolation` if broken.
    pub fn invertible_step(&mut self) -> Result<Arrow, DynError> {
        let arrow = self.iet.rauzy_step()?;
        let (w, l) = (arrow.winner as usize, arrow.loser as usize);
        self.tau[w] = &self.tau[w] - &self.tau[l];
        // Gamma_gamma: inside the image cone, with the total sum negative
        // after a top arrow and positive after a bottom arrow.
        let total: Rat = self.tau.iter().fold(<Rat as Zero>::zero(), |a, t| a + t);
        let sign_ok = match arrow.kind {
            ArrowKind::Top => Signed::is_negative(&total),
            ArrowKind::Bottom => Signed::is_positive(&total),
        };
        if !sign_ok || !cone_contains(&self.iet.perm, &self.tau) {
            return Err(DynError::ConeViolation);
        }
        Ok(arrow)
    }

    /// The invariant splitting at this state: the unstable line spanned by
    /// `Omega tau`, the stable line spanned by `Omega lambda`, and the
    /// symplectic orthogonal of their sum inside H (dimension 2g - 2).
    pub fn invariant_lines(&self) -> Result<(RatMatrix, RatMatrix, RatMatrix), DynError> {
        let perm = &self.iet.perm;
        let om = omega(perm).to_rat();
        let e_uu = om.mul(&RatMatrix::column(&self.tau));
        let e_ss = om.mul(&RatMatrix::column(&self.iet.lambda));
        let plane = e_uu.hstack(&e_ss);
        if plane.rank() != 2 {
            return Err(DynError::DegenerateInput(
                "Omega tau and Omega lambda are parallel".into(),
            ));
        }
        let space = h_basis(perm);
        let plane_h = space
            .express_in_h(&plane)
            .map_err(|e: SymplecticError| DynError::DegenerateInput(e.to_string()))?;
        let ortho_h = space.symplectic_orthogonal(&plane_h);
        debug_assert_eq!(ortho_h.cols(), 2 * space.genus - 2);
        Ok((e_uu, e_ss, space.to_ambient(&ortho_h)))
    }
}

/// Uniform sample from the open standard simplex (normalized exponentials).
pub fn sample_lambda_f64(rng: &mut impl rand::Rng, d: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..d)
            .map(|_| {
                let u: f64 = rng.random();
                -(1.0 - u).ln()
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if raw.iter().all(|&x| x > 0.0) && total > 0.0 {
            return raw.iter().map(|x| x / total).collect();
        }
    }
}

/// Positive rational lengths with `bits` of randomness per coordinate.
pub fn sample_lambda_rat(rng: &mut impl rand::Rng, d: usize, bits: u32) -> Vec<Rat> {
    let denom = Int::from(1u8) << bits;
    (0..d)
        .map(|_| {
            let mut numer = Int::from(0u8);
            let mut remaining = bits;
            while remaining > 0 {
                let take = remaining.min(32);
                let chunk: u32 = rng.random();
                numer = (numer << take) + Int::from(chunk >> (32 - take));
                remaining -= take;
            }
            Rat::new(numer + Int::from(1u8), denom.clone())
        })
        .collect()
}

/// Rejection sampling of the suspension cone from the centered unit cube.
pub fn sample_tau_f64(
    rng: &mut impl rand::Rng,
    perm: &Permutation,
    max_tries: usize,
) -> Option<Vec<f64>> {
    for _ in 0..max_tries {
        let tau: Vec<f64> = (0..perm.d()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if cone_contains(perm, &tau) {
            return Some(tau);
        }
    }
    None
}

/// Rejection sampling with small rational coordinates.
pub fn sample_tau_rat(
    rng: &mut impl rand::Rng,
    perm: &Permutation,
    max_tries: usize,
) -> Option<Vec<Rat>> {
    let denom = Int::from(1u32 << 16);
    for _ in 0..max_tries {
        let tau: Vec<Rat> = (0..perm.d())
            .map(|_| {
                let n: i64 = rng.random_range(-(1i64 << 16)..(1i64 << 16));
                Rat::new(Int::from(n), denom.clone())
            })
            .collect();
        if cone_contains(perm, &tau) {
            return Some(tau);
        }
    }
    None
}
