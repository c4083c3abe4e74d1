//! Randomized witness searches in Rauzy monoids: loops whose matrices
//! exhibit pinching (large singular-value gaps), strong pinching on the
//! symplectic block, twisting of a subspace off a family of obstacles, and
//! the parabolic elements built from the loop of d-1 top arrows.
//!
//! Every search is a semi-decision procedure: `NotFound` after the budget is
//! a soft outcome, never a refutation. Searches are deterministic given
//! (seed, budget, class); certificates re-verify from the stored path alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{root_one_multiplicity, Int, IntMatrix, RatMatrix};
use crate::perm::Permutation;
use crate::rauzy::{make_arrow, theta_path, ArrowKind, Path, RauzyClass};
use crate::symplectic::h_basis;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("no witness found within the budget (soft outcome)")]
    NotFound,
    #[error("class is not minimal (needs alphabet size = 2 genus)")]
    NotMinimalClass,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Pinching,
    StrongPinching,
    Twisting,
    Parabolic,
}

/// A found witness: the loop (start vertex plus arrow kinds, enough to
/// replay it), its matrix, and the measured certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessResult {
    pub kind: WitnessKind,
    pub class: String,
    pub base: String,
    pub path_kinds: String,
    pub matrix: Vec<Vec<String>>,
    pub certificate: Certificate,
    pub seed: u64,
    pub budget: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Certificate {
    /// log singular values of the full matrix, gaps all above ln(C).
    Pinching { log_sigma: Vec<f64>, c: f64 },
    /// log singular values of the restricted (symplectic block) matrix.
    StrongPinching { log_sigma_restricted: Vec<f64>, c: f64 },
    /// exact transversality ranks against each obstacle; the subspace and
    /// obstacle bases are stored as exact rationals so the certificate
    /// re-verifies from the path alone.
    Twisting {
        f: Vec<Vec<String>>,
        obstacles: Vec<Vec<Vec<String>>>,
        ranks: Vec<usize>,
        expected: Vec<usize>,
    },
    /// rank of B - I, multiplicity of eigenvalue 1, positive eigenvalue
    /// logs, and the measured sigma_g(B^n) ~ n log-log slope.
    Parabolic {
        rank_b_minus_i: usize,
        algebraic_multiplicity_of_one: usize,
        positive_eigen_logs: Vec<f64>,
        sigma_g_slope: f64,
    },
}

impl WitnessResult {
    /// Replay the stored path and return its matrix.
    pub fn replay_matrix(&self) -> Result<IntMatrix, SearchError> {
        let start = Permutation::parse(&self.base)
            .map_err(|e| SearchError::InvalidInput(e.to_string()))?;
        let kinds: Option<Vec<ArrowKind>> =
            self.path_kinds.chars().map(ArrowKind::from_letter).collect();
        let kinds = kinds.ok_or_else(|| SearchError::InvalidInput("bad kind letter".into()))?;
        let path = Path::from_kinds(start, kinds);
        if !path.is_loop() {
            return Err(SearchError::InvalidInput("stored path is not a loop".into()));
        }
        Ok(theta_path(&path))
    }
}

fn matrix_strings(m: &IntMatrix) -> Vec<Vec<String>> {
    m.entries_as_strings()
}

/// Walk lengths grow geometrically with the trial index.
fn walk_length(trial: u64) -> usize {
    let mut len = 8.0_f64;
    for _ in 0..trial {
        len *= 1.25;
        if len > 4000.0 {
            return 4000;
        }
    }
    len.ceil() as usize
}

/// Search a loop at `base` whose matrix has all consecutive singular value
/// ratios above `c`.
pub fn find_pinching_witness(
    class: &RauzyClass,
    base: usize,
    c: f64,
    budget: u64,
    seed: u64,
) -> Result<WitnessResult, SearchError> {
    if c <= 1.0 {
        return Err(SearchError::InvalidInput("need C > 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let route = class.return_kinds(base, |_, _| true);
    let ln_c = c.ln();
    for trial in 0..budget {
        let path = class
            .random_loop(&mut rng, base, walk_length(trial), &route)
            .ok_or(SearchError::NotFound)?;
        if path.is_empty() {
            continue;
        }
        let th = theta_path(&path);
        let logs = th.log_singular_values();
        let ok = logs.windows(2).all(|w| w[0] - w[1] > ln_c);
        if ok {
            return Ok(WitnessResult {
                kind: WitnessKind::Pinching,
                class: class.representative().to_text(),
                base: class.vertex(base).to_text(),
                path_kinds: path.kinds_string(),
                matrix: matrix_strings(&th),
                certificate: Certificate::Pinching { log_sigma: logs, c },
                seed,
                budget,
                trials: trial + 1,
            });
        }
    }
    Err(SearchError::NotFound)
}

/// Matrix of the restricted action on H in the pivot basis, cleared to
/// integers: returns (M, q) with `Theta . basis = basis . M / q` exactly.
pub fn restricted_matrix(p: &Permutation, th: &IntMatrix) -> (IntMatrix, Int) {
    let space = h_basis(p);
    let image = th.mul(&space.basis).to_rat();
    let coords = space
        .basis
        .to_rat()
        .solve(&image)
        .expect("Theta preserves H along a loop");
    let mut q = Int::from(1);
    for i in 0..coords.rows() {
        for j in 0..coords.cols() {
            q = num_integer::lcm(q, coords.get(i, j).denom().clone());
        }
    }
    let m = IntMatrix::from_fn(coords.rows(), coords.cols(), |i, j| {
        let e = coords.get(i, j);
        e.numer() * (&q / e.denom())
    });
    (m, q)
}

/// Strong pinching on the symplectic block: `ln sigma_g > C` and
/// `ln sigma_i > C ln sigma_{i+1}` for i < g, measured on the restricted
/// matrix in the H pivot basis.
pub fn find_strong_pinching_witness(
    class: &RauzyClass,
    base: usize,
    c: f64,
    budget: u64,
    seed: u64,
) -> Result<WitnessResult, SearchError> {
    if c <= 1.0 {
        return Err(SearchError::InvalidInput("need C > 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let route = class.return_kinds(base, |_, _| true);
    let g = crate::symplectic::genus(class.vertex(base));
    for trial in 0..budget {
        let path = class
            .random_loop(&mut rng, base, walk_length(trial), &route)
            .ok_or(SearchError::NotFound)?;
        if path.is_empty() {
            continue;
        }
        let th = theta_path(&path);
        let (restricted, q) = restricted_matrix(class.vertex(base), &th);
        let shift = crate::matrix::ln_positive_int(&q);
        let logs: Vec<f64> = restricted
            .log_singular_values()
            .into_iter()
            .map(|l| l - shift)
            .collect();
        let ok = logs[g - 1] > c
            && (0..g.saturating_sub(1)).all(|i| logs[i] > c * logs[i + 1].max(0.0));
        if ok {
            return Ok(WitnessResult {
                kind: WitnessKind::StrongPinching,
                class: class.representative().to_text(),
                base: class.vertex(base).to_text(),
                path_kinds: path.kinds_string(),
                matrix: matrix_strings(&th),
                certificate: Certificate::StrongPinching {
                    log_sigma_restricted: logs,
                    c,
                },
                seed,
                budget,
                trials: trial + 1,
            });
        }
    }
    Err(SearchError::NotFound)
}

/// Search a loop sending F off every obstacle: `(Theta . F) + F_i` must have
/// full rank `min(d, dim F + dim F_i)` for every i, checked exactly. The
/// empty loop counts, so an already-transverse family needs no walk.
pub fn find_twisting_witness(
    class: &RauzyClass,
    base: usize,
    f: &RatMatrix,
    obstacles: &[RatMatrix],
    budget: u64,
    seed: u64,
) -> Result<WitnessResult, SearchError> {
    let d = class.d();
    if f.rows() != d {
        return Err(SearchError::DimensionMismatch("F must live in R^A".into()));
    }
    let dim_f = f.rank();
    if dim_f != f.cols() {
        return Err(SearchError::DimensionMismatch("F columns must be independent".into()));
    }
    for (i, ob) in obstacles.iter().enumerate() {
        if ob.rows() != d || ob.rank() != ob.cols() {
            return Err(SearchError::DimensionMismatch(format!(
                "obstacle {i} is not an independent family in R^A"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let route = class.return_kinds(base, |_, _| true);
    let expected: Vec<usize> = obstacles.iter().map(|ob| d.min(dim_f + ob.cols())).collect();
    for trial in 0..budget {
        // trial 0 is the empty path: identity may already qualify
        let path = if trial == 0 {
            Path::empty(class.vertex(base).clone())
        } else {
            class
                .random_loop(&mut rng, base, walk_length(trial - 1), &route)
                .ok_or(SearchError::NotFound)?
        };
        let th = theta_path(&path);
        let image = th.to_rat().mul(f);
        let ranks: Vec<usize> = obstacles
            .iter()
            .map(|ob| image.hstack(ob).rank())
            .collect();
        if ranks == expected {
            return Ok(WitnessResult {
                kind: WitnessKind::Twisting,
                class: class.representative().to_text(),
                base: class.vertex(base).to_text(),
                path_kinds: path.kinds_string(),
                matrix: matrix_strings(&th),
                certificate: Certificate::Twisting {
                    f: rat_matrix_strings(f),
                    obstacles: obstacles.iter().map(rat_matrix_strings).collect(),
                    ranks,
                    expected,
                },
                seed,
                budget,
                trials: trial + 1,
            });
        }
    }
    Err(SearchError::NotFound)
}

fn rat_matrix_strings(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
        .collect()
}

fn rat_matrix_from_strings(rows: &[Vec<String>]) -> Result<RatMatrix, SearchError> {
    use std::str::FromStr;
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    let mut m = RatMatrix::zeros(r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            let v = crate::matrix::Rat::from_str(s)
                .map_err(|e| SearchError::InvalidInput(format!("bad rational '{s}': {e}")))?;
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// The loop of d-1 top arrows at a permutation of the shape produced by a
/// top arrow out of a standard permutation: last top letter first in the
/// bottom, first top letter second in the bottom. Its matrix is the
/// identity plus a column of ones at the shared winner.
pub fn gamma0_loop(p: &Permutation) -> Result<Path, SearchError> {
    let d = p.d();
    let e = p.last_top();
    let a = p.first_top();
    if p.bottom_row()[0] != e || p.bottom_row()[1] != a {
        return Err(SearchError::InvalidInput(
            "vertex is not the top-arrow image of a standard permutation".into(),
        ));
    }
    let path = Path::from_kinds(p.clone(), std::iter::repeat_n(ArrowKind::Top, d - 1));
    if !path.is_loop() {
        return Err(SearchError::InvalidInput(
            "top arrows fail to close after d-1 steps".into(),
        ));
    }
    let th = theta_path(&path);
    for x in 0..d {
        for y in 0..d {
            let expect = i64::from(y == x || x == e as usize);
            if *th.get(y, x) != Int::from(expect) {
                return Err(SearchError::InvalidInput(
                    "gamma_0 matrix does not match the ones-column pattern".into(),
                ));
            }
        }
    }
    Ok(path)
}

/// Log-log slope of ln sigma_g(B^n) against ln n over dyadic n, by least
/// squares; a parabolic block makes this slope approach 1.
pub fn sigma_g_growth_slope(b: &IntMatrix, g: usize, exponents: std::ops::RangeInclusive<u32>) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in exponents {
        let n = 1u64 << e;
        let bn = b.pow(n);
        let lnp_g = bn.compound(g).log_sigma_1();
        let lnp_gm1 = if g > 1 {
            bn.compound(g - 1).log_sigma_1()
        } else {
            0.0
        };
        xs.push((n as f64).ln());
        ys.push(lnp_g - lnp_gm1);
    }
    let n = xs.len() as f64;
    let mx: f64 = xs.iter().sum::<f64>() / n;
    let my: f64 = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Search a parabolic element of a minimal class: locate a good standard
/// permutation, move to its top-arrow image pi, build the loop gamma_0 of
/// d-1 top arrows there, and look for stabilizer loops gamma (the first
/// letters never win, the first top letter never loses) such that
/// B = Theta(gamma gamma_0) has eigenvalue 1 with geometric multiplicity
/// one and hyperbolic behaviour elsewhere.
pub fn find_parabolic_witness(
    class: &RauzyClass,
    seed: u64,
    budget: u64,
) -> Result<WitnessResult, SearchError> {
    let d = class.d();
    let g = crate::symplectic::genus(class.representative());
    if d != 2 * g {
        return Err(SearchError::NotMinimalClass);
    }
    if g < 2 {
        return Err(SearchError::InvalidInput(
            "parabolic search needs genus at least 2".into(),
        ));
    }
    // first good standard permutation in BFS order
    let good = class
        .vertices()
        .iter()
        .find(|v| v.is_standard() && v.is_good() == Ok(true))
        .ok_or_else(|| SearchError::InvalidInput("class has no good permutation".into()))?;
    let pi = make_arrow(good, ArrowKind::Top).end;
    let base = class
        .id_of(&pi)
        .expect("top image stays in the class");
    let gamma0 = gamma0_loop(&pi)?;
    let th0 = theta_path(&gamma0);

    let a = pi.first_top();
    let e = pi.first_bottom();
    // stabilizer-compatible arrows: neither first letter wins, and the
    // first top letter never loses (it must stay untouched by Theta)
    let allowed = |class: &RauzyClass, v: usize, kind: ArrowKind| -> bool {
        let arrow = class.arrow(v, kind);
        arrow.winner != a && arrow.winner != e && arrow.loser != a
    };
    let route = class.return_kinds(base, |v, k| allowed(class, v, k));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for trial in 0..budget {
        // restricted random walk staying inside the allowed subdiagram
        let len = walk_length(trial / 4);
        let mut kinds: Vec<ArrowKind> = Vec::with_capacity(len + 8);
        let mut v = base;
        let mut stuck = false;
        for _ in 0..len {
            use rand::Rng;
            let prefer_top: bool = rng.random_bool(0.5);
            let order = if prefer_top {
                [ArrowKind::Top, ArrowKind::Bottom]
            } else {
                [ArrowKind::Bottom, ArrowKind::Top]
            };
            let mut moved = false;
            for k in order {
                if allowed(class, v, k) && route[class.next(v, k)].is_some()
                    || (allowed(class, v, k) && class.next(v, k) == base)
                {
                    kinds.push(k);
                    v = class.next(v, k);
                    moved = true;
                    break;
                }
            }
            if !moved {
                stuck = true;
                break;
            }
        }
        if stuck {
            continue;
        }
        let closing = match class.close_to_base(v, base, &route) {
            Some(c) => c,
            None => continue,
        };
        kinds.extend(closing);
        if kinds.is_empty() {
            continue;
        }
        let gamma = Path::from_kinds(pi.clone(), kinds);
        let th_gamma = theta_path(&gamma);
        // exact stabilizer filter before the expensive checks
        let mut structural = true;
        for y in 0..d {
            let col_a = if y == a as usize { 1 } else { 0 };
            let col_e = if y == e as usize { 1 } else { 0 };
            let row_a = if y == a as usize { 1 } else { 0 };
            if *th_gamma.get(y, a as usize) != Int::from(col_a)
                || *th_gamma.get(y, e as usize) != Int::from(col_e)
                || *th_gamma.get(a as usize, y) != Int::from(row_a)
            {
                structural = false;
                break;
            }
        }
        if !structural {
            continue;
        }
        let full_path = gamma.concat(&gamma0).expect("both loops at pi");
        let b = th0.mul(&th_gamma);
        debug_assert_eq!(b, theta_path(&full_path));
        // eigenvalue 1 with geometric multiplicity exactly one
        let rank = b.sub(&IntMatrix::identity(d)).rank();
        if rank != d - 1 {
            continue;
        }
        let charpoly = b.char_poly();
        let mult = root_one_multiplicity(&charpoly);
        if !mult.is_multiple_of(2) || mult < 2 {
            continue;
        }
        let eigenlogs = crate::lyapunov::lyapunov_exponents_of_matrix(&b);
        let positive: Vec<f64> = eigenlogs.iter().copied().filter(|&l| l > 1e-9).collect();
        if positive.len() != g - 1 {
            continue;
        }
        let slope = sigma_g_growth_slope(&b, g, 4..=10);
        if !(0.8..=1.2).contains(&slope) {
            continue;
        }
        return Ok(WitnessResult {
            kind: WitnessKind::Parabolic,
            class: class.representative().to_text(),
            base: pi.to_text(),
            path_kinds: full_path.kinds_string(),
            matrix: matrix_strings(&b),
            certificate: Certificate::Parabolic {
                rank_b_minus_i: rank,
                algebraic_multiplicity_of_one: mult,
                positive_eigen_logs: positive,
                sigma_g_slope: slope,
            },
            seed,
            budget,
            trials: trial + 1,
        });
    }
    Err(SearchError::NotFound)
}

/// Recompute a witness's certificate from its stored path and compare with
/// the stored one (exact fields exactly, float fields to 1e-9 relative).
pub fn verify_witness(w: &WitnessResult) -> Result<bool, SearchError> {
    let th = w.replay_matrix()?;
    if matrix_strings(&th) != w.matrix {
        return Ok(false);
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    match &w.certificate {
        Certificate::Pinching { log_sigma, c } => {
            let logs = th.log_singular_values();
            Ok(logs.len() == log_sigma.len()
                && logs.iter().zip(log_sigma).all(|(x, y)| close(*x, *y))
                && logs.windows(2).all(|p| p[0] - p[1] > c.ln()))
        }
        Certificate::StrongPinching {
            log_sigma_restricted,
            c,
        } => {
            let base = Permutation::parse(&w.base)
                .map_err(|e| SearchError::InvalidInput(e.to_string()))?;
            let (restricted, q) = restricted_matrix(&base, &th);
            let shift = crate::matrix::ln_positive_int(&q);
            let logs: Vec<f64> = restricted
                .log_singular_values()
                .into_iter()
                .map(|l| l - shift)
                .collect();
            let g = logs.len() / 2;
            Ok(logs.iter().zip(log_sigma_restricted).all(|(x, y)| close(*x, *y))
                && logs[g - 1] > *c)
        }
        Certificate::Twisting {
            f,
            obstacles,
            ranks,
            expected,
        } => {
            let f = rat_matrix_from_strings(f)?;
            let image = th.to_rat().mul(&f);
            let mut recomputed = Vec::with_capacity(obstacles.len());
            for ob in obstacles {
                let ob = rat_matrix_from_strings(ob)?;
                recomputed.push(image.hstack(&ob).rank());
            }
            Ok(&recomputed == ranks && recomputed == *expected)
        }
        Certificate::Parabolic {
            rank_b_minus_i,
            algebraic_multiplicity_of_one,
            positive_eigen_logs,
            sigma_g_slope,
        } => {
            let d = th.rows();
            let rank = th.sub(&IntMatrix::identity(d)).rank();
            let mult = root_one_multiplicity(&th.char_poly());
            let eigenlogs = crate::lyapunov::lyapunov_exponents_of_matrix(&th);
            let positive: Vec<f64> = eigenlogs.iter().copied().filter(|&l| l > 1e-9).collect();
            let g = d / 2;
            let slope = sigma_g_growth_slope(&th, g, 4..=10);
            Ok(rank == *rank_b_minus_i
                && mult == *algebraic_multiplicity_of_one
                && positive.len() == positive_eigen_logs.len()
                && positive
                    .iter()
                    .zip(positive_eigen_logs)
                    .all(|(x, y)| close(*x, *y))
                && close(slope, *sigma_g_slope))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rauzy::enumerate_class;

    fn p(text: &str) -> Permutation {
        Permutation::parse(text).unwrap()
    }

    #[test]
    fn pinching_d2() {
        let class = enumerate_class(&p("ab/ba"), 100).unwrap();
        let w = find_pinching_witness(&class, 0, 10.0, 200, 1).unwrap();
        assert!(verify_witness(&w).unwrap());
        if let Certificate::Pinching { log_sigma, c } = &w.certificate {
            assert!(log_sigma[0] - log_sigma[1] > c.ln());
        } else {
            panic!("wrong certificate kind");
        }
    }

    #[test]
    fn pinching_d4_large_gap() {
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let w = find_pinching_witness(&class, 0, 1000.0, 400, 2).unwrap();
        assert!(verify_witness(&w).unwrap());
        // cross-check against the float SVD route: the attainable accuracy
        // for sigma_i degrades with the condition number sigma_1 / sigma_i
        let th = w.replay_matrix().unwrap();
        let svd_logs: Vec<f64> = {
            let m = th.to_f64();
            let mut s: Vec<f64> = m.singular_values().iter().map(|v| v.ln()).collect();
            s.sort_by(|x, y| y.partial_cmp(x).unwrap());
            s
        };
        let exact_logs = th.log_singular_values();
        for (i, (a, b)) in svd_logs.iter().zip(&exact_logs).enumerate() {
            let cond = (exact_logs[0] - exact_logs[i]).exp();
            if cond > 1e12 {
                continue; // below float SVD resolution
            }
            let tol = 1e-9 * (1.0 + a.abs()) + 1e-14 * cond;
            assert!((a - b).abs() < tol, "sigma_{i}: {a} vs {b}");
        }
    }

    #[test]
    fn strong_pinching_g1_reduces_to_norm_growth() {
        let class = enumerate_class(&p("ab/ba"), 100).unwrap();
        let w = find_strong_pinching_witness(&class, 0, 3.0, 200, 3).unwrap();
        if let Certificate::StrongPinching {
            log_sigma_restricted,
            ..
        } = &w.certificate
        {
            assert!(log_sigma_restricted[0] > 3.0);
        } else {
            panic!("wrong certificate kind");
        }
    }

    #[test]
    fn strong_pinching_g2() {
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let w = find_strong_pinching_witness(&class, 0, 8.0, 600, 4).unwrap();
        assert!(verify_witness(&w).unwrap());
        if let Certificate::StrongPinching {
            log_sigma_restricted,
            c,
        } = &w.certificate
        {
            assert_eq!(log_sigma_restricted.len(), 4);
            assert!(log_sigma_restricted[1] > *c);
            assert!(log_sigma_restricted[0] > c * log_sigma_restricted[1]);
        }
    }

    #[test]
    fn twisting_identity_qualifies() {
        let class = enumerate_class(&p("ab/ba"), 100).unwrap();
        let f = RatMatrix::from_i64_rows(&[vec![1], vec![0]]);
        let ob = RatMatrix::from_i64_rows(&[vec![0], vec![1]]);
        let w = find_twisting_witness(&class, 0, &f, &[ob], 50, 5).unwrap();
        assert_eq!(w.trials, 1);
        assert!(w.path_kinds.is_empty());
    }

    #[test]
    fn twisting_moves_line_off_itself() {
        let class = enumerate_class(&p("ab/ba"), 100).unwrap();
        let f = RatMatrix::from_i64_rows(&[vec![1], vec![0]]);
        let same = f.clone();
        let w = find_twisting_witness(&class, 0, &f, &[same], 100, 6).unwrap();
        assert!(w.trials > 1);
        let th = w.replay_matrix().unwrap().to_rat();
        let image = th.mul(&f);
        assert_eq!(image.hstack(&f).rank(), 2);
    }

    #[test]
    fn gamma0_loop_d4() {
        // abcd/dcba is standard and good; its top image hosts gamma_0
        let good = p("abcd/dcba");
        let pi = make_arrow(&good, ArrowKind::Top).end;
        let path = gamma0_loop(&pi).unwrap();
        assert_eq!(path.len(), 3);
        assert!(path.is_loop());
        let th = theta_path(&path);
        let e = pi.last_top() as usize;
        for y in 0..4 {
            assert_eq!(*th.get(y, e), Int::from(1));
        }
    }

    #[test]
    fn gamma0_loop_d2_analogue() {
        let pi = p("ab/ba");
        let path = gamma0_loop(&pi).unwrap();
        assert_eq!(path.len(), 1);
        let th = theta_path(&path);
        // parabolic single-arrow matrix: column of ones at the winner
        assert_eq!(*th.get(0, 1), Int::from(1));
        assert_eq!(*th.get(1, 1), Int::from(1));
    }

    #[test]
    fn parabolic_witness_d4() {
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let w = find_parabolic_witness(&class, 11, 4000).unwrap();
        if let Certificate::Parabolic {
            rank_b_minus_i,
            algebraic_multiplicity_of_one,
            positive_eigen_logs,
            sigma_g_slope,
        } = &w.certificate
        {
            assert_eq!(*rank_b_minus_i, 3);
            assert!(algebraic_multiplicity_of_one % 2 == 0);
            assert_eq!(positive_eigen_logs.len(), 1);
            assert!((0.8..=1.2).contains(sigma_g_slope));
        } else {
            panic!("wrong certificate kind");
        }
        assert!(verify_witness(&w).unwrap());
    }

    #[test]
    fn parabolic_rejects_non_minimal() {
        let class = enumerate_class(&p("abcd/dabc"), 100).unwrap(); // genus 1
        assert!(matches!(
            find_parabolic_witness(&class, 1, 10),
            Err(SearchError::NotMinimalClass)
        ));
    }

    #[test]
    fn expanding_spaces_are_nearly_isotropic() {
        // image of a generic 2-plane under a strongly pinched matrix: the
        // plane's symplectic form norm is below 1e-6 once sigma_g^-2 is.
        // Checked entirely in exact arithmetic: w(u,v)^2 <= eps^2 * area^2.
        use crate::matrix::Rat;
        use crate::symplectic::omega;
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let w = find_pinching_witness(&class, 0, 1e5, 3000, 2).unwrap();
        if let Certificate::Pinching { log_sigma, .. } = &w.certificate {
            // the bound needs sigma_2 large and every gap at least 1e6
            assert!(log_sigma[1] > 7.0, "sigma_g too small: {log_sigma:?}");
            for pair in log_sigma.windows(2) {
                assert!(pair[0] - pair[1] > 1e6f64.ln());
            }
        }
        let th = w.replay_matrix().unwrap();
        let f0 = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![0, 1]]);
        let image = th.mul(&f0).to_rat();
        let u = RatMatrix::from_fn(4, 1, |i, _| image.get(i, 0).clone());
        let v = RatMatrix::from_fn(4, 1, |i, _| image.get(i, 1).clone());
        let dot = |a: &RatMatrix, b: &RatMatrix| a.transpose().mul(b).get(0, 0).clone();
        let area2 = dot(&u, &u) * dot(&v, &v) - dot(&u, &v) * dot(&u, &v);
        assert!(num_traits::Signed::is_positive(&area2));
        // w(u, v) = -u^T Omega^{-1} v on H = R^4 for this minimal class
        let om = omega(class.vertex(0)).to_rat();
        let om_inv_v = om.solve(&v).expect("Omega invertible on a minimal class");
        let wval = dot(&u, &om_inv_v);
        let eps = Rat::new(crate::matrix::Int::from(1), crate::matrix::Int::from(1_000_000u64));
        assert!(
            wval.clone() * wval <= eps.clone() * eps * area2,
            "plane's form norm exceeds 1e-6"
        );
    }

    #[test]
    fn strong_pinching_witnesses_also_pinch() {
        // the multiplicative gaps of a strongly pinched restricted spectrum
        // dominate a derived threshold (mirror distortion absorbed by C/2)
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let c = 8.0;
        let w = find_strong_pinching_witness(&class, 0, c, 2000, 4).unwrap();
        if let Certificate::StrongPinching {
            log_sigma_restricted,
            ..
        } = &w.certificate
        {
            for pair in log_sigma_restricted.windows(2) {
                assert!(pair[0] - pair[1] > c / 2.0, "{log_sigma_restricted:?}");
            }
        } else {
            panic!("wrong certificate kind");
        }
    }

    #[test]
    fn searches_are_deterministic() {
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let a = find_pinching_witness(&class, 0, 50.0, 200, 9).unwrap();
        let b = find_pinching_witness(&class, 0, 50.0, 200, 9).unwrap();
        assert_eq!(a.path_kinds, b.path_kinds);
        assert_eq!(a.trials, b.trials);
    }
}
