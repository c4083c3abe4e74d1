//! Lyapunov spectrum estimation for the Zorich cocycle by the standard
//! frame-transport scheme: push an orthonormal frame through the cocycle
//! matrices, re-orthonormalize by QR every step, and average the log
//! stretches of the R diagonal. Errors are quantified by batch means.
//!
//! Also hosts the singular-value utilities: splitting spectra into
//! expanding/contracting subspaces and eigenvalue-modulus exponents of a
//! single matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{sample_lambda_f64, DynError, IetState};
use crate::matrix::IntMatrix;
use crate::perm::Permutation;
use crate::symplectic::h_basis;

pub const BATCH_COUNT: u64 = 100;
pub const DEFAULT_RUN_CAP: u64 = 1_000_000;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LyapError {
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("singular value gap sigma_{0} / sigma_{1} is too small for a stable split")]
    GapTooSmall(usize, usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Frame spans H(pi), k = 2g.
    Restricted,
    /// Frame spans the whole coordinate space, k = d.
    Extended,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Restricted => write!(f, "restricted"),
            Mode::Extended => write!(f, "extended"),
        }
    }
}

/// Running frame-transport state: an orthonormal d x k frame (column major)
/// and the accumulated log stretches.
#[derive(Debug, Clone)]
pub struct CocycleAccumulator {
    pub d: usize,
    pub k: usize,
    pub frame: Vec<f64>,
    pub log_sums: Vec<f64>,
    pub steps: u64,
    pub mode: Mode,
}

impl CocycleAccumulator {
    pub fn new(d: usize, mode: Mode, initial_frame: Vec<f64>, k: usize) -> Self {
        let mut acc = CocycleAccumulator {
            d,
            k,
            frame: initial_frame,
            log_sums: vec![0.0; k],
            steps: 0,
            mode,
        };
        acc.orthonormalize();
        acc
    }

    /// Modified Gram-Schmidt in place; returns the log of each diagonal
    /// stretch (the R diagonal of the QR factorization).
    pub fn orthonormalize(&mut self) -> Vec<f64> {
        let (d, k) = (self.d, self.k);
        let mut log_r = vec![0.0; k];
        for (j, lr) in log_r.iter_mut().enumerate() {
            let col = j * d;
            for prev in 0..j {
                let pcol = prev * d;
                let mut dot = 0.0;
                for i in 0..d {
                    dot += self.frame[pcol + i] * self.frame[col + i];
                }
                for i in 0..d {
                    self.frame[col + i] -= dot * self.frame[pcol + i];
                }
            }
            let mut norm2 = 0.0;
            for i in 0..d {
                norm2 += self.frame[col + i] * self.frame[col + i];
            }
            let norm = norm2.sqrt();
            *lr = norm.ln();
            let inv = 1.0 / norm;
            for i in 0..d {
                self.frame[col + i] *= inv;
            }
        }
        log_r
    }

    /// Push the frame through one cocycle matrix and renormalize.
    pub fn push(&mut self, rec: &crate::dynamics::StepRecord) -> Vec<f64> {
        rec.apply_to_frame(&mut self.frame, self.d, self.k);
        self.steps += 1;
        let log_r = self.orthonormalize();
        for (s, l) in self.log_sums.iter_mut().zip(&log_r) {
            *s += l;
        }
        log_r
    }
}

/// Exponent estimates with batch-means standard errors; everything needed
/// to reproduce the run is embedded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub class: String,
    pub mode: Mode,
    pub seed: u64,
    pub steps: u64,
    pub burn_in: u64,
    /// Accumulation steps actually used (burn-in excluded, floored to a
    /// multiple of the batch count).
    pub counted_steps: u64,
    pub run_cap: u64,
    pub theta: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ratios: Vec<f64>,
    pub symmetric: bool,
    pub simple: bool,
    pub valid: bool,
    pub error: Option<String>,
}

/// Estimate the Zorich cocycle exponents over the class of `rep`.
///
/// Samples length data uniformly on the simplex with the given seed,
/// burns in the base dynamics, then transports a frame of H (restricted) or
/// of the full coordinate space (extended) through the cocycle.
///
/// Exponents are measured per acceleration step; any other time
/// normalization rescales the whole spectrum by one constant, so the
/// meaningful outputs are ratios, signs, and gaps.
pub fn estimate_exponents(
    rep: &Permutation,
    mode: Mode,
    seed: u64,
    steps: u64,
    burn_in: u64,
    run_cap: u64,
) -> Result<LyapunovReport, LyapError> {
    if steps <= burn_in {
        return Err(LyapError::InvalidConfig("steps must exceed burn_in".into()));
    }
    let batch_len = (steps - burn_in) / BATCH_COUNT;
    if batch_len == 0 {
        return Err(LyapError::InvalidConfig(format!(
            "need at least {BATCH_COUNT} accumulation steps"
        )));
    }
    let counted = batch_len * BATCH_COUNT;
    let d = rep.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = sample_lambda_f64(&mut rng, d);
    let mut state =
        IetState::new(lambda, rep.clone()).map_err(|e| LyapError::InvalidConfig(e.to_string()))?;

    let mut report = LyapunovReport {
        class: rep.to_text(),
        mode,
        seed,
        steps,
        burn_in,
        counted_steps: counted,
        run_cap,
        theta: Vec::new(),
        stderr: Vec::new(),
        ratios: Vec::new(),
        symmetric: false,
        simple: false,
        valid: false,
        error: None,
    };

    let fail = |report: &mut LyapunovReport, e: DynError| {
        report.error = Some(e.to_string());
    };

    for _ in 0..burn_in {
        if let Err(e) = state.zorich_step(run_cap) {
            fail(&mut report, e);
            report.counted_steps = 0;
            return Ok(report);
        }
        normalize(&mut state.lambda);
    }

    let k = match mode {
        Mode::Restricted => 2 * h_basis(&state.perm).genus,
        Mode::Extended => d,
    };
    let frame = match mode {
        Mode::Restricted => {
            let basis = h_basis(&state.perm).basis.to_f64();
            let mut f = vec![0.0; d * k];
            for j in 0..k {
                for i in 0..d {
                    f[j * d + i] = basis[(i, j)];
                }
            }
            f
        }
        Mode::Extended => {
            let mut f = vec![0.0; d * k];
            for j in 0..k {
                f[j * d + j] = 1.0;
            }
            f
        }
    };
    let mut acc = CocycleAccumulator::new(d, mode, frame, k);

    let mut batch_acc = vec![0.0; k];
    let mut batch_means: Vec<Vec<f64>> = vec![Vec::with_capacity(BATCH_COUNT as usize); k];
    for step in 0..counted {
        let rec = match state.zorich_step(run_cap) {
            Ok(r) => r,
            Err(e) => {
                // partial estimates, flagged invalid
                fail(&mut report, e);
                report.counted_steps = step;
                if step > 0 {
                    report.theta = acc.log_sums.iter().map(|s| s / step as f64).collect();
                    report
                        .theta
                        .sort_by(|a, b| b.partial_cmp(a).unwrap());
                }
                return Ok(report);
            }
        };
        normalize(&mut state.lambda);
        let log_r = acc.push(&rec);
        for i in 0..k {
            batch_acc[i] += log_r[i];
        }
        if (step + 1).is_multiple_of(batch_len) {
            for i in 0..k {
                batch_means[i].push(batch_acc[i] / batch_len as f64);
                batch_acc[i] = 0.0;
            }
        }
    }

    let mut theta: Vec<f64> = acc.log_sums.iter().map(|s| s / counted as f64).collect();
    let mut stderr: Vec<f64> = (0..k)
        .map(|i| {
            let means = &batch_means[i];
            let n = means.len() as f64;
            let avg: f64 = means.iter().sum::<f64>() / n;
            let var: f64 = means.iter().map(|m| (m - avg) * (m - avg)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        })
        .collect();

    // canonical order: descending exponents, standard errors carried along
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| theta[b].partial_cmp(&theta[a]).unwrap());
    theta = order.iter().map(|&i| theta[i]).collect();
    stderr = order.iter().map(|&i| stderr[i]).collect();

    let ratios = if theta[0] != 0.0 {
        theta.iter().map(|t| t / theta[0]).collect()
    } else {
        vec![0.0; k]
    };
    let symmetric = (0..k).all(|i| {
        let j = k - 1 - i;
        (theta[i] + theta[j]).abs() <= 4.0 * (stderr[i] + stderr[j])
    });
    let simple = (0..k - 1).all(|i| theta[i] - theta[i + 1] > 5.0 * (stderr[i] + stderr[i + 1]));

    report.theta = theta;
    report.stderr = stderr;
    report.ratios = ratios;
    report.symmetric = symmetric;
    report.simple = simple;
    report.valid = true;
    Ok(report)
}

fn normalize(lambda: &mut [f64]) {
    let total: f64 = lambda.iter().sum();
    for l in lambda.iter_mut() {
        *l /= total;
    }
}

/// Symmetry test theta_i = -theta_{2g-i+1} at the 4-sigma level; only
/// meaningful for the restricted cocycle.
pub fn spectrum_symmetry_check(report: &LyapunovReport) -> Result<bool, LyapError> {
    if report.mode != Mode::Restricted {
        return Err(LyapError::ModeMismatch(
            "symmetry check needs a restricted-mode report".into(),
        ));
    }
    if !report.valid {
        return Err(LyapError::InvalidConfig("report flagged invalid".into()));
    }
    let k = report.theta.len();
    Ok((0..k).all(|i| {
        let j = k - 1 - i;
        (report.theta[i] + report.theta[j]).abs()
            <= 4.0 * (report.stderr[i] + report.stderr[j])
    }))
}

/// Singular values together with the expanding / contracting orthogonal
/// splitting at index k.
#[derive(Debug, Clone)]
pub struct SingularSpectrum {
    pub sigma: Vec<f64>,
    /// Span of the right-singular vectors with the k largest values.
    pub e_plus: DMatrix<f64>,
    /// Span of the remaining right-singular vectors.
    pub e_minus: DMatrix<f64>,
}

pub fn singular_decomp(m: &DMatrix<f64>, k: usize) -> Result<SingularSpectrum, LyapError> {
    let n = m.ncols();
    if k == 0 || k >= n {
        return Err(LyapError::InvalidConfig("split index out of range".into()));
    }
    let svd = m.clone().svd(true, true);
    let v_t = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let sigma: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    if sigma[k - 1] <= sigma[k] * (1.0 + 1e-12) {
        return Err(LyapError::GapTooSmall(k, k + 1));
    }
    let e_plus = DMatrix::from_fn(n, k, |i, j| v_t[(idx[j], i)]);
    let e_minus = DMatrix::from_fn(n, n - k, |i, j| v_t[(idx[k + j], i)]);
    Ok(SingularSpectrum {
        sigma,
        e_plus,
        e_minus,
    })
}

/// Lyapunov exponents of a single matrix: logs of the absolute values of
/// its eigenvalues, with multiplicity, sorted descending.
pub fn lyapunov_exponents_of_matrix(m: &IntMatrix) -> Vec<f64> {
    let f = m.to_f64();
    let eig = f.complex_eigenvalues();
    let mut logs: Vec<f64> = eig.iter().map(|z| z.norm().ln()).collect();
    logs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    logs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::perm::Permutation;

    fn p(text: &str) -> Permutation {
        Permutation::parse(text).unwrap()
    }

    #[test]
    fn matrix_exponent_examples() {
        let id = IntMatrix::identity(3);
        assert!(lyapunov_exponents_of_matrix(&id).iter().all(|&l| l.abs() < 1e-12));

        let parabolic = IntMatrix::from_i64_rows(&[vec![1, 1], vec![0, 1]]);
        assert!(lyapunov_exponents_of_matrix(&parabolic)
            .iter()
            .all(|&l| l.abs() < 1e-9));

        let fib = IntMatrix::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        let logs = lyapunov_exponents_of_matrix(&fib);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((logs[0] - 2.0 * phi.ln()).abs() < 1e-3);
        assert!((logs[1] + 2.0 * phi.ln()).abs() < 1e-3);
    }

    #[test]
    fn singular_decomp_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let s = singular_decomp(&m, 1).unwrap();
        assert!((s.sigma[0] - 3.0).abs() < 1e-12);
        assert!((s.sigma[1] - 1.0).abs() < 1e-12);
        // E+ is the first axis
        assert!((s.e_plus[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(s.e_plus[(1, 0)].abs() < 1e-12);

        let id = DMatrix::identity(3, 3);
        assert!(matches!(
            singular_decomp(&id, 1),
            Err(LyapError::GapTooSmall(_, _))
        ));
    }

    #[test]
    fn singular_decomp_recovers_construction() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let n = 4;
            let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
                DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5)
            };
            let q1 = gauss(&mut rng).qr().q();
            let q2 = gauss(&mut rng).qr().q();
            let diag = [50.0, 7.0, 1.0, 0.01];
            let m = &q1 * DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag)) * &q2;
            let s = singular_decomp(&m, 2).unwrap();
            for (a, b) in s.sigma.iter().zip(diag.iter()) {
                assert!((a - b).abs() < 1e-10 * b.max(1.0));
            }
        }
    }

    #[test]
    fn exponents_d2_quick() {
        // short smoke run; long runs live in the acceptance suite
        let r = estimate_exponents(&p("ab/ba"), Mode::Restricted, 7, 30_000, 300, 1 << 40)
            .unwrap();
        assert!(r.valid, "{:?}", r.error);
        assert!(r.theta[0] > 0.5);
        assert!((r.theta[0] + r.theta[1]).abs() < 1e-6);
        assert!(r.simple);
        assert!(spectrum_symmetry_check(&r).unwrap());
        assert_eq!(r.ratios[0], 1.0);
    }

    #[test]
    fn exponents_reproducible() {
        let a = estimate_exponents(&p("abcd/dcba"), Mode::Restricted, 42, 5_000, 100, 1 << 40)
            .unwrap();
        let b = estimate_exponents(&p("abcd/dcba"), Mode::Restricted, 42, 5_000, 100, 1 << 40)
            .unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        // different seed gives a different orbit
        let c = estimate_exponents(&p("abcd/dcba"), Mode::Restricted, 43, 5_000, 100, 1 << 40)
            .unwrap();
        assert_ne!(a.theta, c.theta);
    }

    #[test]
    fn extended_mode_frame_is_full() {
        let r = estimate_exponents(&p("abcd/dabc"), Mode::Extended, 5, 20_000, 200, 1 << 40)
            .unwrap();
        assert!(r.valid);
        assert_eq!(r.theta.len(), 4);
        // genus 1: middle pair hovers near zero
        assert!(r.theta[1].abs() < 20.0 * (r.stderr[1] + 1e-12));
        assert!(spectrum_symmetry_check(&r).is_err()); // mode mismatch
    }

    #[test]
    fn restricted_sum_near_zero() {
        let r = estimate_exponents(&p("abcd/dcba"), Mode::Restricted, 11, 50_000, 500, 1 << 40)
            .unwrap();
        assert!(r.valid);
        let total: f64 = r.theta.iter().sum();
        assert!(total.abs() < 1e-3, "sum {total}");
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(matches!(
            estimate_exponents(&p("ab/ba"), Mode::Restricted, 1, 10, 10, 100),
            Err(LyapError::InvalidConfig(_))
        ));
    }

    #[test]
    fn aborted_run_reports_partial_invalid() {
        // a tiny run cap kills the orbit early; the report carries what was
        // measured and is flagged invalid
        let r = estimate_exponents(&p("ab/ba"), Mode::Restricted, 3, 100_000, 0, 4).unwrap();
        assert!(!r.valid);
        assert!(r.error.is_some());
        assert!(r.counted_steps < 100_000);
    }

    #[test]
    fn theta_independent_of_start_vertex() {
        // two vertices of the same class give matching spectra
        let class = crate::rauzy::enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let a = estimate_exponents(class.vertex(0), Mode::Restricted, 2, 150_000, 1_500, 1 << 40)
            .unwrap();
        let b = estimate_exponents(class.vertex(3), Mode::Restricted, 2, 150_000, 1_500, 1 << 40)
            .unwrap();
        assert!(a.valid && b.valid);
        for i in 0..4 {
            let diff = (a.theta[i] - b.theta[i]).abs();
            let joint = 5.0 * (a.stderr[i] + b.stderr[i]);
            assert!(diff <= joint, "component {i}: {diff} > {joint}");
        }
    }

    #[test]
    fn theta_independent_of_initial_frame() {
        // drive the same orbit through two accumulators, one starting from
        // the identity frame and one from a rotated frame
        use crate::dynamics::{sample_lambda_f64, IetState};
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let perm = p("abcd/dcba");
        let lambda = sample_lambda_f64(&mut rng, 4);
        let mut state = IetState::new(lambda, perm).unwrap();
        let identity = {
            let mut f = vec![0.0; 16];
            for j in 0..4 {
                f[j * 4 + j] = 1.0;
            }
            f
        };
        let rotated = {
            use rand::Rng;
            let mut g = rand_chacha::ChaCha8Rng::seed_from_u64(8);
            let m = DMatrix::from_fn(4, 4, |_, _| g.random::<f64>() - 0.5).qr().q();
            let mut f = vec![0.0; 16];
            for j in 0..4 {
                for i in 0..4 {
                    f[j * 4 + i] = m[(i, j)];
                }
            }
            f
        };
        let mut acc_a = CocycleAccumulator::new(4, Mode::Extended, identity, 4);
        let mut acc_b = CocycleAccumulator::new(4, Mode::Extended, rotated, 4);
        let n = 150_000u64;
        for _ in 0..n {
            let rec = state.zorich_step(1 << 40).unwrap();
            let total: f64 = state.lambda.iter().sum();
            for l in state.lambda.iter_mut() {
                *l /= total;
            }
            acc_a.push(&rec);
            acc_b.push(&rec);
        }
        for i in 0..4 {
            let ta = acc_a.log_sums[i] / n as f64;
            let tb = acc_b.log_sums[i] / n as f64;
            assert!((ta - tb).abs() < 5e-3, "component {i}: {ta} vs {tb}");
        }
    }
}
