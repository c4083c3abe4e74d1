//! Named verification suites: exhaustive scans of the structural lemmas over
//! all Rauzy classes up to a degree bound, exact identity checks along
//! random paths, and the suspension-transport battery. Each suite reports
//! one named check per unit of work so failures are attributable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{canonical_tau, sample_lambda_rat, DynError, IetState, SuspensionState};
use crate::matrix::Rat;
use crate::perm::Permutation;
use crate::rauzy::{
    all_classes, extend_path, projection_matrix, theta_path, ExtensionDatum, Path, RauzyClass,
};
use crate::symplectic::{
    basis_vector_in_h, genus, reduction_conditions, verify_conjugacy, verify_conjugacy_path,
};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("suite failed to set up: {0}")]
    Setup(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub d_max: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteReport {
    fn new(suite: &str, d_max: usize, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            d_max,
            seed,
            checks: Vec::new(),
            passed: 0,
            failed: 0,
        }
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        self.checks.push(CheckResult {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

pub const SUITES: &[&str] = &[
    "conjugacy",
    "theta",
    "classes",
    "rauzy",
    "degenerateorgood",
    "simplereduction",
    "degenerate",
    "g211",
    "dg",
    "minimal",
    "intertwining",
    "transport",
];

pub fn run_suite(name: &str, d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    match name {
        "conjugacy" => suite_conjugacy(d_max, seed),
        "theta" => suite_theta(d_max, seed),
        "classes" => suite_classes(d_max, seed),
        "rauzy" => suite_rauzy(d_max, seed),
        "degenerateorgood" => suite_degenerate_or_good(d_max, seed),
        "simplereduction" => suite_simple_reduction(d_max, seed),
        "degenerate" => suite_degenerate(d_max, seed),
        "g211" => suite_g211(d_max, seed),
        "dg" => suite_dg(d_max, seed),
        "minimal" => suite_minimal(d_max, seed),
        "intertwining" => suite_intertwining(d_max, seed),
        "transport" => suite_transport(d_max, seed),
        "all" => {
            let mut report = SuiteReport::new("all", d_max, seed);
            for s in SUITES {
                let sub = run_suite(s, d_max, seed)?;
                for c in sub.checks {
                    report.push(format!("{s}/{}", c.name), c.pass, c.detail);
                }
            }
            Ok(report)
        }
        other => Err(VerifyError::UnknownSuite(other.to_string())),
    }
}

fn classes_up_to(d_max: usize) -> Result<Vec<RauzyClass>, VerifyError> {
    let mut out = Vec::new();
    for d in 2..=d_max {
        out.extend(all_classes(d, 10_000_000).map_err(|e| VerifyError::Setup(e.to_string()))?);
    }
    Ok(out)
}

pub const RANDOM_PATHS_PER_CLASS: usize = 1000;
pub const RANDOM_PATH_MAX_LEN: usize = 50;

/// Exact symplectic conjugacy along every arrow and along seeded random
/// paths in every class.
fn suite_conjugacy(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("conjugacy", d_max, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in classes_up_to(d_max)? {
        let rep = class.representative().to_text();
        let arrows_ok = class.arrows().all(|a| verify_conjugacy(&a));
        report.push(format!("arrows {rep}"), arrows_ok, format!("{} arrows", 2 * class.len()));
        let route = class.return_kinds(0, |_, _| true);
        let mut paths_ok = true;
        for _ in 0..RANDOM_PATHS_PER_CLASS {
            use rand::Rng;
            let len = rng.random_range(0..=RANDOM_PATH_MAX_LEN);
            let path = match class.random_loop(&mut rng, 0, len, &route) {
                Some(p) => p,
                None => {
                    paths_ok = false;
                    break;
                }
            };
            if !verify_conjugacy_path(&path) {
                paths_ok = false;
                break;
            }
        }
        report.push(
            format!("paths {rep}"),
            paths_ok,
            format!("{RANDOM_PATHS_PER_CLASS} random loops, length <= {RANDOM_PATH_MAX_LEN}"),
        );
    }
    Ok(report)
}

/// det Theta = 1 exactly and entries >= 0 on the same corpus.
fn suite_theta(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("theta", d_max, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = crate::matrix::Int::from(1);
    for class in classes_up_to(d_max)? {
        let rep = class.representative().to_text();
        let mut ok = true;
        for a in class.arrows() {
            let th = crate::rauzy::theta(&a);
            if th.det() != one || !th.is_nonnegative() {
                ok = false;
            }
        }
        let route = class.return_kinds(0, |_, _| true);
        for _ in 0..RANDOM_PATHS_PER_CLASS {
            use rand::Rng;
            let len = rng.random_range(0..=RANDOM_PATH_MAX_LEN);
            let path = match class.random_loop(&mut rng, 0, len, &route) {
                Some(p) => p,
                None => {
                    ok = false;
                    break;
                }
            };
            let th = theta_path(&path);
            if th.det() != one || !th.is_nonnegative() {
                ok = false;
                break;
            }
        }
        report.push(format!("unimodular {rep}"), ok, "det = 1, entries >= 0");
    }
    Ok(report)
}

/// Class sizes of the symmetric permutation via BFS, cross-checked by an
/// independent set-closure on one-row permutations (no shared code with the
/// BFS: the operations are reimplemented on position arrays).
fn suite_classes(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("classes", d_max, seed);
    for d in 2..=d_max.min(6) {
        let text: String = {
            let top: String = (0..d).map(|i| (b'a' + i as u8) as char).collect();
            let bottom: String = (0..d).rev().map(|i| (b'a' + i as u8) as char).collect();
            format!("{top}/{bottom}")
        };
        let rep = Permutation::parse(&text).map_err(|e| VerifyError::Setup(e.to_string()))?;
        let class = crate::rauzy::enumerate_class(&rep, 10_000_000)
            .map_err(|e| VerifyError::Setup(e.to_string()))?;
        let expected = (1usize << (d - 1)) - 1;
        let closure = monodromy_closure_size(&rep.monodromy());
        let pass = class.len() == expected && closure == expected;
        report.push(
            format!("symmetric d={d}"),
            pass,
            format!("bfs {} closure {closure} expected {expected}", class.len()),
        );
    }
    Ok(report)
}

/// Independent closure count: saturate a set of one-row permutations under
/// the two induction operations implemented directly on position arrays.
pub fn monodromy_closure_size(start: &[u8]) -> usize {
    let d = start.len();
    let mut seen: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    let mut stack = vec![start.to_vec()];
    seen.insert(start.to_vec());
    while let Some(p) = stack.pop() {
        // top operation: bottom positions after the last-top letter's slot
        // shift by one, the last-bottom letter moves just after it
        let px = p[d - 1];
        let top_image: Vec<u8> = p
            .iter()
            .map(|&v| {
                if v <= px {
                    v
                } else if v == d as u8 - 1 {
                    px + 1
                } else {
                    v + 1
                }
            })
            .collect();
        // bottom operation: the last entry moves just after the slot of the
        // letter occupying the last bottom position
        let ty = p.iter().position(|&v| v == d as u8 - 1).unwrap();
        let mut bottom_image: Vec<u8> = p[..d - 1].to_vec();
        bottom_image.insert(ty + 1, p[d - 1]);
        for img in [top_image, bottom_image] {
            if seen.insert(img.clone()) {
                stack.push(img);
            }
        }
    }
    seen.len()
}

/// Every class contains a standard permutation.
fn suite_rauzy(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("rauzy", d_max, seed);
    for class in classes_up_to(d_max)? {
        let rep = class.representative().to_text();
        let found = class.vertices().iter().any(|v| v.is_standard());
        report.push(format!("standard-in {rep}"), found, format!("size {}", class.len()));
    }
    Ok(report)
}

/// Every class on at least 3 letters contains a good or a degenerate
/// permutation.
fn suite_degenerate_or_good(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("degenerateorgood", d_max, seed);
    for class in classes_up_to(d_max)? {
        if class.d() < 3 {
            continue;
        }
        let rep = class.representative().to_text();
        let mut found = false;
        for v in class.vertices() {
            if !v.is_standard() {
                continue;
            }
            if v.is_degenerate() == Ok(true) || v.is_good() == Ok(true) {
                found = true;
                break;
            }
        }
        report.push(format!("good-or-degenerate {rep}"), found, String::new());
    }
    Ok(report)
}

/// The five equivalent reduction conditions agree pairwise and the genus
/// drops by 0 or 1, for every vertex and every deletable letter.
fn suite_simple_reduction(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("simplereduction", d_max, seed);
    for class in classes_up_to(d_max.min(5))? {
        if class.d() < 3 {
            continue;
        }
        let rep = class.representative().to_text();
        let mut checked = 0usize;
        let mut ok = true;
        for v in class.vertices() {
            for letter in 0..v.d() as u8 {
                if v.simple_reduction(letter).is_err() {
                    continue;
                }
                checked += 1;
                match reduction_conditions(v, letter) {
                    Ok(c) if c.consistent() => {}
                    other => {
                        ok = false;
                        report.push(
                            format!("equivalence {rep} {} letter {letter}", v.to_text()),
                            false,
                            format!("{other:?}"),
                        );
                    }
                }
            }
        }
        if ok {
            report.push(
                format!("equivalence {rep}"),
                true,
                format!("{checked} (vertex, letter) pairs"),
            );
        }
    }
    Ok(report)
}

/// For degenerate permutations the doubled letter's basis vector lies
/// outside H.
fn suite_degenerate(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("degenerate", d_max, seed);
    for class in classes_up_to(d_max)? {
        if class.d() < 3 {
            continue;
        }
        let rep = class.representative().to_text();
        let mut checked = 0usize;
        let mut ok = true;
        for v in class.vertices() {
            if !v.is_standard() {
                continue;
            }
            if let Ok(Some(b)) = v.degenerate_letter() {
                checked += 1;
                if basis_vector_in_h(v, b) {
                    ok = false;
                }
            }
        }
        report.push(
            format!("e_B-outside-H {rep}"),
            ok,
            format!("{checked} degenerate vertices"),
        );
    }
    Ok(report)
}

/// Good permutations lose at most one genus when both outer letters are
/// forgotten.
fn suite_g211(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("g211", d_max, seed);
    for class in classes_up_to(d_max)? {
        if class.d() < 4 {
            continue;
        }
        let rep = class.representative().to_text();
        let mut checked = 0usize;
        let mut ok = true;
        for v in class.vertices() {
            if !v.is_standard() || v.is_good() != Ok(true) {
                continue;
            }
            checked += 1;
            let inner = v.forget_outer().expect("good implies outer deletion works");
            if genus(v) > genus(&inner) + 1 {
                ok = false;
            }
        }
        report.push(format!("genus-drop {rep}"), ok, format!("{checked} good vertices"));
    }
    Ok(report)
}

/// Every non-minimal class contains a vertex that is a simple extension of
/// a same-genus permutation.
fn suite_dg(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("dg", d_max, seed);
    for class in classes_up_to(d_max)? {
        let rep = class.representative().to_text();
        let g = genus(class.representative());
        if class.d() == 2 * g || class.d() < 3 {
            continue;
        }
        let mut found = false;
        'outer: for v in class.vertices() {
            for letter in 0..v.d() as u8 {
                // a simple extension never puts the fresh letter last
                if v.last_top() == letter || v.last_bottom() == letter {
                    continue;
                }
                if let Ok(reduced) = v.simple_reduction(letter) {
                    if genus(&reduced) == g {
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        report.push(format!("same-genus-extension {rep}"), found, String::new());
    }
    Ok(report)
}

/// Genus is constant along each class and minimality (alphabet = 2 genus)
/// is consistent across vertices.
fn suite_minimal(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("minimal", d_max, seed);
    for class in classes_up_to(d_max)? {
        let rep = class.representative().to_text();
        let g = genus(class.representative());
        let constant = class.vertices().iter().all(|v| genus(v) == g);
        report.push(
            format!("genus-constant {rep}"),
            constant,
            format!("g = {g}, minimal = {}", class.d() == 2 * g),
        );
    }
    Ok(report)
}

pub const INTERTWINING_PATHS_PER_DATUM: usize = 1000;
pub const INTERTWINING_PATH_MAX_LEN: usize = 10;

/// P Theta(extended path) = Theta(path) P for every arrow and for seeded
/// random paths, over every valid extension datum.
fn suite_intertwining(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("intertwining", d_max, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in classes_up_to(d_max.min(4))? {
        let rep = class.representative().to_text();
        let d = class.d();
        let fresh = (b'a' + d as u8) as char;
        let first_top = class.representative().first_top();
        let first_bottom = class.representative().first_bottom();
        let route = class.return_kinds(0, |_, _| true);
        for c in 0..d as u8 {
            for dd in 0..d as u8 {
                if c == first_top && dd == first_bottom {
                    continue;
                }
                let datum = ExtensionDatum {
                    new_symbol: fresh,
                    top_target: c,
                    bottom_target: dd,
                };
                let mut ok = true;
                let mut detail = String::new();
                // all single arrows
                for a in class.arrows() {
                    let path = Path::from_kinds(a.start.clone(), [a.kind]);
                    if !intertwines(&path, &datum) {
                        ok = false;
                        detail = format!("arrow at {}", a.start.to_text());
                        break;
                    }
                }
                // seeded random paths
                if ok {
                    for _ in 0..INTERTWINING_PATHS_PER_DATUM {
                        use rand::Rng;
                        let len = rng.random_range(0..=INTERTWINING_PATH_MAX_LEN);
                        match class.random_loop(&mut rng, 0, len, &route) {
                            Some(p) => {
                                if !intertwines(&p, &datum) {
                                    ok = false;
                                    detail = format!("random path {}", p.kinds_string());
                                    break;
                                }
                            }
                            None => {
                                ok = false;
                                detail = "no return route".into();
                                break;
                            }
                        }
                    }
                }
                report.push(
                    format!("P-theta {rep} before ({},{})",
                        class.alphabet().letter(c),
                        class.alphabet().letter(dd)),
                    ok,
                    detail,
                );
            }
        }
    }
    Ok(report)
}

fn intertwines(path: &Path, datum: &ExtensionDatum) -> bool {
    let lifted = match extend_path(path, datum) {
        Ok(l) => l,
        Err(_) => return false,
    };
    let ext_d = path.start().d() + 1;
    let b_idx = match lifted.start().alphabet().index_of(datum.new_symbol) {
        Some(i) => i,
        None => return false,
    };
    let proj = projection_matrix(ext_d, b_idx);
    proj.mul(&theta_path(&lifted)) == theta_path(path).mul(&proj)
}

pub const TRANSPORT_TOTAL_STEPS: usize = 10_000;

/// Rational-mode suspension transport: the vector stays in the arrow cones
/// and the length data is recovered exactly by the transposed matrix.
fn suite_transport(d_max: usize, seed: u64) -> Result<SuiteReport, VerifyError> {
    let mut report = SuiteReport::new("transport", d_max, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = classes_up_to(d_max.min(5))?;
    let per_class = TRANSPORT_TOTAL_STEPS.div_ceil(classes.len());
    for class in classes {
        let rep = class.representative().to_text();
        let mut steps = 0usize;
        let mut ok = true;
        let mut detail = String::new();
        'outer: while steps < per_class {
            let perm = class.representative().clone();
            let lambda = sample_lambda_rat(&mut rng, perm.d(), 128);
            let tau: Vec<Rat> = canonical_tau(&perm)
                .iter()
                .map(|&n| Rat::from_integer(n.into()))
                .collect();
            let iet = IetState::new(lambda, perm).expect("valid state");
            let mut s = SuspensionState::new(iet, tau).expect("canonical tau in cone");
            for _ in 0..500 {
                let before = s.iet.lambda.clone();
                match s.invertible_step() {
                    Ok(arrow) => {
                        steps += 1;
                        // exact recovery lambda = Theta^T lambda'
                        let th = crate::rauzy::theta(&arrow);
                        let recovered: Vec<Rat> = (0..before.len())
                            .map(|i| {
                                (0..before.len())
                                    .map(|j| {
                                        Rat::from_integer(th.get(j, i).clone()) * &s.iet.lambda[j]
                                    })
                                    .fold(Rat::from_integer(0.into()), |a, b| a + b)
                            })
                            .collect();
                        if recovered != before {
                            ok = false;
                            detail = "lambda recovery failed".into();
                            break 'outer;
                        }
                        if steps >= per_class {
                            break;
                        }
                    }
                    Err(DynError::KeaneViolation) => break, // resample
                    Err(e) => {
                        ok = false;
                        detail = e.to_string();
                        break 'outer;
                    }
                }
            }
        }
        report.push(format!("transport {rep}"), ok, if ok { format!("{steps} steps") } else { detail });
    }
    Ok(report)
}
