//! The antisymmetric operator Omega attached to a permutation pair, the
//! space H spanned by translation vectors, the symplectic form it carries,
//! the genus, and exact subspace predicates (isotropy, symplectic
//! orthogonals, membership). Everything here is exact rational arithmetic;
//! no floating point.

use thiserror::Error;

use crate::matrix::{Int, IntMatrix, RatMatrix};
use crate::perm::Permutation;
use crate::rauzy::{theta, theta_path, Arrow, Path};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SymplecticError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("subspace is not contained in H")]
    NotInH,
}

/// The operator Omega: entry (y, x) is +1 when x comes after y in the top
/// row but before y in the bottom row, -1 in the reversed situation, else 0.
pub fn omega(p: &Permutation) -> IntMatrix {
    let d = p.d();
    IntMatrix::from_fn(d, d, |y, x| {
        let (x, y) = (x as u8, y as u8);
        let top = p.top_pos(x).cmp(&p.top_pos(y));
        let bottom = p.bottom_pos(x).cmp(&p.bottom_pos(y));
        match (top, bottom) {
            (std::cmp::Ordering::Greater, std::cmp::Ordering::Less) => Int::from(1),
            (std::cmp::Ordering::Less, std::cmp::Ordering::Greater) => Int::from(-1),
            _ => Int::from(0),
        }
    })
}

/// Genus: half the exact rank of Omega.
pub fn genus(p: &Permutation) -> usize {
    let r = omega(p).rank();
    debug_assert!(r.is_multiple_of(2));
    r / 2
}

/// H with a chosen basis: the columns `Omega . e_x` over the leftmost pivot
/// letters, and the Gram matrix of the symplectic form in that basis
/// (`Gram[i][j] = <e_{x_i}, Omega e_{x_j}>`, a submatrix of Omega).
#[derive(Debug, Clone)]
pub struct SymplecticSpace {
    pub pivot_letters: Vec<u8>,
    /// d x 2g integer matrix whose columns span H.
    pub basis: IntMatrix,
    /// 2g x 2g antisymmetric invertible Gram matrix of omega_pi.
    pub gram: IntMatrix,
    pub genus: usize,
}

pub fn h_basis(p: &Permutation) -> SymplecticSpace {
    let d = p.d();
    let om = omega(p);
    let mut pivot_letters: Vec<u8> = Vec::new();
    let mut basis = IntMatrix::zeros(d, 0);
    let mut rank = 0;
    for x in 0..d as u8 {
        let col = IntMatrix::from_fn(d, 1, |i, _| om.get(i, x as usize).clone());
        let cand = basis.hstack(&col);
        let r = cand.rank();
        if r > rank {
            rank = r;
            basis = cand;
            pivot_letters.push(x);
        }
    }
    let g2 = pivot_letters.len();
    let gram = IntMatrix::from_fn(g2, g2, |i, j| {
        om.get(pivot_letters[i] as usize, pivot_letters[j] as usize)
            .clone()
    });
    debug_assert_eq!(gram.rank(), g2, "omega_pi must be non-degenerate on H");
    SymplecticSpace {
        pivot_letters,
        basis,
        gram,
        genus: g2 / 2,
    }
}

impl SymplecticSpace {
    pub fn dim(&self) -> usize {
        2 * self.genus
    }

    /// Exact coordinates of ambient columns in the H-basis; `NotInH` if some
    /// column falls outside H.
    pub fn express_in_h(&self, ambient: &RatMatrix) -> Result<RatMatrix, SymplecticError> {
        self.basis
            .to_rat()
            .solve(ambient)
            .ok_or(SymplecticError::NotInH)
    }

    pub fn contains(&self, ambient_column: &RatMatrix) -> bool {
        self.express_in_h(ambient_column).is_ok()
    }

    /// Ambient coordinates of H-basis coordinate columns.
    pub fn to_ambient(&self, h_coords: &RatMatrix) -> RatMatrix {
        self.basis.to_rat().mul(h_coords)
    }

    /// Symplectic form evaluated on H-coordinate columns: `F^T Gram G`.
    pub fn form(&self, f: &RatMatrix, g: &RatMatrix) -> RatMatrix {
        f.transpose().mul(&self.gram.to_rat()).mul(g)
    }

    /// A subspace (columns in H-coordinates) is isotropic when the form
    /// vanishes identically on it.
    pub fn is_isotropic(&self, f: &RatMatrix) -> bool {
        self.form(f, f).is_zero()
    }

    /// Exact symplectic orthogonal of a subspace given in H-coordinates;
    /// result columns are H-coordinates, dimension `2g - dim F`.
    pub fn symplectic_orthogonal(&self, f: &RatMatrix) -> RatMatrix {
        // v is orthogonal to F iff (F^T Gram) v = 0
        f.transpose().mul(&self.gram.to_rat()).kernel()
    }
}

/// Exact check of the conjugacy identity
/// `Theta(arrow) Omega(start) Theta(arrow)^T = Omega(end)`.
pub fn verify_conjugacy(arrow: &Arrow) -> bool {
    let th = theta(arrow);
    th.mul(&omega(&arrow.start)).mul(&th.transpose()) == omega(&arrow.end)
}

/// Path version of the conjugacy identity.
pub fn verify_conjugacy_path(path: &Path) -> bool {
    let th = theta_path(path);
    th.mul(&omega(path.start())).mul(&th.transpose()) == omega(path.end())
}

/// Does `e_letter` lie in H? (H is the column space of Omega.)
pub fn basis_vector_in_h(p: &Permutation, letter: u8) -> bool {
    let om = omega(p);
    let d = p.d();
    let e = IntMatrix::from_fn(d, 1, |i, _| {
        if i == letter as usize {
            Int::from(1)
        } else {
            Int::from(0)
        }
    });
    om.hstack(&e).rank() == om.rank()
}

/// The five equivalent conditions of the simple-reduction dichotomy,
/// evaluated independently, plus the two genera. Letting the scan check
/// their pairwise agreement keeps each condition an independent oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionConditions {
    pub genus_full: usize,
    pub genus_reduced: usize,
    /// (1) g(pi) = g(pi')
    pub genus_equal: bool,
    /// (2) H spanned by Omega e_x, x != B
    pub h_spanned_without: bool,
    /// (3) e_B not in H
    pub e_b_outside_h: bool,
    /// (4) e_B not in span{Omega e_x, x != B}
    pub e_b_outside_partial_span: bool,
    /// (5) P restricts to a symplectic isomorphism H -> H'
    pub projection_symplectic_iso: bool,
}

pub fn reduction_conditions(
    p: &Permutation,
    letter: u8,
) -> Result<ReductionConditions, SymplecticError> {
    let reduced = p
        .simple_reduction(letter)
        .map_err(|e| SymplecticError::InvalidInput(e.to_string()))?;
    let d = p.d();
    let om = omega(p);
    let g = genus(p);
    let g_red = genus(&reduced);

    // columns Omega e_x for x != B
    let cols_without: Vec<usize> = (0..d).filter(|&x| x != letter as usize).collect();
    let om_without = IntMatrix::from_fn(d, d - 1, |i, j| om.get(i, cols_without[j]).clone());
    let h_spanned_without = om_without.rank() == 2 * g;

    let e_b = IntMatrix::from_fn(d, 1, |i, _| {
        if i == letter as usize {
            Int::from(1)
        } else {
            Int::from(0)
        }
    });
    let e_b_outside_h = om.hstack(&e_b).rank() > om.rank();
    let e_b_outside_partial_span = om_without.hstack(&e_b).rank() > om_without.rank();

    // (5): project the chosen H-basis and compare dimensions and forms
    let space = h_basis(p);
    let space_red = h_basis(&reduced);
    let proj = crate::rauzy::projection_matrix(d, letter);
    let projected = proj.mul(&space.basis);
    let projection_symplectic_iso = 2 * g == 2 * g_red
        && projected.rank() == 2 * g
        && match space_red.express_in_h(&projected.to_rat()) {
            Ok(coords) => space_red.form(&coords, &coords) == space.gram.to_rat(),
            Err(_) => false,
        };

    Ok(ReductionConditions {
        genus_full: g,
        genus_reduced: g_red,
        genus_equal: g == g_red,
        h_spanned_without,
        e_b_outside_h,
        e_b_outside_partial_span,
        projection_symplectic_iso,
    })
}

impl ReductionConditions {
    /// All five conditions agree, and the genus drop is 0 or 1.
    pub fn consistent(&self) -> bool {
        let all = [
            self.genus_equal,
            self.h_spanned_without,
            self.e_b_outside_h,
            self.e_b_outside_partial_span,
            self.projection_symplectic_iso,
        ];
        let agree = all.iter().all(|&b| b == all[0]);
        let drop_ok = self.genus_full == self.genus_reduced
            || self.genus_full == self.genus_reduced + 1;
        agree && drop_ok
    }
}
