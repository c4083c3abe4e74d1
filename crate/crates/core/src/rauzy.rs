//! Rauzy diagrams: the top/bottom operations, arrows with winner and loser,
//! class enumeration by breadth-first search, the path monoid, the integer
//! matrix representation of paths, and the extension map lifting paths from
//! a reduced alphabet into the extended one.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde_json::json;
use thiserror::Error;

use crate::matrix::IntMatrix;
use crate::perm::{Alphabet, PermError, Permutation};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RauzyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("class enumeration exceeded the cap of {0} vertices")]
    ClassCapExceeded(usize),
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrowKind {
    Top,
    Bottom,
}

impl ArrowKind {
    pub fn other(self) -> ArrowKind {
        match self {
            ArrowKind::Top => ArrowKind::Bottom,
            ArrowKind::Bottom => ArrowKind::Top,
        }
    }

    pub fn letter(self) -> char {
        match self {
            ArrowKind::Top => 't',
            ArrowKind::Bottom => 'b',
        }
    }

    pub fn from_letter(c: char) -> Option<ArrowKind> {
        match c {
            't' => Some(ArrowKind::Top),
            'b' => Some(ArrowKind::Bottom),
            _ => None,
        }
    }
}

impl fmt::Display for ArrowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrowKind::Top => write!(f, "top"),
            ArrowKind::Bottom => write!(f, "bottom"),
        }
    }
}

/// The top operation: the top row is kept; the last bottom letter is removed
/// and reinserted immediately to the right of the position occupied by the
/// last top letter in the bottom row.
pub fn apply_top(p: &Permutation) -> Permutation {
    let x = p.last_top();
    let y = p.last_bottom();
    assert_ne!(x, y, "top operation needs distinct last letters (irreducible input)");
    let mut bottom: Vec<u8> = p.bottom_row().to_vec();
    bottom.pop();
    let pos_x = bottom.iter().position(|&l| l == x).expect("x stays in bottom");
    bottom.insert(pos_x + 1, y);
    Permutation::new(p.alphabet().clone(), p.top_row().to_vec(), bottom)
        .expect("row stays a bijection")
}

/// The bottom operation, dual to the top one: the bottom row is kept and the
/// last top letter is reinserted after the last bottom letter's position in
/// the top row.
pub fn apply_bottom(p: &Permutation) -> Permutation {
    let x = p.last_top();
    let y = p.last_bottom();
    assert_ne!(x, y, "bottom operation needs distinct last letters (irreducible input)");
    let mut top: Vec<u8> = p.top_row().to_vec();
    top.pop();
    let pos_y = top.iter().position(|&l| l == y).expect("y stays in top");
    top.insert(pos_y + 1, x);
    Permutation::new(p.alphabet().clone(), top, p.bottom_row().to_vec())
        .expect("row stays a bijection")
}

/// Edge of a Rauzy diagram. The winner is the last letter of the row
/// matching the arrow kind; the loser is the last letter of the other row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub start: Permutation,
    pub end: Permutation,
    pub kind: ArrowKind,
    pub winner: u8,
    pub loser: u8,
}

pub fn make_arrow(p: &Permutation, kind: ArrowKind) -> Arrow {
    let x = p.last_top();
    let y = p.last_bottom();
    let (end, winner, loser) = match kind {
        ArrowKind::Top => (apply_top(p), x, y),
        ArrowKind::Bottom => (apply_bottom(p), y, x),
    };
    Arrow {
        start: p.clone(),
        end,
        kind,
        winner,
        loser,
    }
}

/// Path in a Rauzy diagram; the empty path is the identity at its start
/// vertex. Arrows chain head to tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    start: Permutation,
    arrows: Vec<Arrow>,
}

impl Path {
    pub fn empty(start: Permutation) -> Self {
        Path {
            start,
            arrows: Vec::new(),
        }
    }

    /// Build a path by following arrow kinds from a start vertex.
    pub fn from_kinds(start: Permutation, kinds: impl IntoIterator<Item = ArrowKind>) -> Self {
        let mut path = Path::empty(start);
        for k in kinds {
            let a = make_arrow(path.end(), k);
            path.arrows.push(a);
        }
        path
    }

    pub fn push(&mut self, arrow: Arrow) -> Result<(), RauzyError> {
        if arrow.start != *self.end() {
            return Err(RauzyError::InvalidInput(
                "arrow does not start at the path end".into(),
            ));
        }
        self.arrows.push(arrow);
        Ok(())
    }

    pub fn concat(&self, other: &Path) -> Result<Path, RauzyError> {
        if other.start != *self.end() {
            return Err(RauzyError::InvalidInput(
                "paths do not chain for concatenation".into(),
            ));
        }
        let mut arrows = self.arrows.clone();
        arrows.extend(other.arrows.iter().cloned());
        Ok(Path {
            start: self.start.clone(),
            arrows,
        })
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn start(&self) -> &Permutation {
        &self.start
    }

    pub fn end(&self) -> &Permutation {
        self.arrows.last().map(|a| &a.end).unwrap_or(&self.start)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn is_loop(&self) -> bool {
        self.end() == &self.start
    }

    pub fn kinds_string(&self) -> String {
        self.arrows.iter().map(|a| a.kind.letter()).collect()
    }

    pub fn vertices(&self) -> Vec<&Permutation> {
        let mut v = Vec::with_capacity(self.arrows.len() + 1);
        v.push(&self.start);
        v.extend(self.arrows.iter().map(|a| &a.end));
        v
    }
}

/// Theta of a single arrow: identity except that the winner column gains a
/// one in the loser row, so `Theta . e_winner = e_winner + e_loser`.
pub fn theta(arrow: &Arrow) -> IntMatrix {
    let d = arrow.start.d();
    let mut m = IntMatrix::identity(d);
    m.set(
        arrow.loser as usize,
        arrow.winner as usize,
        num_bigint::BigInt::from(1),
    );
    m
}

/// Theta of a path under the composition rule
/// `Theta(g1 g2) = Theta(g2) . Theta(g1)`; the empty path gives the identity.
pub fn theta_path(path: &Path) -> IntMatrix {
    let d = path.start.d();
    let mut m = IntMatrix::identity(d);
    for a in path.arrows() {
        // left-multiply by I + E_{loser,winner}
        m.add_row_to_row(a.winner as usize, a.loser as usize);
    }
    m
}

/// A Rauzy class: the orbit of a permutation under the top and bottom
/// operations, with vertices in breadth-first discovery order.
#[derive(Debug, Clone)]
pub struct RauzyClass {
    vertices: Vec<Permutation>,
    index: HashMap<(Vec<u8>, Vec<u8>), usize>,
    top_next: Vec<usize>,
    bottom_next: Vec<usize>,
}

pub const DEFAULT_CLASS_CAP: usize = 1_000_000;

/// Breadth-first enumeration of the Rauzy class of `rep`; the vertex order
/// is the deterministic BFS discovery order (top neighbour first).
pub fn enumerate_class(rep: &Permutation, cap: usize) -> Result<RauzyClass, RauzyError> {
    if !rep.is_irreducible() {
        return Err(RauzyError::InvalidInput(format!(
            "{} is not irreducible",
            rep.to_text()
        )));
    }
    let mut vertices = vec![rep.clone()];
    let mut index = HashMap::new();
    index.insert(key_of(rep), 0usize);
    let mut top_next = Vec::new();
    let mut bottom_next = Vec::new();
    let mut head = 0;
    while head < vertices.len() {
        let v = vertices[head].clone();
        let neighbour = |p: Permutation,
                             vertices: &mut Vec<Permutation>,
                             index: &mut HashMap<(Vec<u8>, Vec<u8>), usize>|
         -> Result<usize, RauzyError> {
            let k = key_of(&p);
            if let Some(&i) = index.get(&k) {
                return Ok(i);
            }
            if vertices.len() >= cap {
                return Err(RauzyError::ClassCapExceeded(cap));
            }
            let i = vertices.len();
            vertices.push(p);
            index.insert(k, i);
            Ok(i)
        };
        let t = neighbour(apply_top(&v), &mut vertices, &mut index)?;
        let b = neighbour(apply_bottom(&v), &mut vertices, &mut index)?;
        top_next.push(t);
        bottom_next.push(b);
        head += 1;
    }
    Ok(RauzyClass {
        vertices,
        index,
        top_next,
        bottom_next,
    })
}

fn key_of(p: &Permutation) -> (Vec<u8>, Vec<u8>) {
    (p.top_row().to_vec(), p.bottom_row().to_vec())
}

impl RauzyClass {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn d(&self) -> usize {
        self.vertices[0].d()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.vertices[0].alphabet()
    }

    pub fn vertex(&self, id: usize) -> &Permutation {
        &self.vertices[id]
    }

    pub fn vertices(&self) -> &[Permutation] {
        &self.vertices
    }

    pub fn representative(&self) -> &Permutation {
        &self.vertices[0]
    }

    pub fn id_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(&key_of(p)).copied()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.id_of(p).is_some()
    }

    pub fn next(&self, id: usize, kind: ArrowKind) -> usize {
        match kind {
            ArrowKind::Top => self.top_next[id],
            ArrowKind::Bottom => self.bottom_next[id],
        }
    }

    pub fn arrow(&self, id: usize, kind: ArrowKind) -> Arrow {
        make_arrow(&self.vertices[id], kind)
    }

    /// All arrows in vertex order, top arrow before bottom arrow.
    pub fn arrows(&self) -> impl Iterator<Item = Arrow> + '_ {
        (0..self.len()).flat_map(move |id| {
            [
                self.arrow(id, ArrowKind::Top),
                self.arrow(id, ArrowKind::Bottom),
            ]
        })
    }

    /// For every vertex, the kind of the first arrow of a shortest path to
    /// `base` using only arrows allowed by the filter; `None` if unreachable.
    /// Entry at `base` is `None` (empty path).
    pub fn return_kinds(
        &self,
        base: usize,
        allowed: impl Fn(usize, ArrowKind) -> bool,
    ) -> Vec<Option<ArrowKind>> {
        let n = self.len();
        let mut rev: Vec<Vec<(usize, ArrowKind)>> = vec![Vec::new(); n];
        for u in 0..n {
            for kind in [ArrowKind::Top, ArrowKind::Bottom] {
                if allowed(u, kind) {
                    rev[self.next(u, kind)].push((u, kind));
                }
            }
        }
        let mut route: Vec<Option<ArrowKind>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[base] = true;
        let mut frontier = vec![base];
        while !frontier.is_empty() {
            let mut next_frontier = Vec::new();
            for &v in &frontier {
                for &(u, kind) in &rev[v] {
                    if !seen[u] {
                        seen[u] = true;
                        route[u] = Some(kind);
                        next_frontier.push(u);
                    }
                }
            }
            frontier = next_frontier;
        }
        route
    }

    /// Close a walk from `from` back to `base` along a shortest allowed
    /// route; `None` if `base` is unreachable under the filter.
    pub fn close_to_base(
        &self,
        from: usize,
        base: usize,
        route: &[Option<ArrowKind>],
    ) -> Option<Vec<ArrowKind>> {
        let mut kinds = Vec::new();
        let mut v = from;
        while v != base {
            let k = route[v]?;
            kinds.push(k);
            v = self.next(v, k);
            if kinds.len() > self.len() {
                return None; // broken route table
            }
        }
        Some(kinds)
    }

    /// Seeded uniform random loop at `base`: a free walk of `walk_len` fair
    /// coin-flip steps followed by the shortest completion back to `base`.
    pub fn random_loop(
        &self,
        rng: &mut impl Rng,
        base: usize,
        walk_len: usize,
        route: &[Option<ArrowKind>],
    ) -> Option<Path> {
        let mut kinds = Vec::with_capacity(walk_len + 8);
        let mut v = base;
        for _ in 0..walk_len {
            let k = if rng.random_bool(0.5) {
                ArrowKind::Top
            } else {
                ArrowKind::Bottom
            };
            kinds.push(k);
            v = self.next(v, k);
        }
        kinds.extend(self.close_to_base(v, base, route)?);
        Some(Path::from_kinds(self.vertices[base].clone(), kinds))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<String> = self.vertices.iter().map(|p| p.to_text()).collect();
        let arrows: Vec<serde_json::Value> = self
            .arrows()
            .map(|a| {
                json!({
                    "start": a.start.to_text(),
                    "end": a.end.to_text(),
                    "kind": a.kind.to_string(),
                    "winner": a.start.alphabet().letter(a.winner).to_string(),
                    "loser": a.start.alphabet().letter(a.loser).to_string(),
                })
            })
            .collect();
        json!({ "vertices": vertices, "arrows": arrows })
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph rauzy {\n");
        for a in self.arrows() {
            let al = a.start.alphabet();
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{} w={} l={}\"];\n",
                a.start.to_text(),
                a.end.to_text(),
                a.kind.letter(),
                al.letter(a.winner),
                al.letter(a.loser),
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// All Rauzy classes on d letters up to relabelling, each represented by the
/// class of the lexicographically first irreducible monodromy not yet seen.
/// Deterministic order.
pub fn all_classes(d: usize, cap: usize) -> Result<Vec<RauzyClass>, RauzyError> {
    let mut seen: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut mono: Vec<u8> = (0..d as u8).collect();
    loop {
        if !seen.contains(&mono) {
            let rep = Permutation::from_monodromy(&mono)?;
            if rep.is_irreducible() {
                let class = enumerate_class(&rep, cap)?;
                for v in class.vertices() {
                    seen.insert(v.monodromy());
                }
                out.push(class);
            }
        }
        if !next_permutation(&mut mono) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(a: &mut [u8]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// Parameters of a simple extension applied uniformly over a Rauzy class:
/// the fresh symbol and the two insertion-target letters of the reduced
/// alphabet.
#[derive(Debug, Clone, Copy)]
pub struct ExtensionDatum {
    pub new_symbol: char,
    pub top_target: u8,
    pub bottom_target: u8,
}

/// The extension map on vertices: insert the fresh letter before the top
/// target in the top row and before the bottom target in the bottom row.
pub fn extend_perm(p: &Permutation, datum: &ExtensionDatum) -> Result<Permutation, RauzyError> {
    Ok(p.simple_extension(datum.new_symbol, datum.top_target, datum.bottom_target)?)
}

/// The extension map on paths. An arrow lifts to a single arrow of the same
/// kind, except in the two boundary cases where it expands into two arrows
/// of its own kind: a bottom arrow whose start has the top target last in
/// the top row, and a top arrow whose start has the bottom target last in
/// the bottom row.
pub fn extend_path(path: &Path, datum: &ExtensionDatum) -> Result<Path, RauzyError> {
    let mut out = Path::empty(extend_perm(path.start(), datum)?);
    for a in path.arrows() {
        let double = match a.kind {
            ArrowKind::Bottom => a.start.last_top() == datum.top_target,
            ArrowKind::Top => a.start.last_bottom() == datum.bottom_target,
        };
        let steps = if double { 2 } else { 1 };
        for _ in 0..steps {
            let lifted = make_arrow(out.end(), a.kind);
            out.push(lifted)?;
        }
        let expected = extend_perm(&a.end, datum)?;
        if out.end() != &expected {
            return Err(RauzyError::InvalidInput(format!(
                "extension map failed to land on the image vertex at {}",
                a.end.to_text()
            )));
        }
    }
    Ok(out)
}

/// Coordinate projection deleting the fresh letter: a (d-1) x d integer
/// matrix with `P e_B = 0` and `P e_x = e_x` otherwise.
pub fn projection_matrix(ext_d: usize, b_index: u8) -> IntMatrix {
    let mut m = IntMatrix::zeros(ext_d - 1, ext_d);
    let mut row = 0;
    for col in 0..ext_d {
        if col == b_index as usize {
            continue;
        }
        m.set(row, col, num_bigint::BigInt::from(1));
        row += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Int;
    use rand::SeedableRng;

    fn p(text: &str) -> Permutation {
        Permutation::parse(text).unwrap()
    }

    #[test]
    fn top_and_bottom_operations() {
        assert_eq!(apply_top(&p("abc/cba")).to_text(), "abc/cab");
        assert_eq!(apply_bottom(&p("abc/cba")).to_text(), "acb/cba");
        assert_eq!(apply_top(&p("ab/ba")).to_text(), "ab/ba");
        assert_eq!(apply_bottom(&p("ab/ba")).to_text(), "ab/ba");
    }

    #[test]
    fn operations_preserve_irreducibility_and_first_letters() {
        for text in ["abcd/dcba", "abcd/dabc", "abcde/edcba"] {
            let x = p(text);
            for q in [apply_top(&x), apply_bottom(&x)] {
                assert!(q.is_irreducible());
                assert_eq!(q.first_top(), x.first_top());
                assert_eq!(q.first_bottom(), x.first_bottom());
            }
        }
    }

    #[test]
    fn arrows_carry_winner_and_loser() {
        let a = make_arrow(&p("abc/cba"), ArrowKind::Top);
        let al = a.start.alphabet().clone();
        assert_eq!(al.letter(a.winner), 'c');
        assert_eq!(al.letter(a.loser), 'a');
        assert_eq!(a.end.to_text(), "abc/cab");

        let b = make_arrow(&p("ab/ba"), ArrowKind::Bottom);
        assert_eq!(b.start.alphabet().letter(b.winner), 'a');
        assert_eq!(b.start.alphabet().letter(b.loser), 'b');
        assert_ne!(b.winner, b.loser);
    }

    #[test]
    fn class_sizes_small() {
        assert_eq!(enumerate_class(&p("ab/ba"), 100).unwrap().len(), 1);
        assert_eq!(enumerate_class(&p("abc/cba"), 100).unwrap().len(), 3);
        assert_eq!(enumerate_class(&p("abcd/dcba"), 100).unwrap().len(), 7);
    }

    #[test]
    fn class_cap_is_enforced() {
        assert!(matches!(
            enumerate_class(&p("abcd/dcba"), 3),
            Err(RauzyError::ClassCapExceeded(3))
        ));
    }

    #[test]
    fn degree_two_in_two_out() {
        let class = enumerate_class(&p("abcde/edcba"), 10_000).unwrap();
        let n = class.len();
        let mut in_top = vec![0usize; n];
        let mut in_bottom = vec![0usize; n];
        for v in 0..n {
            in_top[class.next(v, ArrowKind::Top)] += 1;
            in_bottom[class.next(v, ArrowKind::Bottom)] += 1;
        }
        assert!(in_top.iter().all(|&c| c == 1));
        assert!(in_bottom.iter().all(|&c| c == 1));
    }

    #[test]
    fn theta_single_arrows() {
        // bottom arrow at ab/ba: winner a, loser b
        let a = make_arrow(&p("ab/ba"), ArrowKind::Bottom);
        let m = theta(&a);
        assert_eq!(*m.get(0, 0), Int::from(1));
        assert_eq!(*m.get(1, 0), Int::from(1));
        assert_eq!(*m.get(0, 1), Int::from(0));
        assert_eq!(*m.get(1, 1), Int::from(1));
        assert_eq!(m.det(), Int::from(1));

        // top arrow: winner b, loser a -> column b = e_a + e_b
        let t = make_arrow(&p("ab/ba"), ArrowKind::Top);
        let mt = theta(&t);
        assert_eq!(*mt.get(0, 1), Int::from(1));
        assert_eq!(*mt.get(1, 1), Int::from(1));
        assert_eq!(*mt.get(0, 0), Int::from(1));
        assert_eq!(*mt.get(1, 0), Int::from(0));
    }

    #[test]
    fn theta_path_composition() {
        let start = p("ab/ba");
        let empty = Path::empty(start.clone());
        assert_eq!(theta_path(&empty), IntMatrix::identity(2));

        let two_bottoms =
            Path::from_kinds(start.clone(), [ArrowKind::Bottom, ArrowKind::Bottom]);
        let m = theta_path(&two_bottoms);
        // Theta e_a = e_a + 2 e_b
        assert_eq!(*m.get(0, 0), Int::from(1));
        assert_eq!(*m.get(1, 0), Int::from(2));
        assert_eq!(*m.get(1, 1), Int::from(1));

        // composition law against explicit products on a random path
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let class = enumerate_class(&p("abcd/dcba"), 100).unwrap();
        let route = class.return_kinds(0, |_, _| true);
        for _ in 0..20 {
            let path = class.random_loop(&mut rng, 0, 15, &route).unwrap();
            let mut prod = IntMatrix::identity(4);
            for a in path.arrows() {
                prod = theta(a).mul(&prod);
            }
            assert_eq!(prod, theta_path(&path));
            assert_eq!(prod.det(), Int::from(1));
            assert!(prod.is_nonnegative());
        }
    }

    #[test]
    fn extension_map_cases() {
        // pi' = ac/ca, insert b before c in both rows: abc/bca
        let x = p("ac/ca");
        let c = x.alphabet().index_of('c').unwrap();
        let datum = ExtensionDatum {
            new_symbol: 'b',
            top_target: c,
            bottom_target: c,
        };
        // bottom arrow with top target last in the top row -> two bottoms
        let gamma = Path::from_kinds(x.clone(), [ArrowKind::Bottom]);
        let lifted = extend_path(&gamma, &datum).unwrap();
        assert_eq!(lifted.len(), 2);
        assert!(lifted.arrows().iter().all(|a| a.kind == ArrowKind::Bottom));
        assert_eq!(lifted.start().to_text(), "abc/bca");
        assert!(lifted.is_loop());

        // top arrow with bottom target last in the bottom row -> two tops
        let a_idx = x.alphabet().index_of('a').unwrap();
        let datum2 = ExtensionDatum {
            new_symbol: 'b',
            top_target: c,
            bottom_target: a_idx,
        };
        let gamma2 = Path::from_kinds(x.clone(), [ArrowKind::Top]);
        let lifted2 = extend_path(&gamma2, &datum2).unwrap();
        assert_eq!(lifted2.len(), 2);
        assert!(lifted2.arrows().iter().all(|a| a.kind == ArrowKind::Top));

        // ordinary case copies the arrow kind
        let y = p("acd/cda");
        let datum3 = ExtensionDatum {
            new_symbol: 'b',
            top_target: y.alphabet().index_of('c').unwrap(),
            bottom_target: y.alphabet().index_of('d').unwrap(),
        };
        let gamma3 = Path::from_kinds(y.clone(), [ArrowKind::Top]);
        let lifted3 = extend_path(&gamma3, &datum3).unwrap();
        assert_eq!(lifted3.len(), 1);
        assert_eq!(lifted3.arrows()[0].kind, ArrowKind::Top);
    }

    #[test]
    fn intertwining_on_random_paths() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = p("acd/cda");
        let class = enumerate_class(&x, 10_000).unwrap();
        let route = class.return_kinds(0, |_, _| true);
        for c in 0..3u8 {
            for dd in 0..3u8 {
                if c == x.first_top() && dd == x.first_bottom() {
                    continue;
                }
                let datum = ExtensionDatum {
                    new_symbol: 'b',
                    top_target: c,
                    bottom_target: dd,
                };
                for _ in 0..10 {
                    let gamma = class.random_loop(&mut rng, 0, 8, &route).unwrap();
                    let lifted = extend_path(&gamma, &datum).unwrap();
                    let b_idx = lifted.start().alphabet().index_of('b').unwrap();
                    let proj = projection_matrix(4, b_idx);
                    let lhs = proj.mul(&theta_path(&lifted));
                    let rhs = theta_path(&gamma).mul(&proj);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn all_classes_counts() {
        let c2 = all_classes(2, 1000).unwrap();
        assert_eq!(c2.len(), 1);
        assert_eq!(c2[0].len(), 1);
        let c3 = all_classes(3, 1000).unwrap();
        assert_eq!(c3.len(), 1);
        assert_eq!(c3[0].len(), 3);

        // Distinct monodromies across all classes = all irreducible one-row
        // permutations (1, 3, 13, 71 for d = 2..5), with no overlap between
        // classes. A class may cover a monodromy several times: the orbit of
        // abcd/dabc visits 6 monodromies twice (12 vertices).
        let c4 = all_classes(4, 1000).unwrap();
        assert_eq!(c4.len(), 2);
        let mono_sets: Vec<std::collections::HashSet<Vec<u8>>> = c4
            .iter()
            .map(|c| c.vertices().iter().map(|v| v.monodromy()).collect())
            .collect();
        assert_eq!(mono_sets.iter().map(|s| s.len()).sum::<usize>(), 13);
        assert!(mono_sets[0].is_disjoint(&mono_sets[1]));
        let sizes: Vec<usize> = c4.iter().map(|c| c.len()).collect();
        assert!(sizes.contains(&7) && sizes.contains(&12));

        let c5 = all_classes(5, 10_000).unwrap();
        let distinct: usize = c5
            .iter()
            .map(|c| {
                c.vertices()
                    .iter()
                    .map(|v| v.monodromy())
                    .collect::<std::collections::HashSet<_>>()
                    .len()
            })
            .sum();
        assert_eq!(distinct, 71);
    }

    #[test]
    fn dot_and_json_exports() {
        let class = enumerate_class(&p("abc/cba"), 100).unwrap();
        let dot = class.to_dot();
        assert!(dot.starts_with("digraph rauzy {"));
        assert!(dot.contains("\"abc/cba\" -> \"abc/cab\""));
        let j = class.to_json();
        assert_eq!(j["vertices"].as_array().unwrap().len(), 3);
        assert_eq!(j["arrows"].as_array().unwrap().len(), 6);
    }
}
