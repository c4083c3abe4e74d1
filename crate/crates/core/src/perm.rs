//! Alphabets, permutation pairs and their structural predicates, plus the
//! simple reduction / simple extension combinatorics relating alphabets of
//! neighbouring sizes.
//!
//! A permutation here is a pair of rows over a finite alphabet: the top row
//! lists the subintervals in their original order, the bottom row in the
//! order after the exchange. Text form is `"top/bottom"`, e.g. `"abcd/dcba"`.

use std::fmt;
use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("deleting the letter does not yield an irreducible permutation")]
    NotAReduction,
}

/// Ordered alphabet; the construction order is the canonical order used by
/// every enumeration and pivot choice in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new(letters: Vec<char>) -> Result<Self, PermError> {
        if letters.len() < 2 {
            return Err(PermError::InvalidInput(
                "alphabet needs at least 2 symbols".into(),
            ));
        }
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(PermError::InvalidInput(format!(
                    "duplicate symbol '{c}' in alphabet"
                )));
            }
        }
        Ok(Alphabet { letters })
    }

    /// `a`, `b`, `c`, ... of the requested size.
    pub fn latin(d: usize) -> Self {
        assert!((2..=26).contains(&d));
        Alphabet {
            letters: (0..d).map(|i| (b'a' + i as u8) as char).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, idx: u8) -> char {
        self.letters[idx as usize]
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.letters.iter().position(|&l| l == c).map(|i| i as u8)
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }
}

/// Pair of bijections alphabet -> positions, stored as position->letter rows
/// with letter->position indexes maintained alongside.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    alphabet: Arc<Alphabet>,
    top: Vec<u8>,
    bottom: Vec<u8>,
    top_pos: Vec<u8>,
    bottom_pos: Vec<u8>,
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Permutation {
    pub fn new(alphabet: Arc<Alphabet>, top: Vec<u8>, bottom: Vec<u8>) -> Result<Self, PermError> {
        let d = alphabet.len();
        if top.len() != d || bottom.len() != d {
            return Err(PermError::InvalidInput("row length != alphabet size".into()));
        }
        for row in [&top, &bottom] {
            let mut seen = vec![false; d];
            for &l in row {
                if (l as usize) >= d || seen[l as usize] {
                    return Err(PermError::InvalidInput("row is not a bijection".into()));
                }
                seen[l as usize] = true;
            }
        }
        let mut top_pos = vec![0u8; d];
        let mut bottom_pos = vec![0u8; d];
        for (p, &l) in top.iter().enumerate() {
            top_pos[l as usize] = p as u8;
        }
        for (p, &l) in bottom.iter().enumerate() {
            bottom_pos[l as usize] = p as u8;
        }
        Ok(Permutation {
            alphabet,
            top,
            bottom,
            top_pos,
            bottom_pos,
        })
    }

    /// Parse `"top/bottom"` text, e.g. `"abcd/dcba"`. The alphabet order is
    /// the order of first appearance in the top row.
    pub fn parse(text: &str) -> Result<Self, PermError> {
        let (t, b) = text
            .split_once('/')
            .ok_or_else(|| PermError::InvalidInput("missing '/' separator".into()))?;
        let top_chars: Vec<char> = t.trim().chars().collect();
        let bottom_chars: Vec<char> = b.trim().chars().collect();
        let alphabet = Arc::new(Alphabet::new(top_chars.clone())?);
        let top: Vec<u8> = (0..top_chars.len() as u8).collect();
        let bottom: Vec<u8> = bottom_chars
            .iter()
            .map(|&c| {
                alphabet
                    .index_of(c)
                    .ok_or_else(|| PermError::InvalidInput(format!("unknown symbol '{c}'")))
            })
            .collect::<Result<_, _>>()?;
        Self::new(alphabet, top, bottom)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &l in &self.top {
            s.push(self.alphabet.letter(l));
        }
        s.push('/');
        for &l in &self.bottom {
            s.push(self.alphabet.letter(l));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "top": self.top.iter().map(|&l| self.alphabet.letter(l).to_string()).collect::<Vec<_>>(),
            "bottom": self.bottom.iter().map(|&l| self.alphabet.letter(l).to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn d(&self) -> usize {
        self.top.len()
    }

    pub fn top_row(&self) -> &[u8] {
        &self.top
    }

    pub fn bottom_row(&self) -> &[u8] {
        &self.bottom
    }

    /// 0-based position of a letter in the top row.
    pub fn top_pos(&self, letter: u8) -> usize {
        self.top_pos[letter as usize] as usize
    }

    /// 0-based position of a letter in the bottom row.
    pub fn bottom_pos(&self, letter: u8) -> usize {
        self.bottom_pos[letter as usize] as usize
    }

    pub fn first_top(&self) -> u8 {
        self.top[0]
    }

    pub fn first_bottom(&self) -> u8 {
        self.bottom[0]
    }

    pub fn last_top(&self) -> u8 {
        *self.top.last().unwrap()
    }

    pub fn last_bottom(&self) -> u8 {
        *self.bottom.last().unwrap()
    }

    /// One-line form: position in the top row -> position in the bottom row.
    /// Two permutation pairs describe the same exchange up to relabelling
    /// exactly when their monodromies agree.
    pub fn monodromy(&self) -> Vec<u8> {
        self.top.iter().map(|&l| self.bottom_pos[l as usize]).collect()
    }

    /// Pair with top row `a b c ...` realizing the given monodromy.
    pub fn from_monodromy(mono: &[u8]) -> Result<Self, PermError> {
        let d = mono.len();
        let alphabet = Arc::new(Alphabet::latin(d));
        let top: Vec<u8> = (0..d as u8).collect();
        let mut bottom = vec![0u8; d];
        for (i, &p) in mono.iter().enumerate() {
            if (p as usize) >= d {
                return Err(PermError::InvalidInput("monodromy out of range".into()));
            }
            bottom[p as usize] = i as u8;
        }
        Self::new(alphabet, top, bottom)
    }

    /// No proper prefix of the top row is a permutation of the same-size
    /// prefix of the bottom row.
    pub fn is_irreducible(&self) -> bool {
        let mut top_mask: u64 = 0;
        let mut bottom_mask: u64 = 0;
        for k in 0..self.d() - 1 {
            top_mask |= 1 << self.top[k];
            bottom_mask |= 1 << self.bottom[k];
            if top_mask == bottom_mask {
                return false;
            }
        }
        true
    }

    /// First of the top is last of the bottom and vice versa.
    pub fn is_standard(&self) -> bool {
        self.first_top() == self.last_bottom() && self.first_bottom() == self.last_top()
    }

    /// For standard permutations on d >= 3 letters: some letter is second in
    /// both rows, or second-to-last in both rows. At d = 3 the two positions
    /// coincide and the definition applies literally.
    pub fn is_degenerate(&self) -> Result<bool, PermError> {
        Ok(self.degenerate_letter()?.is_some())
    }

    /// The doubled letter witnessing degeneracy, if any.
    pub fn degenerate_letter(&self) -> Result<Option<u8>, PermError> {
        if !self.is_standard() || self.d() < 3 {
            return Err(PermError::InvalidInput(
                "degeneracy is defined for standard permutations with d >= 3".into(),
            ));
        }
        let d = self.d();
        if self.top[1] == self.bottom[1] {
            return Ok(Some(self.top[1]));
        }
        if self.top[d - 2] == self.bottom[d - 2] {
            return Ok(Some(self.top[d - 2]));
        }
        Ok(None)
    }

    /// For standard permutations on d >= 4 letters: deleting the first and
    /// last letters of both rows leaves an irreducible permutation.
    pub fn is_good(&self) -> Result<bool, PermError> {
        if !self.is_standard() || self.d() < 4 {
            return Err(PermError::InvalidInput(
                "goodness is defined for standard permutations with d >= 4".into(),
            ));
        }
        Ok(self.forget_outer()?.is_irreducible())
    }

    /// Forget the first (and last) letters of a standard permutation.
    pub fn forget_outer(&self) -> Result<Permutation, PermError> {
        if !self.is_standard() || self.d() < 4 {
            return Err(PermError::InvalidInput(
                "outer deletion needs a standard permutation with d >= 4".into(),
            ));
        }
        let a = self.first_top();
        let e = self.first_bottom();
        let mid = self.delete_letter(a)?;
        let e_new = mid
            .alphabet
            .index_of(self.alphabet.letter(e))
            .expect("letter survives first deletion");
        mid.delete_letter(e_new)
    }

    /// Delete one letter from both rows (alphabet shrinks by one, order kept).
    /// No irreducibility requirement on the result.
    pub fn delete_letter(&self, letter: u8) -> Result<Permutation, PermError> {
        let d = self.d();
        if (letter as usize) >= d {
            return Err(PermError::InvalidInput("letter not in alphabet".into()));
        }
        if d <= 2 {
            return Err(PermError::InvalidInput("cannot delete below d = 2".into()));
        }
        let letters: Vec<char> = self
            .alphabet
            .letters()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != letter as usize)
            .map(|(_, &c)| c)
            .collect();
        let alphabet = Arc::new(Alphabet::new(letters)?);
        let renumber = |l: u8| -> u8 {
            if l < letter {
                l
            } else {
                l - 1
            }
        };
        let top = self
            .top
            .iter()
            .filter(|&&l| l != letter)
            .map(|&l| renumber(l))
            .collect();
        let bottom = self
            .bottom
            .iter()
            .filter(|&&l| l != letter)
            .map(|&l| renumber(l))
            .collect();
        Permutation::new(alphabet, top, bottom)
    }

    /// Simple reduction: delete the letter and keep the result only when it
    /// is irreducible; otherwise report `NotAReduction`.
    pub fn simple_reduction(&self, letter: u8) -> Result<Permutation, PermError> {
        let reduced = self.delete_letter(letter)?;
        if reduced.is_irreducible() {
            Ok(reduced)
        } else {
            Err(PermError::NotAReduction)
        }
    }

    /// Simple extension: insert a fresh letter immediately before `c` in the
    /// top row and immediately before `d` in the bottom row. The result is
    /// always irreducible when `self` is.
    pub fn simple_extension(&self, b: char, c: u8, d: u8) -> Result<Permutation, PermError> {
        let old_d = self.d();
        if self.alphabet.index_of(b).is_some() {
            return Err(PermError::InvalidInput(format!(
                "symbol '{b}' already in the alphabet"
            )));
        }
        if (c as usize) >= old_d || (d as usize) >= old_d {
            return Err(PermError::InvalidInput("insertion target not in alphabet".into()));
        }
        if c == self.first_top() && d == self.first_bottom() {
            return Err(PermError::InvalidInput(
                "insertion before (first top, first bottom) is excluded".into(),
            ));
        }
        let mut letters = self.alphabet.letters().to_vec();
        letters.push(b);
        let alphabet = Arc::new(Alphabet::new(letters)?);
        let new_letter = old_d as u8;
        let insert_before = |row: &[u8], target: u8| -> Vec<u8> {
            let mut out = Vec::with_capacity(old_d + 1);
            for &l in row {
                if l == target {
                    out.push(new_letter);
                }
                out.push(l);
            }
            out
        };
        let ext = Permutation::new(
            alphabet,
            insert_before(&self.top, c),
            insert_before(&self.bottom, d),
        )?;
        debug_assert!(!self.is_irreducible() || ext.is_irreducible());
        Ok(ext)
    }

    /// A letter whose deletion is a simple reduction with `self` a simple
    /// extension of the result. Case analysis on the positions of the first
    /// letters; the two "arbitrary" cases are fixed deterministically (the
    /// first top letter, respectively the first letter in canonical order
    /// outside {first top, first bottom}).
    pub fn find_reducing_letter(&self) -> Result<u8, PermError> {
        if self.d() < 3 || !self.is_irreducible() {
            return Err(PermError::InvalidInput(
                "needs an irreducible permutation with d >= 3".into(),
            ));
        }
        let a = self.first_top();
        let e = self.first_bottom();
        let pe = self.top_pos(e);
        let pa = self.bottom_pos(a);
        // tied non-final positions admit either first letter; we fix the
        // first top letter so the choice is deterministic
        let b = if pe < pa {
            e
        } else if pa < pe || pe < self.d() - 1 {
            a
        } else {
            (0..self.d() as u8)
                .find(|&l| l != a && l != e)
                .expect("d >= 3 leaves a middle letter")
        };
        debug_assert!(self.simple_reduction(b).is_ok());
        Ok(b)
    }
}
