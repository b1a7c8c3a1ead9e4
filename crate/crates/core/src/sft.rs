//! Subshifts of finite type: alphabets, 0/1 adjacency, words and the
//! standard topological predicates.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;

/// Ordered set of distinct symbol labels. All matrices index symbols by
/// their position here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, T>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.symbols[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownSymbol(label.to_string()))
    }

    /// Single-character labels are concatenated, longer ones joined by spaces.
    pub fn render(&self, symbols: &[usize]) -> String {
        let sep = if self.symbols.iter().all(|s| s.chars().count() == 1) { "" } else { " " };
        symbols.iter().map(|&i| self.label(i)).collect::<Vec<_>>().join(sep)
    }

    /// Inverse of [`Alphabet::render`]: splits on whitespace or commas when
    /// present, otherwise reads one label per character.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        let text = text.trim();
        if text.contains(|c: char| c.is_whitespace() || c == ',') {
            text.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| self.index_of(t))
                .collect()
        } else if let Ok(i) = self.index_of(text) {
            Ok(vec![i])
        } else {
            text.chars().map(|c| self.index_of(&c.to_string())).collect()
        }
    }
}

/// A finite word, positioned at `offset` in a one-sided sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    pub symbols: Vec<usize>,
    pub offset: usize,
}

impl Word {
    pub fn new(symbols: Vec<usize>) -> Self {
        Word { symbols, offset: 0 }
    }

    pub fn at(offset: usize, symbols: Vec<usize>) -> Self {
        Word { symbols, offset }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.symbols
    }

    /// Position one past the last symbol.
    pub fn end(&self) -> usize {
        self.offset + self.symbols.len()
    }
}

impl From<Vec<usize>> for Word {
    fn from(symbols: Vec<usize>) -> Self {
        Word::new(symbols)
    }
}

impl From<&[usize]> for Word {
    fn from(symbols: &[usize]) -> Self {
        Word::new(symbols.to_vec())
    }
}

/// One-sided subshift of finite type given by a square 0/1 adjacency matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftSpec {
    alphabet: Alphabet,
    adjacency: BitMatrix,
}

/// Maps recoded symbols back to the blocks they stand for.
pub type BlockDictionary = Vec<Word>;

impl SubshiftSpec {
    pub fn new(alphabet: Alphabet, adjacency: BitMatrix) -> Result<Self> {
        if adjacency.rows() != alphabet.len() {
            return Err(Error::DimensionMismatch { expected: alphabet.len(), found: adjacency.rows() });
        }
        if adjacency.cols() != alphabet.len() {
            return Err(Error::DimensionMismatch { expected: alphabet.len(), found: adjacency.cols() });
        }
        Ok(SubshiftSpec { alphabet, adjacency })
    }

    /// Builds from rows of 0/1 integers.
    pub fn from_rows(alphabet: Alphabet, rows: &[Vec<u8>]) -> Result<Self> {
        let n = alphabet.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rows.len() });
        }
        let mut m = BitMatrix::new(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => return Err(Error::NotBinary { row: i, col: j }),
                }
            }
        }
        Self::new(alphabet, m)
    }

    pub fn full(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        SubshiftSpec { alphabet, adjacency: BitMatrix::ones(n, n) }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn adjacency(&self) -> &BitMatrix {
        &self.adjacency
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a, b)
    }

    pub fn is_allowed(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.size()) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// `reach[i][j]` iff there is a path of length ≥ 1 from `i` to `j`.
    pub fn reachability(&self) -> BitMatrix {
        let n = self.size();
        let mut reach = BitMatrix::new(n, n);
        for start in 0..n {
            let mut queue: VecDeque<usize> = self.adjacency.row_ones(start).collect();
            for &s in &queue {
                reach.set(start, s, true);
            }
            while let Some(u) = queue.pop_front() {
                for v in self.adjacency.row_ones(u) {
                    if !reach.get(start, v) {
                        reach.set(start, v, true);
                        queue.push_back(v);
                    }
                }
            }
        }
        reach
    }

    /// Strongly connected components, each sorted, ordered by smallest member.
    /// States on no cycle form singleton components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        let reach = self.reachability();
        let mut assigned = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if assigned[i] {
                continue;
            }
            let comp: Vec<usize> = (0..n)
                .filter(|&j| j == i || (reach.get(i, j) && reach.get(j, i)))
                .collect();
            for &j in &comp {
                assigned[j] = true;
            }
            out.push(comp);
        }
        out
    }

    pub fn is_irreducible(&self) -> bool {
        let reach = self.reachability();
        reach.is_positive()
    }

    /// Period (gcd of return lengths) of each state; `0` for states on no cycle.
    pub fn periods(&self) -> Vec<usize> {
        let n = self.size();
        let reach = self.reachability();
        let mut period = vec![0usize; n];
        for comp in self.components() {
            let root = comp[0];
            if !reach.get(root, root) {
                continue;
            }
            let inside = |s: usize| comp.binary_search(&s).is_ok();
            let mut level = vec![usize::MAX; n];
            level[root] = 0;
            let mut queue = VecDeque::from([root]);
            let mut g = 0usize;
            while let Some(u) = queue.pop_front() {
                for v in self.adjacency.row_ones(u).filter(|&v| inside(v)) {
                    if level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    } else {
                        g = g.gcd(&(level[u] + 1).abs_diff(level[v]));
                    }
                }
            }
            for &s in &comp {
                period[s] = g;
            }
        }
        period
    }

    pub fn is_aperiodic(&self) -> bool {
        self.periods().iter().all(|&p| p == 1)
    }

    /// Some boolean power up to the Wielandt bound `(n-1)^2 + 1` is positive.
    pub fn is_primitive(&self) -> bool {
        let n = self.size();
        let bound = (n - 1) * (n - 1) + 1;
        let mut power = self.adjacency.clone();
        for _ in 1..bound {
            if power.is_positive() {
                return true;
            }
            power = power.mul(&self.adjacency);
        }
        power.is_positive()
    }

    /// All allowed words of length `n`, in lexicographic order of the
    /// alphabet ordering.
    pub fn allowed_words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut stack: Vec<Vec<usize>> = (0..self.size()).rev().map(|s| vec![s]).collect();
        while let Some(word) = stack.pop() {
            if word.len() == n {
                out.push(Word::new(word));
                continue;
            }
            let last = *word.last().expect("nonempty");
            let next: Vec<usize> = self.adjacency.row_ones(last).collect();
            for &s in next.iter().rev() {
                let mut w = word.clone();
                w.push(s);
                stack.push(w);
            }
        }
        out
    }

    /// Natural log of the spectral radius of the adjacency. For reducible
    /// shifts this is the maximum over strongly connected components.
    pub fn topological_entropy(&self) -> Result<f64> {
        let reach = self.reachability();
        let mut best: Option<f64> = None;
        for comp in self.components() {
            if !reach.get(comp[0], comp[0]) {
                continue;
            }
            let sub = self.adjacency.select(&comp, &comp);
            let rho = perron_root(&sub).0;
            best = Some(best.map_or(rho, |b: f64| b.max(rho)));
        }
        best.map(Float::ln).ok_or(Error::EmptyShift)
    }

    /// Removes, repeatedly, symbols without a predecessor or successor.
    /// Returns the trimmed shift and the kept original indices.
    pub fn trim(&self) -> (SubshiftSpec, Vec<usize>) {
        let mut keep: Vec<usize> = (0..self.size()).collect();
        loop {
            let next: Vec<usize> = keep
                .iter()
                .copied()
                .filter(|&s| {
                    keep.iter().any(|&t| self.allows(s, t)) && keep.iter().any(|&t| self.allows(t, s))
                })
                .collect();
            if next.len() == keep.len() {
                break;
            }
            keep = next;
        }
        let labels: Vec<String> = keep.iter().map(|&s| self.alphabet.label(s).to_string()).collect();
        let alphabet = Alphabet { symbols: labels };
        let adjacency = self.adjacency.select(&keep, &keep);
        (SubshiftSpec { alphabet, adjacency }, keep)
    }

    /// Recodes onto the alphabet of allowed `k`-blocks; two blocks may follow
    /// each other iff they overlap in `k - 1` symbols. `k = 1` returns the
    /// shift unchanged with the identity dictionary.
    pub fn higher_block_recode(&self, k: usize) -> Result<(SubshiftSpec, BlockDictionary)> {
        if k == 0 {
            return Err(Error::InvalidBlockLength);
        }
        if k == 1 {
            let dict = (0..self.size()).map(|s| Word::new(vec![s])).collect();
            return Ok((self.clone(), dict));
        }
        let blocks = self.allowed_words(k);
        if blocks.is_empty() {
            return Err(Error::NoAllowedBlocks(k));
        }
        let labels: Vec<String> = blocks.iter().map(|b| self.alphabet.render(b.as_slice())).collect();
        let labels = if has_duplicates(&labels) {
            blocks
                .iter()
                .map(|b| {
                    b.symbols.iter().map(|&s| self.alphabet.label(s)).collect::<Vec<_>>().join(".")
                })
                .collect()
        } else {
            labels
        };
        let alphabet = Alphabet::new(labels).map_err(|_| Error::DuplicateSymbol(format!("{k}-block")))?;
        let adjacency = BitMatrix::from_fn(blocks.len(), blocks.len(), |i, j| {
            blocks[i].symbols[1..] == blocks[j].symbols[..k - 1]
        });
        Ok((SubshiftSpec { alphabet, adjacency }, blocks))
    }
}

fn has_duplicates(labels: &[String]) -> bool {
    labels.iter().enumerate().any(|(i, l)| labels[..i].contains(l))
}

/// Perron root and right Perron vector of an irreducible nonnegative 0/1
/// matrix, by power iteration on `A + I` with Collatz–Wielandt bracketing.
pub(crate) fn perron_root(a: &BitMatrix) -> (f64, Vec<f64>) {
    const TOL: f64 = 1e-12;
    const MAX_ITER: usize = 100_000;
    let n = a.rows();
    let mut x = vec![1.0f64; n];
    let mut estimate = 0.0;
    for _ in 0..MAX_ITER {
        let y: Vec<f64> = (0..n).map(|i| x[i] + a.row_ones(i).map(|j| x[j]).sum::<f64>()).collect();
        let (lo, hi) = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| yi / xi)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        let norm = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        estimate = 0.5 * (lo + hi) - 1.0;
        if hi - lo < TOL * hi.max(1.0) {
            break;
        }
    }
    (estimate, x)
}
