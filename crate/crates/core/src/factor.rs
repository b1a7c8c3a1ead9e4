//! One-block factor maps, the induced image shift, fibre windows and the
//! fibre-mixing decision.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::BitMatrix;
use crate::sft::{Alphabet, SubshiftSpec, Word};

/// Surjective symbol map `π: 𝒜 → ℬ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorMap {
    source: Alphabet,
    target: Alphabet,
    assign: Vec<usize>,
    preimages: Vec<Vec<usize>>,
}

impl FactorMap {
    pub fn new(source: Alphabet, target: Alphabet, assign: Vec<usize>) -> Result<Self> {
        if assign.len() != source.len() {
            return Err(Error::DimensionMismatch { expected: source.len(), found: assign.len() });
        }
        if source.len() < target.len() {
            return Err(Error::FactorTooLarge { domain: source.len(), image: target.len() });
        }
        let mut preimages = vec![Vec::new(); target.len()];
        for (a, &b) in assign.iter().enumerate() {
            if b >= target.len() {
                return Err(Error::DimensionMismatch { expected: target.len(), found: b + 1 });
            }
            preimages[b].push(a);
        }
        if let Some(b) = preimages.iter().position(Vec::is_empty) {
            return Err(Error::NotSurjective(target.label(b).to_string()));
        }
        Ok(FactorMap { source, target, assign, preimages })
    }

    /// Builds from one target label per source symbol; the target alphabet
    /// is the list of distinct labels in order of first appearance.
    pub fn from_labels<T: AsRef<str>>(source: Alphabet, labels: &[T]) -> Result<Self> {
        let mut target: Vec<&str> = Vec::new();
        for l in labels {
            if !target.contains(&l.as_ref()) {
                target.push(l.as_ref());
            }
        }
        let target = Alphabet::new(target.iter().copied())?;
        let assign = labels.iter().map(|l| target.index_of(l.as_ref())).collect::<Result<Vec<_>>>()?;
        Self::new(source, target, assign)
    }

    /// Identity code on `alphabet`.
    pub fn identity(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Self::new(alphabet.clone(), alphabet, (0..n).collect()).expect("identity is surjective")
    }

    pub fn source(&self) -> &Alphabet {
        &self.source
    }

    pub fn target(&self) -> &Alphabet {
        &self.target
    }

    pub fn image_of(&self, a: usize) -> usize {
        self.assign[a]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn preimage(&self, b: usize) -> &[usize] {
        &self.preimages[b]
    }

    pub fn apply(&self, word: &[usize]) -> Vec<usize> {
        word.iter().map(|&a| self.assign[a]).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.preimages.iter().all(|p| p.len() == 1)
    }
}

/// Outcome of the check that the candidate image adjacency describes
/// exactly the image of the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImageCheck {
    /// Every candidate word up to the searched length is realized.
    pub realized: bool,
    /// Shortest (then lexicographically least) unrealized candidate word.
    pub witness: Option<Word>,
    /// Longest word length examined.
    pub depth: usize,
    /// The follower-set automaton closed before `depth`, so the verdict
    /// holds for all lengths.
    pub exhausted: bool,
}

/// Domain shift, factor map, candidate image shift and the 0/1 fibre
/// submatrices `M_{b,b'}` on rows `π⁻¹(b)`, columns `π⁻¹(b')`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSystem {
    domain: SubshiftSpec,
    map: FactorMap,
    image: SubshiftSpec,
    edges: Vec<BitMatrix>,
}

/// `M'(b,b') = 1` iff some allowed domain transition maps onto `(b,b')`.
pub fn induced_image_adjacency(domain: &SubshiftSpec, map: &FactorMap) -> SubshiftSpec {
    let nb = map.target().len();
    let mut m = BitMatrix::new(nb, nb);
    for a in 0..domain.size() {
        for a2 in domain.adjacency().row_ones(a) {
            m.set(map.image_of(a), map.image_of(a2), true);
        }
    }
    SubshiftSpec::new(map.target().clone(), m).expect("square by construction")
}

impl FactorSystem {
    /// Uses the induced image adjacency as the candidate image.
    pub fn new(domain: SubshiftSpec, map: FactorMap) -> Result<Self> {
        let image = induced_image_adjacency(&domain, &map);
        Self::with_image(domain, map, image.adjacency().clone())
    }

    /// Uses a caller-supplied candidate image adjacency, which must allow
    /// every pair the domain produces.
    pub fn with_image(domain: SubshiftSpec, map: FactorMap, image_adjacency: BitMatrix) -> Result<Self> {
        if map.source() != domain.alphabet() {
            return Err(Error::DimensionMismatch { expected: domain.size(), found: map.source().len() });
        }
        let image = SubshiftSpec::new(map.target().clone(), image_adjacency)?;
        for a in 0..domain.size() {
            for a2 in domain.adjacency().row_ones(a) {
                if !image.allows(map.image_of(a), map.image_of(a2)) {
                    return Err(Error::ImageTooSmall { from: a, to: a2 });
                }
            }
        }
        let nb = map.target().len();
        let edges = (0..nb * nb)
            .map(|k| domain.adjacency().select(map.preimage(k / nb), map.preimage(k % nb)))
            .collect();
        Ok(FactorSystem { domain, map, image, edges })
    }

    pub fn domain(&self) -> &SubshiftSpec {
        &self.domain
    }

    pub fn map(&self) -> &FactorMap {
        &self.map
    }

    pub fn image(&self) -> &SubshiftSpec {
        &self.image
    }

    /// Fibre submatrix for the image pair `(b, b2)`, in preimage-local indices.
    pub fn edge(&self, b: usize, b2: usize) -> &BitMatrix {
        &self.edges[b * self.image.size() + b2]
    }

    /// Boolean product of the untrimmed fibre submatrices along `y`.
    pub fn fibre_product(&self, y: &[usize]) -> BitMatrix {
        let first = self.map.preimage(y[0]).len();
        y.windows(2)
            .fold(BitMatrix::identity(first), |acc, w| acc.mul(self.edge(w[0], w[1])))
    }

    /// Subset-construction check that every word allowed by the candidate
    /// image adjacency, up to length `depth`, lifts to a domain path.
    pub fn verify_image_sft(&self, depth: usize) -> ImageCheck {
        let nb = self.image.size();
        let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
        let mut frontier: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for b in 0..nb {
            let set = self.map.preimage(b).to_vec();
            if seen.insert((b, set.clone())) {
                frontier.push((vec![b], set));
            }
        }
        let mut len = 1;
        while len < depth && !frontier.is_empty() {
            let mut next = Vec::new();
            for (word, set) in &frontier {
                let last = *word.last().expect("nonempty");
                for b in self.image.adjacency().row_ones(last) {
                    let follow: Vec<usize> = self
                        .map
                        .preimage(b)
                        .iter()
                        .copied()
                        .filter(|&a2| set.iter().any(|&a| self.domain.allows(a, a2)))
                        .collect();
                    let mut w = word.clone();
                    w.push(b);
                    if follow.is_empty() {
                        return ImageCheck { realized: false, witness: Some(Word::new(w)), depth: len + 1, exhausted: false };
                    }
                    if seen.insert((b, follow.clone())) {
                        next.push((w, follow));
                    }
                }
            }
            frontier = next;
            len += 1;
        }
        ImageCheck { realized: true, witness: None, depth: len, exhausted: frontier.is_empty() }
    }

    /// Trimmed fibre matrices over the image word `y`.
    pub fn fibre_window(&self, y: &[usize]) -> Result<FibreWindow> {
        if y.is_empty() || !self.image.is_allowed(y) {
            return Err(Error::DisallowedWord(y.to_vec()));
        }
        let preimages: Vec<Vec<usize>> = y.iter().map(|&b| self.map.preimage(b).to_vec()).collect();
        let mut states = preimages.clone();
        for i in 1..y.len() {
            let (before, after) = states.split_at_mut(i);
            let prev = &before[i - 1];
            after[0].retain(|&s| prev.iter().any(|&r| self.domain.allows(r, s)));
        }
        for i in (0..y.len().saturating_sub(1)).rev() {
            let (before, after) = states.split_at_mut(i + 1);
            let next = &after[0];
            before[i].retain(|&s| next.iter().any(|&t| self.domain.allows(s, t)));
        }
        if states.iter().any(Vec::is_empty) {
            return Err(Error::EmptyFibre(y.to_vec()));
        }
        let removed = preimages
            .iter()
            .zip(&states)
            .enumerate()
            .flat_map(|(i, (full, kept))| {
                full.iter().filter(|s| !kept.contains(s)).map(move |&s| (i, s))
            })
            .collect();
        let matrices = states
            .windows(2)
            .map(|w| self.domain.adjacency().select(&w[0], &w[1]))
            .collect();
        Ok(FibreWindow { word: y.to_vec(), preimages, states, matrices, removed })
    }

    /// Decides fibre mixing by iterating the finite set of reachable
    /// `(first symbol, last symbol, product)` triples level by level.
    ///
    /// Mixing holds at level `L` when every product along an image word
    /// with `L` transitions is full on its nonzero rows × nonzero columns.
    /// That property persists once reached, and the level sets are
    /// eventually periodic, so a repeat without it proves non-mixing.
    pub fn is_fibre_mixing(&self, cap: usize) -> MixingVerdict {
        type Elem = (usize, usize, BitMatrix);
        let nb = self.image.size();
        let mut level: BTreeMap<Elem, Vec<usize>> = BTreeMap::new();
        for b in 0..nb {
            level.insert((b, b, BitMatrix::identity(self.map.preimage(b).len())), vec![b]);
        }
        let mut history: BTreeMap<Vec<Elem>, usize> = BTreeMap::new();
        let mut explored = level.len();
        let mut index = 0usize;
        loop {
            if index > 0 && level.keys().all(|(_, _, r)| r.is_rectangle()) {
                return MixingVerdict::Mixing { index };
            }
            let key: Vec<Elem> = level.keys().cloned().collect();
            if history.insert(key, index).is_some() {
                let (word, from, to) = level
                    .iter()
                    .find_map(|((f, l, r), w)| {
                        r.rectangle_gap().map(|(i, j)| (w.clone(), self.map.preimage(*f)[i], self.map.preimage(*l)[j]))
                    })
                    .expect("some product is not a rectangle");
                return MixingVerdict::NotMixing { word: Word::new(word), from, to };
            }
            let mut next: BTreeMap<Elem, Vec<usize>> = BTreeMap::new();
            for ((f, l, r), w) in &level {
                for b in self.image.adjacency().row_ones(*l) {
                    let prod = r.mul(self.edge(*l, b));
                    next.entry((*f, b, prod)).or_insert_with(|| {
                        let mut w2 = w.clone();
                        w2.push(b);
                        w2
                    });
                }
            }
            explored += next.len();
            if explored > cap {
                return MixingVerdict::Inconclusive { cap, explored };
            }
            level = next;
            index += 1;
        }
    }

    /// Smallest `k ≥ 1` such that any two domain words over the same image
    /// word of length `k + 1` can be joined by a third one with the first
    /// symbol of one and the last symbol of the other. Found by direct
    /// enumeration of domain words, independently of the semigroup search.
    pub fn sub_positivity_index(&self, max_k: usize) -> Option<usize> {
        (1..=max_k).find(|&k| {
            let mut groups: BTreeMap<Vec<usize>, Joins> = BTreeMap::new();
            for w in self.domain.allowed_words(k + 1) {
                let (a, z) = (w.symbols[0], w.symbols[k]);
                let g = groups.entry(self.map.apply(&w.symbols)).or_default();
                g.0.insert(a);
                g.1.insert(z);
                g.2.insert((a, z));
            }
            groups.values().all(|(firsts, lasts, pairs)| pairs.len() == firsts.len() * lasts.len())
        })
    }
}

/// First symbols, last symbols and (first, last) pairs of the domain words
/// over one image word.
type Joins = (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<(usize, usize)>);

/// Fibre submatrices over a finite image word, trimmed to the states that
/// lie on a fibre path through the whole window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreWindow {
    pub word: Vec<usize>,
    /// Untrimmed preimage sets, one per position.
    pub preimages: Vec<Vec<usize>>,
    /// Surviving states, one sorted set per position.
    pub states: Vec<Vec<usize>>,
    /// `matrices[i]` links `states[i]` to `states[i + 1]`.
    pub matrices: Vec<BitMatrix>,
    /// `(position, state)` pairs dropped by trimming.
    pub removed: Vec<(usize, usize)>,
}

impl FibreWindow {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Every fibre path through the window, in lexicographic order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut queue: VecDeque<Vec<usize>> = (0..self.states[0].len()).map(|i| vec![i]).collect();
        while let Some(p) = queue.pop_front() {
            let i = p.len() - 1;
            if i + 1 == self.states.len() {
                out.push(p.iter().enumerate().map(|(k, &s)| self.states[k][s]).collect());
                continue;
            }
            for j in self.matrices[i].row_ones(p[i]) {
                let mut q = p.clone();
                q.push(j);
                queue.push_back(q);
            }
        }
        out.sort();
        out
    }

    /// Smallest `m` such that every product of `m` consecutive window
    /// matrices is positive.
    pub fn transitivity_index(&self) -> Option<usize> {
        let n = self.matrices.len();
        (1..=n).find(|&m| {
            (0..=n - m).all(|start| {
                self.matrices[start + 1..start + m]
                    .iter()
                    .fold(self.matrices[start].clone(), |acc, x| acc.mul(x))
                    .is_positive()
            })
        })
    }
}

/// Outcome of [`FactorSystem::is_fibre_mixing`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixingVerdict {
    /// All fibre products over image words with `index` transitions are
    /// full on their nonzero rows and columns.
    Mixing { index: usize },
    /// The product along `word` is zero at `(from, to)` although `from`
    /// starts and `to` ends some fibre path over `word`.
    NotMixing { word: Word, from: usize, to: usize },
    /// The search stopped after `explored` triples.
    Inconclusive { cap: usize, explored: usize },
}

impl MixingVerdict {
    pub fn is_mixing(&self) -> bool {
        matches!(self, MixingVerdict::Mixing { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            MixingVerdict::Mixing { .. } => "mixing",
            MixingVerdict::NotMixing { .. } => "not_mixing",
            MixingVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Default element cap for [`FactorSystem::is_fibre_mixing`].
pub const MIXING_CAP: usize = 1_000_000;
