//! Stationary Markov chains compatible with a subshift of finite type.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{solve, Matrix};
use crate::scalar::{sum, Ratio, Scalar};
use crate::sft::{perron_root, SubshiftSpec, Word};

/// Square matrix with nonnegative entries and unit row sums.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix<S: Scalar> {
    entries: Matrix<S>,
}

impl<S: Scalar> StochasticMatrix<S> {
    pub fn new(entries: Matrix<S>) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(Error::DimensionMismatch { expected: entries.rows(), found: entries.cols() });
        }
        for i in 0..entries.rows() {
            for j in 0..entries.cols() {
                if *entries.get(i, j) < S::zero() {
                    return Err(Error::NegativeEntry { row: i, col: j });
                }
            }
            let total = sum(entries.row(i));
            if !total.near(&S::one()) {
                return Err(Error::RowSum { row: i, sum: alloc::format!("{total}") });
            }
        }
        Ok(StochasticMatrix { entries })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        let found = rows.iter().map(Vec::len).find(|&l| l != n);
        let m = Matrix::from_rows(rows).ok_or(Error::DimensionMismatch { expected: n, found: found.unwrap_or(0) })?;
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        self.entries.get(i, j)
    }

    /// `true` iff the support of `self` equals the adjacency of `shift`.
    pub fn check_compatible(&self, shift: &SubshiftSpec) -> Result<bool> {
        if self.size() != shift.size() {
            return Err(Error::DimensionMismatch { expected: shift.size(), found: self.size() });
        }
        Ok(self.entries.support() == *shift.adjacency())
    }

    /// The unique invariant probability vector of an irreducible chain,
    /// found by a direct linear solve (exact in rational mode).
    pub fn stationary_distribution(&self) -> Result<Vec<S>> {
        let n = self.size();
        let support = SubshiftSpec::new(unlabelled(n), self.entries.support())?;
        if !support.is_irreducible() {
            return Err(Error::Reducible { component: closed_class(&support) });
        }
        let mut a = Matrix::from_fn(n, n, |i, j| {
            let v = self.get(j, i).clone();
            if i == j {
                v - S::one()
            } else {
                v
            }
        });
        let mut b = vec![S::zero(); n];
        for j in 0..n {
            a.set(n - 1, j, S::one());
        }
        b[n - 1] = S::one();
        solve(&a, &b).ok_or(Error::Reducible { component: (0..n).collect() })
    }
}

fn unlabelled(n: usize) -> crate::sft::Alphabet {
    crate::sft::Alphabet::new((0..n).map(|i| alloc::format!("{i}"))).expect("distinct labels")
}

/// A closed communicating class that is not the whole state space.
fn closed_class(shift: &SubshiftSpec) -> Vec<usize> {
    let comps = shift.components();
    let reach = shift.reachability();
    comps
        .iter()
        .find(|c| {
            c.iter().all(|&i| (0..shift.size()).all(|j| !reach.get(i, j) || c.contains(&j)))
        })
        .or_else(|| comps.first())
        .cloned()
        .unwrap_or_default()
}

/// Stationary Markov measure on a subshift: transition matrix, invariant
/// vector and time reversal.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovModel<S: Scalar> {
    shift: SubshiftSpec,
    transition: StochasticMatrix<S>,
    stationary: Vec<S>,
    reversal: Matrix<S>,
}

impl<S: Scalar> MarkovModel<S> {
    /// Builds a model, checking that the support of `transition` equals the
    /// adjacency of `shift` and that the chain is irreducible.
    pub fn new(shift: SubshiftSpec, transition: StochasticMatrix<S>) -> Result<Self> {
        if !transition.check_compatible(&shift)? {
            let m = transition.matrix().support();
            let (row, col) = (0..shift.size())
                .flat_map(|i| (0..shift.size()).map(move |j| (i, j)))
                .find(|&(i, j)| m.get(i, j) != shift.allows(i, j))
                .expect("supports differ");
            return Err(Error::Incompatible { row, col });
        }
        let stationary = transition.stationary_distribution()?;
        let reversal = time_reversal(&transition, &stationary);
        Ok(MarkovModel { shift, transition, stationary, reversal })
    }

    /// Builds a model whose shift is read off the support of `transition`.
    pub fn from_transition(alphabet: crate::sft::Alphabet, transition: StochasticMatrix<S>) -> Result<Self> {
        let shift = SubshiftSpec::new(alphabet, transition.matrix().support())?;
        Self::new(shift, transition)
    }

    pub fn shift(&self) -> &SubshiftSpec {
        &self.shift
    }

    pub fn transition(&self) -> &StochasticMatrix<S> {
        &self.transition
    }

    pub fn p(&self, i: usize, j: usize) -> &S {
        self.transition.get(i, j)
    }

    pub fn stationary(&self) -> &[S] {
        &self.stationary
    }

    /// `Q[a][a'] = p_a P[a][a'] / p_a'`.
    pub fn reversal(&self) -> &Matrix<S> {
        &self.reversal
    }

    pub fn size(&self) -> usize {
        self.shift.size()
    }

    /// `p_{w_0} Π P_{w_i w_{i+1}}`; zero for disallowed words and the
    /// empty word has mass one.
    pub fn cylinder_probability(&self, word: &[usize]) -> S {
        let Some(&first) = word.first() else { return S::one() };
        if word.iter().any(|&s| s >= self.size()) {
            return S::zero();
        }
        word.windows(2)
            .fold(self.stationary[first].clone(), |acc, w| acc * self.p(w[0], w[1]).clone())
    }

    /// `-Σ p_a P_ab ln P_ab` in nats.
    pub fn entropy_rate(&self) -> f64 {
        let n = self.size();
        let mut h = 0.0;
        for a in 0..n {
            let pa = self.stationary[a].to_f64();
            for b in 0..n {
                let q = self.p(a, b).to_f64();
                if q > 0.0 {
                    h -= pa * q * Float::ln(q);
                }
            }
        }
        h
    }

    /// The chain on `k`-blocks: `(u) → (v)` with probability `P[u_last][v_last]`.
    pub fn higher_block(&self, k: usize) -> Result<(MarkovModel<S>, Vec<Word>)> {
        let (shift, dict) = self.shift.higher_block_recode(k)?;
        let m = dict.len();
        let t = Matrix::from_fn(m, m, |i, j| {
            if shift.allows(i, j) {
                let u = *dict[i].symbols.last().expect("nonempty block");
                let v = *dict[j].symbols.last().expect("nonempty block");
                self.p(u, v).clone()
            } else {
                S::zero()
            }
        });
        let model = MarkovModel::new(shift, StochasticMatrix::new(t)?)?;
        Ok((model, dict))
    }

    pub fn to_f64(&self) -> MarkovModel<f64> {
        MarkovModel {
            shift: self.shift.clone(),
            transition: StochasticMatrix { entries: self.transition.entries.map(Scalar::to_f64) },
            stationary: self.stationary.iter().map(Scalar::to_f64).collect(),
            reversal: self.reversal.map(Scalar::to_f64),
        }
    }

    /// Reusable sampler for stationary paths.
    pub fn sampler(&self) -> PathSampler {
        let weights = |v: &[S]| v.iter().map(Scalar::to_f64).collect::<Vec<_>>();
        PathSampler {
            initial: WeightedIndex::new(weights(&self.stationary)).expect("probability vector"),
            rows: (0..self.size())
                .map(|i| WeightedIndex::new(weights(self.transition.entries.row(i))).expect("stochastic row"))
                .collect(),
        }
    }

    /// Length-`n` path started from the stationary law; the same seed always
    /// gives the same path.
    pub fn sample_path(&self, n: usize, seed: u64) -> Word {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Word::new(self.sampler().path(n, &mut rng))
    }
}

impl MarkovModel<Ratio> {
    /// Exact model from rational rows, with the shift read off the support.
    pub fn exact(alphabet: crate::sft::Alphabet, rows: Vec<Vec<Ratio>>) -> Result<Self> {
        Self::from_transition(alphabet, StochasticMatrix::from_rows(rows)?)
    }
}

fn time_reversal<S: Scalar>(p: &StochasticMatrix<S>, stationary: &[S]) -> Matrix<S> {
    let n = p.size();
    Matrix::from_fn(n, n, |a, b| {
        let v = p.get(a, b);
        if v.is_zero() {
            S::zero()
        } else {
            stationary[a].clone() * v.clone() / stationary[b].clone()
        }
    })
}

/// Draws stationary paths; build once and reuse for many draws.
#[derive(Clone, Debug)]
pub struct PathSampler {
    initial: WeightedIndex<f64>,
    rows: Vec<WeightedIndex<f64>>,
}

impl PathSampler {
    pub fn first<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.initial.sample(rng)
    }

    pub fn step<R: rand::Rng + ?Sized>(&self, from: usize, rng: &mut R) -> usize {
        self.rows[from].sample(rng)
    }

    pub fn path<R: rand::Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let mut s = self.first(rng);
        out.push(s);
        for _ in 1..n {
            s = self.step(s, rng);
            out.push(s);
        }
        out
    }
}

/// Measure of maximal entropy on a primitive shift:
/// `P_ij = M_ij r_j / (λ r_i)` with `r` the right Perron vector.
pub fn parry_measure(shift: &SubshiftSpec) -> Result<MarkovModel<f64>> {
    if !shift.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    let (lambda, r) = perron_root(shift.adjacency());
    let n = shift.size();
    let mut t = Matrix::from_fn(n, n, |i, j| if shift.allows(i, j) { r[j] / (lambda * r[i]) } else { 0.0 });
    // remove residual rounding so the row-sum check is tight
    for i in 0..n {
        let total: f64 = t.row(i).iter().sum();
        for j in 0..n {
            let v = *t.get(i, j) / total;
            t.set(i, j, v);
        }
    }
    MarkovModel::new(shift.clone(), StochasticMatrix::new(t)?)
}
