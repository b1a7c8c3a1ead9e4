//! Conditional probabilities of the observed process `Y_n = π(X_n)`.
//!
//! Everything rests on the forward recursion: the mass of the image cylinder
//! `[y_0 … y_n]` is the stationary vector restricted to `π⁻¹(y_0)` pushed
//! through the transition blocks `P|π⁻¹(y_i) × π⁻¹(y_{i+1})`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factor::{FactorMap, FactorSystem, FibreWindow};
use crate::markov::{MarkovModel, StochasticMatrix};
use crate::matrix::Matrix;
use crate::scalar::{sum, Scalar};
use crate::sft::SubshiftSpec;

/// A Markov model together with a one-block factor of its shift.
#[derive(Clone, Debug)]
pub struct FactorProcess<S: Scalar> {
    model: MarkovModel<S>,
    system: FactorSystem,
    blocks: Vec<Matrix<S>>,
    initial: Vec<Vec<S>>,
}

/// Unnormalized hidden-state weights after consuming an image word.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardState<S> {
    /// Last image symbol read.
    pub last: usize,
    /// Number of image symbols read.
    pub len: usize,
    /// Weights over `π⁻¹(last)`, in preimage order.
    pub vector: Vec<S>,
    /// Natural log of the factor removed by renormalization (float mode).
    pub log_scale: f64,
}

impl<S: Scalar> ForwardState<S> {
    /// Probability of the image word read so far.
    pub fn mass(&self) -> S {
        sum(&self.vector).scale_by_exp(self.log_scale)
    }

    /// Natural log of [`ForwardState::mass`], robust to underflow.
    pub fn log_mass(&self) -> f64 {
        Float::ln(sum(&self.vector).to_f64()) + self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|v| v.is_zero())
    }
}

/// Numerator and denominator states for `ν(y_0 | y_1 … y_n)`, extendable
/// one symbol at a time on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState<S> {
    pub num: ForwardState<S>,
    pub den: ForwardState<S>,
}

impl<S: Scalar> ConditionalState<S> {
    /// `None` when the conditioning word has probability zero.
    pub fn value(&self) -> Option<S> {
        let den = sum(&self.den.vector);
        if den.is_zero() {
            return None;
        }
        Some((sum(&self.num.vector) / den).scale_by_exp(self.num.log_scale - self.den.log_scale))
    }
}

/// Which continuations a lower bound was taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    /// Every allowed center and continuation of the stated length.
    Exhaustive,
    /// Greedy extremal walks plus seeded random walks.
    Sampled,
}

impl Coverage {
    pub fn label(self) -> &'static str {
        match self {
            Coverage::Exhaustive => "exhaustive",
            Coverage::Sampled => "sampled",
        }
    }
}

/// Work limit and seed for the continuation searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    /// Maximum number of continuation nodes visited before switching from
    /// exhaustive enumeration to guided sampling.
    pub nodes: usize,
    /// Random walks per center in sampled mode.
    pub walks: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { nodes: 500_000, walks: 4, seed: 0 }
    }
}

/// A center `y_0 … y_n` and two continuations whose conditionals differ by `gap`.
#[derive(Clone, Debug, PartialEq)]
pub struct BadConfigWitness<S> {
    pub center: Vec<usize>,
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    /// `g(center · high) − g(center · low)`, recomputed in the model's field.
    pub gap: S,
}

impl<S: Scalar> BadConfigWitness<S> {
    pub fn gap_f64(&self) -> f64 {
        self.gap.to_f64()
    }
}

/// Bounds on `var_n(g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationEstimate<S> {
    pub n: usize,
    pub m_ext: usize,
    /// Certified lower bound: the exact gap of `witness`.
    pub lower: S,
    pub witness: Option<BadConfigWitness<S>>,
    pub coverage: Coverage,
    /// Heuristic upper bound from Birkhoff contraction coefficients of the
    /// transition blocks; not a proof.
    pub heuristic_upper: f64,
}

/// Least-squares fit of `ln v_n = α + n ln c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits a geometric decay to the positive entries of `(n, value)` pairs.
pub fn fit_decay(points: &[(usize, f64)]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, v)| *v > 0.0).map(|&(n, v)| (n as f64, Float::ln(v))).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(DecayFit { rate: Float::exp(slope), intercept: my - slope * mx, r_squared, points: pts.len() })
}

/// `g_k(y_0 … y_k)` along one word, with variation bounds per depth.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalTable<S> {
    pub word: Vec<usize>,
    /// `values[k-1] = g_k(y_0 … y_k)` for `k = 1 … n`.
    pub values: Vec<S>,
    /// `variation[k-1]` bounds `var_k(g)`.
    pub variation: Vec<VariationEstimate<S>>,
    pub fit: Option<DecayFit>,
}

/// Per-depth outcome of [`FactorProcess::find_bad_configuration`].
#[derive(Clone, Debug, PartialEq)]
pub struct DepthSearch<S> {
    pub n: usize,
    pub best_gap: f64,
    pub witness: Option<BadConfigWitness<S>>,
}

/// Result of a bad-configuration search. Finding nothing is not a proof of
/// regularity.
#[derive(Clone, Debug, PartialEq)]
pub struct BadConfigSearch<S> {
    pub eps: f64,
    pub depths: Vec<DepthSearch<S>>,
    /// Every center extends the previous one, so the witnesses describe a
    /// single point.
    pub nested: bool,
}

impl<S: Scalar> BadConfigSearch<S> {
    /// A witness at every searched depth.
    pub fn found(&self) -> bool {
        !self.depths.is_empty() && self.depths.iter().all(|d| d.witness.is_some())
    }

    /// The witness at the deepest level, if the search succeeded everywhere.
    pub fn witness(&self) -> Option<&BadConfigWitness<S>> {
        if self.found() {
            self.depths.last().and_then(|d| d.witness.as_ref())
        } else {
            None
        }
    }
}

/// Strong lumpability verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Lumpability<S: Scalar> {
    pub lumpable: bool,
    /// `P^π[b][b'] = Σ_{x' ∈ π⁻¹(b')} P[x][x']` for any `x ∈ π⁻¹(b)`.
    pub factor: Option<Matrix<S>>,
    pub violation: Option<LumpViolation<S>>,
}

/// Two states of one class with different mass into a target class.
#[derive(Clone, Debug, PartialEq)]
pub struct LumpViolation<S> {
    pub class: usize,
    pub target: usize,
    pub states: (usize, usize),
    pub sums: (S, S),
}

/// Tests `Σ_{x' ∈ π⁻¹(b')} P[x][x']` for equality across each class `π⁻¹(b)`.
pub fn strong_lumpability<S: Scalar>(p: &StochasticMatrix<S>, map: &FactorMap) -> Lumpability<S> {
    let nb = map.target().len();
    let class_sum = |x: usize, b2: usize| sum(&map.preimage(b2).iter().map(|&x2| p.get(x, x2).clone()).collect::<Vec<_>>());
    let mut factor = Matrix::zeros(nb, nb);
    for b in 0..nb {
        let class = map.preimage(b);
        for b2 in 0..nb {
            let first = class_sum(class[0], b2);
            for &x in &class[1..] {
                let other = class_sum(x, b2);
                if !other.near(&first) {
                    return Lumpability {
                        lumpable: false,
                        factor: None,
                        violation: Some(LumpViolation { class: b, target: b2, states: (class[0], x), sums: (first, other) }),
                    };
                }
            }
            factor.set(b, b2, first);
        }
    }
    Lumpability { lumpable: true, factor: Some(factor), violation: None }
}

/// Finite-depth test of whether the observed process is Markov.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderProbe<S: Scalar> {
    pub depth: usize,
    /// `Some(0)` for independent, `Some(1)` for Markov, up to `depth`.
    pub order: Option<usize>,
    /// Shortest word whose conditional depends on more than one future symbol.
    pub violation: Option<Vec<usize>>,
    /// `ν(b)`.
    pub marginal: Vec<S>,
    /// `transition[b][b'] = ν(b b') / ν(b)`.
    pub transition: Matrix<S>,
    /// `reversed[b][b'] = ν(b | b') = ν(b b') / ν(b')`.
    pub reversed: Matrix<S>,
}

/// Monte Carlo estimate of `ν(y_0 | y_1 … y_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: usize,
    pub samples: usize,
    pub seed: u64,
    /// The conditioning event never occurred; `estimate` is NaN.
    pub flagged: bool,
}

impl<S: Scalar> FactorProcess<S> {
    pub fn new(model: MarkovModel<S>, system: FactorSystem) -> Result<Self> {
        if model.size() != system.domain().size() {
            return Err(Error::DimensionMismatch { expected: model.size(), found: system.domain().size() });
        }
        if model.shift().adjacency() != system.domain().adjacency() {
            let (row, col) = (0..model.size())
                .flat_map(|i| (0..model.size()).map(move |j| (i, j)))
                .find(|&(i, j)| model.shift().allows(i, j) != system.domain().allows(i, j))
                .expect("adjacencies differ");
            return Err(Error::Incompatible { row, col });
        }
        let map = system.map();
        let nb = map.target().len();
        let blocks = (0..nb * nb)
            .map(|k| model.transition().matrix().select(map.preimage(k / nb), map.preimage(k % nb)))
            .collect();
        let initial = (0..nb)
            .map(|b| map.preimage(b).iter().map(|&a| model.stationary()[a].clone()).collect())
            .collect();
        Ok(FactorProcess { model, system, blocks, initial })
    }

    /// Model plus factor map, with the image adjacency induced from the domain.
    pub fn from_map(model: MarkovModel<S>, map: FactorMap) -> Result<Self> {
        let system = FactorSystem::new(model.shift().clone(), map)?;
        Self::new(model, system)
    }

    pub fn model(&self) -> &MarkovModel<S> {
        &self.model
    }

    pub fn system(&self) -> &FactorSystem {
        &self.system
    }

    pub fn map(&self) -> &FactorMap {
        self.system.map()
    }

    pub fn image(&self) -> &SubshiftSpec {
        self.system.image()
    }

    pub fn image_size(&self) -> usize {
        self.image().size()
    }

    /// `P` restricted to rows `π⁻¹(b)` and columns `π⁻¹(b2)`.
    pub fn block(&self, b: usize, b2: usize) -> &Matrix<S> {
        &self.blocks[b * self.image_size() + b2]
    }

    pub fn fibre_window(&self, y: &[usize]) -> Result<FibreWindow> {
        self.system.fibre_window(y)
    }

    pub fn to_f64(&self) -> FactorProcess<f64> {
        FactorProcess {
            model: self.model.to_f64(),
            system: self.system.clone(),
            blocks: self.blocks.iter().map(|m| m.map(Scalar::to_f64)).collect(),
            initial: self.initial.iter().map(|v| v.iter().map(Scalar::to_f64).collect()).collect(),
        }
    }

    fn check_symbols(&self, y: &[usize]) -> Result<()> {
        if y.iter().any(|&b| b >= self.image_size()) {
            return Err(Error::DisallowedWord(y.to_vec()));
        }
        Ok(())
    }

    pub fn start(&self, b: usize) -> ForwardState<S> {
        ForwardState { last: b, len: 1, vector: self.initial[b].clone(), log_scale: 0.0 }
    }

    pub fn advance(&self, state: &ForwardState<S>, b: usize) -> ForwardState<S> {
        let mut vector = self.block(state.last, b).left_apply(&state.vector);
        let log = S::rescale(&mut vector);
        ForwardState { last: b, len: state.len + 1, vector, log_scale: state.log_scale + log }
    }

    /// Forward state after reading `y`; `None` for the empty word or
    /// symbols outside the image alphabet.
    pub fn forward(&self, y: &[usize]) -> Option<ForwardState<S>> {
        let (&first, rest) = y.split_first()?;
        if self.check_symbols(y).is_err() {
            return None;
        }
        Some(rest.iter().fold(self.start(first), |st, &b| self.advance(&st, b)))
    }

    /// `ν(y) = Σ_{x ∈ π⁻¹(y)} μ(x)`; the empty word has mass one.
    pub fn factor_cylinder_probability(&self, y: &[usize]) -> S {
        if y.is_empty() {
            return S::one();
        }
        self.forward(y).map_or_else(S::zero, |st| st.mass())
    }

    /// `ln ν(y)`, usable for words whose mass underflows `f64`.
    pub fn log_factor_probability(&self, y: &[usize]) -> f64 {
        if y.is_empty() {
            return 0.0;
        }
        self.forward(y).map_or(f64::NEG_INFINITY, |st| st.log_mass())
    }

    /// State for `ν(y_0 | y_1 … y_n)`; `y` must have length at least 2.
    pub fn conditional(&self, y: &[usize]) -> Result<ConditionalState<S>> {
        self.check_symbols(y)?;
        if y.len() < 2 {
            return Err(Error::InvalidParameter("conditional needs a word of length at least 2"));
        }
        let num = self.forward(y).expect("checked");
        let den = self.forward(&y[1..]).expect("checked");
        Ok(ConditionalState { num, den })
    }

    pub fn extend(&self, state: &ConditionalState<S>, b: usize) -> ConditionalState<S> {
        ConditionalState { num: self.advance(&state.num, b), den: self.advance(&state.den, b) }
    }

    /// `g_n(y_0 … y_n) = ν(y_0 … y_n) / ν(y_1 … y_n)`; for a single symbol
    /// this is `ν(y_0)`.
    pub fn g_n(&self, y: &[usize]) -> Result<S> {
        self.check_symbols(y)?;
        match y.len() {
            0 => Err(Error::InvalidParameter("g_n needs a nonempty word")),
            1 => Ok(self.factor_cylinder_probability(y)),
            _ => self.conditional(y)?.value().ok_or_else(|| Error::ZeroProbability(y[1..].to_vec())),
        }
    }

    /// `g_k(y_0 … y_k)` for `k = 1 … n`, with variation bounds at each depth
    /// and a geometric fit of the lower bounds.
    pub fn conditional_table(&self, y: &[usize], m_ext: usize, budget: &SearchBudget) -> Result<ConditionalTable<S>> {
        let mut values = Vec::new();
        let mut variation = Vec::new();
        for k in 1..y.len() {
            values.push(self.g_n(&y[..=k])?);
            variation.push(self.variation_estimate(k, m_ext, budget)?);
        }
        let fit = fit_decay(&variation.iter().map(|v| (v.n, v.lower.to_f64())).collect::<Vec<_>>());
        Ok(ConditionalTable { word: y.to_vec(), values, variation, fit })
    }

    /// Largest Birkhoff contraction coefficient over the transition blocks.
    pub fn contraction_coefficient(&self) -> f64 {
        let nb = self.image_size();
        (0..nb)
            .flat_map(|b| (0..nb).map(move |b2| (b, b2)))
            .filter(|&(b, b2)| self.image().allows(b, b2))
            .map(|(b, b2)| birkhoff_coefficient(&self.block(b, b2).map(Scalar::to_f64)))
            .fold(0.0, f64::max)
    }

    /// Lower bound on `var_n(g)` from pairs of length-`m_ext` continuations
    /// of every allowed center `y_0 … y_n` (restricted to words allowed in
    /// the image), plus a heuristic upper bound.
    pub fn variation_estimate(&self, n: usize, m_ext: usize, budget: &SearchBudget) -> Result<VariationEstimate<S>> {
        if n == 0 || m_ext == 0 {
            return Err(Error::InvalidParameter("variation needs n ≥ 1 and m_ext ≥ 1"));
        }
        let fast = self.to_f64();
        let centers: Vec<Vec<usize>> = self.image().allowed_words(n + 1).into_iter().map(|w| w.symbols).collect();
        let coverage = if fast.tree_size(m_ext).saturating_mul(centers.len()) <= budget.nodes {
            Coverage::Exhaustive
        } else {
            Coverage::Sampled
        };
        let mut best: Option<GapPair> = None;
        for (idx, center) in centers.iter().enumerate() {
            let Some(ext) = fast.extremes(center, m_ext, coverage, budget, idx as u64) else { continue };
            let gap = ext.hi.0 - ext.lo.0;
            if best.as_ref().is_none_or(|b| gap > b.0) {
                best = Some((gap, center.clone(), ext.hi.1, ext.lo.1));
            }
        }
        let upper = Float::min(1.0, Float::powi(self.contraction_coefficient(), n as i32 - 1));
        let witness = match best {
            Some((_, center, high, low)) => Some(self.certify(center, high, low)?),
            None => None,
        };
        let lower = witness.as_ref().map_or_else(S::zero, |w| w.gap.clone());
        Ok(VariationEstimate { n, m_ext, lower, witness, coverage, heuristic_upper: upper })
    }

    /// Exact gap between two continuations of a center.
    pub fn certify(&self, center: Vec<usize>, high: Vec<usize>, low: Vec<usize>) -> Result<BadConfigWitness<S>> {
        let hi = self.g_n(&[center.as_slice(), &high].concat())?;
        let lo = self.g_n(&[center.as_slice(), &low].concat())?;
        let (high, low, gap) = if hi >= lo { (high, low, hi - lo) } else { (low, high, lo - hi) };
        Ok(BadConfigWitness { center, high, low, gap })
    }

    /// Searches, for each center length `n = 1 … n_max`, for two
    /// continuations of length at most `m_max` whose conditionals differ by
    /// at least `eps`. Centers extending the previous depth's center are
    /// tried first so that the witnesses describe one point.
    pub fn find_bad_configuration(&self, n_max: usize, m_max: usize, eps: f64, budget: &SearchBudget) -> Result<BadConfigSearch<S>> {
        if eps <= 0.0 || Float::is_nan(eps) {
            return Err(Error::InvalidParameter("eps must be positive"));
        }
        let fast = self.to_f64();
        let mut depths = Vec::new();
        let mut nested = true;
        let mut previous: Option<Vec<usize>> = None;
        for n in 1..=n_max {
            let guided: Vec<Vec<usize>> = match &previous {
                Some(p) => self
                    .image()
                    .adjacency()
                    .row_ones(*p.last().expect("nonempty"))
                    .map(|b| [p.as_slice(), &[b]].concat())
                    .collect(),
                None => Vec::new(),
            };
            let mut best = best_pair(&fast, &guided, m_max, budget, eps);
            if best.as_ref().is_none_or(|b| b.0 < eps) {
                nested &= previous.is_none();
                let all: Vec<Vec<usize>> = self.image().allowed_words(n + 1).into_iter().map(|w| w.symbols).collect();
                let alt = best_pair(&fast, &all, m_max, budget, eps);
                if alt.as_ref().is_some_and(|a| best.as_ref().is_none_or(|b| a.0 > b.0)) {
                    best = alt;
                }
            }
            let best_gap = best.as_ref().map_or(0.0, |b| b.0);
            let witness = match best {
                Some((_, center, high, low)) => {
                    let w = self.certify(center, high, low)?;
                    (w.gap_f64() >= eps).then_some(w)
                }
                None => None,
            };
            if witness.is_none() {
                nested = false;
            }
            previous = witness.as_ref().map(|w| w.center.clone());
            depths.push(DepthSearch { n, best_gap, witness });
        }
        let nested = nested && depths.iter().all(|d| d.witness.is_some());
        Ok(BadConfigSearch { eps, depths, nested })
    }

    /// Checks, for every allowed image word of length `3 … depth`, whether
    /// `g` depends only on the first two symbols.
    pub fn markov_order_probe(&self, depth: usize) -> Result<OrderProbe<S>> {
        if depth < 2 {
            return Err(Error::InvalidParameter("order probe needs depth ≥ 2"));
        }
        let nb = self.image_size();
        let marginal: Vec<S> = (0..nb).map(|b| self.factor_cylinder_probability(&[b])).collect();
        let mut transition = Matrix::zeros(nb, nb);
        let mut reversed = Matrix::zeros(nb, nb);
        let mut independent = true;
        for b in 0..nb {
            for b2 in 0..nb {
                let joint = self.factor_cylinder_probability(&[b, b2]);
                if !marginal[b].is_zero() {
                    transition.set(b, b2, joint.clone() / marginal[b].clone());
                }
                if !marginal[b2].is_zero() {
                    let r = joint / marginal[b2].clone();
                    independent &= r.near(&marginal[b]);
                    reversed.set(b, b2, r);
                }
            }
        }
        let mut violation = None;
        'outer: for len in 3..=depth {
            for w in self.image().allowed_words(len) {
                let y = w.symbols;
                let Ok(g) = self.g_n(&y) else { continue };
                if !g.near(reversed.get(y[0], y[1])) {
                    violation = Some(y);
                    break 'outer;
                }
            }
        }
        let order = match (&violation, independent) {
            (Some(_), _) => None,
            (None, true) => Some(0),
            (None, false) => Some(1),
        };
        Ok(OrderProbe { depth, order, violation, marginal, transition, reversed })
    }

    /// Monte Carlo estimate of `ν(y_0 | y_1 … y_n)` from independent
    /// stationary paths of length `|y|`.
    pub fn empirical_conditional(&self, y: &[usize], samples: usize, seed: u64) -> Result<EmpiricalEstimate> {
        self.check_symbols(y)?;
        if y.len() < 2 || samples == 0 {
            return Err(Error::InvalidParameter("need |y| ≥ 2 and at least one sample"));
        }
        let sampler = self.model.sampler();
        let map = self.map();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut hits, mut successes) = (0usize, 0usize);
        for _ in 0..samples {
            let mut x = sampler.first(&mut rng);
            let head = map.image_of(x) == y[0];
            let mut ok = true;
            for &b in &y[1..] {
                x = sampler.step(x, &mut rng);
                if map.image_of(x) != b {
                    ok = false;
                    break;
                }
            }
            if ok {
                hits += 1;
                successes += head as usize;
            }
        }
        if hits == 0 {
            return Ok(EmpiricalEstimate { estimate: f64::NAN, stderr: f64::NAN, hits, samples, seed, flagged: true });
        }
        let est = successes as f64 / hits as f64;
        let stderr = Float::sqrt(est * (1.0 - est) / hits as f64);
        Ok(EmpiricalEstimate { estimate: est, stderr, hits, samples, seed, flagged: false })
    }
}

/// Gap, center, high continuation, low continuation.
type GapPair = (f64, Vec<usize>, Vec<usize>, Vec<usize>);

struct Extremes {
    hi: (f64, Vec<usize>),
    lo: (f64, Vec<usize>),
}

impl FactorProcess<f64> {
    /// Nodes in the continuation tree of depth `m` below the worst symbol.
    fn tree_size(&self, m: usize) -> usize {
        let nb = self.image_size();
        let mut counts = vec![1usize; nb];
        let mut total = 0usize;
        for _ in 0..m {
            counts = (0..nb)
                .map(|b| self.image().adjacency().row_ones(b).fold(0usize, |acc, c| acc.saturating_add(counts[c])))
                .collect();
            total = total.saturating_add(counts.iter().copied().max().unwrap_or(0));
        }
        total
    }

    /// Largest and smallest `g` over continuations of `center` of length at
    /// most `m`, with the continuation achieving each.
    fn extremes(&self, center: &[usize], m: usize, coverage: Coverage, budget: &SearchBudget, stream: u64) -> Option<Extremes> {
        let root = self.conditional(center).ok()?;
        let v = root.value()?;
        let mut ext = Extremes { hi: (v, Vec::new()), lo: (v, Vec::new()) };
        match coverage {
            Coverage::Exhaustive => {
                let mut stack = vec![(root, Vec::new())];
                while let Some((st, path)) = stack.pop() {
                    if path.len() == m {
                        continue;
                    }
                    for b in self.image().adjacency().row_ones(st.num.last) {
                        let next = self.extend(&st, b);
                        let Some(g) = next.value() else { continue };
                        let mut p = path.clone();
                        p.push(b);
                        ext.record(g, &p);
                        stack.push((next, p));
                    }
                }
            }
            Coverage::Sampled => {
                for maximize in [true, false] {
                    let mut st = root.clone();
                    let mut path = Vec::new();
                    for _ in 0..m {
                        let choice = self
                            .image()
                            .adjacency()
                            .row_ones(st.num.last)
                            .filter_map(|b| {
                                let next = self.extend(&st, b);
                                next.value().map(|g| (g, b, next))
                            })
                            .reduce(|a, c| if (c.0 > a.0) == maximize && c.0 != a.0 { c } else { a });
                        let Some((g, b, next)) = choice else { break };
                        path.push(b);
                        ext.record(g, &path);
                        st = next;
                    }
                }
                for walk in 0..budget.walks {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        budget.seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (walk as u64).wrapping_mul(0xD1B5_4A32_D192_ED03),
                    );
                    let mut st = root.clone();
                    let mut path = Vec::new();
                    for _ in 0..m {
                        let options: Vec<usize> = self
                            .image()
                            .adjacency()
                            .row_ones(st.num.last)
                            .filter(|&b| !self.advance(&st.den, b).is_zero())
                            .collect();
                        if options.is_empty() {
                            break;
                        }
                        let b = options[rng.gen_range(0..options.len())];
                        st = self.extend(&st, b);
                        path.push(b);
                        if let Some(g) = st.value() {
                            ext.record(g, &path);
                        }
                    }
                }
            }
        }
        Some(ext)
    }
}

impl Extremes {
    fn record(&mut self, g: f64, path: &[usize]) {
        if g > self.hi.0 {
            self.hi = (g, path.to_vec());
        }
        if g < self.lo.0 {
            self.lo = (g, path.to_vec());
        }
    }
}

/// Best continuation pair over `centers`; stops early once `stop_at` is reached.
fn best_pair(
    fast: &FactorProcess<f64>,
    centers: &[Vec<usize>],
    m: usize,
    budget: &SearchBudget,
    stop_at: f64,
) -> Option<GapPair> {
    let coverage = if fast.tree_size(m).saturating_mul(centers.len()) <= budget.nodes {
        Coverage::Exhaustive
    } else {
        Coverage::Sampled
    };
    let mut best: Option<GapPair> = None;
    for (idx, center) in centers.iter().enumerate() {
        let Some(ext) = fast.extremes(center, m, coverage, budget, idx as u64) else { continue };
        let gap = ext.hi.0 - ext.lo.0;
        if best.as_ref().is_none_or(|b| gap > b.0) {
            best = Some((gap, center.clone(), ext.hi.1, ext.lo.1));
            if gap >= stop_at {
                break;
            }
        }
    }
    best
}

/// Birkhoff contraction coefficient `(1 − √φ)/(1 + √φ)` of a nonnegative
/// matrix acting on row vectors, `φ` the least cross ratio. Blocks with a
/// single row or column collapse everything to one ray and give 0; blocks
/// with a zero entry give 1.
pub fn birkhoff_coefficient(m: &Matrix<f64>) -> f64 {
    if m.rows() <= 1 || m.cols() <= 1 {
        return 0.0;
    }
    let mut phi = f64::INFINITY;
    for i in 0..m.rows() {
        for j in 0..m.rows() {
            for k in 0..m.cols() {
                for l in 0..m.cols() {
                    let den = m.get(j, k) * m.get(i, l);
                    if den == 0.0 {
                        return 1.0;
                    }
                    phi = phi.min(m.get(i, k) * m.get(j, l) / den);
                }
            }
        }
    }
    let s = Float::sqrt(phi);
    (1.0 - s) / (1.0 + s)
}
