//! Built-in example models with checkable ground truths.
//!
//! Each [`NamedModel`] carries a list of [`Fact`]s. A fact names the
//! operation that checks it, so running [`NamedModel::check_all`] replays the
//! whole golden suite for that model.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::conditionals::{strong_lumpability, FactorProcess, SearchBudget};
use crate::disintegration::{first_state_posterior, reversed_lumpability, tjur_probe};
use crate::error::{Error, Result};
use crate::factor::{FactorMap, MixingVerdict, MIXING_CAP};
use crate::markov::{MarkovModel, StochasticMatrix};
use crate::matrix::Matrix;
use crate::scalar::{ratio, Ratio, Scalar};
use crate::sft::Alphabet;

/// How a fact is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Follows from an analytic computation on the model.
    Analytic,
    /// Checked against an independent closed form or brute force.
    Oracle,
    /// Immediate from the construction.
    Elementary,
}

/// A machine-checkable claim about a model.
#[derive(Clone, Debug, PartialEq)]
pub enum Claim {
    Stationary(Vec<Ratio>),
    StronglyLumpable(bool),
    ReversedLumpable(bool),
    /// The image is Markov with this transition matrix, tested on words up to `depth`.
    FactorMarkov { depth: usize, transition: Matrix<Ratio> },
    /// Spread of `μ(cylinder | π⁻¹[prefix^n · z])` across continuations `z`,
    /// for every `n` in `1 ..= max_depth`.
    TjurSpread { symbol: usize, continuations: Vec<Vec<usize>>, cylinder: Vec<usize>, max_depth: usize, spread: Ratio },
    /// Entropy rate in nats, within `1e-12`.
    EntropyRate(f64),
    FullImage,
    /// `g_n(symbol | ·) = value` for every allowed image word of length at most `max_len`.
    ConstantConditional { symbol: usize, value: Ratio, max_len: usize },
    /// The first hidden state is uniform on its fibre given any image word up to `max_len`.
    UniformFibreMarginals { max_len: usize },
    /// `Some(m)`: mixing with index `m`. `None`: not mixing.
    FibreMixing(Option<usize>),
    BadConfiguration { n_max: usize, m_max: usize, min_gap: f64 },
    NoBadConfiguration { n_max: usize, m_max: usize, eps: f64 },
    /// The variation lower bound strictly drops from depth `from` to `to`.
    VariationDrops { from: usize, to: usize, m_ext: usize },
    /// `g_n` agrees with [`closed_form_furstenberg_g`] within `1e-12`.
    ClosedForm { p: Ratio, max_len: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fact {
    pub claim: Claim,
    /// Operation that checks the claim.
    pub operation: &'static str,
    pub basis: Basis,
}

impl Fact {
    fn new(claim: Claim, operation: &'static str, basis: Basis) -> Self {
        Fact { claim, operation, basis }
    }

    /// Runs the named operation and compares with the claim.
    pub fn check(&self, process: &FactorProcess<Ratio>) -> Result<bool> {
        let budget = SearchBudget::default();
        Ok(match &self.claim {
            Claim::Stationary(p) => process.model().stationary() == p.as_slice(),
            Claim::StronglyLumpable(v) => strong_lumpability(process.model().transition(), process.map()).lumpable == *v,
            Claim::ReversedLumpable(v) => reversed_lumpability(process)?.lumpable == *v,
            Claim::FactorMarkov { depth, transition } => {
                let probe = process.markov_order_probe(*depth)?;
                probe.order.is_some_and(|o| o <= 1) && probe.transition == *transition
            }
            Claim::TjurSpread { symbol, continuations, cylinder, max_depth, spread } => {
                let target = vec![*symbol; max_depth + 1];
                let depths: Vec<usize> = (1..=*max_depth).collect();
                let probe = tjur_probe(process, &target, continuations, cylinder, &depths, 0.5)?;
                probe.rows.iter().all(|r| r.spread == *spread)
            }
            Claim::EntropyRate(h) => (process.model().entropy_rate() - h).abs() < 1e-12,
            Claim::FullImage => process.image().adjacency().is_positive(),
            Claim::ConstantConditional { symbol, value, max_len } => (2..=*max_len).all(|len| {
                process
                    .image()
                    .allowed_words(len)
                    .iter()
                    .filter(|w| w.symbols[0] == *symbol)
                    .all(|w| process.g_n(&w.symbols).is_ok_and(|g| g == *value))
            }),
            Claim::UniformFibreMarginals { max_len } => (1..=*max_len).all(|len| {
                process.image().allowed_words(len).iter().all(|w| {
                    first_state_posterior(process, &w.symbols).is_ok_and(|post| {
                        let k = ratio(1, post.len() as i64);
                        post.iter().all(|v| *v == k)
                    })
                })
            }),
            Claim::FibreMixing(expected) => match (process.system().is_fibre_mixing(MIXING_CAP), expected) {
                (MixingVerdict::Mixing { index }, Some(m)) => index == *m,
                (MixingVerdict::NotMixing { .. }, None) => true,
                _ => false,
            },
            Claim::BadConfiguration { n_max, m_max, min_gap } => {
                let search = process.find_bad_configuration(*n_max, *m_max, *min_gap, &budget)?;
                search.depths.iter().all(|d| d.witness.as_ref().is_some_and(|w| w.gap_f64() >= *min_gap))
            }
            Claim::NoBadConfiguration { n_max, m_max, eps } => {
                !process.find_bad_configuration(*n_max, *m_max, *eps, &budget)?.found()
            }
            Claim::VariationDrops { from, to, m_ext } => {
                let a = process.variation_estimate(*from, *m_ext, &budget)?.lower;
                let b = process.variation_estimate(*to, *m_ext, &budget)?.lower;
                b < a
            }
            Claim::ClosedForm { p, max_len } => {
                let fast = process.to_f64();
                let p = p.to_f64();
                (1..=*max_len).all(|len| {
                    fast.image().allowed_words(len).iter().all(|w| {
                        let closed = closed_form_furstenberg_g(&p, &w.symbols).expect("binary word");
                        fast.g_n(&w.symbols).is_ok_and(|g| (g - closed).abs() <= 1e-12)
                    })
                })
            }
        })
    }
}

/// An example model with its expected facts.
#[derive(Clone, Debug)]
pub struct NamedModel {
    pub id: String,
    pub process: FactorProcess<Ratio>,
    pub facts: Vec<Fact>,
}

impl NamedModel {
    pub fn model(&self) -> &MarkovModel<Ratio> {
        self.process.model()
    }

    /// Facts that do not hold, with the error if checking failed.
    pub fn check_all(&self) -> Vec<(&Fact, Option<Error>)> {
        self.facts
            .iter()
            .filter_map(|f| match f.check(&self.process) {
                Ok(true) => None,
                Ok(false) => Some((f, None)),
                Err(e) => Some((f, Some(e))),
            })
            .collect()
    }
}

fn open_unit(p: &Ratio) -> Result<()> {
    if p.is_positive() && *p < Ratio::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("probability must lie strictly between 0 and 1"))
    }
}

fn signs() -> Alphabet {
    Alphabet::new(["+", "-"]).expect("distinct labels")
}

/// 2-block recoding of a chain on `{+1, −1}` observed through `x_0 x_1`.
fn product_code(rows: Vec<Vec<Ratio>>) -> Result<FactorProcess<Ratio>> {
    let base = MarkovModel::exact(signs(), rows)?;
    let (model, dict) = base.higher_block(2)?;
    let assign = dict.iter().map(|w| usize::from(w.symbols[0] != w.symbols[1])).collect();
    let map = FactorMap::new(model.shift().alphabet().clone(), signs(), assign)?;
    FactorProcess::from_map(model, map)
}

fn is_half(p: &Ratio) -> bool {
    *p == ratio(1, 2)
}

/// Bernoulli(`p`) signs observed through the product of neighbours.
pub fn furstenberg(p: Ratio) -> Result<NamedModel> {
    open_unit(&p)?;
    let q = Ratio::one() - p.clone();
    let process = product_code(vec![vec![p.clone(), q.clone()], vec![p.clone(), q]])?;
    let mut facts = vec![
        Fact::new(Claim::FullImage, "verify_image_sft", Basis::Analytic),
        Fact::new(Claim::ClosedForm { p: p.clone(), max_len: 10 }, "closed_form_furstenberg_g", Basis::Oracle),
        Fact::new(Claim::FibreMixing(None), "is_fibre_mixing", Basis::Elementary),
    ];
    if is_half(&p) {
        facts.push(Fact::new(Claim::ConstantConditional { symbol: 0, value: ratio(1, 2), max_len: 8 }, "g_n", Basis::Analytic));
        facts.push(Fact::new(Claim::UniformFibreMarginals { max_len: 8 }, "first_state_posterior", Basis::Analytic));
        facts.push(Fact::new(Claim::NoBadConfiguration { n_max: 4, m_max: 12, eps: 1e-9 }, "find_bad_configuration", Basis::Analytic));
    } else {
        let gap = (p.to_f64() * 2.0 - 1.0).abs();
        facts.push(Fact::new(
            Claim::BadConfiguration { n_max: 4, m_max: 40, min_gap: 0.975 * gap },
            "find_bad_configuration",
            Basis::Oracle,
        ));
    }
    Ok(NamedModel { id: format!("furstenberg:{p}"), process, facts })
}

fn pow<S: Scalar>(base: &S, mut exp: u64) -> S {
    let mut acc = S::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        exp >>= 1;
    }
    acc
}

/// `ν(y_0 | y_1 … y_n)` for [`furstenberg`] in closed form, with symbol 0
/// standing for `+1`. Evaluated through the ratio that stays bounded.
pub fn closed_form_furstenberg_g<S: Scalar>(p: &S, y: &[usize]) -> Result<S> {
    if !(p.is_positive() && *p < S::one()) {
        return Err(Error::InvalidParameter("probability must lie strictly between 0 and 1"));
    }
    if y.is_empty() || y.iter().any(|&s| s > 1) {
        return Err(Error::DisallowedWord(y.to_vec()));
    }
    let q = S::one() - p.clone();
    let mut sign = 1i64;
    let mut s_tilde = 0i64;
    for &s in &y[1..] {
        if s == 1 {
            sign = -sign;
        }
        s_tilde += sign;
    }
    let (pp, qq) = (p.clone() * p.clone(), q.clone() * q.clone());
    let plus = if s_tilde >= 0 {
        let t = pow(&(q.clone() / p.clone()), s_tilde as u64);
        (pp + qq * t.clone()) / (p.clone() + q * t)
    } else {
        let t = pow(&(q.clone() / p.clone()), s_tilde.unsigned_abs());
        (pp * t.clone() + qq) / (p.clone() * t + q)
    };
    Ok(if y[0] == 0 { plus } else { S::one() - plus })
}

/// Symmetric two-state chain observed through the product code; the image
/// is Bernoulli(`p`).
pub fn symmetric_xor(p: Ratio) -> Result<NamedModel> {
    open_unit(&p)?;
    let q = Ratio::one() - p.clone();
    let process = product_code(vec![vec![p.clone(), q.clone()], vec![q, p.clone()]])?;
    let facts = vec![
        Fact::new(Claim::ConstantConditional { symbol: 0, value: p.clone(), max_len: 10 }, "g_n", Basis::Analytic),
        Fact::new(Claim::UniformFibreMarginals { max_len: 8 }, "first_state_posterior", Basis::Analytic),
        Fact::new(Claim::FibreMixing(None), "is_fibre_mixing", Basis::Elementary),
        Fact::new(Claim::NoBadConfiguration { n_max: 4, m_max: 12, eps: 1e-9 }, "find_bad_configuration", Basis::Oracle),
    ];
    let mut named = NamedModel { id: format!("xor:{p}"), process, facts };
    let (half_p, half_q) = (p.clone() / ratio(2, 1), (Ratio::one() - p) / ratio(2, 1));
    let stationary = vec![half_p.clone(), half_q.clone(), half_q, half_p];
    named.facts.push(Fact::new(Claim::Stationary(stationary), "stationary_distribution", Basis::Elementary));
    Ok(named)
}

/// Four-state chain whose three-symbol image is Markov although the chain
/// is not strongly lumpable.
pub fn weak_lumpable_4state() -> NamedModel {
    let h = ratio(1, 2);
    let z = Ratio::zero();
    let rows = vec![
        vec![h.clone(), h.clone(), z.clone(), z.clone()],
        vec![h.clone(), z.clone(), h.clone(), z.clone()],
        vec![z.clone(), z.clone(), h.clone(), h.clone()],
        vec![h.clone(), z.clone(), h.clone(), z.clone()],
    ];
    let model = MarkovModel::exact(Alphabet::new(["1", "2", "3", "4"]).expect("distinct"), rows).expect("valid chain");
    let map = FactorMap::from_labels(model.shift().alphabet().clone(), &["a", "b", "a", "c"]).expect("valid map");
    let process = FactorProcess::from_map(model, map).expect("compatible");
    let quarter = ratio(1, 4);
    let one = Ratio::one();
    let transition = Matrix::from_rows(vec![
        vec![h.clone(), quarter.clone(), quarter],
        vec![one.clone(), z.clone(), z.clone()],
        vec![one, z.clone(), z],
    ])
    .expect("square");
    let facts = vec![
        Fact::new(Claim::Stationary(vec![ratio(1, 3), ratio(1, 6), ratio(1, 3), ratio(1, 6)]), "stationary_distribution", Basis::Analytic),
        Fact::new(Claim::StronglyLumpable(false), "strong_lumpability", Basis::Analytic),
        Fact::new(Claim::FactorMarkov { depth: 8, transition }, "markov_order_probe", Basis::Analytic),
        Fact::new(Claim::ReversedLumpable(true), "reversed_lumpability", Basis::Analytic),
        Fact::new(
            Claim::TjurSpread { symbol: 0, continuations: vec![vec![1], vec![2]], cylinder: vec![0], max_depth: 12, spread: Ratio::one() },
            "tjur_probe",
            Basis::Analytic,
        ),
        Fact::new(Claim::EntropyRate(core::f64::consts::LN_2), "entropy_rate", Basis::Analytic),
        Fact::new(Claim::FibreMixing(None), "is_fibre_mixing", Basis::Oracle),
    ];
    NamedModel { id: "wl4".into(), process, facts }
}

/// Default positive matrix for [`positive_merge_3state`], a circulant that
/// is not lumpable under the merge.
pub fn default_positive_rows() -> Vec<Vec<Ratio>> {
    let (h, t, s) = (ratio(1, 2), ratio(1, 3), ratio(1, 6));
    vec![vec![h.clone(), t.clone(), s.clone()], vec![s.clone(), h.clone(), t.clone()], vec![t, s, h]]
}

/// Positive matrix symmetric under swapping the merged states; the merge is
/// strongly lumpable and every `var_n` vanishes.
pub fn symmetric_positive_rows() -> Vec<Vec<Ratio>> {
    let (h, q) = (ratio(1, 2), ratio(1, 4));
    vec![vec![h.clone(), q.clone(), q.clone()], vec![q.clone(), h.clone(), q.clone()], vec![q.clone(), q, h]]
}

/// Strictly positive three-state chain with the first two states merged.
pub fn positive_merge_3state(rows: Vec<Vec<Ratio>>) -> Result<NamedModel> {
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(Error::DimensionMismatch { expected: 3, found: rows.len() });
    }
    if rows.iter().flatten().any(|v| !v.is_positive()) {
        return Err(Error::NotPositive);
    }
    let transition = StochasticMatrix::from_rows(rows)?;
    let model = MarkovModel::from_transition(Alphabet::new(["1", "2", "3"]).expect("distinct"), transition)?;
    let map = FactorMap::from_labels(model.shift().alphabet().clone(), &["a", "a", "b"])?;
    let process = FactorProcess::from_map(model, map)?;
    let facts = vec![
        Fact::new(Claim::FibreMixing(Some(1)), "is_fibre_mixing", Basis::Elementary),
        Fact::new(Claim::VariationDrops { from: 3, to: 4, m_ext: 8 }, "variation_estimate", Basis::Oracle),
        Fact::new(Claim::NoBadConfiguration { n_max: 6, m_max: 8, eps: 0.05 }, "find_bad_configuration", Basis::Oracle),
    ];
    Ok(NamedModel { id: "pos3".into(), process, facts })
}

/// Looks up a preset by identifier: `furstenberg:<p>`, `xor:<p>`, `wl4`, `pos3`.
pub fn preset(id: &str) -> Result<NamedModel> {
    let parse = |text: &str| crate::scalar::parse_ratio(text).ok_or(Error::InvalidParameter("malformed probability"));
    match id.split_once(':') {
        Some(("furstenberg", p)) => furstenberg(parse(p)?),
        Some(("xor", p)) => symmetric_xor(parse(p)?),
        None if id == "wl4" => Ok(weak_lumpable_4state()),
        None if id == "pos3" => positive_merge_3state(default_positive_rows()),
        _ => Err(Error::InvalidParameter("unknown preset")),
    }
}
