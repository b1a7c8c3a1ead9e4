//! Conditional measures on fibres, probed at finite depth.
//!
//! The fibre measure `μ_y` is never built as a limit object. Instead this
//! module evaluates the finite-window quantities that converge to it: the
//! posterior of the first hidden state, the `g̃` representation of the
//! factor's conditional probabilities, the averaging kernels `G_n^y`, the
//! Gibbs form of the same kernels, and direct conditioning on image
//! cylinders.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::conditionals::{fit_decay, strong_lumpability, DecayFit, FactorProcess};
use crate::error::{Error, Result};
use crate::factor::FibreWindow;
use crate::markov::StochasticMatrix;
use crate::matrix::Matrix;
use crate::scalar::{sum, Scalar};
use crate::sft::Word;

/// Outcome of the reversed-chain lumpability test.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversedLumpability<S: Scalar> {
    pub lumpable: bool,
    /// `kernel[y0][y1] = Σ_{a ∈ π⁻¹(y0)} Q[a][a']`, common to all `a' ∈ π⁻¹(y1)`.
    pub kernel: Option<Matrix<S>>,
    /// `(y0, y1, a', a'')` with different class sums.
    pub violation: Option<(usize, usize, usize, usize)>,
}

/// Value of `g̃` at a finite depth with convergence diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct GTilde<S> {
    pub value: S,
    pub depth: usize,
    /// `|g̃_N − g̃_{N−1}|` and `|g̃_{N−1} − g̃_{N−2}|`, where available.
    pub deltas: Vec<f64>,
    /// Last delta below `1e-10`, or the reversed chain lumps.
    pub converged: bool,
}

/// Convergence threshold for [`GTilde::converged`].
pub const CONVERGENCE_TOLERANCE: f64 = 1e-10;

/// Normalized weights `G_n^y` over the fibre words of a window, for one
/// boundary state beyond the window.
#[derive(Clone, Debug, PartialEq)]
pub struct FibrePotential<S> {
    pub word: Vec<usize>,
    pub boundary: usize,
    /// Admissible interior words `a_0 … a_n`.
    pub words: Vec<Vec<usize>>,
    pub weights: Vec<S>,
    /// `Σ Π Q(a_i, a_{i+1})` over the admissible interior words.
    pub partition: S,
}

impl<S: Scalar> FibrePotential<S> {
    /// `Σ_w G(w) f(w)`; `f` returns `None` where it is undefined.
    pub fn apply(&self, f: impl Fn(&[usize]) -> Option<S>) -> Result<S> {
        let mut acc = S::zero();
        for (w, g) in self.words.iter().zip(&self.weights) {
            let v = f(w).ok_or_else(|| Error::DomainMismatch(w.clone()))?;
            acc = acc + g.clone() * v;
        }
        Ok(acc)
    }

    pub fn weight_of(&self, word: &[usize]) -> S {
        self.words.iter().position(|w| w == word).map_or_else(S::zero, |i| self.weights[i].clone())
    }
}

/// Applies the averaging operator to a function given as a table on
/// interior fibre words.
pub fn averaging_operator_apply<S: Scalar>(pot: &FibrePotential<S>, table: &BTreeMap<Vec<usize>, S>) -> Result<S> {
    pot.apply(|w| table.get(w).cloned())
}

/// Single-site marginals of the hidden chain given a finite image window,
/// the depth-`N` approximation of the fibre measure at `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct FibreMeasure<S> {
    pub word: Vec<usize>,
    /// `marginals[i][k]`: probability of `preimage(word[i])[k]` at position `i`.
    pub marginals: Vec<Vec<S>>,
    /// Largest change of the position-0 marginal when the window loses its
    /// last one and two symbols.
    pub deltas: Vec<f64>,
}

impl<S: Scalar> FibreMeasure<S> {
    pub fn marginal(&self, position: usize, state: usize, map: &crate::factor::FactorMap) -> S {
        let b = self.word[position];
        map.preimage(b).iter().position(|&a| a == state).map_or_else(S::zero, |k| self.marginals[position][k].clone())
    }
}

/// Gibbs kernel `γ_{[0,n]}(· | boundary)` from energies `−ln Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsKernel {
    pub word: Vec<usize>,
    pub boundary: Word,
    pub words: Vec<Vec<usize>>,
    pub values: Vec<f64>,
    /// `Z_{[0,n]}` for the given boundary.
    pub partition: f64,
}

/// Conditional values of a test cylinder across continuations and depths.
#[derive(Clone, Debug, PartialEq)]
pub struct TjurProbe<S> {
    pub target: Vec<usize>,
    pub cylinder: Vec<usize>,
    pub continuations: Vec<Vec<usize>>,
    pub rows: Vec<TjurRow<S>>,
    pub eps: f64,
    /// Spread at least `eps` on three or more successive depths.
    pub discontinuity_certified: bool,
    pub fit: Option<DecayFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TjurRow<S> {
    pub depth: usize,
    /// One value per continuation.
    pub values: Vec<S>,
    pub spread: S,
}

/// Tests whether the classes of `Q` columns sum equally, i.e. whether the
/// reversed chain is strongly lumpable.
pub fn reversed_lumpability<S: Scalar>(fp: &FactorProcess<S>) -> Result<ReversedLumpability<S>> {
    let qt = StochasticMatrix::new(fp.model().reversal().transpose())?;
    let lump = strong_lumpability(&qt, fp.map());
    Ok(ReversedLumpability {
        lumpable: lump.lumpable,
        kernel: lump.factor.map(|f| f.transpose()),
        violation: lump.violation.map(|v| (v.target, v.class, v.states.0, v.states.1)),
    })
}

/// `κ = min { Q[a][a'] : P[a][a'] > 0 }`.
pub fn kappa<S: Scalar>(fp: &FactorProcess<S>) -> S {
    let q = fp.model().reversal();
    let mut best: Option<S> = None;
    for a in 0..q.rows() {
        for b in 0..q.cols() {
            let v = q.get(a, b);
            if !v.is_zero() && best.as_ref().is_none_or(|m| v < m) {
                best = Some(v.clone());
            }
        }
    }
    best.unwrap_or_else(S::zero)
}

/// `G^b(a') = Σ_{a ∈ π⁻¹(b)} Q[a][a']`.
pub fn class_reversal_weight<S: Scalar>(fp: &FactorProcess<S>, b: usize, a_prime: usize) -> S {
    let q = fp.model().reversal();
    sum(&fp.map().preimage(b).iter().map(|&a| q.get(a, a_prime).clone()).collect::<Vec<_>>())
}

/// Posterior of the first hidden state given the image word `y`, over
/// `π⁻¹(y[0])` in preimage order.
pub fn first_state_posterior<S: Scalar>(fp: &FactorProcess<S>, y: &[usize]) -> Result<Vec<S>> {
    if y.is_empty() || y.iter().any(|&b| b >= fp.image_size()) {
        return Err(Error::DisallowedWord(y.to_vec()));
    }
    let mut beta = vec![S::one(); fp.map().preimage(*y.last().expect("nonempty")).len()];
    for w in y.windows(2).rev() {
        beta = fp.block(w[0], w[1]).right_apply(&beta);
        S::rescale(&mut beta);
    }
    let p = fp.model().stationary();
    let mut post: Vec<S> = fp.map().preimage(y[0]).iter().zip(&beta).map(|(&a, b)| p[a].clone() * b.clone()).collect();
    let total = sum(&post);
    if total.is_zero() {
        return Err(Error::ZeroProbability(y.to_vec()));
    }
    for v in post.iter_mut() {
        *v = v.clone() / total.clone();
    }
    Ok(post)
}

/// Marginals of `X_i` given `Y_0 … Y_N = y` for every position, by a
/// forward and a backward pass.
pub fn fibre_measure<S: Scalar>(fp: &FactorProcess<S>, y: &[usize]) -> Result<FibreMeasure<S>> {
    let marginals = site_marginals(fp, y)?;
    let mut deltas = Vec::new();
    for cut in 1..=2 {
        if y.len() > cut {
            let shorter = first_state_posterior(fp, &y[..y.len() - cut])?;
            let d = marginals[0].iter().zip(&shorter).map(|(a, b)| Float::abs(a.to_f64() - b.to_f64())).fold(0.0, f64::max);
            deltas.push(d);
        }
    }
    Ok(FibreMeasure { word: y.to_vec(), marginals, deltas })
}

fn site_marginals<S: Scalar>(fp: &FactorProcess<S>, y: &[usize]) -> Result<Vec<Vec<S>>> {
    if y.is_empty() || y.iter().any(|&b| b >= fp.image_size()) {
        return Err(Error::DisallowedWord(y.to_vec()));
    }
    let mut alphas = Vec::with_capacity(y.len());
    let mut st = fp.start(y[0]);
    alphas.push(st.vector.clone());
    for &b in &y[1..] {
        st = fp.advance(&st, b);
        alphas.push(st.vector.clone());
    }
    let mut betas = vec![Vec::new(); y.len()];
    betas[y.len() - 1] = vec![S::one(); fp.map().preimage(y[y.len() - 1]).len()];
    for i in (0..y.len() - 1).rev() {
        let mut b = fp.block(y[i], y[i + 1]).right_apply(&betas[i + 1]);
        S::rescale(&mut b);
        betas[i] = b;
    }
    alphas
        .into_iter()
        .zip(betas)
        .map(|(a, b)| {
            let mut v: Vec<S> = a.into_iter().zip(b).map(|(x, z)| x * z).collect();
            let total = sum(&v);
            if total.is_zero() {
                return Err(Error::ZeroProbability(y.to_vec()));
            }
            v.iter_mut().for_each(|x| *x = x.clone() / total.clone());
            Ok(v)
        })
        .collect()
}

/// `P(X_1 = a' | Y_1 … Y_N = y)`, written with `y = y_1 … y_N`; zero when
/// `a'` lies outside `π⁻¹(y_1)`.
pub fn conditional_fibre_marginal<S: Scalar>(fp: &FactorProcess<S>, y: &[usize], a_prime: usize) -> Result<S> {
    let post = first_state_posterior(fp, y)?;
    Ok(fp.map().preimage(y[0]).iter().position(|&a| a == a_prime).map_or_else(S::zero, |i| post[i].clone()))
}

fn g_tilde_at<S: Scalar>(fp: &FactorProcess<S>, y: &[usize]) -> Result<S> {
    let post = first_state_posterior(fp, &y[1..])?;
    Ok(fp
        .map()
        .preimage(y[1])
        .iter()
        .zip(post)
        .fold(S::zero(), |acc, (&a, w)| acc + class_reversal_weight(fp, y[0], a) * w))
}

/// `g̃(y_0 … y_N) = Σ_{a'} G^{y_0}(a') P(X_1 = a' | Y_1^N = y_1^N)`.
pub fn g_tilde<S: Scalar>(fp: &FactorProcess<S>, y: &[usize]) -> Result<GTilde<S>> {
    if y.len() < 2 {
        return Err(Error::InvalidParameter("g̃ needs a word of length at least 2"));
    }
    if y.iter().any(|&b| b >= fp.image_size()) {
        return Err(Error::DisallowedWord(y.to_vec()));
    }
    let value = g_tilde_at(fp, y)?;
    let mut values = vec![value.to_f64()];
    for cut in 1..=2 {
        if y.len() - cut >= 2 {
            values.push(g_tilde_at(fp, &y[..y.len() - cut])?.to_f64());
        }
    }
    let deltas: Vec<f64> = values.windows(2).map(|w| Float::abs(w[0] - w[1])).collect();
    let converged = deltas.first().is_some_and(|&d| d < CONVERGENCE_TOLERANCE) || reversed_lumpability(fp)?.lumpable;
    Ok(GTilde { value, depth: y.len() - 1, deltas, converged })
}

fn q_product<S: Scalar>(fp: &FactorProcess<S>, word: &[usize], boundary: usize) -> S {
    let q = fp.model().reversal();
    word.windows(2)
        .map(|w| q.get(w[0], w[1]).clone())
        .chain(core::iter::once(q.get(*word.last().expect("nonempty"), boundary).clone()))
        .fold(S::one(), |acc, v| acc * v)
}

fn admissible_interiors(fp_allows: impl Fn(usize, usize) -> bool, fw: &FibreWindow, boundary: usize) -> Vec<Vec<usize>> {
    fw.paths().into_iter().filter(|p| fp_allows(*p.last().expect("nonempty"), boundary)).collect()
}

/// Normalized `Π Q(a_i, a_{i+1})` over interior words `a_0 … a_n` of the
/// window that can be followed by `boundary`.
pub fn fibre_potential<S: Scalar>(fp: &FactorProcess<S>, fw: &FibreWindow, boundary: usize) -> Result<FibrePotential<S>> {
    let words = admissible_interiors(|a, b| fp.model().shift().allows(a, b), fw, boundary);
    if words.is_empty() {
        return Err(Error::EmptyFibre(fw.word.clone()));
    }
    let raw: Vec<S> = words.iter().map(|w| q_product(fp, w, boundary)).collect();
    let partition = sum(&raw);
    let weights = raw.into_iter().map(|v| v / partition.clone()).collect();
    Ok(FibrePotential { word: fw.word.clone(), boundary, words, weights, partition })
}

/// Domain states that can follow at least one fibre word of the window.
pub fn admissible_boundaries<S: Scalar>(fp: &FactorProcess<S>, fw: &FibreWindow) -> Vec<usize> {
    let last = fw.states.last().expect("nonempty window");
    (0..fp.model().size())
        .filter(|&b| last.iter().any(|&a| fp.model().shift().allows(a, b)))
        .collect()
}

/// `P_n^y f` evaluated at every admissible boundary state.
pub fn averaged_table<S: Scalar>(
    fp: &FactorProcess<S>,
    fw: &FibreWindow,
    f: impl Fn(&[usize]) -> Option<S>,
) -> Result<Vec<(usize, S)>> {
    admissible_boundaries(fp, fw)
        .into_iter()
        .map(|b| fibre_potential(fp, fw, b).and_then(|pot| pot.apply(&f)).map(|v| (b, v)))
        .collect()
}

/// Spread of `P_n^y f` across admissible boundary states.
pub fn boundary_oscillation<S: Scalar>(table: &[(usize, S)]) -> S {
    let mut it = table.iter().map(|(_, v)| v.clone());
    let Some(first) = it.next() else { return S::zero() };
    let (lo, hi) = it.fold((first.clone(), first), |(lo, hi), v| {
        (if v < lo { v.clone() } else { lo }, if v > hi { v } else { hi })
    });
    hi - lo
}

/// Gibbs form of the window kernel: energy `H = −Σ ln Q(a_i, a_{i+1})`
/// including the bond to the boundary, normalized by log-sum-exp.
pub fn gibbs_kernel<S: Scalar>(fp: &FactorProcess<S>, fw: &FibreWindow, boundary: &Word) -> Result<GibbsKernel> {
    if boundary.is_empty() || boundary.offset != fw.len() {
        return Err(Error::InvalidParameter("boundary must start right after the window"));
    }
    if !fp.model().shift().is_allowed(boundary.as_slice()) {
        return Err(Error::DisallowedWord(boundary.symbols.clone()));
    }
    let b0 = boundary.symbols[0];
    let words = admissible_interiors(|a, b| fp.model().shift().allows(a, b), fw, b0);
    if words.is_empty() {
        return Err(Error::EmptyFibre(fw.word.clone()));
    }
    let q = fp.model().reversal();
    let energies: Vec<f64> = words
        .iter()
        .map(|w| {
            w.iter()
                .zip(w.iter().skip(1).chain(core::iter::once(&b0)))
                .map(|(&a, &b)| -Float::ln(q.get(a, b).to_f64()))
                .sum()
        })
        .collect();
    let lowest = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = energies.iter().map(|h| Float::exp(lowest - h)).collect();
    let total: f64 = shifted.iter().sum();
    let values = shifted.iter().map(|v| v / total).collect();
    let partition = Float::exp(-lowest) * total;
    Ok(GibbsKernel { word: fw.word.clone(), boundary: boundary.clone(), words, values, partition })
}

/// `min γ(C | x) / γ(C | x̃)` over admissible boundary pairs and cylinders
/// `C = [a_0 … a_{m−1}]` inside the window; `1` for a single boundary.
pub fn boundary_uniformity_constant<S: Scalar>(fp: &FactorProcess<S>, fw: &FibreWindow, m: usize) -> Result<S> {
    if m == 0 || m > fw.len() {
        return Err(Error::InvalidParameter("cylinder depth must be between 1 and the window length"));
    }
    let kernels: Vec<FibrePotential<S>> = admissible_boundaries(fp, fw)
        .into_iter()
        .map(|b| fibre_potential(fp, fw, b))
        .collect::<Result<_>>()?;
    let cylinders: BTreeMap<Vec<usize>, ()> = kernels.iter().flat_map(|k| k.words.iter().map(|w| (w[..m].to_vec(), ()))).collect();
    let mass = |k: &FibrePotential<S>, c: &[usize]| {
        sum(&k.words.iter().zip(&k.weights).filter(|(w, _)| &w[..m] == c).map(|(_, g)| g.clone()).collect::<Vec<_>>())
    };
    let mut best = S::one();
    for c in cylinders.keys() {
        let masses: Vec<S> = kernels.iter().map(|k| mass(k, c)).collect();
        for x in &masses {
            for y in &masses {
                if !y.is_zero() {
                    let r = x.clone() / y.clone();
                    if r < best {
                        best = r;
                    }
                }
            }
        }
    }
    Ok(best)
}

/// `μ(X_i = pins[i] where pinned, Y_0 … Y_K = w)` by a constrained forward pass.
pub fn pinned_mass<S: Scalar>(fp: &FactorProcess<S>, w: &[usize], pins: &[Option<usize>]) -> S {
    if w.is_empty() || w.iter().any(|&b| b >= fp.image_size()) {
        return S::zero();
    }
    let map = fp.map();
    let mask = |i: usize, v: &mut Vec<S>| {
        if let Some(Some(s)) = pins.get(i) {
            for (k, &a) in map.preimage(w[i]).iter().enumerate() {
                if a != *s {
                    v[k] = S::zero();
                }
            }
        }
    };
    let mut st = fp.start(w[0]);
    mask(0, &mut st.vector);
    for (i, &b) in w.iter().enumerate().skip(1) {
        st = fp.advance(&st, b);
        mask(i, &mut st.vector);
    }
    st.mass()
}

/// `μ([x] | π⁻¹[w])` for the cylinder `x` at position 0.
pub fn conditioned_cylinder<S: Scalar>(fp: &FactorProcess<S>, x: &[usize], w: &[usize]) -> Result<S> {
    let den = fp.factor_cylinder_probability(w);
    if den.is_zero() {
        return Err(Error::ZeroProbability(w.to_vec()));
    }
    let pins: Vec<Option<usize>> = x.iter().map(|&s| Some(s)).collect();
    Ok(pinned_mass(fp, w, &pins) / den)
}

/// `μ(x_0 … x_n | x_{n+1}^{n+ℓ}, π⁻¹[w])` by direct conditioning, for the
/// domain word `x` of length `n + ℓ + 1` split after position `n`.
pub fn direct_window_conditional<S: Scalar>(fp: &FactorProcess<S>, w: &[usize], x: &[usize], n: usize) -> Result<S> {
    let all: Vec<Option<usize>> = x.iter().map(|&s| Some(s)).collect();
    let tail: Vec<Option<usize>> = x.iter().enumerate().map(|(i, &s)| (i > n).then_some(s)).collect();
    let den = pinned_mass(fp, w, &tail);
    if den.is_zero() {
        return Err(Error::ZeroProbability(w.to_vec()));
    }
    Ok(pinned_mass(fp, w, &all) / den)
}

/// Markov form of the fibre conditional:
/// `μ(x_0^{n+1}) / Σ_b μ(b_0^n x_{n+1})` with `π(b_0^n) = y_0^n`.
/// `y` is `π(x)` and may include `π(next)` as a final symbol.
pub fn fibre_markov_conditional<S: Scalar>(fp: &FactorProcess<S>, y: &[usize], x: &[usize], next: usize) -> Result<S> {
    let map = fp.map();
    let image = map.apply(x);
    let consistent = match y.len() {
        l if l == x.len() => y == image.as_slice(),
        l if l == x.len() + 1 => y[..x.len()] == image[..] && y[x.len()] == map.image_of(next),
        _ => false,
    };
    if x.is_empty() || !consistent {
        return Err(Error::DomainMismatch(x.to_vec()));
    }
    let st = fp.forward(&image).ok_or_else(|| Error::DisallowedWord(image.clone()))?;
    let p = fp.model().transition();
    let den = st
        .vector
        .iter()
        .zip(map.preimage(*image.last().expect("nonempty")))
        .fold(S::zero(), |acc, (v, &a)| acc + v.clone() * p.get(a, next).clone())
        .scale_by_exp(st.log_scale);
    if den.is_zero() {
        return Err(Error::ZeroProbability([image.as_slice(), &[map.image_of(next)]].concat()));
    }
    let num = fp.model().cylinder_probability(&[x, &[next]].concat());
    Ok(num / den)
}

/// Conditional probability of `cylinder` (at position 0) given
/// `π⁻¹[y_0 … y_n · z]` for every continuation `z` and every depth `n`.
pub fn tjur_probe<S: Scalar>(
    fp: &FactorProcess<S>,
    target: &[usize],
    continuations: &[Vec<usize>],
    cylinder: &[usize],
    depths: &[usize],
    eps: f64,
) -> Result<TjurProbe<S>> {
    if continuations.is_empty() {
        return Err(Error::InvalidParameter("need at least one continuation"));
    }
    let mut rows = Vec::new();
    for &n in depths {
        if n >= target.len() {
            return Err(Error::InvalidParameter("depth exceeds the target prefix"));
        }
        let values: Vec<S> = continuations
            .iter()
            .map(|z| conditioned_cylinder(fp, cylinder, &[&target[..=n], z.as_slice()].concat()))
            .collect::<Result<_>>()?;
        let hi = values.iter().cloned().fold(values[0].clone(), |a, b| if b > a { b } else { a });
        let lo = values.iter().cloned().fold(values[0].clone(), |a, b| if b < a { b } else { a });
        rows.push(TjurRow { depth: n, values, spread: hi - lo });
    }
    let mut run = 0usize;
    let mut certified = false;
    for r in &rows {
        run = if r.spread.to_f64() >= eps { run + 1 } else { 0 };
        certified |= run >= 3;
    }
    let fit = fit_decay(&rows.iter().map(|r| (r.depth, r.spread.to_f64())).collect::<Vec<_>>());
    Ok(TjurProbe {
        target: target.to_vec(),
        cylinder: cylinder.to_vec(),
        continuations: continuations.to_vec(),
        rows,
        eps,
        discontinuity_certified: certified,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::FactorMap;
    use crate::markov::MarkovModel;
    use crate::scalar::{ratio, Ratio};
    use crate::sft::Alphabet;

    fn wl4() -> FactorProcess<Ratio> {
        let h = ratio(1, 2);
        let z = ratio(0, 1);
        let m = MarkovModel::exact(
            Alphabet::new(["1", "2", "3", "4"]).unwrap(),
            vec![
                vec![h.clone(), h.clone(), z.clone(), z.clone()],
                vec![h.clone(), z.clone(), h.clone(), z.clone()],
                vec![z.clone(), z.clone(), h.clone(), h.clone()],
                vec![h.clone(), z.clone(), h.clone(), z],
            ],
        )
        .unwrap();
        let map = FactorMap::from_labels(m.shift().alphabet().clone(), &["a", "b", "a", "c"]).unwrap();
        FactorProcess::from_map(m, map).unwrap()
    }

    #[test]
    fn wl4_reversed_chain_lumps() {
        let fp = wl4();
        let r = reversed_lumpability(&fp).unwrap();
        assert!(r.lumpable);
        let k = r.kernel.unwrap();
        assert_eq!(*k.get(0, 0), ratio(1, 2));
        assert_eq!(*k.get(1, 0), ratio(1, 4));
        assert_eq!(*k.get(2, 0), ratio(1, 4));
        assert_eq!(*k.get(0, 1), ratio(1, 1));
        assert_eq!(*k.get(0, 2), ratio(1, 1));
        assert_eq!(kappa(&fp), ratio(1, 4));
    }

    #[test]
    fn wl4_posterior_is_decoded_by_b() {
        let fp = wl4();
        assert_eq!(first_state_posterior(&fp, &[0, 1]).unwrap(), vec![ratio(1, 1), ratio(0, 1)]);
        assert_eq!(conditional_fibre_marginal(&fp, &[0, 0, 2], 2).unwrap(), ratio(1, 1));
        assert_eq!(first_state_posterior(&fp, &[0, 0]).unwrap(), vec![ratio(1, 2), ratio(1, 2)]);
    }

    #[test]
    fn g_tilde_matches_g_n_and_normalizes() {
        let fp = wl4();
        let y = [0, 0, 1, 0, 0, 2];
        let gt = g_tilde(&fp, &y).unwrap();
        assert_eq!(gt.value, fp.g_n(&y).unwrap());
        assert!(gt.converged);
        let total: Ratio = (0..3)
            .filter(|&b| fp.image().allows(b, 0))
            .map(|b| g_tilde(&fp, &[b, 0, 1, 0]).unwrap().value)
            .sum();
        assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn potentials_and_kernels_agree() {
        let fp = wl4();
        let fw = fp.fibre_window(&[0, 0, 0]).unwrap();
        let pot = fibre_potential(&fp, &fw, 0).unwrap();
        assert_eq!(pot.words, vec![vec![0, 0, 0]]);
        assert_eq!(pot.weights, vec![ratio(1, 1)]);
        let ker = gibbs_kernel(&fp, &fw, &Word::at(3, vec![0, 1])).unwrap();
        assert_eq!(ker.words, pot.words);
        assert!((ker.values[0] - 1.0).abs() < 1e-15);
        assert!((ker.partition - pot.partition.to_f64()).abs() < 1e-15);
        assert_eq!(pot.apply(|_| Some(ratio(1, 1))).unwrap(), ratio(1, 1));
        let empty = BTreeMap::new();
        assert!(matches!(averaging_operator_apply(&pot, &empty), Err(Error::DomainMismatch(_))));
        assert_eq!(boundary_uniformity_constant(&fp, &fw, 1).unwrap(), ratio(0, 1));
        assert!(gibbs_kernel(&fp, &fw, &Word::at(2, vec![0])).is_err());
    }

    #[test]
    fn markov_form_matches_direct_conditioning() {
        let fp = wl4();
        let x = [0, 0, 1, 0];
        let y = fp.map().apply(&x);
        let closed = fibre_markov_conditional(&fp, &y[..2], &x[..2], x[2]).unwrap();
        let w = [y.as_slice(), &[1, 0, 0]].concat();
        assert_eq!(direct_window_conditional(&fp, &w, &x, 1).unwrap(), closed);
        assert!(fibre_markov_conditional(&fp, &[1], &[0], 0).is_err());
    }

    #[test]
    fn fibre_measure_marginals_normalize() {
        let fp = wl4();
        let fm = fibre_measure(&fp, &[0, 0, 1, 0, 2, 0]).unwrap();
        for row in &fm.marginals {
            assert_eq!(row.iter().cloned().sum::<Ratio>(), ratio(1, 1));
        }
        assert_eq!(fm.marginal(1, 0, fp.map()), ratio(1, 1));
        assert_eq!(fm.marginal(3, 2, fp.map()), ratio(1, 1));
        assert_eq!(fm.marginals[0], first_state_posterior(&fp, &[0, 0, 1, 0, 2, 0]).unwrap());
    }

    #[test]
    fn injective_codes_lump_after_reversal() {
        let fp = wl4();
        let id = FactorMap::identity(fp.model().shift().alphabet().clone());
        let inj = FactorProcess::from_map(fp.model().clone(), id).unwrap();
        assert!(reversed_lumpability(&inj).unwrap().lumpable);
        assert_eq!(conditional_fibre_marginal(&inj, &[0, 1, 0], 0).unwrap(), ratio(1, 1));
    }

    #[test]
    fn wl4_tjur_spread_is_one() {
        let fp = wl4();
        let target = vec![0; 8];
        let probe = tjur_probe(&fp, &target, &[vec![1], vec![2]], &[0], &[1, 2, 3, 4, 5], 0.5).unwrap();
        assert!(probe.rows.iter().all(|r| r.spread == ratio(1, 1)));
        assert!(probe.discontinuity_certified);
    }
}
