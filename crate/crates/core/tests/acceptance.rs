//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits nonzero if any criterion fails, except for those listed in
//! `DOCUMENTED_FAILURES`, which fail for a known mathematical reason and are
//! still reported as FAIL.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mflab_core::conditionals::{fit_decay, strong_lumpability, SearchBudget};
use mflab_core::disintegration::{
    direct_window_conditional, fibre_markov_conditional, first_state_posterior, g_tilde, kappa, reversed_lumpability, tjur_probe,
};
use mflab_core::scalar::{ratio, Ratio};
use mflab_core::zoo::{self, closed_form_furstenberg_g};
use mflab_core::{FactorProcess, MixingVerdict, Scalar};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

/// Criteria whose literal statement is false; see the project notes.
const DOCUMENTED_FAILURES: &[usize] = &[8];

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "four-state weakly lumpable example is exact", wl4_exactness),
        (2, "four-state example has a discontinuity of size 1", wl4_discontinuity),
        (3, "product code agrees with its closed form", product_code_closed_form),
        (4, "product code has bad configurations iff p != 1/2", product_code_irregularity),
        (5, "symmetric product code has a Bernoulli image", symmetric_product_code),
        (6, "positive merge has geometrically decaying variation", positive_merge_decay),
        (7, "forward algorithm matches fibre enumeration", forward_oracle),
        (8, "g-tilde is normalized and bounded below by kappa", g_tilde_invariants),
        (9, "fibre Markov closed form matches direct conditioning", fibre_markov_closed_form),
        (10, "fibre mixing decisions with verified witnesses", mixing_decisions),
        (11, "Monte Carlo conditionals within 4 standard errors", monte_carlo),
    ];
    let mut unexpected = 0;
    let total = Instant::now();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{}]", secs(elapsed)),
            Err(detail) => {
                let note = if DOCUMENTED_FAILURES.contains(&id) { " (documented)" } else { "" };
                println!("FAIL {id:>2} {name}{note}: {detail} [{}]", secs(elapsed));
                if note.is_empty() {
                    unexpected += 1;
                }
            }
        }
    }
    println!("total {}", secs(total.elapsed()));
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn wl4_exactness() -> Outcome {
    let m = zoo::weak_lumpable_4state();
    let fp = &m.process;
    let expected = vec![ratio(1, 3), ratio(1, 6), ratio(1, 3), ratio(1, 6)];
    ensure(fp.model().stationary() == expected.as_slice(), || format!("stationary {:?}", fp.model().stationary()))?;
    ensure(!strong_lumpability(fp.model().transition(), fp.map()).lumpable, || "strongly lumpable".into())?;
    let probe = fp.markov_order_probe(8).map_err(|e| e.to_string())?;
    let rows = [[ratio(1, 2), ratio(1, 4), ratio(1, 4)], [Ratio::one(), Ratio::zero(), Ratio::zero()], [Ratio::one(), Ratio::zero(), Ratio::zero()]];
    let exact = (0..3).all(|i| (0..3).all(|j| *probe.transition.get(i, j) == rows[i][j]));
    ensure(probe.order.is_some_and(|o| o <= 1) && exact, || format!("order {:?}", probe.order))?;
    ensure(reversed_lumpability(fp).map_err(|e| e.to_string())?.lumpable, || "reversed chain not lumpable".into())?;
    let h = fp.model().entropy_rate();
    ensure((h - std::f64::consts::LN_2).abs() < 1e-12, || format!("entropy rate {h}"))?;
    let top = fp.model().shift().topological_entropy().map_err(|e| e.to_string())?;
    ensure((top - std::f64::consts::LN_2).abs() < 1e-9, || format!("topological entropy {top}"))?;
    Ok(format!("stationary exact, order {:?}, |h - ln 2| = {:.1e}, |h_top - ln 2| = {:.1e}", probe.order, (h - std::f64::consts::LN_2).abs(), (top - std::f64::consts::LN_2).abs()))
}

fn wl4_discontinuity() -> Outcome {
    let m = zoo::weak_lumpable_4state();
    let depths: Vec<usize> = (0..=12).collect();
    let probe = tjur_probe(&m.process, &[0; 13], &[vec![1], vec![2]], &[0], &depths, 0.5).map_err(|e| e.to_string())?;
    let bad: Vec<usize> = probe.rows.iter().filter(|r| r.spread != Ratio::one()).map(|r| r.depth).collect();
    ensure(bad.is_empty(), || format!("spread differs from 1 at depths {bad:?}"))?;
    Ok(format!("spread exactly 1 at n = 0..=12, certified = {}", probe.discontinuity_certified))
}

fn product_code_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for p in [ratio(3, 10), ratio(1, 2), ratio(7, 10)] {
        let fast = zoo::furstenberg(p.clone()).map_err(|e| e.to_string())?.process.to_f64();
        let pf = p.to_f64();
        for len in 1..=12 {
            for w in fast.image().allowed_words(len) {
                let g = fast.g_n(&w.symbols).map_err(|e| e.to_string())?;
                let c = closed_form_furstenberg_g(&pf, &w.symbols).map_err(|e| e.to_string())?;
                worst = worst.max((g - c).abs());
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:.3e}"))?;
    Ok(format!("{count} words, max deviation {worst:.1e}"))
}

fn product_code_irregularity() -> Outcome {
    let budget = SearchBudget::default();
    let hot = zoo::furstenberg(ratio(7, 10)).map_err(|e| e.to_string())?.process;
    let search = hot.find_bad_configuration(8, 40, 0.39, &budget).map_err(|e| e.to_string())?;
    let gaps: Vec<f64> = search.depths.iter().map(|d| d.witness.as_ref().map_or(0.0, |w| w.gap_f64())).collect();
    ensure(gaps.len() == 8 && gaps.iter().all(|&g| g >= 0.39), || format!("gaps {gaps:?}"))?;
    let fair = zoo::furstenberg(ratio(1, 2)).map_err(|e| e.to_string())?.process;
    for len in 1..=10 {
        for w in fair.image().allowed_words(len) {
            let value = fair.g_n(&w.symbols).map_err(|e| e.to_string())?;
            ensure(value == ratio(1, 2), || format!("g({:?}) = {value}", w.symbols))?;
        }
    }
    let none = fair.find_bad_configuration(8, 40, 1e-9, &budget).map_err(|e| e.to_string())?;
    ensure(!none.found(), || "witness found for p = 1/2".into())?;
    let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!("p=0.7 min certified gap {min:.6} over n=1..=8, nested = {}; p=0.5 g = 1/2 exactly, no witness", search.nested))
}

fn symmetric_product_code() -> Outcome {
    let mut count = 0;
    for p in [ratio(1, 4), ratio(3, 5)] {
        let fp = zoo::symmetric_xor(p.clone()).map_err(|e| e.to_string())?.process;
        for len in 2..=11 {
            for w in fp.image().allowed_words(len).into_iter().filter(|w| w.symbols[0] == 0) {
                let g = fp.g_n(&w.symbols).map_err(|e| e.to_string())?;
                ensure(g == p, || format!("p={p}: g({:?}) = {g}", w.symbols))?;
                count += 1;
            }
        }
    }
    Ok(format!("g = p exactly on {count} words with n <= 10"))
}

fn positive_merge_decay() -> Outcome {
    let fp = zoo::positive_merge_3state(zoo::default_positive_rows()).map_err(|e| e.to_string())?.process;
    let budget = SearchBudget::default();
    let mut points = Vec::new();
    for n in 3..=9 {
        let v = fp.variation_estimate(n, 6, &budget).map_err(|e| e.to_string())?;
        ensure(v.lower.to_f64() <= v.heuristic_upper, || format!("n={n}: lower {} above heuristic upper {}", v.lower.to_f64(), v.heuristic_upper))?;
        points.push((n, v.lower.to_f64()));
    }
    let ratios: Vec<f64> = points.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    ensure(worst <= 0.95, || format!("ratios {ratios:?}"))?;
    let fit = fit_decay(&points).ok_or("no fit")?;
    ensure(fit.r_squared >= 0.98, || format!("r^2 {}", fit.r_squared))?;
    Ok(format!("max var ratio {worst:.4}, fitted rate {:.4}, r^2 {:.6}", fit.rate, fit.r_squared))
}

fn forward_oracle() -> Outcome {
    let mut count = 0;
    let mut worst = 0.0f64;
    for (i, fp) in common::corpus(50).iter().enumerate() {
        let fast = fp.to_f64();
        for len in 1..=7 {
            for w in fp.image().allowed_words(len) {
                let exact = fp.factor_cylinder_probability(&w.symbols);
                let brute = common::brute_cylinder(fp, &w.symbols);
                ensure(exact == brute, || format!("model {i} word {:?}: {exact} vs {brute}", w.symbols))?;
                worst = worst.max((fast.factor_cylinder_probability(&w.symbols) - brute.to_f64()).abs());
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("double mode deviation {worst:.3e}"))?;
    Ok(format!("{count} words exact, double mode max deviation {worst:.1e}"))
}

fn g_tilde_invariants() -> Outcome {
    let mut models: Vec<(String, FactorProcess<Ratio>)> = ["furstenberg:0.3", "furstenberg:0.5", "furstenberg:0.7", "wl4", "xor:0.4", "pos3"]
        .iter()
        .map(|id| zoo::preset(id).map(|m| (m.id, m.process)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    models.extend(common::corpus(50).into_iter().enumerate().map(|(i, fp)| (format!("random #{i}"), fp)));
    let (mut sums, mut evaluated) = (0usize, 0usize);
    let mut below: Vec<(String, bool, Vec<usize>, Ratio, Ratio)> = Vec::new();
    for (id, fp) in &models {
        let k = kappa(fp);
        let mixing = fp.system().is_fibre_mixing(1_000_000).is_mixing();
        for len in 1..=6 {
            for tail in common::image_words(fp, len) {
                let mut total = Ratio::zero();
                for b in 0..fp.image_size() {
                    let y = [&[b], tail.as_slice()].concat();
                    let g = g_tilde(fp, &y).map_err(|e| e.to_string())?.value;
                    if !fp.factor_cylinder_probability(&y).is_zero() {
                        evaluated += 1;
                        ensure(g == fp.g_n(&y).map_err(|e| e.to_string())?, || format!("{id}: g-tilde differs from g_n at {y:?}"))?;
                        ensure(g.is_positive(), || format!("{id}: g-tilde vanishes at {y:?}"))?;
                        let corrected = k.clone() * reachable_posterior(fp, &y).map_err(|e| e.to_string())?;
                        ensure(g >= corrected, || format!("{id}: g-tilde below the predecessor-weighted bound at {y:?}"))?;
                        if g < k {
                            below.push((id.clone(), mixing, y, g.clone(), k.clone()));
                        }
                    }
                    total += g;
                }
                ensure(total == Ratio::one(), || format!("{id}: sum over y0 is {total} at tail {tail:?}"))?;
                sums += 1;
            }
        }
    }
    let summary = format!(
        "sum = 1 exactly on {sums} tails; g-tilde = g_n, g-tilde > 0 and g-tilde >= kappa * P(X_1 has a predecessor over y_0 | y_1^N) on all {evaluated} words"
    );
    if below.is_empty() {
        return Ok(format!("{summary}, g-tilde >= kappa everywhere"));
    }
    let offenders: std::collections::BTreeMap<&str, &str> =
        below.iter().map(|b| (b.0.as_str(), if b.1 { "mixing" } else { "not mixing" })).collect();
    let (id, _, y, g, k) = below.iter().min_by(|a, b| (a.3.clone() / a.4.clone()).cmp(&(b.3.clone() / b.4.clone()))).expect("nonempty");
    Err(format!(
        "{summary}; but g-tilde < kappa on {} words of {:?}, worst {id} y={y:?} g={g} kappa={k}",
        below.len(),
        offenders
    ))
}

/// `P(X_1 ∈ succ(π⁻¹(y_0)) | Y_1^N = y_1^N)`.
fn reachable_posterior(fp: &FactorProcess<Ratio>, y: &[usize]) -> Result<Ratio, mflab_core::Error> {
    let post = first_state_posterior(fp, &y[1..])?;
    let shift = fp.model().shift();
    Ok(fp
        .map()
        .preimage(y[1])
        .iter()
        .zip(post)
        .filter(|(&a2, _)| fp.map().preimage(y[0]).iter().any(|&a| shift.allows(a, a2)))
        .map(|(_, w)| w)
        .sum())
}

fn fibre_markov_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut stats = (0usize, 0usize);
    let wl4 = zoo::weak_lumpable_4state().process;
    check_fibre_markov(&wl4, None, &mut rng, &mut stats)?;
    for fp in common::corpus(50).iter() {
        check_fibre_markov(fp, Some(4), &mut rng, &mut stats)?;
    }
    Ok(format!(
        "{} exact comparisons over {} windows (every four-state window, 4 sampled windows per length per random model)",
        stats.0, stats.1
    ))
}

/// For each domain window `x` and split `n`, compares the closed form with
/// `μ([x] | π⁻¹[y_0^m z]) / μ([x_{n+1}^{n+ℓ}] | π⁻¹[y_0^m z])` for every
/// `m ≤ 12` and every continuation `|z| ≤ 3`.
fn check_fibre_markov(fp: &FactorProcess<Ratio>, sample: Option<usize>, rng: &mut ChaCha8Rng, stats: &mut (usize, usize)) -> Result<(), String> {
    let sampler = fp.model().sampler();
    let tails: Vec<Vec<(Vec<usize>, Vec<Ratio>)>> = (0..fp.image_size()).map(|b| continuation_vectors(fp, b, 3)).collect();
    for len in 2..=7 {
        let mut xs = common::domain_words(fp, len);
        if let Some(k) = sample {
            for i in (1..xs.len()).rev() {
                xs.swap(i, rng.gen_range(0..=i));
            }
            xs.truncate(k);
        }
        for x in xs {
            let mut hidden = x.clone();
            while hidden.len() < 13 {
                hidden.push(sampler.step(*hidden.last().unwrap(), rng));
            }
            let y = fp.map().apply(&hidden);
            for n in 0..len - 1 {
                stats.1 += 1;
                let closed = fibre_markov_conditional(fp, &y[..n + 2], &x[..=n], x[n + 1]).map_err(|e| e.to_string())?;
                let library = direct_window_conditional(fp, &y, &x, n).map_err(|e| e.to_string())?;
                ensure(library == closed, || format!("x={x:?} n={n} y={y:?}: {library} vs {closed}"))?;
                let mut all = pinned_start(fp, y[0], Some(x[0]));
                let mut tail = pinned_start(fp, y[0], None);
                for i in 1..=12 {
                    let pin = x.get(i).copied();
                    all = pinned_step(fp, &all, y[i - 1], y[i], pin);
                    tail = pinned_step(fp, &tail, y[i - 1], y[i], pin.filter(|_| i > n));
                    if i < len {
                        continue;
                    }
                    for (z, v) in &tails[y[i]] {
                        let den = dot(&tail, v);
                        if den.is_zero() {
                            continue;
                        }
                        let direct = dot(&all, v) / den;
                        ensure(direct == closed, || format!("x={x:?} n={n} m={i} z={z:?}: {direct} vs {closed}"))?;
                        stats.0 += 1;
                    }
                }
            }
        }
    }
    Ok(())
}

fn pinned_start(fp: &FactorProcess<Ratio>, b: usize, pin: Option<usize>) -> Vec<Ratio> {
    let p = fp.model().stationary();
    fp.map().preimage(b).iter().map(|&a| if pin.is_some_and(|s| s != a) { Ratio::zero() } else { p[a].clone() }).collect()
}

fn pinned_step(fp: &FactorProcess<Ratio>, v: &[Ratio], b: usize, b2: usize, pin: Option<usize>) -> Vec<Ratio> {
    let mut out = fp.block(b, b2).left_apply(v);
    for (k, &a) in fp.map().preimage(b2).iter().enumerate() {
        if pin.is_some_and(|s| s != a) {
            out[k] = Ratio::zero();
        }
    }
    out
}

fn dot(a: &[Ratio], b: &[Ratio]) -> Ratio {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(z, M_{b z_1} M_{z_1 z_2} ⋯ 1)` for every continuation of `b` of length at most `max`.
fn continuation_vectors(fp: &FactorProcess<Ratio>, b: usize, max: usize) -> Vec<(Vec<usize>, Vec<Ratio>)> {
    fn go(fp: &FactorProcess<Ratio>, last: usize, left: usize) -> Vec<(Vec<usize>, Vec<Ratio>)> {
        let mut here = vec![(Vec::new(), vec![Ratio::one(); fp.map().preimage(last).len()])];
        if left > 0 {
            for c in fp.image().adjacency().row_ones(last) {
                for (z, v) in go(fp, c, left - 1) {
                    here.push(([&[c], z.as_slice()].concat(), fp.block(last, c).right_apply(&v)));
                }
            }
        }
        here
    }
    go(fp, b, max)
}

fn mixing_decisions() -> Outcome {
    let mut lines = Vec::new();
    let cases = [("pos3", true), ("furstenberg:0.7", false), ("xor:0.4", false), ("wl4", false)];
    for (id, mixing) in cases {
        let fp = zoo::preset(id).map_err(|e| e.to_string())?.process;
        let start = Instant::now();
        let verdict = fp.system().is_fibre_mixing(1_000_000);
        let took = start.elapsed();
        ensure(took < Duration::from_secs(10), || format!("{id} took {took:?}"))?;
        match verdict {
            MixingVerdict::Mixing { index } => {
                ensure(mixing && index == 1, || format!("{id}: mixing with index {index}"))?;
                let k = fp.system().sub_positivity_index(4);
                ensure(k == Some(1), || format!("{id}: sub-positivity index {k:?}"))?;
                lines.push(format!("{id} mixing m=1"));
            }
            MixingVerdict::NotMixing { word, from, to } => {
                ensure(!mixing, || format!("{id}: not mixing"))?;
                verify_gap(&fp, &word.symbols, from, to).map_err(|e| format!("{id}: {e}"))?;
                lines.push(format!("{id} not_mixing witness {:?} ({from}->{to})", word.symbols));
            }
            MixingVerdict::Inconclusive { .. } => return Err(format!("{id}: inconclusive")),
        }
    }
    Ok(lines.join("; "))
}

/// Checks by path enumeration that `from` starts and `to` ends a fibre path
/// over `word` but no fibre path joins them.
fn verify_gap(fp: &FactorProcess<Ratio>, word: &[usize], from: usize, to: usize) -> Result<(), String> {
    let paths: Vec<Vec<usize>> = fp.system().domain().allowed_words(word.len()).into_iter().map(|w| w.symbols).filter(|x| fp.map().apply(x) == word).collect();
    let starts = paths.iter().any(|p| p[0] == from);
    let ends = paths.iter().any(|p| *p.last().unwrap() == to);
    let joined = paths.iter().any(|p| p[0] == from && *p.last().unwrap() == to);
    ensure(starts && ends && !joined, || format!("witness does not check out (starts {starts}, ends {ends}, joined {joined})"))
}

fn monte_carlo() -> Outcome {
    let cases: [(&str, Vec<Vec<usize>>); 2] =
        [("wl4", vec![vec![0, 0], vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 2]]), ("furstenberg:0.5", vec![vec![0, 0, 1], vec![1, 0, 1, 1], vec![0, 1]])];
    let mut worst = 0.0f64;
    let mut n = 0;
    for (id, words) in cases {
        let fp = zoo::preset(id).map_err(|e| e.to_string())?.process;
        for (i, y) in words.iter().enumerate() {
            let exact = fp.g_n(y).map_err(|e| e.to_string())?.to_f64();
            let est = fp.empirical_conditional(y, 1_000_000, 1000 + i as u64).map_err(|e| e.to_string())?;
            ensure(!est.flagged, || format!("{id} {y:?}: no hits"))?;
            let z = if est.stderr > 0.0 { (est.estimate - exact).abs() / est.stderr } else if est.estimate == exact { 0.0 } else { f64::INFINITY };
            ensure(z <= 4.0, || format!("{id} {y:?}: estimate {} exact {exact} stderr {}", est.estimate, est.stderr))?;
            worst = worst.max(z);
            n += 1;
        }
    }
    Ok(format!("{n} conditionals, 10^6 samples each, worst |z| = {worst:.2}"))
}

