mod common;

use mflab_core::conditionals::SearchBudget;
use mflab_core::disintegration::*;
use mflab_core::scalar::{ratio, Ratio};
use mflab_core::zoo;
use mflab_core::{Scalar, Word};
use num_traits::{One, Zero};

#[test]
fn conditionals_match_brute_force_ratios() {
    for fp in common::corpus(12) {
        for len in 2..=5 {
            for y in common::image_words(&fp, len) {
                let brute = common::brute_cylinder(&fp, &y) / common::brute_cylinder(&fp, &y[1..]);
                assert_eq!(fp.g_n(&y).unwrap(), brute);
            }
        }
    }
}

#[test]
fn conditionals_telescope_to_cylinder_probability() {
    for fp in common::corpus(12) {
        let fast = fp.to_f64();
        for y in common::image_words(&fp, 6) {
            let k = y.len() - 1;
            let product: f64 = (0..k).map(|j| fast.g_n(&y[j..]).unwrap()).product::<f64>() * fast.factor_cylinder_probability(&y[k..]);
            assert!((product - fp.factor_cylinder_probability(&y).to_f64()).abs() < 1e-12);
        }
    }
}

#[test]
fn pinned_masses_match_enumeration() {
    for fp in common::corpus(8) {
        for y in common::image_words(&fp, 4) {
            let pre = fp.map().preimage(y[1]);
            for &a in pre {
                let pins = [None, Some(a), None, None];
                assert_eq!(pinned_mass(&fp, &y, &pins), common::brute_pinned(&fp, &y, &pins));
            }
        }
    }
}

#[test]
fn fibre_measure_matches_enumeration() {
    for fp in common::corpus(8) {
        for y in common::image_words(&fp, 5) {
            let fm = fibre_measure(&fp, &y).unwrap();
            let total = common::brute_cylinder(&fp, &y);
            for (i, &b) in y.iter().enumerate() {
                for (k, &a) in fp.map().preimage(b).iter().enumerate() {
                    let mut pins = vec![None; y.len()];
                    pins[i] = Some(a);
                    assert_eq!(fm.marginals[i][k], common::brute_pinned(&fp, &y, &pins) / total.clone());
                }
            }
        }
    }
}

#[test]
fn fibre_potential_is_the_conditional_given_the_boundary() {
    for fp in common::corpus(10) {
        for y in common::image_words(&fp, 3) {
            let fw = fp.fibre_window(&y).unwrap();
            for boundary in admissible_boundaries(&fp, &fw) {
                let pot = fibre_potential(&fp, &fw, boundary).unwrap();
                assert_eq!(pot.weights.iter().cloned().sum::<Ratio>(), Ratio::one());
                let w = [y.as_slice(), &[fp.map().image_of(boundary)]].concat();
                for (word, g) in pot.words.iter().zip(&pot.weights) {
                    let x = [word.as_slice(), &[boundary]].concat();
                    assert_eq!(*g, direct_window_conditional(&fp, &w, &x, y.len() - 1).unwrap());
                }
                let ker = gibbs_kernel(&fp, &fw, &Word::at(y.len(), vec![boundary])).unwrap();
                for (v, g) in ker.values.iter().zip(&pot.weights) {
                    assert!((v - g.to_f64()).abs() < 1e-12);
                }
                assert!((ker.partition - pot.partition.to_f64()).abs() < 1e-12 * pot.partition.to_f64().max(1.0));
            }
        }
    }
}

#[test]
fn averaging_operator_fixes_constants_and_picks_weights() {
    let fp = zoo::positive_merge_3state(zoo::default_positive_rows()).unwrap().process;
    let fw = fp.fibre_window(&[0, 0, 0]).unwrap();
    let pot = fibre_potential(&fp, &fw, 2).unwrap();
    assert_eq!(pot.apply(|_| Some(Ratio::one())).unwrap(), Ratio::one());
    let target = pot.words[3].clone();
    let indicator = pot.apply(|w| Some(if *w == target { Ratio::one() } else { Ratio::zero() })).unwrap();
    assert_eq!(indicator, pot.weight_of(&target));
}

#[test]
fn averaged_tables_forget_the_boundary_on_positive_chains() {
    let fp = zoo::positive_merge_3state(zoo::default_positive_rows()).unwrap().process;
    let mut previous = f64::INFINITY;
    for n in 1..=6 {
        let fw = fp.fibre_window(&vec![0; n]).unwrap();
        let table = averaged_table(&fp, &fw, |w| Some(if w[0] == 0 { Ratio::one() } else { Ratio::zero() })).unwrap();
        let osc = boundary_oscillation(&table).to_f64();
        assert!(osc < previous, "n={n}: {osc} vs {previous}");
        previous = osc;
    }
    assert!(previous < 1e-2);
}

#[test]
fn boundary_uniformity_constants() {
    let pos = zoo::positive_merge_3state(zoo::default_positive_rows()).unwrap().process;
    let fw = pos.fibre_window(&[0, 0, 0]).unwrap();
    assert!(boundary_uniformity_constant(&pos, &fw, 1).unwrap().is_positive());
    let fur = zoo::furstenberg(ratio(7, 10)).unwrap().process;
    let fw = fur.fibre_window(&[0, 1, 0]).unwrap();
    assert!(boundary_uniformity_constant(&fur, &fw, 1).unwrap().is_zero());
    let wl4 = zoo::weak_lumpable_4state().process;
    let fw = wl4.fibre_window(&[1]).unwrap();
    assert_eq!(admissible_boundaries(&wl4, &fw).len(), 2);
    let fw = wl4.fibre_window(&[2]).unwrap();
    assert!(boundary_uniformity_constant(&wl4, &fw, 1).unwrap() == Ratio::one());
}

#[test]
fn reversed_lumpable_g_tilde_depends_on_two_symbols() {
    let fp = zoo::weak_lumpable_4state().process;
    let kernel = reversed_lumpability(&fp).unwrap().kernel.unwrap();
    for len in 2..=7 {
        for y in common::image_words(&fp, len) {
            let gt = g_tilde(&fp, &y).unwrap();
            assert_eq!(gt.value, *kernel.get(y[0], y[1]));
            assert!(gt.converged);
        }
    }
}

#[test]
fn product_code_reversal_does_not_lump() {
    let fp = zoo::furstenberg(ratio(7, 10)).unwrap().process;
    assert!(!reversed_lumpability(&fp).unwrap().lumpable);
    let fair = zoo::furstenberg(ratio(1, 2)).unwrap().process;
    for y in common::image_words(&fair, 6) {
        assert_eq!(g_tilde(&fair, &y).unwrap().value, ratio(1, 2));
        assert_eq!(first_state_posterior(&fair, &y).unwrap(), vec![ratio(1, 2), ratio(1, 2)]);
    }
}

#[test]
fn product_code_branches_follow_the_bias() {
    let fp = zoo::furstenberg(ratio(7, 10)).unwrap().process;
    let x = [0, 1];
    let y = fp.map().apply(&x);
    let v = fibre_markov_conditional(&fp, &y, &x[..1], x[1]).unwrap();
    assert_eq!(v, Ratio::one());
    let fw = fp.fibre_window(&[0, 0]).unwrap();
    assert_eq!(fw.paths().len(), 2);
}

#[test]
fn tjur_spreads() {
    let fair = zoo::furstenberg(ratio(1, 2)).unwrap().process;
    let probe = tjur_probe(&fair, &[0; 8], &[vec![0], vec![1], vec![1, 1]], &[0], &[1, 3, 5, 7], 0.1).unwrap();
    for row in &probe.rows {
        assert!(row.spread.is_zero());
        assert!(row.values.iter().all(|v| *v == ratio(1, 2)));
    }
    assert!(!probe.discontinuity_certified);
    let pos = zoo::positive_merge_3state(zoo::default_positive_rows()).unwrap().process;
    let depths: Vec<usize> = (1..=8).collect();
    let probe = tjur_probe(&pos, &[0; 9], &[vec![0], vec![1]], &[0], &depths, 0.1).unwrap();
    let fit = probe.fit.unwrap();
    assert!(fit.rate < 1.0 && !probe.discontinuity_certified);
}

#[test]
fn variation_bounds_bracket() {
    let fp = zoo::positive_merge_3state(zoo::default_positive_rows()).unwrap().process;
    let budget = SearchBudget::default();
    for n in 1..=6 {
        let v = fp.variation_estimate(n, 5, &budget).unwrap();
        assert!(v.lower.to_f64() <= v.heuristic_upper);
        let w = v.witness.unwrap();
        let again = fp.certify(w.center.clone(), w.high.clone(), w.low.clone()).unwrap();
        assert_eq!(again.gap, v.lower);
    }
}

#[test]
fn presets_reproduce_their_facts() {
    for id in ["wl4", "furstenberg:0.3", "xor:0.25", "pos3"] {
        let m = zoo::preset(id).unwrap();
        let failed = m.check_all();
        assert!(failed.is_empty(), "{id}: {failed:?}");
    }
}
