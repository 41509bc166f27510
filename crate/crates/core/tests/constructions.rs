use stabex_core::category::{AdditiveCategory, Bounds};
use stabex_core::constructions::*;
use stabex_core::error::CategoryError;
use stabex_core::instances::{FreeModules, PairCategory};
use stabex_core::limits::{pullback_square, pushout_square, verify_universal};
use stabex_core::stability::Certifier;

fn f2() -> FreeModules {
    FreeModules::over(2).unwrap()
}

fn z6() -> FreeModules {
    FreeModules::over(6).unwrap()
}

#[test]
fn length_one_diagrams_are_the_base() {
    for cat in [chain_category(z6(), 1).unwrap(), spectrum_category(z6(), 1).unwrap()] {
        let objs = cat.enumerate_objects(2).unwrap();
        let base = z6().enumerate_objects(2).unwrap();
        assert_eq!(objs.iter().map(|x| x.objects[0]).collect::<Vec<_>>(), base);
        for (x, a) in objs.iter().zip(&base) {
            for (y, b) in objs.iter().zip(&base) {
                let homs = cat.enumerate_homs(x, y).unwrap();
                let comps: Vec<_> = homs.iter().map(|f| cat.evaluate(f, 0).unwrap()).collect();
                assert_eq!(comps, z6().enumerate_homs(a, b).unwrap());
            }
        }
    }
    assert!(chain_category(z6(), 0).is_err());
}

#[test]
fn zero_diagram_is_zero() {
    let cat = chain_category(f2(), 3).unwrap();
    let zero = cat.zero_object();
    assert_eq!(zero.objects, vec![0, 0, 0]);
    for x in cat.enumerate_objects(2).unwrap() {
        assert_eq!(cat.hom_count(&zero, &x).unwrap(), 1);
        assert_eq!(cat.hom_count(&x, &zero).unwrap(), 1);
    }
}

#[test]
fn objects_satisfy_the_chain_relation() {
    let cat = chain_category(f2(), 3).unwrap();
    let objs = cat.enumerate_objects(3).unwrap();
    assert!(!objs.is_empty());
    for x in &objs {
        assert!(f2().is_zero(&f2().compose(&x.arrows[1], &x.arrows[0]).unwrap()));
        assert!(x.objects.iter().sum::<usize>() <= 3);
    }
    let one = f2().identity(&1);
    assert!(matches!(cat.object(vec![1, 1, 1], vec![one.clone(), one]), Err(CategoryError::InvalidObject(_))));
}

#[test]
fn spectrum_bonds_compose() {
    let cat = spectrum_category(z6(), 3).unwrap();
    let b0 = z6().matrix(&[&[1, 2]]).unwrap();
    let b1 = z6().matrix(&[&[1, 0], &[3, 5]]).unwrap();
    let x = cat.object(vec![1, 2, 2], vec![b0.clone(), b1.clone()]).unwrap();
    assert_eq!(cat.bond(&x, 2, 0).unwrap(), b0.mul(&b1).unwrap());
    assert_eq!(cat.bond(&x, 1, 1).unwrap(), z6().identity(&2));
    assert!(matches!(cat.bond(&x, 3, 0), Err(CategoryError::IndexOutOfRange { .. })));
    assert!(chain_category(z6(), 2).unwrap().bond(&x, 1, 0).is_err());
}

#[test]
fn constant_spectrum_identities() {
    let cat = spectrum_category(z6(), 3).unwrap();
    let one = z6().identity(&1);
    let x = cat.object(vec![1, 1, 1], vec![one.clone(), one.clone()]).unwrap();
    let endos = cat.enumerate_homs(&x, &x).unwrap();
    // a map of constant spectra is one scalar repeated
    assert_eq!(endos.len(), 6);
    for f in &endos {
        assert!(f.comps.windows(2).all(|w| w[0] == w[1]));
    }
    assert_eq!(cat.bond(&x, 2, 0).unwrap(), one);
}

#[test]
fn concentrated_diagrams() {
    let cat = chain_category(f2(), 2).unwrap();
    assert_eq!(cat.concentrated(&0, 1).unwrap(), cat.zero_object());
    assert!(matches!(cat.concentrated(&1, 2), Err(CategoryError::IndexOutOfRange { index: 2, len: 2 })));

    // maps out of X concentrated in degree n are the α: X -> Y^n with ∂^n α = 0
    for n in 0..2 {
        let x = cat.concentrated(&1, n).unwrap();
        for y in cat.enumerate_objects(2).unwrap() {
            let killed = f2()
                .enumerate_homs(&1, &y.objects[n])
                .unwrap()
                .into_iter()
                .filter(|a| n + 1 == 2 || f2().is_zero(&f2().compose(&y.arrows[n], a).unwrap()))
                .count();
            assert_eq!(cat.hom_count(&x, &y).unwrap(), killed as u128);
        }
    }
    let y = cat.object(vec![1, 1], vec![f2().identity(&1)]).unwrap();
    assert!(cat.concentrated_map(&f2().identity(&1), 0, &y).is_err());
    let f = cat.concentrated_map(&f2().identity(&1), 1, &y).unwrap();
    assert_eq!(cat.evaluate(&f, 1).unwrap(), f2().identity(&1));
}

#[test]
fn degreewise_limits_pass_the_oracle() {
    let cat = chain_category(f2(), 2).unwrap();
    let objs = cat.enumerate_objects(2).unwrap();
    let mut checked = 0;
    for x in &objs {
        for y in &objs {
            for d in cat.enumerate_homs(x, y).unwrap() {
                if cat.cokernel_object(&d).unwrap().is_none() {
                    continue;
                }
                for z in &objs {
                    for h in cat.enumerate_homs(z, y).unwrap().into_iter().take(2) {
                        let sq = pullback_square(&cat, &d, &h).unwrap().unwrap();
                        assert!(verify_universal(&cat, &sq, 1).unwrap().passed());
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 20);
    let i = cat.enumerate_homs(&objs[1], &objs[2]).unwrap().pop().unwrap();
    let f = cat.zero_mor(&objs[1], &objs[0]);
    let po = pushout_square(&cat, &i, &f).unwrap().unwrap();
    assert!(verify_universal(&cat, &po, 1).unwrap().passed());
}

#[test]
fn split_sequence_of_complexes_is_stable_in_both_readings() {
    let cat = chain_category(f2(), 2).unwrap();
    let bounds = Bounds::new(2, 1);
    let dc = Certifier::absolute(cat.clone(), bounds).unwrap();
    let bc = Certifier::absolute(f2(), bounds).unwrap();
    let one = f2().identity(&1);
    let disc = cat.object(vec![1, 1], vec![one.clone()]).unwrap();
    let at0 = cat.concentrated(&1, 0).unwrap();
    let at1 = cat.concentrated(&1, 1).unwrap();
    // 0 -> X[1] -> disc -> X[0] -> 0 is not split as complexes but is degreewise
    let i = cat.morphism(&at1, &disc, vec![f2().zero_mor(&0, &1), one.clone()]).unwrap();
    let d = cat.morphism(&disc, &at0, vec![one.clone(), f2().zero_mor(&1, &0)]).unwrap();
    let case = degreewise_stable_equiv(&dc, &bc, &i, &d).unwrap();
    assert!(case.agree);
    assert!(case.diagram_stable);
    assert_eq!(case.component_stable, vec![true, true]);

    let narrow = Certifier::absolute(f2(), Bounds::new(1, 1)).unwrap();
    assert!(matches!(degreewise_stable_equiv(&dc, &narrow, &i, &d), Err(CategoryError::BoundMismatch(_))));
}

#[test]
fn f2_complexes_and_spectra_agree_with_their_components() {
    let bounds = Bounds::new(2, 1);
    let base = Certifier::absolute(f2(), bounds).unwrap();
    for cat in [chain_category(f2(), 2).unwrap(), spectrum_category(f2(), 2).unwrap()] {
        let dc = Certifier::absolute(cat, bounds).unwrap();
        let report = equivalence_sweep(&dc, &base).unwrap();
        assert!(report.cases > 0);
        assert!(report.all_agree());
        assert_eq!(report.agreements, report.cases);
    }
    let pairs = PairCategory::new(2).unwrap();
    let base = Certifier::absolute(pairs, Bounds::new(1, 1)).unwrap();
    let dc = Certifier::absolute(chain_category(pairs, 2).unwrap(), Bounds::new(1, 1)).unwrap();
    assert!(equivalence_sweep(&dc, &base).unwrap().all_agree());
}
