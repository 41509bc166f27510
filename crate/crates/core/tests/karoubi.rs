use stabex_core::category::{AdditiveCategory, Bounds};
use stabex_core::error::CategoryError;
use stabex_core::instances::FreeModules;
use stabex_core::karoubi::*;
use stabex_core::limits::{pullback_square, verify_universal};
use stabex_core::matrix::Matrix;
use stabex_core::stability::{obscure_cokernel, Certifier};

fn z6() -> FreeModules {
    FreeModules::over(6).unwrap()
}

fn k6() -> Karoubi<FreeModules> {
    Karoubi::new(z6())
}

fn m(rows: &[&[i64]]) -> Matrix {
    z6().matrix(rows).unwrap()
}

#[test]
fn identity_of_a_pair_is_its_idempotent() {
    let k = k6();
    let x = k.object(1, m(&[&[3]])).unwrap();
    assert_eq!(k.identity(&x).f, m(&[&[3]]));
    assert!(matches!(k.object(1, m(&[&[2]])), Err(CategoryError::NotIdempotent(_))));
    let y = k.object(1, m(&[&[4]])).unwrap();
    // f must satisfy f = q f p
    assert!(k.morphism(&x, &y, m(&[&[1]])).is_err());
    assert!(k.morphism(&x, &y, m(&[&[0]])).is_ok());
}

#[test]
fn biproduct_of_complementary_summands() {
    let k = k6();
    let x = k.object(1, m(&[&[3]])).unwrap();
    let y = k.object(1, m(&[&[4]])).unwrap();
    let b = k.biproduct(&x, &y).unwrap();
    assert_eq!(b.sum, k.object(2, m(&[&[3, 0], &[0, 4]])).unwrap());
    let one = k.identity(&b.sum);
    let split = k.add(&k.compose(&b.inj1, &b.proj1).unwrap(), &k.compose(&b.inj2, &b.proj2).unwrap()).unwrap();
    assert_eq!(split, one);
    assert_eq!(k.compose(&b.proj1, &b.inj1).unwrap(), k.identity(&x));
    assert!(k.is_zero(&k.compose(&b.proj2, &b.inj1).unwrap()));
}

#[test]
fn complementary_summands_recombine_to_the_ring() {
    let k = k6();
    let x = k.object(2, m(&[&[3, 0], &[0, 4]])).unwrap();
    let r = k.embed_object(&1);
    let f = k.morphism(&x, &r, m(&[&[3, 4]])).unwrap();
    let g = k.morphism(&r, &x, m(&[&[3], &[4]])).unwrap();
    assert_eq!(k.compose(&f, &g).unwrap(), k.identity(&r));
    assert_eq!(k.compose(&g, &f).unwrap(), k.identity(&x));
    let found = k.in_essential_image(&x, 2).unwrap().expect("x is H(R)");
    assert_eq!(found.base, 1);
}

#[test]
fn embedding_preserves_zero_and_identity() {
    let k = k6();
    assert_eq!(k.embed(&z6().identity(&2)), k.identity(&k.embed_object(&2)));
    assert!(k.is_zero(&k.embed(&z6().zero_mor(&1, &2))));
    assert_eq!(k.embed_object(&0), k.zero_object());
}

#[test]
fn embedding_is_fully_faithful() {
    let r = k6().check_fully_faithful(2).unwrap();
    assert_eq!(r.pairs, 9);
    assert_eq!(r.mismatches, 0);
    // sum over a, b <= 2 of 6^(a b)
    assert_eq!(r.morphisms, 1 + 1 + 1 + 1 + 6 + 36 + 1 + 36 + 1296);
}

#[test]
fn idempotents_split() {
    let k = k6();
    let h1 = k.embed_object(&1);
    let zero = k.morphism(&h1, &h1, m(&[&[0]])).unwrap();
    let cert = k.split_idempotent(&zero).unwrap();
    assert_eq!(cert.object, h1);
    assert!(verify_universal(&k, &cert, 1).unwrap().passed());

    let cert = k.split_idempotent(&k.identity(&h1)).unwrap();
    assert_eq!(cert.object, k.object(1, m(&[&[0]])).unwrap());
    assert!(verify_universal(&k, &cert, 1).unwrap().passed());

    let three = k.morphism(&h1, &h1, m(&[&[3]])).unwrap();
    let cert = k.split_idempotent(&three).unwrap();
    assert_eq!(cert.object, k.object(1, m(&[&[4]])).unwrap());
    assert_eq!(cert.inclusion.f, m(&[&[4]]));
    assert!(verify_universal(&k, &cert, 1).unwrap().passed());

    let two = k.morphism(&h1, &h1, m(&[&[2]])).unwrap();
    assert!(k.split_idempotent(&two).is_err());

    let (n, failures) = k.check_idempotent_complete(1, 1).unwrap();
    assert_eq!(failures, 0);
    assert!(n >= 4);
}

#[test]
fn essential_image_membership() {
    let k = k6();
    assert!(k.in_essential_image(&k.embed_object(&2), 2).unwrap().is_some());
    let null = k.object(2, z6().zero_mor(&2, &2)).unwrap();
    assert_eq!(k.in_essential_image(&null, 2).unwrap().unwrap().base, 0);
    for p in [3, 4] {
        let x = k.object(1, m(&[&[p]])).unwrap();
        let search = k.essential_image_search(&x, 2, true).unwrap();
        assert!(search.found.is_none(), "(R,{p})");
        assert!(search.pairs_checked > 0);
        assert!(k.in_essential_image(&x, 2).unwrap().is_none());
    }
}

#[test]
fn pullbacks_transfer_and_reflect() {
    let k = k6();
    let d = m(&[&[1, 2]]);
    let h = m(&[&[3]]);
    let sq = pullback_square(&z6(), &d, &h).unwrap().unwrap();
    let lifted = k.transfer_pullback(&sq);
    assert!(verify_universal(&k, &lifted, 1).unwrap().passed());
    let back = k.reflect_pullback(&lifted, 2).unwrap().unwrap();
    assert!(verify_universal(&z6(), &back, 1).unwrap().passed());
    assert_eq!(z6().object_size(back.apex()), z6().object_size(sq.apex()));
}

#[test]
fn transfer_agrees_on_trivial_cokernels() {
    let k = k6();
    let bounds = Bounds::new(2, 1);
    let base = Certifier::absolute(z6(), bounds).unwrap();
    let completion = k.image_certifier(bounds, 2).unwrap();
    for d in [m(&[&[5, 0], &[1, 1]]), z6().zero_mor(&2, &0), m(&[&[1, 3]])] {
        let r = transfer_semistable(&base, &completion, &d, 2).unwrap();
        assert!(r.agree);
        assert!(r.base.is_certified());
        assert!(r.completion.is_certified());
    }
    let narrow = Certifier::absolute(z6(), Bounds::new(1, 1)).unwrap();
    assert!(matches!(
        transfer_semistable(&narrow, &completion, &m(&[&[1]]), 2),
        Err(CategoryError::BoundMismatch(_))
    ));
}

#[test]
fn image_of_h_is_not_closed_under_kernels() {
    let k = k6();
    let h3 = k.embed(&m(&[&[3]]));
    let (obj, inclusion) = k.kernel_object(&h3).unwrap().unwrap();
    assert_eq!(obj, k.object(1, m(&[&[4]])).unwrap());
    assert!(k.is_zero(&k.compose(&h3, &inclusion).unwrap()));
    assert!(k.essential_image_search(&obj, 2, true).unwrap().found.is_none());
    let completion = k.image_certifier(Bounds::new(1, 1), 2).unwrap();
    assert!(completion.closure_violation().unwrap().is_some());
}

#[test]
fn cancellation_through_the_completion_matches_the_base() {
    let k = k6();
    let bounds = Bounds::new(2, 1);
    let base = Certifier::absolute(z6(), bounds).unwrap();
    let completion = k.image_certifier(bounds, 2).unwrap();
    let cases = [
        (m(&[&[1, 0], &[0, 1]]), m(&[&[1, 5]])),
        (m(&[&[1, 2], &[3, 5]]), m(&[&[0, 1]])),
        (m(&[&[1, 0]]), m(&[&[5]])),
    ];
    for (d, p) in cases {
        let (routed, trace) = obscure_via_completion(&completion, &d, &p, 2).unwrap();
        let (direct, _) = obscure_cokernel(&base, &d, &p).unwrap();
        assert_eq!(routed.is_certified(), direct.is_certified());
        assert!(trace.replay(&k).unwrap().passed());
        let chosen = obscure_routed(&base, &completion, &d, &p, 2).unwrap();
        assert_eq!(chosen.outcome, direct.outcome);
    }
}
