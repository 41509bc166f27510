use stabex_core::category::{AdditiveCategory, Bounds};
use stabex_core::instances::{FreeModules, IntMatrix, IntegerFreeModules, PairCategory};
use stabex_core::limits::*;
use stabex_core::matrix::Matrix;

fn z6() -> FreeModules {
    FreeModules::over(6).unwrap()
}

#[test]
fn kernel_of_identity_and_zero() {
    let c = z6();
    let k = kernel(&c, &c.identity(&2), Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(k.object, 0);
    assert!(verify_universal(&c, &k, 2).unwrap().passed());
    let z = c.zero_mor(&2, &1);
    let k = kernel(&c, &z, Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(k.object, 2);
    assert!(c.is_iso(&k.inclusion).unwrap());
    assert!(verify_universal(&c, &k, 2).unwrap().passed());
}

#[test]
fn multiplication_by_three_has_no_kernel() {
    let c = z6();
    match kernel(&c, &c.scalar(3), Bounds::uniform(2)).unwrap() {
        LimitOutcome::NotRepresentable(r) => {
            assert_eq!(r.candidates, 3);
            // cones from R^0 and R^1: the submodule 2R has three elements
            assert_eq!(r.cone_counts, vec![1, 3, 9]);
            assert_eq!(r.refuted_by_count, 3);
        }
        LimitOutcome::Exists(_) => panic!("kernel of 3 on Z/6 must not be representable"),
    }
    assert!(!cokernel(&c, &c.scalar(3), Bounds::uniform(2)).unwrap().exists());
}

#[test]
fn pullback_along_identity_and_zero() {
    let c = z6();
    let d = c.matrix(&[&[1, 3]]).unwrap();
    let sq = pullback(&c, &d, &c.identity(&1), Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(*sq.apex(), 2);
    assert!(c.is_iso(sq.g()).unwrap());
    assert_eq!(*sq.d_prime(), d.mul(sq.g()).unwrap());
    assert!(verify_universal(&c, &sq, 2).unwrap().passed());

    let sq = pullback(&c, &d, &c.zero_mor(&0, &1), Bounds::uniform(2)).unwrap().certificate().unwrap();
    let k = kernel(&c, &d, Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(*sq.apex(), k.object);
    assert!(c.is_zero(&d.mul(sq.g()).unwrap()));
    assert!(verify_universal(&c, &sq, 2).unwrap().passed());
}

#[test]
fn pullback_is_kernel_of_block_row() {
    let c = z6();
    let d = c.matrix(&[&[1, 3]]).unwrap();
    let h = c.scalar(2);
    let sq = pullback(&c, &d, &h, Bounds::uniform(2)).unwrap().certificate().unwrap();
    let row = c.block_row(&h, &d).unwrap();
    assert_eq!(row, c.matrix(&[&[2, 1, 3]]).unwrap());
    let k = kernel(&c, &row, Bounds::uniform(2)).unwrap().certificate().unwrap();
    // inclusion is [d'; -g]
    assert_eq!(k.inclusion, sq.d_prime().vstack(&sq.g().neg()).unwrap());
    assert_eq!(*sq.apex(), 2);
    let report = verify_universal(&c, &sq, 2).unwrap();
    assert!(report.passed(), "{report:?}");
    // brute force: 6^3 vectors, those killed by [2 1 3] form the cone module at R
    let cones_at_r = Matrix::all(c.ring_spec(), 3, 1).filter(|x| row.mul(x).unwrap().is_zero()).count();
    assert_eq!(cones_at_r, 36);
}

#[test]
fn pushouts_dualise() {
    let c = z6();
    let i = c.matrix(&[&[1], &[3]]).unwrap();
    let po = pushout(&c, &i, &c.identity(&1), Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert!(c.is_iso(po.f_prime()).unwrap());
    assert!(verify_universal(&c, &po, 2).unwrap().passed());
    let po = pushout(&c, &i, &c.zero_mor(&1, &0), Bounds::uniform(2)).unwrap().certificate().unwrap();
    let q = cokernel(&c, &i, Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(*po.apex(), q.object);
    assert!(verify_universal(&c, &po, 2).unwrap().passed());
}

#[test]
fn pairs_pushout_of_inclusion_along_projection() {
    let c = PairCategory::new(2).unwrap();
    let line = c.object_from(2, &[&[1, 0]]);
    let plane = c.full(2);
    let i = c.morphism(&line, &plane, Matrix::identity(c.field(), 2)).unwrap();
    let proj = c.morphism(&line, &c.full(1), Matrix::from_rows(c.field(), &[&[1, 0]]).unwrap()).unwrap();
    let po = pushout(&c, &i, &proj, Bounds::uniform(2)).unwrap().certificate().unwrap();
    let report = verify_universal(&c, &po, 2).unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(report.cones > 0);
}

#[test]
fn pairs_kernels_and_cokernels_pass_the_oracle() {
    let c = PairCategory::new(2).unwrap();
    let objs = c.enumerate_objects(2).unwrap();
    for a in &objs {
        for b in &objs {
            for f in c.enumerate_homs(a, b).unwrap() {
                let k = kernel(&c, &f, Bounds::uniform(2)).unwrap().certificate().unwrap();
                assert!(verify_universal(&c, &k, 2).unwrap().passed(), "kernel of {f:?}");
                let q = cokernel(&c, &f, Bounds::uniform(2)).unwrap().certificate().unwrap();
                assert!(verify_universal(&c, &q, 2).unwrap().passed(), "cokernel of {f:?}");
            }
        }
    }
}

#[test]
fn wrong_kernel_object_fails_uniqueness() {
    let c = z6();
    let d = c.matrix(&[&[1, 0]]).unwrap();
    // R^2 with inclusion [0 0; 1 0] is too large: two mediators per cone
    let inc = c.matrix(&[&[0, 0], &[1, 0]]).unwrap();
    let fake = KernelCert::<FreeModules>::with_mediator(d.clone(), 2, inc, |t| Ok(t.clone()));
    let report = verify_universal(&c, &fake, 1).unwrap();
    assert_eq!(report.counterexample.unwrap().failure, OracleFailure::NonUnique);
}

#[test]
fn perturbed_square_is_rejected() {
    let c = z6();
    let d = c.matrix(&[&[1, 3]]).unwrap();
    let h = c.scalar(2);
    let sq = pullback(&c, &d, &h, Bounds::uniform(1)).unwrap().certificate().unwrap();
    let mut square = sq.square.clone();
    square.g = square.g.scale(5);
    square.d_prime = square.d_prime.scale(5);
    // still commutes, but the stored mediator is now wrong
    assert!(square.commutes(&c).unwrap());
    let inner = sq.clone();
    let tampered = PullbackSquare::with_mediator(square, move |x, y| inner.mediate(x, y));
    let report = verify_universal(&c, &tampered, 1).unwrap();
    assert_eq!(report.counterexample.unwrap().failure, OracleFailure::MediatorMismatch);
}

#[test]
fn pasting_examples() {
    let c = z6();
    let d = c.matrix(&[&[1, 3]]).unwrap();
    let h = c.scalar(2);
    let right = pullback_square(&c, &d, &h).unwrap().unwrap();
    // identity left square
    let b1 = *right.apex();
    let ident = Square {
        d: right.d_prime().clone(),
        h: c.identity(&1),
        apex: b1,
        g: c.identity(&b1),
        d_prime: right.d_prime().clone(),
    };
    let v = paste_pullback(&c, &ident, &right).unwrap();
    assert!(v.left_is_pullback && v.rectangle_is_pullback);
    assert_eq!(v.witnesses.len(), 2);
    // left square from a computed pullback
    let k = c.scalar(5);
    let left = pullback_square(&c, right.d_prime(), &k).unwrap().unwrap();
    let v = paste_pullback(&c, &left.square, &right).unwrap();
    assert!(v.left_is_pullback && v.rectangle_is_pullback);
    // pad the apex with a redundant summand: still commutes, not a pullback
    let padded = Square {
        d: left.square.d.clone(),
        h: left.square.h.clone(),
        apex: left.square.apex + 1,
        g: left.square.g.hstack(&c.zero_mor(&1, &b1)).unwrap(),
        d_prime: left.square.d_prime.hstack(&c.zero_mor(&1, &1)).unwrap(),
    };
    let v = paste_pullback(&c, &padded, &right).unwrap();
    assert!(!v.left_is_pullback && !v.rectangle_is_pullback);
}

#[test]
fn kernel_lifting_examples() {
    let c = z6();
    let d = c.matrix(&[&[1, 3]]).unwrap();
    let i = kernel_cert(&c, &d).unwrap().unwrap();
    // along the identity
    let sq = pullback_square(&c, &d, &c.identity(&1)).unwrap().unwrap();
    let lifted = kernel_lift(&c, &i, &sq).unwrap();
    assert_eq!(sq.g().mul(&lifted.inclusion).unwrap(), i.inclusion);
    assert!(verify_universal(&c, &lifted, 2).unwrap().passed());
    // the Z/6 example
    let sq = pullback_square(&c, &d, &c.scalar(2)).unwrap().unwrap();
    let lifted = kernel_lift(&c, &i, &sq).unwrap();
    assert_eq!(sq.g().mul(&lifted.inclusion).unwrap(), i.inclusion);
    assert!(sq.d_prime().mul(&lifted.inclusion).unwrap().is_zero());
    assert!(verify_universal(&c, &lifted, 2).unwrap().passed());
    // d with zero kernel
    let iso = c.scalar(5);
    let i = kernel_cert(&c, &iso).unwrap().unwrap();
    let sq = pullback_square(&c, &iso, &c.scalar(2)).unwrap().unwrap();
    let lifted = kernel_lift(&c, &i, &sq).unwrap();
    assert_eq!(lifted.object, 0);
    assert!(verify_universal(&c, &lifted, 2).unwrap().passed());
}

#[test]
fn cokernel_recognition() {
    let c = z6();
    assert!(is_cokernel(&c, &c.matrix(&[&[1, 3]]).unwrap()).unwrap());
    assert!(!is_cokernel(&c, &c.scalar(2)).unwrap());
    assert!(is_cokernel(&c, &c.zero_mor(&2, &0)).unwrap());
    assert!(is_kernel(&c, &c.matrix(&[&[1], &[0]]).unwrap()).unwrap());
    let p = PairCategory::new(2).unwrap();
    let f = p.morphism(&p.bare(1), &p.full(1), Matrix::identity(p.field(), 1)).unwrap();
    assert!(!is_cokernel(&p, &f).unwrap());
    assert!(!is_kernel(&p, &f).unwrap());
}

#[test]
fn integer_kernels_without_enumeration() {
    let z = IntegerFreeModules;
    let f = IntMatrix::from_rows(&[&[1, 2, 3]]);
    let k = kernel(&z, &f, Bounds::uniform(2)).unwrap().certificate().unwrap();
    assert_eq!(k.object, 2);
    let t = IntMatrix::from_rows(&[&[1], &[1], &[-1]]);
    let u = k.mediate(&t).unwrap();
    assert_eq!(k.inclusion.mul(&u).unwrap(), t);
    assert!(verify_universal(&z, &k, 1).is_err());
}
