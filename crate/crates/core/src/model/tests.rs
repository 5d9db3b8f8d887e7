use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{c, eye, frobenius, real_diag};

fn random_square(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    random_square(n, rng).qr().q()
}

#[test]
fn params_validation() {
    assert!(SystemParams::new(1, 1, 1, 0.0, 0.0, 1.0).is_ok());
    assert!(SystemParams::new(0, 1, 1, 0.0, 0.0, 1.0).is_err());
    assert!(SystemParams::new(1, 1, 1, -1.0, 0.0, 1.0).is_err());
    assert!(SystemParams::new(1, 1, 1, 0.0, 0.0, 0.0).is_err());
    assert!(SystemParams::new(1, 1, 1, 0.0, f64::NAN, 1.0).is_err());
}

#[test]
fn psd_validation_and_clamping() {
    let bad = CMat::from_row_slice(2, 2, &[c(1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), c(1.0)]);
    assert!(HermitianPsd::new(bad).is_err());
    assert!(HermitianPsd::new(real_diag(&[1.0, -0.5])).is_err());
    let (h, removed) = HermitianPsd::with_clamped_mass(real_diag(&[1.0, -1e-12])).unwrap();
    assert_eq!(h.eigenvalues(), vec![0.0, 1.0]);
    assert_eq!(removed, 1e-12);
    // Dense matrix with a tiny negative eigenvalue.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_unitary(3, &mut rng);
    let m = &u * real_diag(&[2.0, 1.0, -1e-13]) * u.adjoint();
    let h = HermitianPsd::new(hermitize(&m)).unwrap();
    assert!(h.eigenvalues()[0] >= 0.0);
}

fn hermitize(m: &CMat) -> CMat {
    crate::linalg::hermitize(m)
}

#[test]
fn reduce_identity_and_diagonal() {
    let set = reduce_raw_spec(&RawChannelSpec::identity(3, 4, 2)).unwrap();
    assert!((set.r1.matrix() - eye(3)).iter().all(|v| v.norm() < 1e-14));
    assert!((set.t1.matrix() - eye(4)).iter().all(|v| v.norm() < 1e-14));
    assert!((set.r2.matrix() - eye(4)).iter().all(|v| v.norm() < 1e-14));
    assert!((set.t2.matrix() - eye(2)).iter().all(|v| v.norm() < 1e-14));

    let mut raw = RawChannelSpec::identity(2, 2, 2);
    raw.a1 = real_diag(&[2.0, 1.0]);
    let set = reduce_raw_spec(&raw).unwrap();
    assert!((set.r1.matrix() - real_diag(&[4.0, 1.0])).iter().all(|v| v.norm() < 1e-13));
}

#[test]
fn reduce_matches_frobenius_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let uxd = |n: usize, rng: &mut ChaCha8Rng| {
        let d: Vec<f64> = (0..n).map(|_| 0.2 + rng.random::<f64>()).collect();
        random_unitary(n, rng) * real_diag(&d)
    };
    let a1 = uxd(4, &mut rng);
    let b1 = uxd(4, &mut rng);
    let a2 = uxd(4, &mut rng);
    let b2 = uxd(4, &mut rng);
    let phi = uxd(4, &mut rng);
    let g = random_square(4, &mut rng);
    let p = &g * g.adjoint();
    let raw = RawChannelSpec { a1: a1.clone(), b1: b1.clone(), a2: a2.clone(), b2: b2.clone(), phi: phi.clone(), p: p.clone() };
    let set = reduce_raw_spec(&raw).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(set.r1.trace(), frobenius(&a1).powi(2)) < 1e-10);
    assert!(rel(set.r2.trace(), frobenius(&a2).powi(2)) < 1e-10);
    assert!(rel(set.t1.trace(), frobenius(&(&b1 * &phi)).powi(2)) < 1e-10);
    let p_half = psd_sqrt(&p).unwrap();
    assert!(rel(set.t2.trace(), frobenius(&(&b2 * p_half)).powi(2)) < 1e-10);
    // Full matrices, not just traces.
    let want_r1 = &a1 * a1.adjoint();
    assert!(frobenius(&(set.r1.matrix() - &want_r1)) < 1e-12 * frobenius(&want_r1));
    let b1phi = &b1 * &phi;
    let want_t1 = b1phi.adjoint() * &b1phi;
    assert!(frobenius(&(set.t1.matrix() - &want_t1)) < 1e-12 * frobenius(&want_t1));
}

#[test]
fn reduce_rejects_inconsistent_dims() {
    let mut raw = RawChannelSpec::identity(2, 3, 2);
    raw.phi = eye(2);
    assert!(matches!(reduce_raw_spec(&raw), Err(Error::Parameter(_))));
}

#[test]
fn sqrt_examples() {
    assert_eq!(psd_sqrt(&eye(3)).unwrap(), eye(3));
    let s = psd_sqrt(&real_diag(&[4.0, 9.0])).unwrap();
    assert!((s - real_diag(&[2.0, 3.0])).iter().all(|v| v.norm() < 1e-14));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_square(5, &mut rng);
    let m = g.adjoint() * &g;
    let s = psd_sqrt(&m).unwrap();
    assert!(frobenius(&(&s * &s - &m)) / frobenius(&m) < 1e-10);
    assert!(crate::linalg::hermitian_defect(&s) < 1e-14);
    let not_herm = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
    assert!(psd_sqrt(&not_herm).is_err());
}

#[test]
fn report_on_identities_and_degenerate() {
    let p = SystemParams::symmetric(4, 4, 4, 1.0, 1.0).unwrap();
    let rep = assumption_report(&CorrelationSet::identity(4, 4, 4), &p);
    assert_eq!((rep.ratio_n_l, rep.ratio_l_m), (1.0, 1.0));
    assert_eq!(rep.normalized_traces, [1.0; 5]);
    assert_eq!(rep.norms, [1.0; 4]);

    let mut set = CorrelationSet::identity(4, 4, 4);
    set.r1 = HermitianPsd::zeros(4);
    let rep = assumption_report(&set, &p);
    assert_eq!(rep.normalized_traces[1], 0.0);
    assert!(set.check_traces().is_err());
}

#[test]
fn report_on_angular_model_matches_dense_eigensolve() {
    let r = build_correlation(10.0, 10.0, 0.5, 8).unwrap();
    let t = build_correlation(-20.0, 5.0, 0.5, 6).unwrap();
    let set = CorrelationSet::new(r.clone(), t.clone(), t.clone(), r.clone()).unwrap();
    let p = SystemParams::symmetric(8, 6, 8, 1.0, 1.0).unwrap();
    let rep = assumption_report(&set, &p);
    let eig = nalgebra::SymmetricEigen::new(r.matrix().clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    assert!((rep.norms[0] - lmax).abs() < 1e-12);
    let tt = t.matrix() * t.matrix();
    let want = crate::linalg::trace(&tt).re / 6.0;
    assert!((rep.normalized_traces[0] - want).abs() < 1e-12);
    assert!((rep.normalized_traces[1] - r.matrix()[(0, 0)].re).abs() < 1e-12);
}
