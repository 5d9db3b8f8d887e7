use super::*;

/// Marčenko–Pastur density of s·XXᴴ/L, X N×L standard, ratio N/L ≤ 1.
fn mp_density(ratio: f64, s: f64, x: f64) -> f64 {
    let (a, b) = (s * (1.0 - ratio.sqrt()).powi(2), s * (1.0 + ratio.sqrt()).powi(2));
    if x <= a || x >= b {
        0.0
    } else {
        ((b - x) * (x - a)).sqrt() / (2.0 * std::f64::consts::PI * ratio * s * x)
    }
}

#[test]
fn tail_and_class() {
    let corr = CorrelationSet::identity(6, 9, 4);
    let zeta = Complex64::new(0.0, 1e6);
    let (m, _) = stieltjes_m(&corr, 0.0, zeta, None).unwrap();
    assert!((m + 1.0 / zeta).norm() < 1e-6 / zeta.norm());
    for zeta in [Complex64::new(1.0, 0.1), Complex64::new(-2.0, 0.5), Complex64::new(7.0, 3.0)] {
        let (m, _) = stieltjes_m(&corr, 1.0, zeta, None).unwrap();
        assert!(m.im > 0.0);
    }
    assert!(stieltjes_m(&corr, 1.0, Complex64::new(1.0, 0.0), None).is_err());
}

#[test]
fn single_hop_matches_marchenko_pastur() {
    for (n, l, s) in [(40, 40, 1.0), (20, 80, 2.0)] {
        let corr = CorrelationSet::identity(n, l, 10);
        let ratio = n as f64 / l as f64;
        let edge = s * (1.0 + ratio.sqrt()).powi(2);
        let grid: Vec<f64> = (1..60).map(|k| edge * k as f64 / 60.0).collect();
        let d = single_hop_density(&corr, s, &grid, 1e-7).unwrap();
        for (x, f) in d.grid.iter().zip(&d.density) {
            let want = mp_density(ratio, s, *x);
            let lo = s * (1.0 - ratio.sqrt()).powi(2);
            if (x - lo).abs() > 0.02 * edge && (edge - x).abs() > 0.02 * edge {
                assert!((f - want).abs() < 1e-3, "x = {x}: {f} vs {want}");
            }
        }
    }
}

#[test]
fn mass_and_moments() {
    // Same aspect ratios as (150, 600, 450): identity densities depend only on them.
    let corr = CorrelationSet::identity(15, 60, 45);
    let grid = default_grid(&corr, 0.0, DEFAULT_POINTS);
    let d0 = lsd_density(&corr, 0.0, &grid, default_offset(&corr, 0.0)).unwrap();
    assert!(d0.mass > 0.97 && d0.mass < 1.01, "{}", d0.mass);
    assert!(d0.interpolated.is_empty());
    let grid2 = default_grid(&corr, 2.0, DEFAULT_POINTS);
    let d2 = lsd_density(&corr, 2.0, &grid2, default_offset(&corr, 2.0)).unwrap();
    assert!(d2.first_moment() > d0.first_moment());
    // E(1/N)Tr B = s̄·TrR₁TrT₁/(NL) + TrR₁TrT₁TrR₂TrT₂/(NLM·L) for identities: s̄ + 1.
    assert!((d0.first_moment() - 1.0).abs() < 0.03);
    assert!((d2.first_moment() - 3.0).abs() < 0.09);
}

#[test]
fn density_vanishes_on_negative_axis() {
    let corr = CorrelationSet::identity(10, 20, 15);
    let grid: Vec<f64> = (0..20).map(|k| -2.0 + 0.1 * k as f64).collect();
    let d = lsd_density(&corr, 1.0, &grid, 1e-6).unwrap();
    assert!(d.density.iter().all(|f| *f < 1e-6));
}

#[test]
fn atom_at_zero_for_rank_deficient_product() {
    // N > M forces rank(B) ≤ M when s̄ = 0: an atom of mass 1 − M/N at zero.
    let corr = CorrelationSet::identity(40, 40, 10);
    let grid = default_grid(&corr, 0.0, DEFAULT_POINTS);
    // A small offset keeps the smeared atom from leaking past the first grid point.
    let d = lsd_density(&corr, 0.0, &grid[1..], 1e-3 * default_offset(&corr, 0.0)).unwrap();
    assert!((d.zero_atom - 0.75).abs() < 0.02, "{}", d.zero_atom);
}

#[test]
fn grid_validation() {
    let corr = CorrelationSet::identity(4, 4, 4);
    assert!(lsd_density(&corr, 1.0, &[], 1e-3).is_err());
    assert!(lsd_density(&corr, 1.0, &[1.0, 0.5], 1e-3).is_err());
    assert!(lsd_density(&corr, 1.0, &[1.0, 2.0], 0.0).is_err());
}

#[test]
fn interpolation_and_csv() {
    let d = SpectralDensity::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0], 1e-3, vec![]);
    assert_eq!(d.mass, 1.0);
    assert_eq!(d.zero_atom, 0.0);
    assert_eq!(d.at(0.5), 0.5);
    assert_eq!(d.at(-1.0), 0.0);
    assert_eq!(d.at(2.0), 0.0);
    assert!(d.to_csv().starts_with("x,f\n0.0000000000000000e0,0.0000000000000000e0\n"));
    let h = Histogram { edges: vec![0.0, 1.0, 2.0], density: vec![0.5, 0.5] };
    assert!((d.l1_distance(&h) - 0.0).abs() < 1e-12);
}

#[test]
fn sweep_interpolates_isolated_failures() {
    let grid: Vec<f64> = (0..40).map(|k| k as f64).collect();
    let d = sweep(&grid, 1e-3, |z, _: Option<&()>| {
        if z.re == 10.0 {
            Err(Error::Numerical("synthetic".into()))
        } else {
            Ok((Complex64::new(0.0, std::f64::consts::PI * z.re), ()))
        }
    })
    .unwrap();
    assert_eq!(d.interpolated, vec![10]);
    assert!((d.density[10] - 10.0).abs() < 1e-12);
    let bad = sweep(&grid, 1e-3, |z, _: Option<&()>| {
        if z.re < 3.0 {
            Err(Error::Numerical("synthetic".into()))
        } else {
            Ok((Complex64::new(0.0, 1.0), ()))
        }
    });
    assert!(matches!(bad, Err(Error::Numerical(_))));
}
