use semiquant::model::{CentrifugalSpec, Potential, ReportedEnergy, SpectrumKey};
use semiquant::semiclassical::LevelLimit;
use semiquant::spectral::{
    eigen_fd, eigen_shooting, exact_spectrum, solve_state, ExactMethod, FdMesh, RadialGrid, SolverSettings,
};

#[test]
fn hydrogen_levels_are_degenerate_in_ell() {
    let spec = exact_spectrum(&Potential::Coulomb, LevelLimit::MaxLevel(4), &SolverSettings::default()).unwrap();
    assert_eq!(spec.states.len(), 10);
    for entry in spec.entries(&Potential::Coulomb, ExactMethod::Shooting) {
        let want = -1.0 / (entry.key.n * entry.key.n) as f64;
        assert!((entry.energy.value() - want).abs() <= 1e-6, "{:?}: {}", entry.key, entry.energy.value());
    }
}

#[test]
fn dimension_enters_through_the_centrifugal_term() {
    // D-dimensional hydrogen: E = −1/(2(k + ℓ + (D−1)/2)²)
    for (dim, ell, k) in [(4u32, 0u32, 0usize), (4, 1, 1), (5, 0, 0), (2, 1, 0)] {
        let settings = SolverSettings { dim, ..SolverSettings::default() };
        let s = solve_state(&Potential::Coulomb, ell, k, &settings).unwrap();
        let nu = k as f64 + ell as f64 + (dim as f64 - 1.0) / 2.0;
        let want = -0.5 / (nu * nu);
        assert!((s.shooting - want).abs() < 1e-7, "D={dim} l={ell} k={k}: {} vs {want}", s.shooting);
        assert_eq!(s.nodes, k);
    }
}

#[test]
fn table_structure_log_and_yukawa() {
    let settings = SolverSettings::default();
    for pot in [Potential::Logarithmic, Potential::yukawa(100.0).unwrap()] {
        let spec = exact_spectrum(&pot, LevelLimit::MaxLevel(6), &settings).unwrap();
        assert_eq!(spec.states.len(), 21);
        let keys: Vec<SpectrumKey> = spec.states.iter().map(|s| s.key).collect();
        let mut expected = Vec::new();
        for n in 1..=6 {
            for ell in (0..n).rev() {
                expected.push(SpectrumKey { n, ell });
            }
        }
        assert_eq!(keys, expected);
        for s in &spec.states {
            assert_eq!(s.nodes as u32, s.key.n - s.key.ell - 1, "node theorem at {:?}", s.key);
            assert!(s.residual() <= 1e-5);
        }
        // within a level, log energy rises as ℓ falls and screened Coulomb energy falls; at fixed ℓ it rises with k
        let rises = pot.vanishes_at_infinity();
        for w in spec.states.windows(2) {
            if w[0].key.n == w[1].key.n {
                let ok = if rises { w[0].shooting > w[1].shooting } else { w[0].shooting < w[1].shooting };
                assert!(ok, "{:?} vs {:?}", w[0].key, w[1].key);
            }
        }
        for ell in 0..6 {
            let e: Vec<f64> = spec.states.iter().filter(|s| s.key.ell == ell).map(|s| s.shooting).collect();
            let mut by_n: Vec<(u32, f64)> =
                spec.states.iter().filter(|s| s.key.ell == ell).map(|s| (s.key.n, s.shooting)).collect();
            by_n.sort_by_key(|p| p.0);
            assert!(by_n.windows(2).all(|w| w[0].1 < w[1].1), "l={ell}: {e:?}");
        }
    }
}

#[test]
fn weak_screening_binds_at_most_one_state() {
    let spec = exact_spectrum(&Potential::yukawa(0.5).unwrap(), LevelLimit::AllBound, &SolverSettings::default()).unwrap();
    assert!(spec.states.len() <= 1);
    let spec = exact_spectrum(&Potential::yukawa(1.5).unwrap(), LevelLimit::AllBound, &SolverSettings::default()).unwrap();
    assert_eq!(spec.states.len(), 1);
    assert!(spec.states[0].shooting < 0.0);
}

#[test]
fn full_yukawa_spectrum_counts() {
    let pot = Potential::yukawa(100.0).unwrap();
    let spec = exact_spectrum(&pot, LevelLimit::AllBound, &SolverSettings::default()).unwrap();
    assert_eq!(spec.bound_per_ell, [11, 10, 8, 7, 6, 4, 3, 2]);
    let per_level: Vec<usize> = (1..=12).map(|n| spec.states.iter().filter(|s| s.key.n == n).count()).collect();
    assert_eq!(per_level, [1, 2, 3, 4, 5, 6, 7, 8, 8, 5, 2, 0]);
    assert!(spec.states.iter().all(|s| s.shooting < 0.0 && s.fd < 0.0));
    assert!(spec.max_residual() <= 1e-5);
}

#[test]
fn shooting_and_fd_agree_on_spec_examples() {
    let settings = SolverSettings::default();
    let log = Potential::Logarithmic;
    let g = solve_state(&log, 0, 0, &settings).unwrap();
    assert!((g.shooting - 0.697759).abs() < 1e-6);
    let cf = CentrifugalSpec::quantum(0, 3).unwrap();
    let e = eigen_shooting(&Potential::Coulomb, cf, 0, (-1.0, -0.2), &RadialGrid::new(1e-6, 40.0, 40_001).unwrap(), 1e-10)
        .unwrap();
    assert!((ReportedEnergy::from_natural(&Potential::Coulomb, e.energy).value() + 1.0).abs() < 1e-7);
    let fd = eigen_fd(&Potential::Coulomb, cf, &FdMesh::new(80.0, 40_001).unwrap(), 3).unwrap();
    for (e, n) in fd.iter().zip([1.0f64, 2.0, 3.0]) {
        assert!((2.0 * e + 1.0 / (n * n)).abs() < 1e-3, "{e}");
    }
}
