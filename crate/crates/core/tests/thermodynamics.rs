use multibarrier::analysis::{detect_peaks, DEFAULT_PROMINENCE};
use multibarrier::spectrum::{find_levels, tail_energies, EnergySpectrum};
use multibarrier::thermo::{build_curve, c_infinity_observables, observables, partition_sums, GridSpacing, TemperatureGrid};
use multibarrier::{BarrierCount, BarrierGeometry, SpectrumConfig};

fn spectrum(n: BarrierCount, c: f64) -> EnergySpectrum {
    let g = BarrierGeometry::new(20.0, n, c, 60.0).unwrap();
    find_levels(&g, &SpectrumConfig::default()).unwrap()
}

#[test]
fn computed_curves_satisfy_invariants() {
    let grid = TemperatureGrid::new(0.1, 100.0, 300, GridSpacing::Log).unwrap().points();
    for (n, c) in [(BarrierCount::Finite(6), 1.5), (BarrierCount::Finite(15), 3.0), (BarrierCount::Infinite, 200.0)] {
        let curve = build_curve(&spectrum(n, c), &grid).unwrap();
        assert!(curve.invariant_violations().is_empty(), "{n} c={c}: {:?}", curve.invariant_violations());
        assert_eq!(curve.label.barriers, Some(n));
        detect_peaks(&curve, DEFAULT_PROMINENCE).unwrap();
    }
}

#[test]
fn entropy_derivative_matches_specific_heat() {
    let s = spectrum(BarrierCount::Finite(6), 6.0);
    for t in [0.3, 1.0, 4.0, 20.0, 80.0] {
        let h = 1e-4 * t;
        let up = observables(&s, t + h).unwrap().entropy;
        let dn = observables(&s, t - h).unwrap().entropy;
        let lhs = t * (up - dn) / (2.0 * h);
        let ch = observables(&s, t).unwrap().specific_heat;
        assert!((lhs - ch).abs() <= 1e-3 * ch, "T={t}: {lhs} vs {ch}");
    }
}

#[test]
fn fluctuation_form_matches_energy_derivative() {
    let s = spectrum(BarrierCount::Finite(15), 10.0);
    for t in [0.2, 2.0, 30.0] {
        let h = 1e-3 * t;
        let fd = (observables(&s, t + h).unwrap().avg_energy - observables(&s, t - h).unwrap().avg_energy) / (2.0 * h);
        let ch = observables(&s, t).unwrap().specific_heat;
        assert!((fd - ch).abs() <= 1e-4 * ch, "T={t}");
    }
}

#[test]
fn tail_is_numerically_absent_at_unit_beta() {
    let s = spectrum(BarrierCount::Finite(6), 6.0);
    let p = partition_sums(&s, 1.0).unwrap();
    assert_eq!(p.tail_terms_used, 0);
    let first = tail_energies(90.0, 941).next().unwrap();
    assert!(first > 1000.0);
}

#[test]
fn closed_form_limit_matches_explicit_levels() {
    let explicit = EnergySpectrum::from_levels(tail_energies(90.0, 0).take(20_000).collect());
    for t in [1e-4, 0.05, 3.0, 90.0] {
        let a = c_infinity_observables(90.0, t).unwrap();
        let b = observables(&explicit, t).unwrap();
        assert!((a.specific_heat - b.specific_heat).abs() <= 1e-12 * b.specific_heat.max(1e-300), "T={t}");
        assert!((a.avg_energy - b.avg_energy).abs() <= 1e-12 * b.avg_energy.max(1e-300));
    }
}
