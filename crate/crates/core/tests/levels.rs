use std::f64::consts::PI;

use multibarrier::cache::SpectrumCache;
use multibarrier::spectrum::{find_levels, find_levels_with_report, quantization_determinant, quantization_residual};
use multibarrier::{BarrierCount, BarrierGeometry, SpectrumConfig};

fn geom(n: BarrierCount, c: f64, v: f64) -> BarrierGeometry {
    BarrierGeometry::new(20.0, n, c, v).unwrap()
}

#[test]
fn free_ring_spectrum_is_reproduced() {
    let cfg = SpectrumConfig::default();
    for n in [BarrierCount::Finite(2), BarrierCount::Finite(35), BarrierCount::Infinite] {
        let g = geom(n, 3.0, 0.0);
        let spec = find_levels(&g, &cfg).unwrap();
        let expected: Vec<f64> = (1..)
            .map(|m| (PI * f64::from(m) / 90.0).powi(2))
            .skip_while(|&e| e < cfg.e_min)
            .take_while(|&e| e <= cfg.e_split)
            .collect();
        assert_eq!(spec.levels.len(), expected.len(), "{n}");
        for (a, b) in spec.levels.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8 * b, "{n}: {a} vs {b}");
        }
    }
}

#[test]
fn residual_formulations_agree_on_a_grid() {
    let cfg = SpectrumConfig::default();
    for (n, c) in [(BarrierCount::Finite(6), 1.5), (BarrierCount::Finite(15), 3.0), (BarrierCount::Infinite, 0.5)] {
        let g = geom(n, c, 60.0);
        let mut e = 0.15;
        while e < 1080.0 {
            let a = quantization_residual(&g, &cfg, e).unwrap();
            let b = quantization_determinant(&g, &cfg, e).unwrap();
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{n} c={c} e={e}: {a} vs {b}");
            e *= 1.07;
        }
    }
}

#[test]
fn counts_are_stable_under_grid_halving() {
    for (n, c) in [(BarrierCount::Finite(6), 1.5), (BarrierCount::Finite(6), 15.0), (BarrierCount::Infinite, 3.0)] {
        let g = geom(n, c, 60.0);
        let coarse = SpectrumConfig::default();
        let fine = SpectrumConfig {
            k_step: coarse.k_step / 2.0,
            ..coarse
        };
        let a = find_levels(&g, &coarse).unwrap();
        let b = find_levels(&g, &fine).unwrap();
        assert_eq!(a.levels.len(), b.levels.len(), "{n} c={c}");
        for (x, y) in a.levels.iter().zip(&b.levels) {
            assert!((x - y).abs() <= 1e-9 * x, "{n} c={c}: {x} vs {y}");
        }
    }
}

#[test]
fn report_is_consistent() {
    let g = geom(BarrierCount::Finite(4), 2.0, 60.0);
    let (spec, report) = find_levels_with_report(&g, &SpectrumConfig::default()).unwrap();
    assert_eq!(report.rejected_candidates, 0);
    assert!(report.refined_points >= report.grid_points);
    assert_eq!(
        report.refined_roots,
        report.candidate_brackets - report.rejected_candidates
    );
    assert!(spec.levels.len() <= report.refined_roots - report.merged_duplicates);
    assert_eq!(spec.tail.unwrap().first_index, 941);
}

#[test]
fn boundary_inside_array_is_rejected() {
    let g = geom(BarrierCount::Finite(4), 2.0, 60.0);
    let cfg = SpectrumConfig {
        boundary_half_width: 9.0,
        ..Default::default()
    };
    assert!(find_levels(&g, &cfg).is_err());
}

#[test]
fn cached_spectrum_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SpectrumCache::new(dir.path()).unwrap();
    let g = geom(BarrierCount::Finite(6), 4.0, 60.0);
    let cfg = SpectrumConfig::default();
    let fresh = cache.get_or_compute(&g, &cfg).unwrap();
    let warm = cache.get_or_compute(&g, &cfg).unwrap();
    assert_eq!(fresh, warm);
    assert_eq!(fresh, find_levels(&g, &cfg).unwrap());
}
