mod common;

use common::*;
use nfwave_core::analysis::*;
use nfwave_core::domain::{Point, WavefrontSpec};
use nfwave_core::error::Error;
use nfwave_core::solver::solve;
use nfwave_core::spectral::{CoverageMap, MapGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_grid(nx: usize, ny: usize) -> MapGrid {
    MapGrid {
        nx,
        ny,
        dx: 1.0,
        dy: 1.0,
        x0: 0.0,
        y0: -(ny as f64 / 2.0),
    }
}

fn map_from(nx: usize, ny: usize, f: impl Fn(f64, f64) -> Complex64) -> CoverageMap {
    let g = unit_grid(nx, ny);
    let mut data = Vec::with_capacity(nx * ny);
    for k in 0..nx {
        for j in 0..ny {
            data.push(f(g.x_at(k), g.y_at(j)));
        }
    }
    CoverageMap::from_data(g, data).unwrap()
}

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn naive_xcorr(a: &[f64], b: &[f64], nx: usize, ny: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; 2 * ny - 1]; 2 * nx - 1];
    for (lx, row) in out.iter_mut().enumerate() {
        let dx = lx as i64 - (nx as i64 - 1);
        for (ly, v) in row.iter_mut().enumerate() {
            let dy = ly as i64 - (ny as i64 - 1);
            let mut acc = 0.0;
            for k in 0..nx as i64 {
                for j in 0..ny as i64 {
                    let (k2, j2) = (k + dx, j + dy);
                    if k2 >= 0 && j2 >= 0 && k2 < nx as i64 && j2 < ny as i64 {
                        acc += a[(k * ny as i64 + j) as usize] * b[(k2 * ny as i64 + j2) as usize];
                    }
                }
            }
            *v = acc;
        }
    }
    out
}

#[test]
fn spectral_correlation_matches_sliding_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (nx, ny) in [(32, 32), (32, 20), (7, 13)] {
        let a = random_values(&mut rng, nx * ny);
        let b = random_values(&mut rng, nx * ny);
        let fast = cross_correlation(&a, &b, nx, ny);
        let slow = naive_xcorr(&a, &b, nx, ny);
        let worst = fast
            .iter()
            .flatten()
            .zip(slow.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "{nx}×{ny}: {worst:e}");
    }
}

#[test]
fn ncc_peak_matches_naive_normalized_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (nx, ny) = (24, 18);
    let a: Vec<f64> = random_values(&mut rng, nx * ny).iter().map(|v| v.abs()).collect();
    let b: Vec<f64> = random_values(&mut rng, nx * ny).iter().map(|v| v.abs()).collect();
    let standardize = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let c: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.into_iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let r = naive_xcorr(&standardize(&a), &standardize(&b), nx, ny);
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for (lx, row) in r.iter().enumerate() {
        for (ly, v) in row.iter().enumerate() {
            if *v > best.0 {
                best = (*v, (lx as i64 - (nx as i64 - 1), ly as i64 - (ny as i64 - 1)));
            }
        }
    }
    let (peak, lag) = ncc_peak_real(&a, &b, nx, ny).unwrap();
    assert!((peak - best.0).abs() <= 1e-12);
    assert_eq!(lag, best.1);
}

fn gaussian_map(n: usize, w: f64) -> CoverageMap {
    let c = n as f64 / 2.0;
    map_from(n, n, |x, y| Complex64::new((-((x - c).powi(2) + y * y) / (w * w)).exp(), 0.0))
}

#[test]
fn rmse_of_gaussian_pair_matches_naive_loop() {
    let n = 256;
    let w = 30.0;
    let a = gaussian_map(n, w);
    let b = gaussian_map(n, 1.1 * w);
    let intensity = |m: &CoverageMap| {
        let mut out = vec![vec![0.0; n]; n];
        let mut max: f64 = 0.0;
        for k in 0..n {
            for j in 0..n {
                out[k][j] = m.at(k, j).norm_sqr();
                max = max.max(out[k][j]);
            }
        }
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v /= max;
            }
        }
        out
    };
    let (ia, ib) = (intensity(&a), intensity(&b));
    let mut sum = 0.0;
    for k in 0..n {
        for j in 0..n {
            sum += (ia[k][j] - ib[k][j]).powi(2);
        }
    }
    let expected = (sum / (n * n) as f64).sqrt();
    let got = rmse(&a, &b).unwrap();
    assert!((got - expected).abs() <= 1e-12, "{got} vs {expected}");
    assert!(got > 0.0 && got < 0.1);
}

#[test]
fn rmse_extremes() {
    let ones = map_from(8, 8, |_, _| Complex64::new(1.0, 0.0));
    assert_eq!(rmse(&ones, &ones).unwrap(), 0.0);
    let corner = map_from(8, 8, |x, y| Complex64::new(if x == 0.0 && y == -4.0 { 1.0 } else { 0.0 }, 0.0));
    let r = rmse(&ones, &corner).unwrap();
    assert!((r - (63.0f64 / 64.0).sqrt()).abs() < 1e-15);
}

#[test]
fn shifted_map_is_found_at_its_lag() {
    let a = gaussian_map(64, 6.0);
    let g = *a.grid();
    let mut shifted = vec![Complex64::new(0.0, 0.0); g.nx * g.ny];
    for k in 0..g.nx {
        for j in 0..g.ny {
            let (k2, j2) = (k as i64 - 3, j as i64 + 2);
            if k2 >= 0 && j2 >= 0 && (k2 as usize) < g.nx && (j2 as usize) < g.ny {
                shifted[k * g.ny + j] = a.at(k2 as usize, j2 as usize);
            }
        }
    }
    let b = CoverageMap::from_data(g, shifted).unwrap();
    let (peak, lag) = ncc_peak(&a, &b).unwrap();
    assert!(peak >= 0.95, "{peak}");
    assert_eq!(lag, (3, -2));
    let report = compare(&a, &b).unwrap();
    assert_eq!(report.peak_offset, (3, -2));
}

#[test]
fn negated_map_correlates_perfectly() {
    let a = gaussian_map(32, 5.0);
    let neg = map_from(32, 32, |x, y| {
        let c = 16.0;
        Complex64::new(-(-((x - c).powi(2) + y * y) / 25.0).exp(), 0.0)
    });
    let (peak, lag) = ncc_peak(&a, &neg).unwrap();
    assert_eq!(peak, 1.0);
    assert_eq!(lag, (0, 0));
}

#[test]
fn degenerate_inputs_are_errors() {
    let zero = CoverageMap::zeros(unit_grid(8, 8));
    let a = gaussian_map(8, 2.0);
    assert!(matches!(rmse(&zero, &a), Err(Error::ZeroMap)));
    assert!(matches!(ncc_peak(&a, &zero), Err(Error::ZeroMap)));
    let b = gaussian_map(9, 2.0);
    assert!(matches!(rmse(&a, &b), Err(Error::DimensionMismatch(_))));
    assert!(matches!(ncc_peak(&a, &b), Err(Error::DimensionMismatch(_))));
}

#[test]
fn gaussian_trajectory_and_width_growth() {
    let mut s = scenario(0.3, 0.3);
    let w0 = 0.01;
    let n = cells_for(&s, 0.08);
    s.tx.push(aperture(&s, Point::new(0.0, 0.0), n, 0.0, WavefrontSpec::Gaussian { waist: w0 }));
    let map = solve(&s).unwrap().total;
    assert_eq!(ncc_peak(&map, &map).unwrap(), (1.0, (0, 0)));
    let traj = beam_trajectory(&map);
    let dy = map.grid().dy;
    let x_r = std::f64::consts::PI * w0 * w0 / lambda();
    let w_start = traj[0].width;
    for p in &traj {
        assert!(p.y_peak.abs() < dy, "x = {}: {}", p.x, p.y_peak);
        let expected = (1.0 + (p.x / x_r).powi(2)).sqrt();
        let ratio = p.width / w_start;
        assert!((ratio / expected - 1.0).abs() <= 0.03, "x = {}: {ratio} vs {expected}", p.x);
    }
}

#[test]
fn empty_columns_report_zero() {
    let map = map_from(4, 16, |x, y| {
        Complex64::new(if x >= 2.0 { (-(y - 1.0).powi(2) / 4.0).exp() } else { 0.0 }, 0.0)
    });
    let traj = beam_trajectory(&map);
    assert_eq!((traj[0].peak, traj[0].width), (0.0, 0.0));
    assert!((traj[3].y_peak - 1.0).abs() < 0.05);
    assert!(traj[3].width > 0.0);
}

fn random_map(seed: u64, nx: usize, ny: usize) -> CoverageMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..nx * ny)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    CoverageMap::from_data(unit_grid(nx, ny), data).unwrap()
}

fn scaled(m: &CoverageMap, c: f64) -> CoverageMap {
    CoverageMap::from_data(*m.grid(), m.data().iter().map(|v| v * c).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metrics_stay_in_range(sa in any::<u64>(), sb in any::<u64>(), nx in 2usize..20, ny in 2usize..20) {
        let a = random_map(sa, nx, ny);
        let b = random_map(sb, nx, ny);
        let r = rmse(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        prop_assert_eq!(r, rmse(&b, &a).unwrap());
        let (peak, _) = ncc_peak(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0 + 1e-12).contains(&peak));
        let (auto, lag) = ncc_peak(&a, &a).unwrap();
        prop_assert!((auto - 1.0).abs() <= 1e-12);
        prop_assert_eq!(lag, (0, 0));
    }

    #[test]
    fn metrics_ignore_positive_scale(sa in any::<u64>(), sb in any::<u64>(), c in 1e-6f64..1e6) {
        let a = random_map(sa, 12, 9);
        let b = random_map(sb, 12, 9);
        let r = rmse(&a, &b).unwrap();
        prop_assert!((rmse(&scaled(&a, c), &b).unwrap() - r).abs() <= 1e-12);
        let (p, lag) = ncc_peak(&a, &b).unwrap();
        let (ps, lags) = ncc_peak(&a, &scaled(&b, c)).unwrap();
        prop_assert!((p - ps).abs() <= 1e-12);
        prop_assert_eq!(lag, lags);
    }
}
