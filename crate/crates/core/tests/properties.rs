use approx::assert_relative_eq;
use proptest::prelude::*;
use tsaction_core::action::{path_action, DiscretizationScheme, PathField, PathGrid, SchemeKind};
use tsaction_core::bridge::{
    apply_boundaries, evolve, initial_path, BoundarySpec, BridgeGrid, InputSampler, NoiseField,
};
use tsaction_core::phase_model::{
    expand_liouvillian, finite_difference_jacobian, log_transform, trace_check, validate_couplings, CouplingTensor,
    LinearModel, Partition, QuadratureModel,
};
use tsaction_core::sampler::{run_ensemble, variance_with_stderr, EnsembleConfig};
use tsaction_core::Complex64;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn valid_tensor(max_modes: usize) -> impl Strategy<Value = CouplingTensor> {
    (1..=max_modes)
        .prop_flat_map(|m| {
            let len = (m + 1).pow(4);
            (Just(m), prop::collection::vec(complex(), len))
        })
        .prop_map(|(m, g)| CouplingTensor::from_dense(m, g).unwrap().symmetrized())
}

fn hermitian(m: usize, values: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..m {
            let z = values[i * m + j];
            out[i * m + j] += z * 0.5;
            out[j * m + i] += z.conj() * 0.5;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetrized_tensors_are_valid(t in valid_tensor(2)) {
        prop_assert!(validate_couplings(&t).is_valid());
    }

    #[test]
    fn broken_hermiticity_is_reported(t in valid_tensor(2), bump in 0.1..1.0f64) {
        let mut t = t;
        t.add([1, 0, 1, 1], Complex64::new(0.0, bump)).unwrap();
        let report = validate_couplings(&t);
        prop_assert!(!report.is_valid());
        prop_assert!(report.violations.iter().any(|v| v.index == [1, 0, 1, 1] || v.partner == [1, 0, 1, 1]));
    }

    #[test]
    fn coefficients_come_in_conjugate_pairs(t in valid_tensor(2), pts in prop::collection::vec(complex(), 2)) {
        let m = t.modes();
        let c = expand_liouvillian(&t);
        let alpha = &pts[..m];
        let a = c.drift_at(alpha);
        let d = c.diffusion_at(alpha);
        let n = 2 * m;
        for j in 0..m {
            prop_assert!((a[m + j] - a[j].conj()).norm() < 1e-12);
            for l in 0..m {
                prop_assert!((d[(m + l) * n + m + j] - d[l * n + j].conj()).norm() < 1e-12);
                prop_assert!((d[l * n + m + j] - d[j * n + m + l]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_diffusion_is_traceless(t in valid_tensor(3), pts in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 6), 8)) {
        let c = expand_liouvillian(&t);
        let n = 2 * t.modes();
        let points: Vec<Vec<f64>> = pts.iter().map(|p| p[..n].to_vec()).collect();
        prop_assert!(trace_check(&c, &points) <= 1e-12);
    }

    #[test]
    fn log_transform_jacobian_matches_finite_differences(
        w in prop::collection::vec(complex(), 4),
        g in prop::collection::vec(-1.0..1.0f64, 4),
        phi in prop::collection::vec(-0.3..0.3f64, 4),
    ) {
        let omega = hermitian(2, &w);
        let g2: Vec<Complex64> = hermitian(2, &g.iter().map(|v| Complex64::new(*v, 0.0)).collect::<Vec<_>>());
        let (_, model) = log_transform(2, &omega, &g2, 1.0).unwrap();
        let n = model.dim();
        let mut jac = vec![0.0; n * n];
        model.jacobian(&phi[..n], &mut jac);
        let fd = finite_difference_jacobian(&model, &phi[..n], 1e-5);
        for (a, b) in jac.iter().zip(&fd) {
            prop_assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn jackknife_error_matches_leave_one_out(xs in prop::collection::vec(-5.0..5.0f64, 3..40)) {
        let n = xs.len();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
        };
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let mut rest = xs.clone();
                rest.remove(i);
                var(&rest)
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n as f64;
        let brute = ((n - 1) as f64 / n as f64 * loo.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()).sqrt();
        let (_, v, se) = variance_with_stderr(&xs);
        prop_assert!(v >= 0.0);
        prop_assert!((v - var(&xs)).abs() <= 1e-12 * v.max(1.0));
        prop_assert!((se - brute).abs() <= 1e-9 * brute.max(1e-3));
    }

    #[test]
    fn scheme_one_action_is_a_gaussian_log_density(
        m in prop::collection::vec(-1.0..1.0f64, 4),
        b in prop::collection::vec(-1.0..1.0f64, 2),
        path in prop::collection::vec(-1.0..1.0f64, 6),
        d in 0.1..2.0f64,
    ) {
        let model = LinearModel::new(m.clone(), b.clone(), d, Partition::ordered(1, 1, 0)).unwrap();
        let grid = PathGrid::new(0.0, 0.3, 2).unwrap();
        let eps = grid.eps();
        let field = PathField::new(grid, 2, path.clone()).unwrap();
        let s = path_action(&field, DiscretizationScheme::new(SchemeKind::I), &model).unwrap();
        let drift = |x: f64, y: f64, nu: usize| m[nu * 2] * x + m[nu * 2 + 1] * y + b[nu];
        let mut log_density = 0.0;
        for k in 1..3 {
            let (x0, y0, x1, y1) = (path[2 * k - 2], path[2 * k - 1], path[2 * k], path[2 * k + 1]);
            let mean_x = x0 + eps * drift(x0, y1, 0);
            let mean_y = y1 - eps * drift(x0, y1, 1);
            for (z, mu) in [(x1, mean_x), (y0, mean_y)] {
                log_density += -(z - mu).powi(2) / (2.0 * d * eps) - 0.5 * (2.0 * std::f64::consts::PI * d * eps).ln();
            }
        }
        prop_assert!((s.total + log_density).abs() <= 1e-10 * s.total.abs().max(1.0));
    }

    #[test]
    fn boundaries_hold_after_evolution(x0 in -2.0..2.0f64, yf in -2.0..2.0f64, seed in any::<u64>()) {
        let model = LinearModel::new(vec![-1.0, 0.0, 0.0, 1.0], vec![0.0; 2], 0.5, Partition::ordered(1, 1, 0)).unwrap();
        let spec = BoundarySpec::mixed(model.partition());
        let path_grid = PathGrid::new(0.0, 1.0, 8).unwrap();
        let grid = BridgeGrid::new(path_grid, 0.002, 0.1, vec![0.1]).unwrap();
        let pinned = [x0, yf];
        let mut path = initial_path(&path_grid, &pinned).unwrap();
        let (left, right) = apply_boundaries(&mut path, &pinned, &spec, &model).unwrap();
        let dt = path_grid.eps();
        let (mut a0, mut an) = ([0.0; 2], [0.0; 2]);
        model.drift(path.row(0), &mut a0);
        model.drift(path.row(8), &mut an);
        prop_assert!((left[1] - (path.row(0)[1] - dt * a0[1])).abs() < 1e-14);
        prop_assert!((right[0] - (path.row(8)[0] + dt * an[0])).abs() < 1e-14);
        let mut rng = NoiseField::new(seed).stream(0);
        let rec = evolve(&path, &grid, &spec, &model, 4, Some(&mut rng), 0).unwrap();
        let last = rec.snapshots.last().unwrap();
        prop_assert_eq!(last[0], x0);
        prop_assert_eq!(last[8 * 2 + 1], yf);
    }
}

#[test]
fn ensembles_are_reproducible_and_seed_sensitive() {
    let model = LinearModel::wiener();
    let grid = BridgeGrid::with_uniform_checkpoints(PathGrid::new(0.0, 1.0, 10).unwrap(), 0.002, 0.2, 3).unwrap();
    let mut config = EnsembleConfig {
        grid,
        boundary: BoundarySpec::mixed(model.partition()),
        inputs: InputSampler::Gaussian {
            mean: vec![0.0],
            variance: vec![1.0],
        },
        trajectories: 16,
        seed: 77,
        iterations: 4,
        noise: true,
    };
    let a = run_ensemble(&model, &config).unwrap();
    let b = run_ensemble(&model, &config).unwrap();
    assert_eq!(a, b);
    config.seed = 78;
    assert_ne!(run_ensemble(&model, &config).unwrap(), a);
}

#[test]
fn gaussian_inputs_have_the_requested_variance() {
    let sampler = InputSampler::Gaussian {
        mean: vec![1.0, -2.0],
        variance: vec![0.5, 0.25],
    };
    let noise = NoiseField::new(3);
    let mut cols = [Vec::new(), Vec::new()];
    let mut out = [0.0; 2];
    for id in 0..20_000 {
        sampler.sample(id, &mut noise.stream(id), &mut out);
        cols[0].push(out[0]);
        cols[1].push(out[1]);
    }
    let (m0, v0, s0) = variance_with_stderr(&cols[0]);
    let (m1, v1, s1) = variance_with_stderr(&cols[1]);
    assert_relative_eq!(m0, 1.0, epsilon = 0.03);
    assert_relative_eq!(m1, -2.0, epsilon = 0.03);
    assert!((v0 - 0.5).abs() < 4.0 * s0);
    assert!((v1 - 0.25).abs() < 4.0 * s1);
}
