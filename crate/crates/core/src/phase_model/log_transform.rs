use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::liouvillian::{expand_liouvillian, ComplexCoefficients, ComplexDrift};
use super::quadrature::RotatedModel;
use super::tensor::CouplingTensor;
use crate::{Error, Result};

/// Parameters of the logarithmic change of variables `θ_j = λ ln α_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTransformSpec {
    pub lambda: f64,
    /// Per-mode phase `η_j = arg(D^θ_jj)/2` in `(−π/2, π/2]`; the variable
    /// `e^{−iη_j} θ_j` has real positive diagonal diffusion.
    pub eta: Vec<f64>,
    /// Density-density coupling matrix, row-major `M × M`.
    pub g2: Vec<Complex64>,
}

/// Drift of the density-density model in logarithmic variables.
///
/// The diffusion `D^θ = iλ²g` is constant, which makes the model eligible
/// for the real-quadrature rotation.
#[derive(Debug, Clone)]
pub struct LogDrift {
    modes: usize,
    lambda: f64,
    g: Vec<f64>,
    base: ComplexCoefficients,
}

impl LogDrift {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The underlying amplitude-space coefficients.
    pub fn amplitude_coefficients(&self) -> &ComplexCoefficients {
        &self.base
    }

    /// `α_j = exp(θ_j / λ)`.
    pub fn alpha(&self, theta: &[Complex64]) -> Vec<Complex64> {
        theta.iter().map(|t| (t / self.lambda).exp()).collect()
    }

    /// `θ_j = λ ln α_j` on the principal branch.
    pub fn theta(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        alpha.iter().map(|a| a.ln() * self.lambda).collect()
    }
}

impl ComplexDrift for LogDrift {
    fn modes(&self) -> usize {
        self.modes
    }

    fn drift(&self, theta: &[Complex64], out: &mut [Complex64]) {
        let m = self.modes;
        let alpha = self.alpha(theta);
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        self.base.drift(&alpha, &mut a);
        for j in 0..m {
            out[j] = a[j] / alpha[j] * self.lambda
                - Complex64::new(0.0, 0.5 * self.lambda * self.g[j * m + j]);
        }
    }

    fn drift_derivatives(
        &self,
        theta: &[Complex64],
        d_theta: &mut [Complex64],
        d_conj: &mut [Complex64],
    ) {
        let m = self.modes;
        let alpha = self.alpha(theta);
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        let mut da = vec![Complex64::new(0.0, 0.0); m * m];
        let mut dc = vec![Complex64::new(0.0, 0.0); m * m];
        self.base.drift(&alpha, &mut a);
        self.base.drift_derivatives(&alpha, &mut da, &mut dc);
        for i in 0..m {
            for k in 0..m {
                let mut v = alpha[k] / alpha[i] * da[i * m + k];
                if i == k {
                    v -= a[i] / alpha[i];
                }
                d_theta[i * m + k] = v;
                d_conj[i * m + k] = alpha[k].conj() / alpha[i] * dc[i * m + k];
            }
        }
    }

    fn constant_diffusion(&self) -> Result<Vec<Complex64>> {
        let m = self.modes;
        let n = 2 * m;
        let l2 = self.lambda * self.lambda;
        let mut d = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..m {
            for j in 0..m {
                let v = Complex64::new(0.0, l2 * self.g[i * m + j]);
                d[i * n + j] = v;
                d[(m + i) * n + m + j] = v.conj();
            }
        }
        Ok(d)
    }
}

/// Logarithmic transform of the density-density Hamiltonian
/// `H = ħ Σ [ω_{ij} a_i†a_j + ½ g_{ij} n_i n_j]`.
///
/// `g2` must be Hermitian; its antisymmetric imaginary part does not
/// contribute to `n_i n_j` and is dropped from the dynamics.
pub fn log_transform(
    modes: usize,
    omega: &[Complex64],
    g2: &[Complex64],
    lambda: f64,
) -> Result<(LogTransformSpec, RotatedModel<LogDrift>)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "log-transform scale must be positive, got {lambda}"
        )));
    }
    if g2.len() != modes * modes {
        return Err(Error::ShapeMismatch(format!(
            "density coupling matrix for {modes} mode(s) needs {} entries, got {}",
            modes * modes,
            g2.len()
        )));
    }
    let scale = g2.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..modes {
        for j in 0..modes {
            if (g2[i * modes + j] - g2[j * modes + i].conj()).norm() > 1e-12 * scale {
                return Err(Error::Parameter(format!(
                    "density coupling matrix is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    let g: Vec<f64> = g2.iter().map(|z| z.re).collect();
    let base = expand_liouvillian(&CouplingTensor::density_density(modes, omega, &g)?);
    let l2 = lambda * lambda;
    let eta = (0..modes)
        .map(|j| {
            let d = Complex64::new(0.0, l2 * g[j * modes + j]);
            if d.norm() == 0.0 {
                0.0
            } else {
                d.arg() / 2.0
            }
        })
        .collect();
    let spec = LogTransformSpec {
        lambda,
        eta,
        g2: g2.to_vec(),
    };
    let drift = LogDrift {
        modes,
        lambda,
        g,
        base,
    };
    Ok((spec, RotatedModel::new(drift)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_model::quadrature::{finite_difference_jacobian, DiffusionField, QuadratureModel};
    use core::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kerr_mode() {
        let g = 0.8;
        let (spec, model) = log_transform(1, &[c(1.0, 0.0)], &[c(g, 0.0)], 1.0).unwrap();
        assert!((spec.eta[0] - FRAC_PI_4).abs() < 1e-15);
        assert!((model.diffusion() - g / 2.0).abs() < 1e-14);
        let d = model.source().constant_diffusion().unwrap();
        assert_eq!(d[0], c(0.0, g));
        let dq = model.real_diffusion_at(&[0.0, 0.0]);
        assert!((dq[0] + dq[3]).abs() < 1e-15);
    }

    #[test]
    fn lambda_scales_diffusion_quadratically() {
        let (_, one) = log_transform(1, &[c(0.3, 0.0)], &[c(0.5, 0.0)], 1.0).unwrap();
        let (_, two) = log_transform(1, &[c(0.3, 0.0)], &[c(0.5, 0.0)], 2.0).unwrap();
        assert!((two.diffusion() - 4.0 * one.diffusion()).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_is_noiseless() {
        let (_, model) = log_transform(2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)], &[c(0.0, 0.0); 4], 1.0).unwrap();
        assert_eq!(model.diffusion(), 0.0);
        assert!(model.partition().is_deterministic());
    }

    #[test]
    fn rejects_non_positive_lambda() {
        for lambda in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                log_transform(1, &[c(1.0, 0.0)], &[c(1.0, 0.0)], lambda),
                Err(Error::Parameter(_))
            ));
        }
    }

    #[test]
    fn transformed_diffusion_is_constant() {
        // λ² D^α_{lj} / (α_l α_j) should not depend on α.
        let g = [0.4, -0.3, -0.3, 1.2];
        let omega = [c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.5, 0.0)];
        let lambda = 1.5;
        let (_, model) = log_transform(
            2,
            &omega,
            &g.map(|v| c(v, 0.0)),
            lambda,
        )
        .unwrap();
        let base = model.source().amplitude_coefficients();
        for alpha in [[c(0.3, 1.0), c(-0.8, 0.2)], [c(2.0, -0.5), c(0.1, 0.9)]] {
            let d = base.diffusion_at(&alpha);
            for l in 0..2 {
                for j in 0..2 {
                    let dt = d[l * 4 + j] * lambda * lambda / (alpha[l] * alpha[j]);
                    assert!((dt - c(0.0, lambda * lambda * g[l * 2 + j])).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (_, model) = log_transform(
            2,
            &[c(1.0, 0.0), c(0.2, 0.1), c(0.2, -0.1), c(0.5, 0.0)],
            &[c(0.4, 0.0), c(-0.3, 0.0), c(-0.3, 0.0), c(1.2, 0.0)],
            1.0,
        )
        .unwrap();
        let phi = [0.2, -0.1, 0.3, 0.05];
        let mut j = [0.0; 16];
        model.jacobian(&phi, &mut j);
        let fd = finite_difference_jacobian(&model, &phi, 1e-5);
        for k in 0..16 {
            assert!((j[k] - fd[k]).abs() <= 1e-6 * j[k].abs().max(1.0), "{k}: {} vs {}", j[k], fd[k]);
        }
    }
}
