use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::poly::Poly;
use super::tensor::CouplingTensor;
use crate::{Error, Result};

/// Drift and diffusion of the complex time-symmetric Fokker-Planck equation
/// `dQ/dt = [-∂_μ A^μ + ½ ∂_μ ∂_ν D^{μν}] Q`.
///
/// The extended variables are `α^μ` with `α^j = α_j` for `j < M` and
/// `α^{j+M} = α_j*`. Every coefficient is a polynomial in these `2M`
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCoefficients {
    modes: usize,
    drift: Vec<Poly>,
    diffusion: Vec<Poly>,
    /// `∂A^j/∂α^v` for the amplitude block, row-major `M × 2M`.
    drift_derivatives: Vec<Poly>,
}

/// Expands the bosonic Liouvillian
/// `(i/2) g_{ijkl} [(∂_l + α_l*) α_k (∂_j + α_j*) α_i − (∂_i* + α_i) α_j* (∂_k* + α_k) α_l*]`
/// into first- and second-order derivative coefficients.
///
/// Index 0 is the unit mode: `α_0 = 1` and `∂_0 = 0`, so no derivative
/// coefficient is ever emitted for it. Terms without derivatives cancel
/// for a valid tensor and are dropped.
pub fn expand_liouvillian(tensor: &CouplingTensor) -> ComplexCoefficients {
    let m = tensor.modes();
    let vars = 2 * m;
    let n = 2 * m;
    let mut drift = vec![Poly::zero(vars); n];
    let mut diffusion = vec![Poly::zero(vars); n * n];

    // Variable index of α_p (p ≥ 1) and α_p*; None for the unit mode.
    let amp = |p: usize| (p > 0).then(|| p - 1);
    let con = |p: usize| (p > 0).then(|| m + p - 1);
    let factors = |list: &[Option<usize>]| list.iter().flatten().copied().collect::<Vec<_>>();

    for ([i, j, k, l], g) in tensor.nonzero() {
        let c = Complex64::new(0.0, 0.5) * g;
        let djk = j > 0 && j == k;

        // (∂_l + α_l*) α_k (∂_j + α_j*) α_i
        if let (Some(lv), Some(jv)) = (amp(l), amp(j)) {
            diffusion[lv * n + jv].add_monomial(&factors(&[amp(k), amp(i)]), c * 2.0);
        }
        if let Some(lv) = amp(l) {
            drift[lv].add_monomial(&factors(&[amp(k), con(j), amp(i)]), -c);
            if djk {
                drift[lv].add_monomial(&factors(&[amp(i)]), c);
            }
        }
        if let Some(jv) = amp(j) {
            drift[jv].add_monomial(&factors(&[con(l), amp(k), amp(i)]), -c);
        }

        // −(∂_i* + α_i) α_j* (∂_k* + α_k) α_l*
        if let (Some(iv), Some(kv)) = (con(i), con(k)) {
            diffusion[iv * n + kv].add_monomial(&factors(&[con(j), con(l)]), -c * 2.0);
        }
        if let Some(iv) = con(i) {
            drift[iv].add_monomial(&factors(&[con(j), amp(k), con(l)]), c);
            if djk {
                drift[iv].add_monomial(&factors(&[con(l)]), -c);
            }
        }
        if let Some(kv) = con(k) {
            drift[kv].add_monomial(&factors(&[amp(i), con(j), con(l)]), c);
        }
    }

    let drift_derivatives = (0..m)
        .flat_map(|row| {
            let p = &drift[row];
            (0..vars).map(move |v| p.derivative(v))
        })
        .collect();
    ComplexCoefficients {
        modes: m,
        drift,
        diffusion,
        drift_derivatives,
    }
}

impl ComplexCoefficients {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Drift polynomial for extended index `mu` (`0..2M`).
    pub fn drift_poly(&self, mu: usize) -> &Poly {
        &self.drift[mu]
    }

    pub fn diffusion_poly(&self, mu: usize, nu: usize) -> &Poly {
        &self.diffusion[mu * 2 * self.modes + nu]
    }

    /// Extended vector `(α, α*)`.
    pub fn extend(alpha: &[Complex64]) -> Vec<Complex64> {
        alpha.iter().copied().chain(alpha.iter().map(|a| a.conj())).collect()
    }

    /// Full extended drift `A^μ(α)`, length `2M`.
    pub fn drift_at(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        let z = Self::extend(alpha);
        self.drift.iter().map(|p| p.eval(&z)).collect()
    }

    /// Diffusion `D^{μν}(α)`, row-major `2M × 2M`.
    pub fn diffusion_at(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        let z = Self::extend(alpha);
        self.diffusion.iter().map(|p| p.eval(&z)).collect()
    }

    pub fn drift_degree(&self) -> usize {
        self.drift.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn diffusion_degree(&self) -> usize {
        self.diffusion.iter().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.drift.iter().chain(&self.diffusion).all(Poly::is_zero)
    }
}

/// Complex drift with constant diffusion, the input of the real-quadrature
/// rotation.
pub trait ComplexDrift {
    fn modes(&self) -> usize;

    /// Amplitude drifts `A^j`, `j < M`. The conjugate block is their conjugate.
    fn drift(&self, alpha: &[Complex64], out: &mut [Complex64]);

    /// Wirtinger derivatives `∂A^j/∂α_k` and `∂A^j/∂α_k*`, both row-major `M × M`.
    fn drift_derivatives(
        &self,
        alpha: &[Complex64],
        d_alpha: &mut [Complex64],
        d_conj: &mut [Complex64],
    );

    /// Diffusion `D^{μν}`, row-major `2M × 2M`, required to be constant.
    fn constant_diffusion(&self) -> Result<Vec<Complex64>>;

    /// Whether the drift is affine in `(α, α*)`.
    fn is_affine(&self) -> bool {
        false
    }
}

impl ComplexDrift for ComplexCoefficients {
    fn modes(&self) -> usize {
        self.modes
    }

    fn drift(&self, alpha: &[Complex64], out: &mut [Complex64]) {
        let z = Self::extend(alpha);
        for (o, p) in out.iter_mut().zip(&self.drift[..self.modes]) {
            *o = p.eval(&z);
        }
    }

    fn drift_derivatives(
        &self,
        alpha: &[Complex64],
        d_alpha: &mut [Complex64],
        d_conj: &mut [Complex64],
    ) {
        let m = self.modes;
        let z = Self::extend(alpha);
        for j in 0..m {
            for k in 0..m {
                d_alpha[j * m + k] = self.drift_derivatives[j * 2 * m + k].eval(&z);
                d_conj[j * m + k] = self.drift_derivatives[j * 2 * m + m + k].eval(&z);
            }
        }
    }

    fn constant_diffusion(&self) -> Result<Vec<Complex64>> {
        if self.diffusion_degree() > 0 {
            return Err(Error::NonConstantDiffusion);
        }
        Ok(self.diffusion_at(&vec![Complex64::new(0.0, 0.0); self.modes]))
    }

    fn is_affine(&self) -> bool {
        self.drift_degree() <= 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn squeezing_coefficients() {
        let coeffs = expand_liouvillian(&CouplingTensor::squeezing(1.0));
        // A_α = α*, A_α* = α
        assert_eq!(coeffs.drift_poly(0), &Poly::monomial(2, &[1], c(1.0, 0.0)));
        assert_eq!(coeffs.drift_poly(1), &Poly::monomial(2, &[0], c(1.0, 0.0)));
        assert_eq!(coeffs.diffusion_poly(0, 0), &Poly::constant(2, c(-1.0, 0.0)));
        assert_eq!(coeffs.diffusion_poly(1, 1), &Poly::constant(2, c(-1.0, 0.0)));
        assert!(coeffs.diffusion_poly(0, 1).is_zero());
        assert!(coeffs.diffusion_poly(1, 0).is_zero());
    }

    #[test]
    fn free_field_coefficients() {
        let omega = [c(1.3, 0.0), c(0.4, -0.2), c(0.4, 0.2), c(-0.7, 0.0)];
        let coeffs = expand_liouvillian(&CouplingTensor::free_field(2, &omega).unwrap());
        for b in 0..2 {
            let mut expect = Poly::zero(4);
            for a in 0..2 {
                expect.add_monomial(&[a], c(0.0, -1.0) * omega[b * 2 + a]);
            }
            assert_eq!(coeffs.drift_poly(b), &expect);
        }
        assert_eq!(coeffs.diffusion_degree(), 0);
        assert!((0..4).all(|mu| (0..4).all(|nu| coeffs.diffusion_poly(mu, nu).is_zero())));
    }

    #[test]
    fn zero_tensor_gives_zero_coefficients() {
        assert!(expand_liouvillian(&CouplingTensor::zeros(2)).is_zero());
    }

    #[test]
    fn diffusion_matches_closed_form() {
        let omega = [c(0.5, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(1.0, 0.0)];
        let g = [0.3, -0.2, -0.2, 0.8];
        let t = CouplingTensor::density_density(2, &omega, &g).unwrap();
        let coeffs = expand_liouvillian(&t);
        let alpha = [c(0.3, -1.1), c(0.7, 0.4)];
        let d = coeffs.diffusion_at(&alpha);
        let ext = |p: usize| if p == 0 { c(1.0, 0.0) } else { alpha[p - 1] };
        for l in 1..=2 {
            for j in 1..=2 {
                let mut expect = c(0.0, 0.0);
                for i in 0..=2 {
                    for k in 0..=2 {
                        expect += c(0.0, 1.0) * t.get([i, j, k, l]) * ext(i) * ext(k);
                    }
                }
                assert!((d[(l - 1) * 4 + (j - 1)] - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn density_density_is_not_constant() {
        let t = CouplingTensor::density_density(1, &[c(1.0, 0.0)], &[0.5]).unwrap();
        assert_eq!(
            expand_liouvillian(&t).constant_diffusion(),
            Err(Error::NonConstantDiffusion)
        );
    }
}
