use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::liouvillian::{ComplexCoefficients, ComplexDrift};
use crate::linalg::ordered_symmetric_eigen;
use crate::{Error, Result};

/// Split of the real variables into forward-diffusing `x`, backward-diffusing
/// `y` and noiseless components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub deterministic: Vec<usize>,
    signs: Vec<i8>,
}

impl Partition {
    pub fn new(dim: usize, x: Vec<usize>, y: Vec<usize>, deterministic: Vec<usize>) -> Result<Self> {
        let mut signs = vec![2i8; dim];
        for (set, sign) in [(&x, 1i8), (&y, -1), (&deterministic, 0)] {
            for &i in set {
                if i >= dim || signs[i] != 2 {
                    return Err(Error::Parameter(format!(
                        "partition index {i} is out of range or repeated for dimension {dim}"
                    )));
                }
                signs[i] = sign;
            }
        }
        if signs.contains(&2) {
            return Err(Error::Parameter(format!(
                "partition does not cover all {dim} variables"
            )));
        }
        Ok(Self {
            x,
            y,
            deterministic,
            signs,
        })
    }

    /// `x` indices first, then `y`, then deterministic ones.
    pub fn ordered(n_x: usize, n_y: usize, n_det: usize) -> Self {
        let x: Vec<usize> = (0..n_x).collect();
        let y = (n_x..n_x + n_y).collect();
        let deterministic = (n_x + n_y..n_x + n_y + n_det).collect();
        Self::new(n_x + n_y + n_det, x, y, deterministic).expect("ordered partition is valid")
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    /// +1 for `x`, −1 for `y`, 0 for deterministic variables.
    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }

    pub fn is_deterministic(&self) -> bool {
        self.x.is_empty() && self.y.is_empty()
    }
}

/// Real phase-space model `dφ = A(φ) dt + dw` with diagonal diffusion
/// `+d` on the `x` variables and `−d` on the `y` variables.
///
/// Matrices are row-major; the jacobian is stored as
/// `out[μ * dim + ν] = ∂A^ν/∂φ^μ`.
pub trait QuadratureModel {
    fn dim(&self) -> usize;
    fn partition(&self) -> &Partition;
    fn diffusion(&self) -> f64;
    fn drift(&self, phi: &[f64], out: &mut [f64]);
    fn jacobian(&self, phi: &[f64], out: &mut [f64]);

    /// Jacobian potential `V = −½(Σ_x ∂_x a^x + Σ_y ∂_y a^y)` with
    /// `a^x = A^x` and `a^y = −A^y`.
    fn potential(&self, phi: &[f64]) -> f64 {
        let n = self.dim();
        let mut j = vec![0.0; n * n];
        self.jacobian(phi, &mut j);
        let p = self.partition();
        let div_x: f64 = p.x.iter().map(|&i| j[i * n + i]).sum();
        let div_y: f64 = p.y.iter().map(|&i| -j[i * n + i]).sum();
        -0.5 * (div_x + div_y)
    }

    /// `∇V` by central differences with step `1e-5`.
    fn potential_gradient(&self, phi: &[f64], out: &mut [f64]) {
        let h = 1e-5;
        let mut p = phi.to_vec();
        for (mu, o) in out.iter_mut().enumerate() {
            let x = p[mu];
            p[mu] = x + h;
            let up = self.potential(&p);
            p[mu] = x - h;
            let down = self.potential(&p);
            p[mu] = x;
            *o = (up - down) / (2.0 * h);
        }
    }

    /// `C φ̇ + U` with `C^{μν} = ∂_μA^ν − ∂_νA^μ` and
    /// `U^μ = d ∂_μV − Σ_ν A^ν ∂_μA^ν`.
    fn extra_force(&self, phi: &[f64], phi_dot: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut j = vec![0.0; n * n];
        let mut a = vec![0.0; n];
        self.jacobian(phi, &mut j);
        self.drift(phi, &mut a);
        self.potential_gradient(phi, out);
        let d = self.diffusion();
        for mu in 0..n {
            let mut acc = d * out[mu];
            for nu in 0..n {
                acc += (j[mu * n + nu] - j[nu * n + mu]) * phi_dot[nu];
                acc -= a[nu] * j[mu * n + nu];
            }
            out[mu] = acc;
        }
    }
}

/// Per-direction drifts `(a^x, a^y)` with `a^y = −A^y`.
pub fn direction_drifts<M: QuadratureModel + ?Sized>(model: &M, phi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; model.dim()];
    model.drift(phi, &mut a);
    let p = model.partition();
    (
        p.x.iter().map(|&i| a[i]).collect(),
        p.y.iter().map(|&i| -a[i]).collect(),
    )
}

/// Central finite-difference jacobian in the layout of
/// [`QuadratureModel::jacobian`].
pub fn finite_difference_jacobian<M: QuadratureModel + ?Sized>(
    model: &M,
    phi: &[f64],
    h: f64,
) -> Vec<f64> {
    let n = model.dim();
    let mut out = vec![0.0; n * n];
    let mut p = phi.to_vec();
    let mut up = vec![0.0; n];
    let mut down = vec![0.0; n];
    for mu in 0..n {
        let x = p[mu];
        p[mu] = x + h;
        model.drift(&p, &mut up);
        p[mu] = x - h;
        model.drift(&p, &mut down);
        p[mu] = x;
        for nu in 0..n {
            out[mu * n + nu] = (up[nu] - down[nu]) / (2.0 * h);
        }
    }
    out
}

/// Affine model `A(φ) = M φ + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    dim: usize,
    /// `A^ν = Σ_μ matrix[ν * dim + μ] φ^μ + offset[ν]`
    matrix: Vec<f64>,
    offset: Vec<f64>,
    d: f64,
    partition: Partition,
    circulation: Vec<f64>,
    /// `U = −Mᵀ(Mφ + b)`, stored as `u_matrix φ + u_offset`.
    u_matrix: Vec<f64>,
    u_offset: Vec<f64>,
}

impl LinearModel {
    pub fn new(matrix: Vec<f64>, offset: Vec<f64>, d: f64, partition: Partition) -> Result<Self> {
        let dim = partition.dim();
        if matrix.len() != dim * dim || offset.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "linear drift for {dim} variables needs a {dim}x{dim} matrix and {dim} offsets"
            )));
        }
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::Parameter(format!("diffusion must be non-negative, got {d}")));
        }
        let mut circulation = vec![0.0; dim * dim];
        let mut u_matrix = vec![0.0; dim * dim];
        let mut u_offset = vec![0.0; dim];
        for mu in 0..dim {
            for nu in 0..dim {
                circulation[mu * dim + nu] = matrix[nu * dim + mu] - matrix[mu * dim + nu];
                u_matrix[mu * dim + nu] = -(0..dim)
                    .map(|k| matrix[k * dim + mu] * matrix[k * dim + nu])
                    .sum::<f64>();
            }
            u_offset[mu] = -(0..dim).map(|k| matrix[k * dim + mu] * offset[k]).sum::<f64>();
        }
        Ok(Self {
            dim,
            matrix,
            offset,
            d,
            partition,
            circulation,
            u_matrix,
            u_offset,
        })
    }

    /// Zero drift with unit forward diffusion in one `x` variable.
    pub fn wiener() -> Self {
        Self::new(vec![0.0], vec![0.0], 1.0, Partition::ordered(1, 0, 0)).expect("valid model")
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }
}

impl QuadratureModel for LinearModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn diffusion(&self) -> f64 {
        self.d
    }

    fn drift(&self, phi: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for nu in 0..n {
            let row = &self.matrix[nu * n..(nu + 1) * n];
            out[nu] = self.offset[nu] + row.iter().zip(phi).map(|(m, p)| m * p).sum::<f64>();
        }
    }

    fn jacobian(&self, _phi: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for mu in 0..n {
            for nu in 0..n {
                out[mu * n + nu] = self.matrix[nu * n + mu];
            }
        }
    }

    fn potential_gradient(&self, _phi: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn extra_force(&self, phi: &[f64], phi_dot: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for mu in 0..n {
            let c = &self.circulation[mu * n..(mu + 1) * n];
            let u = &self.u_matrix[mu * n..(mu + 1) * n];
            let mut acc = self.u_offset[mu];
            for nu in 0..n {
                acc += c[nu] * phi_dot[nu] + u[nu] * phi[nu];
            }
            out[mu] = acc;
        }
    }
}

/// Real symmetric diffusion matrix in `q = (Re α, Im α)` from the complex
/// extended diffusion `D^{μν}` (row-major `2M × 2M`), together with the
/// largest imaginary residue.
fn real_diffusion_parts(d: &[Complex64], modes: usize) -> (DMatrix<f64>, f64) {
    let n = 2 * modes;
    // ∂_α = ½(∂_q − i∂_p), ∂_α* = ½(∂_q + i∂_p)
    let w = |mu: usize, a: usize| -> Complex64 {
        let (j, conj) = if mu < modes { (mu, false) } else { (mu - modes, true) };
        if a == j {
            Complex64::new(0.5, 0.0)
        } else if a == j + modes {
            Complex64::new(0.0, if conj { 0.5 } else { -0.5 })
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let mut out = DMatrix::zeros(n, n);
    let mut imag: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for mu in 0..n {
                let wa = w(mu, a);
                if wa.norm_sqr() == 0.0 {
                    continue;
                }
                for nu in 0..n {
                    let wb = w(nu, b);
                    if wb.norm_sqr() != 0.0 {
                        acc += wa * wb * (d[mu * n + nu] + d[nu * n + mu]) * 0.5;
                    }
                }
            }
            out[(a, b)] = acc.re;
            imag = imag.max(acc.im.abs());
        }
    }
    (out, imag)
}

/// Real-variable diffusion `D_q` of a complex extended diffusion matrix.
///
/// Fails if the result is not real, which happens when the conjugate blocks
/// are not conjugates of each other.
pub fn real_diffusion(d: &[Complex64], modes: usize) -> Result<DMatrix<f64>> {
    let n = 2 * modes;
    if d.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "complex diffusion for {modes} mode(s) needs {} entries, got {}",
            n * n,
            d.len()
        )));
    }
    let (m, imag) = real_diffusion_parts(d, modes);
    let scale = d.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if imag > 1e-10 * scale {
        return Err(Error::Rotation(format!(
            "real-variable diffusion has an imaginary part of size {imag}"
        )));
    }
    Ok(m)
}

/// Anything with a real diffusion matrix that can be sampled pointwise.
pub trait DiffusionField {
    fn real_dim(&self) -> usize;
    /// Row-major real diffusion matrix at a real phase-space point.
    fn real_diffusion_at(&self, point: &[f64]) -> Vec<f64>;
}

impl DiffusionField for ComplexCoefficients {
    fn real_dim(&self) -> usize {
        2 * self.modes()
    }

    /// `point` is `(Re α, Im α)`.
    fn real_diffusion_at(&self, point: &[f64]) -> Vec<f64> {
        let m = self.modes();
        let alpha: Vec<Complex64> = (0..m).map(|j| Complex64::new(point[j], point[m + j])).collect();
        let (dq, _) = real_diffusion_parts(&self.diffusion_at(&alpha), m);
        dq.transpose().as_slice().to_vec()
    }
}

fn signed_diagonal(p: &Partition, d: f64) -> Vec<f64> {
    let n = p.dim();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = p.sign(i) * d;
    }
    out
}

impl DiffusionField for LinearModel {
    fn real_dim(&self) -> usize {
        self.dim
    }

    fn real_diffusion_at(&self, _point: &[f64]) -> Vec<f64> {
        signed_diagonal(&self.partition, self.d)
    }
}

/// Largest absolute trace of the real diffusion over the sample points.
pub fn trace_check<F, P>(field: &F, points: P) -> f64
where
    F: DiffusionField + ?Sized,
    P: IntoIterator,
    P::Item: AsRef<[f64]>,
{
    let n = field.real_dim();
    points
        .into_iter()
        .map(|p| {
            let m = field.real_diffusion_at(p.as_ref());
            (0..n).map(|i| m[i * n + i]).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}

/// Real quadrature model obtained by rotating and rescaling
/// `q = (Re α, Im α)` so the constant diffusion becomes `diag(+d.., −d.., 0..)`.
///
/// `φ_i = s_i (Rᵀ q)_i`, where the columns of `R` are the ordered
/// eigenvectors of the real diffusion and `s_i = sqrt(d / |λ_i|)`.
#[derive(Debug, Clone)]
pub struct RotatedModel<S> {
    source: S,
    modes: usize,
    rotation: DMatrix<f64>,
    scales: Vec<f64>,
    eigenvalues: Vec<f64>,
    d: f64,
    partition: Partition,
}

impl<S: ComplexDrift> RotatedModel<S> {
    pub fn new(source: S) -> Result<Self> {
        let modes = source.modes();
        let dq = real_diffusion(&source.constant_diffusion()?, modes)?;
        let eig = ordered_symmetric_eigen(&dq, 1e-12);
        let n_pos = eig.values.iter().filter(|&&v| v > 0.0).count();
        let n_neg = eig.values.iter().filter(|&&v| v < 0.0).count();
        if n_pos != n_neg {
            return Err(Error::Rotation(format!(
                "{n_pos} positive and {n_neg} negative diffusion eigenvalues"
            )));
        }
        let d = eig.values.first().copied().filter(|&v| v > 0.0).unwrap_or(0.0);
        let scales = eig
            .values
            .iter()
            .map(|&v| if v == 0.0 { 1.0 } else { (d / v.abs()).sqrt() })
            .collect();
        let partition = Partition::ordered(n_pos, n_neg, 2 * modes - n_pos - n_neg);
        Ok(Self {
            source,
            modes,
            rotation: eig.vectors,
            scales,
            eigenvalues: eig.values,
            d,
            partition,
        })
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Eigenvalues of the real diffusion before rescaling, in variable order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the direction in `(Re α, Im α)` of variable `φ_i`.
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn to_phase(&self, alpha: &[Complex64]) -> Vec<f64> {
        let m = self.modes;
        let q: Vec<f64> = alpha.iter().map(|a| a.re).chain(alpha.iter().map(|a| a.im)).collect();
        (0..2 * m)
            .map(|i| self.scales[i] * (0..2 * m).map(|a| self.rotation[(a, i)] * q[a]).sum::<f64>())
            .collect()
    }

    pub fn to_complex(&self, phi: &[f64]) -> Vec<Complex64> {
        let q = self.to_real(phi);
        let m = self.modes;
        (0..m).map(|j| Complex64::new(q[j], q[m + j])).collect()
    }

    fn to_real(&self, phi: &[f64]) -> Vec<f64> {
        let n = 2 * self.modes;
        (0..n)
            .map(|a| (0..n).map(|i| self.rotation[(a, i)] * phi[i] / self.scales[i]).sum())
            .collect()
    }

    /// Exact affine form of the model; fails unless the complex drift is affine.
    pub fn linearize(&self) -> Result<LinearModel> {
        if !self.source.is_affine() {
            return Err(Error::Unsupported(
                "drift is not affine in the phase-space variables".into(),
            ));
        }
        let n = self.dim();
        let zero = vec![0.0; n];
        let mut j = vec![0.0; n * n];
        let mut offset = vec![0.0; n];
        self.jacobian(&zero, &mut j);
        self.drift(&zero, &mut offset);
        let mut matrix = vec![0.0; n * n];
        for mu in 0..n {
            for nu in 0..n {
                matrix[nu * n + mu] = j[mu * n + nu];
            }
        }
        LinearModel::new(matrix, offset, self.d, self.partition.clone())
    }
}

impl<S: ComplexDrift> QuadratureModel for RotatedModel<S> {
    fn dim(&self) -> usize {
        2 * self.modes
    }

    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn diffusion(&self) -> f64 {
        self.d
    }

    fn drift(&self, phi: &[f64], out: &mut [f64]) {
        let m = self.modes;
        let alpha = self.to_complex(phi);
        let mut a = vec![Complex64::new(0.0, 0.0); m];
        self.source.drift(&alpha, &mut a);
        let aq: Vec<f64> = a.iter().map(|z| z.re).chain(a.iter().map(|z| z.im)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.scales[i] * (0..2 * m).map(|b| self.rotation[(b, i)] * aq[b]).sum::<f64>();
        }
    }

    fn jacobian(&self, phi: &[f64], out: &mut [f64]) {
        let m = self.modes;
        let n = 2 * m;
        let alpha = self.to_complex(phi);
        let mut da = vec![Complex64::new(0.0, 0.0); m * m];
        let mut dc = vec![Complex64::new(0.0, 0.0); m * m];
        self.source.drift_derivatives(&alpha, &mut da, &mut dc);
        // jq[a][b] = ∂A_q^b / ∂q_a
        let mut jq = DMatrix::<f64>::zeros(n, n);
        for j in 0..m {
            for k in 0..m {
                let d_re = da[j * m + k] + dc[j * m + k];
                let d_im = Complex64::new(0.0, 1.0) * (da[j * m + k] - dc[j * m + k]);
                jq[(k, j)] = d_re.re;
                jq[(k, m + j)] = d_re.im;
                jq[(m + k, j)] = d_im.re;
                jq[(m + k, m + j)] = d_im.im;
            }
        }
        let jphi = self.rotation.transpose() * jq * &self.rotation;
        for mu in 0..n {
            for nu in 0..n {
                out[mu * n + nu] = jphi[(mu, nu)] * self.scales[nu] / self.scales[mu];
            }
        }
    }
}

impl<S: ComplexDrift> DiffusionField for RotatedModel<S> {
    fn real_dim(&self) -> usize {
        2 * self.modes
    }

    fn real_diffusion_at(&self, _point: &[f64]) -> Vec<f64> {
        signed_diagonal(&self.partition, self.d)
    }
}

/// Rotates the complex coefficients into a real quadrature model.
///
/// Fails with [`Error::NonConstantDiffusion`] when the diffusion depends on
/// the phase-space point; such models need the logarithmic transform first.
pub fn to_quadrature_model(coeffs: ComplexCoefficients) -> Result<RotatedModel<ComplexCoefficients>> {
    RotatedModel::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_model::{expand_liouvillian, CouplingTensor};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn squeezing_quadratures() {
        let model = to_quadrature_model(expand_liouvillian(&CouplingTensor::squeezing(1.0))).unwrap();
        assert_eq!(model.diffusion(), 0.5);
        assert_eq!(model.partition().x, [0]);
        assert_eq!(model.partition().y, [1]);
        let phi = [0.7, -1.3];
        let (ax, ay) = direction_drifts(&model, &phi);
        assert!((ax[0] + 0.7).abs() < 1e-15);
        assert!((ay[0] - 1.3).abs() < 1e-15);
        assert!((model.potential(&phi) - 1.0).abs() < 1e-15);
        assert_eq!(trace_check(&model, [phi]), 0.0);
    }

    #[test]
    fn squeezing_x_is_the_imaginary_quadrature() {
        let model = to_quadrature_model(expand_liouvillian(&CouplingTensor::squeezing(1.0))).unwrap();
        let phi = model.to_phase(&[c(0.25, -0.5)]);
        assert!((phi[0] + 0.5).abs() < 1e-15 && (phi[1] - 0.25).abs() < 1e-15);
        let back = model.to_complex(&phi);
        assert!((back[0] - c(0.25, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn free_field_is_deterministic_rotation() {
        let w = 1.7;
        let model =
            to_quadrature_model(expand_liouvillian(&CouplingTensor::free_field(1, &[c(w, 0.0)]).unwrap()))
                .unwrap();
        assert!(model.partition().is_deterministic());
        assert_eq!(model.diffusion(), 0.0);
        let mut a = [0.0; 2];
        model.drift(&[0.3, 0.8], &mut a);
        // dα/dt = −iωα: q̇ = ωp, ṗ = −ωq
        assert!((a[0] - w * 0.8).abs() < 1e-14 && (a[1] + w * 0.3).abs() < 1e-14);
    }

    #[test]
    fn quarter_turn_diffusion() {
        // D^{11} = i, conjugate block −i
        let d = [c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)];
        let dq = real_diffusion(&d, 1).unwrap();
        assert!((dq[(0, 0)]).abs() < 1e-15 && (dq[(1, 1)]).abs() < 1e-15);
        assert!((dq[(0, 1)] - 0.5).abs() < 1e-15 && (dq[(1, 0)] - 0.5).abs() < 1e-15);
        let e = dq.symmetric_eigen();
        let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        assert!((v[0] + 0.5).abs() < 1e-15 && (v[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_density_requires_log_transform() {
        let t = CouplingTensor::density_density(1, &[c(1.0, 0.0)], &[1.0]).unwrap();
        assert_eq!(
            to_quadrature_model(expand_liouvillian(&t)).unwrap_err(),
            Error::NonConstantDiffusion
        );
    }

    #[test]
    fn linearized_matches_rotated() {
        let t = CouplingTensor::from_terms(
            2,
            [
                ([0, 1, 0, 1], c(0.0, 0.7)),
                ([1, 0, 1, 0], c(0.0, -0.7)),
                ([2, 1, 0, 0], c(0.3, 0.1)),
                ([0, 0, 2, 1], c(0.3, 0.1)),
                ([1, 2, 0, 0], c(0.3, -0.1)),
                ([0, 0, 1, 2], c(0.3, -0.1)),
                ([2, 0, 0, 0], c(0.2, 0.4)),
                ([0, 0, 2, 0], c(0.2, 0.4)),
                ([0, 2, 0, 0], c(0.2, -0.4)),
                ([0, 0, 0, 2], c(0.2, -0.4)),
            ],
        )
        .unwrap();
        assert!(crate::phase_model::validate_couplings(&t).is_valid());
        let rotated = to_quadrature_model(expand_liouvillian(&t)).unwrap();
        let linear = rotated.linearize().unwrap();
        let phi = [0.1, -0.4, 0.9, 0.3];
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        rotated.drift(&phi, &mut a);
        linear.drift(&phi, &mut b);
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() < 1e-13);
        }
        let mut fa = [0.0; 4];
        let mut fb = [0.0; 4];
        let dot = [0.2, 0.5, -0.3, 1.1];
        rotated.extra_force(&phi, &dot, &mut fa);
        linear.extra_force(&phi, &dot, &mut fb);
        for k in 0..4 {
            assert!((fa[k] - fb[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn partition_rejects_overlap() {
        assert!(Partition::new(2, vec![0], vec![0], vec![]).is_err());
        assert!(Partition::new(2, vec![0], vec![], vec![]).is_err());
    }
}
