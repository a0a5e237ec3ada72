use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

/// Quartic bosonic coupling coefficients `g_{ijkl}` of
/// `H = (ħ/2) Σ g_{ijkl} (a_i a_j†)(a_k a_l†)`.
///
/// Indices run over `0..=modes`; index 0 is the unit mode `a_0 = 1`, which
/// carries the linear, quadratic and cubic parts of the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    modes: usize,
    g: Vec<Complex64>,
}

impl CouplingTensor {
    pub fn zeros(modes: usize) -> Self {
        let side = modes + 1;
        Self {
            modes,
            g: vec![Complex64::new(0.0, 0.0); side * side * side * side],
        }
    }

    /// Wraps a dense row-major `(modes+1)^4` array.
    pub fn from_dense(modes: usize, g: Vec<Complex64>) -> Result<Self> {
        let side = modes + 1;
        let expected = side * side * side * side;
        if g.len() != expected {
            return Err(Error::Dimension {
                modes,
                expected,
                got: g.len(),
            });
        }
        Ok(Self { modes, g })
    }

    /// Builds a tensor from sparse entries. Repeated indices accumulate.
    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = ([usize; 4], Complex64)>,
    {
        let mut tensor = Self::zeros(modes);
        for (idx, value) in terms {
            tensor.add(idx, value)?;
        }
        Ok(tensor)
    }

    /// Single-mode squeezing `H = iħr(a†² − a²)/2`.
    ///
    /// `a†a† = B_{01}B_{01}` and `aa = B_{10}B_{10}`, so the only entries
    /// are `g_{0101} = ir` and `g_{1010} = −ir`.
    pub fn squeezing(rate: f64) -> Self {
        let mut t = Self::zeros(1);
        let (a, b) = (t.offset([0, 1, 0, 1]), t.offset([1, 0, 1, 0]));
        t.g[a] = Complex64::new(0.0, rate);
        t.g[b] = Complex64::new(0.0, -rate);
        t
    }

    /// Free field `H = ħ Σ ω_{ij} a_i† a_j` for a Hermitian `ω` given row-major.
    ///
    /// `a_i† a_j = B_{ji} − δ_{ij}`, hence `g_{ji00} = g_{00ji} = ω_{ij}`; the
    /// constant is dropped.
    pub fn free_field(modes: usize, omega: &[Complex64]) -> Result<Self> {
        check_square(modes, omega.len(), "frequency matrix")?;
        let mut t = Self::zeros(modes);
        for i in 0..modes {
            for j in 0..modes {
                let w = omega[i * modes + j];
                t.add([j + 1, i + 1, 0, 0], w)?;
                t.add([0, 0, j + 1, i + 1], w)?;
            }
        }
        Ok(t)
    }

    /// Density-density lattice Hamiltonian
    /// `H = ħ Σ [ω_{ij} a_i†a_j + ½ g_{ij} a_i†a_i a_j†a_j]` with real
    /// symmetric `g`.
    pub fn density_density(modes: usize, omega: &[Complex64], g: &[f64]) -> Result<Self> {
        check_square(modes, g.len(), "density coupling matrix")?;
        let mut shifted: Vec<Complex64> = omega.to_vec();
        check_square(modes, shifted.len(), "frequency matrix")?;
        // n_i n_j = B_ii B_jj − B_ii − B_jj + 1
        for i in 0..modes {
            let row: f64 = (0..modes).map(|j| g[i * modes + j]).sum();
            shifted[i * modes + i] -= Complex64::new(row, 0.0);
        }
        let mut t = Self::free_field(modes, &shifted)?;
        for i in 0..modes {
            for j in 0..modes {
                t.add([i + 1, i + 1, j + 1, j + 1], Complex64::new(g[i * modes + j], 0.0))?;
            }
        }
        Ok(t)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    fn offset(&self, [i, j, k, l]: [usize; 4]) -> usize {
        let s = self.modes + 1;
        ((i * s + j) * s + k) * s + l
    }

    fn check(&self, idx: [usize; 4]) -> Result<()> {
        if idx.iter().any(|&v| v > self.modes) {
            let [i, j, k, l] = idx;
            return Err(Error::IndexOutOfRange(i, j, k, l, self.modes));
        }
        Ok(())
    }

    pub fn get(&self, idx: [usize; 4]) -> Complex64 {
        self.g[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 4], value: Complex64) -> Result<()> {
        self.check(idx)?;
        let o = self.offset(idx);
        self.g[o] = value;
        Ok(())
    }

    pub fn add(&mut self, idx: [usize; 4], value: Complex64) -> Result<()> {
        self.check(idx)?;
        let o = self.offset(idx);
        self.g[o] += value;
        Ok(())
    }

    /// All indices, in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        let s = self.modes + 1;
        (0..s * s * s * s).map(move |mut o| {
            let l = o % s;
            o /= s;
            let k = o % s;
            o /= s;
            let j = o % s;
            [o / s, j, k, l]
        })
    }

    /// Nonzero entries. The all-zero index only shifts the energy and is skipped.
    pub fn nonzero(&self) -> impl Iterator<Item = ([usize; 4], Complex64)> + '_ {
        self.indices()
            .map(|idx| (idx, self.get(idx)))
            .filter(|(idx, g)| *idx != [0, 0, 0, 0] && (g.re != 0.0 || g.im != 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Projects onto the tensors that satisfy both constraints by averaging
    /// over the group generated by `ijkl → (lkji)*` and `ijkl → klij`.
    pub fn symmetrized(&self) -> Self {
        let mut out = Self::zeros(self.modes);
        for idx in self.indices() {
            let [i, j, k, l] = idx;
            let sum = self.get(idx)
                + self.get([k, l, i, j])
                + self.get([l, k, j, i]).conj()
                + self.get([j, i, l, k]).conj();
            let o = out.offset(idx);
            out.g[o] = sum * 0.25;
        }
        out
    }
}

fn check_square(modes: usize, len: usize, what: &str) -> Result<()> {
    if len != modes * modes {
        return Err(Error::Parameter(alloc::format!(
            "{what} has {len} entries, expected {}",
            modes * modes
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `g_{ijkl} = conj(g_{lkji})`
    Hermiticity,
    /// `g_{ijkl} = g_{klij}`
    Permutation,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintKind::Hermiticity => f.write_str("hermiticity"),
            ConstraintKind::Permutation => f.write_str("permutation"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub index: [usize; 4],
    pub partner: [usize; 4],
    pub value: Complex64,
    /// What the entry should equal given its partner.
    pub expected: Complex64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, j, k, l] = self.index;
        let [pi, pj, pk, pl] = self.partner;
        write!(
            f,
            "{} violation at ({i},{j},{k},{l}): g = {}{:+}i, expected {}{:+}i from ({pi},{pj},{pk},{pl})",
            self.kind, self.value.re, self.value.im, self.expected.re, self.expected.im
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks hermiticity and permutation symmetry entry by entry.
///
/// Every entry whose constraint fails is reported, so a broken pair shows
/// up at both of its indices.
pub fn validate_couplings(tensor: &CouplingTensor) -> ValidationReport {
    let tol = 1e-12 * tensor.max_abs().max(1.0);
    let mut violations = Vec::new();
    for idx in tensor.indices() {
        let [i, j, k, l] = idx;
        let value = tensor.get(idx);
        let herm = [l, k, j, i];
        let expected = tensor.get(herm).conj();
        if (value - expected).norm() > tol {
            violations.push(Violation {
                kind: ConstraintKind::Hermiticity,
                index: idx,
                partner: herm,
                value,
                expected,
            });
        }
        let perm = [k, l, i, j];
        let expected = tensor.get(perm);
        if (value - expected).norm() > tol {
            violations.push(Violation {
                kind: ConstraintKind::Permutation,
                index: idx,
                partner: perm,
                value,
                expected,
            });
        }
    }
    ValidationReport { violations }
}
