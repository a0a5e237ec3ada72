use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Sparse complex polynomial in a fixed number of variables.
///
/// Keys are exponent vectors; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    vars: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl Poly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    /// `coef · Π factors`, where each factor is a variable index.
    pub fn monomial(vars: usize, factors: &[usize], coef: Complex64) -> Self {
        let mut p = Self::zero(vars);
        p.add_monomial(factors, coef);
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn add_term(&mut self, exps: Vec<u8>, coef: Complex64) {
        assert_eq!(exps.len(), self.vars, "exponent vector length");
        if coef == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(Complex64::new(0.0, 0.0));
        *entry += coef;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        }
    }

    pub fn add_monomial(&mut self, factors: &[usize], coef: Complex64) {
        let mut exps = vec![0u8; self.vars];
        for &f in factors {
            exps[f] += 1;
        }
        self.add_term(exps, coef);
    }

    pub fn coefficient(&self, exps: &[u8]) -> Complex64 {
        self.terms
            .get(exps)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        debug_assert_eq!(z.len(), self.vars);
        let mut acc = Complex64::new(0.0, 0.0);
        for (exps, &c) in &self.terms {
            let mut m = c;
            for (v, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    m *= z[v];
                }
            }
            acc += m;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.vars);
        for (exps, &c) in &self.terms {
            let e = exps[var];
            if e == 0 {
                continue;
            }
            let mut lowered = exps.clone();
            lowered[var] = e - 1;
            out.add_term(lowered, c * f64::from(e));
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.vars);
        for (exps, &c) in &self.terms {
            out.add_term(exps.clone(), c * s);
        }
        out
    }

    pub fn add(&mut self, other: &Poly) {
        for (exps, &c) in &other.terms {
            self.add_term(exps.clone(), c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_and_derivative() {
        // p = 2 z0^2 z1 + i z1 - 3
        let mut p = Poly::monomial(2, &[0, 0, 1], c(2.0, 0.0));
        p.add_monomial(&[1], c(0.0, 1.0));
        p.add_monomial(&[], c(-3.0, 0.0));
        let z = [c(1.0, 2.0), c(-0.5, 0.25)];
        let expect = c(2.0, 0.0) * z[0] * z[0] * z[1] + c(0.0, 1.0) * z[1] - 3.0;
        assert!((p.eval(&z) - expect).norm() < 1e-14);
        assert_eq!(p.degree(), 3);

        let d0 = p.derivative(0);
        assert!((d0.eval(&z) - c(4.0, 0.0) * z[0] * z[1]).norm() < 1e-14);
        let d1 = p.derivative(1);
        assert!((d1.eval(&z) - (c(2.0, 0.0) * z[0] * z[0] + c(0.0, 1.0))).norm() < 1e-14);
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = Poly::monomial(1, &[0], c(1.5, 0.0));
        p.add_monomial(&[0], c(-1.5, 0.0));
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
    }
}
