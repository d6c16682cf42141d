//! Sparse real polynomials in three variables and polynomial vector fields.

use crate::{Matrix3, Vec3};

/// Sum of terms `c * x^a * y^b * z^c`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly3 {
    terms: Vec<(f64, [u32; 3])>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a polynomial, merging repeated exponents and dropping zeros.
    pub fn from_terms(terms: &[(f64, [u32; 3])]) -> Self {
        let mut p = Self::zero();
        for &(c, e) in terms {
            p.add_term(c, e);
        }
        p
    }

    pub fn terms(&self) -> &[(f64, [u32; 3])] {
        &self.terms
    }

    pub fn add_term(&mut self, c: f64, e: [u32; 3]) {
        if c == 0.0 {
            return;
        }
        match self.terms.iter().position(|t| t.1 == e) {
            Some(i) => {
                self.terms[i].0 += c;
                if self.terms[i].0 == 0.0 {
                    self.terms.remove(i);
                }
            }
            None => self.terms.push((c, e)),
        }
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut p = self.clone();
        for &(c, e) in &other.terms {
            p.add_term(c, e);
        }
        p
    }

    pub fn scaled(&self, k: f64) -> Poly3 {
        Poly3::from_terms(&self.terms.iter().map(|&(c, e)| (k * c, e)).collect::<Vec<_>>())
    }

    /// Product with the monomial `x_var`.
    pub fn times_var(&self, var: usize) -> Poly3 {
        let mut p = self.clone();
        for t in &mut p.terms {
            t.1[var] += 1;
        }
        p
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.1.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|&(c, e)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }

    pub fn derivative(&self, var: usize) -> Poly3 {
        let mut p = Poly3::zero();
        for &(c, e) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e;
                e2[var] -= 1;
                p.add_term(c * e[var] as f64, e2);
            }
        }
        p
    }
}

/// A polynomial vector field `(P1, P2, P3)` on R^3 with its exact Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyField3 {
    components: [Poly3; 3],
    partials: [[Poly3; 3]; 3],
    degree: u32,
}

impl PolyField3 {
    pub fn new(components: [Poly3; 3]) -> Self {
        let partials = std::array::from_fn(|i| std::array::from_fn(|j| components[i].derivative(j)));
        let degree = components.iter().map(Poly3::degree).max().unwrap_or(0);
        Self {
            components,
            partials,
            degree,
        }
    }

    /// Maximum total degree over the three components.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn components(&self) -> &[Poly3; 3] {
        &self.components
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        std::array::from_fn(|i| self.components[i].eval(x))
    }

    pub fn jacobian(&self, x: &Vec3) -> Matrix3 {
        std::array::from_fn(|i| std::array::from_fn(|j| self.partials[i][j].eval(x)))
    }
}
