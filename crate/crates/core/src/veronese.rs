//! Full and harmonic Veronese maps.
//!
//! A Veronese map sends a point of the unit sphere `S^n ⊂ R^{n+1}` to the
//! values of a basis of homogeneous polynomials of degree `k`. Linear
//! conditions on the image points then become mean-value conditions on the
//! original points.
//!
//! Polynomial coefficients are exact integers. The harmonic basis is the null
//! space of the coefficient-level Laplacian, computed over the rationals and
//! scaled back to primitive integer vectors.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VeroneseError {
    #[error("point {index} has dimension {got}, basis expects {expected}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("point {index} is not a unit vector (norm {norm})")]
    NotUnit { index: usize, norm: f64 },
    #[error("basis element {index} is not homogeneous of degree {degree} in {ambient_dim} variables")]
    InvalidElement {
        index: usize,
        degree: u32,
        ambient_dim: usize,
    },
}

/// `x_1^{a_1} ··· x_{n+1}^{a_{n+1}}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Number of variables that actually occur.
    pub fn support(&self) -> usize {
        self.exponents.iter().filter(|&&a| a > 0).count()
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(point)
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }

    /// Mean of the monomial over the unit sphere in `R^{dim}`.
    ///
    /// Zero if any exponent is odd, otherwise
    /// `Π (a_i − 1)!! / Π_{j<k/2} (dim + 2j)`.
    pub fn sphere_mean(&self) -> f64 {
        if self.exponents.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let d = self.dim() as f64;
        let num: f64 = self
            .exponents
            .iter()
            .map(|&a| double_factorial_odd(a))
            .product();
        let half = self.degree() / 2;
        let den: f64 = (0..half).map(|j| d + 2.0 * j as f64).product();
        num / den
    }
}

/// `(a − 1)!!` for even `a` (1 for `a = 0`).
fn double_factorial_odd(a: u32) -> f64 {
    let mut acc = 1.0;
    let mut m = a as i64 - 1;
    while m > 1 {
        acc *= m as f64;
        m -= 2;
    }
    acc
}

/// Homogeneous polynomial with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    pub terms: Vec<(Monomial, i64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(Monomial, i64)>) -> Self {
        let mut p = Self { terms };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges equal monomials and drops zero coefficients.
    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Monomial, i64)> = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((last, acc)) if *last == m => *acc += c,
                _ => merged.push((m, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0);
        self.terms = merged;
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| *c as f64 * m.eval(point))
            .sum()
    }

    /// Exact Laplacian `Σ_i ∂²/∂x_i²`.
    pub fn laplacian(&self) -> Polynomial {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            for (i, &a) in m.exponents.iter().enumerate() {
                if a >= 2 {
                    let mut e = m.exponents.clone();
                    e[i] -= 2;
                    out.push((Monomial::new(e), c * (a as i64) * (a as i64 - 1)));
                }
            }
        }
        Polynomial::new(out)
    }

    fn is_homogeneous(&self, degree: u32, dim: usize) -> bool {
        self.terms
            .iter()
            .all(|(m, _)| m.dim() == dim && m.degree() == degree)
    }
}

/// Polynomial with real coefficients, used for test functions and lattice means.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPolynomial {
    pub ambient_dim: usize,
    pub terms: Vec<(Monomial, f64)>,
}

impl RealPolynomial {
    pub fn new(ambient_dim: usize, terms: Vec<(Monomial, f64)>) -> Self {
        Self { ambient_dim, terms }
    }

    /// `c + xᵀ A x` for a square (not necessarily symmetric) matrix `A`.
    pub fn quadratic_form(constant: f64, matrix: &[Vec<f64>]) -> Self {
        let d = matrix.len();
        let mut terms = Vec::new();
        if constant != 0.0 {
            terms.push((Monomial::new(vec![0; d]), constant));
        }
        for i in 0..d {
            for j in i..d {
                let c = if i == j {
                    matrix[i][i]
                } else {
                    matrix[i][j] + matrix[j][i]
                };
                let mut e = vec![0; d];
                e[i] += 1;
                e[j] += 1;
                terms.push((Monomial::new(e), c));
            }
        }
        Self::new(d, terms)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// Exact mean over the unit sphere.
    pub fn sphere_mean(&self) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.sphere_mean()).sum()
    }

    /// Distinct total degrees of the terms, ascending.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.iter().map(|(m, _)| m.degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    Full,
    Harmonic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyBasis {
    pub ambient_dim: usize,
    pub degree: u32,
    pub kind: BasisKind,
    pub elements: Vec<Polynomial>,
}

impl PolyBasis {
    /// Wraps user-supplied elements, checking homogeneity.
    pub fn from_elements(
        ambient_dim: usize,
        degree: u32,
        kind: BasisKind,
        elements: Vec<Polynomial>,
    ) -> Result<Self, VeroneseError> {
        for (index, e) in elements.iter().enumerate() {
            if !e.is_homogeneous(degree, ambient_dim) {
                return Err(VeroneseError::InvalidElement {
                    index,
                    degree,
                    ambient_dim,
                });
            }
        }
        Ok(Self {
            ambient_dim,
            degree,
            kind,
            elements,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `ξ = (1,…,1; 0,…,0)` for the full quadratic basis.
    pub fn special_vector(&self) -> Option<Vec<f64>> {
        if self.kind != BasisKind::Full || self.degree != 2 {
            return None;
        }
        Some(
            self.elements
                .iter()
                .map(|e| match e.terms.as_slice() {
                    [(m, _)] if m.support() == 1 => 1.0,
                    _ => 0.0,
                })
                .collect(),
        )
    }
}

/// Binomial coefficient with `C(m, r) = 0` for `m < r` or negative `m`.
pub fn binomial(m: i64, r: i64) -> u64 {
    if r < 0 || m < r {
        return 0;
    }
    let r = r.min(m - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// `dim H_k = C(n+k, n) − C(n+k−2, n)` for `S^n ⊂ R^{ambient_dim}`.
pub fn harmonic_dim(ambient_dim: usize, degree: u32) -> usize {
    let n = ambient_dim as i64 - 1;
    let k = degree as i64;
    (binomial(n + k, n) - binomial(n + k - 2, n)) as usize
}

/// `C(n+k, n)`: number of degree-`k` monomials in `n+1` variables.
pub fn full_dim(ambient_dim: usize, degree: u32) -> usize {
    let n = ambient_dim as i64 - 1;
    binomial(n + degree as i64, n) as usize
}

/// All degree-`k` monomials in `ambient_dim` variables.
///
/// Ordered by support size, then lexicographically descending, so that for
/// `k = 2` the squares come first followed by `x_i x_j`, `i < j`.
pub fn monomials(ambient_dim: usize, degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; ambient_dim];
    fn rec(pos: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos + 1 == current.len() {
            current[pos] = left;
            out.push(Monomial::new(current.clone()));
            return;
        }
        for a in (0..=left).rev() {
            current[pos] = a;
            rec(pos + 1, left - a, current, out);
        }
    }
    if ambient_dim == 0 {
        return out;
    }
    rec(0, degree, &mut current, &mut out);
    // `rec` already yields lex-descending order; the stable sort keeps it
    // within each support class.
    out.sort_by_key(|m| m.support());
    out
}

pub fn full_basis(ambient_dim: usize, degree: u32) -> PolyBasis {
    assert!(ambient_dim >= 1, "ambient dimension must be at least 1");
    PolyBasis {
        ambient_dim,
        degree,
        kind: BasisKind::Full,
        elements: monomials(ambient_dim, degree)
            .into_iter()
            .map(|m| Polynomial::new(vec![(m, 1)]))
            .collect(),
    }
}

type Q = Ratio<i128>;

pub fn harmonic_basis(ambient_dim: usize, degree: u32) -> PolyBasis {
    assert!(ambient_dim >= 1, "ambient dimension must be at least 1");
    let cols = monomials(ambient_dim, degree);
    if degree < 2 {
        return PolyBasis {
            kind: BasisKind::Harmonic,
            ..full_basis(ambient_dim, degree)
        };
    }
    let rows = monomials(ambient_dim, degree - 2);
    let row_index = |m: &Monomial| rows.iter().position(|r| r == m).expect("lowered monomial");

    let mut mat = vec![vec![Q::zero(); cols.len()]; rows.len()];
    for (j, m) in cols.iter().enumerate() {
        let lap = Polynomial::new(vec![(m.clone(), 1)]).laplacian();
        for (lm, c) in lap.terms {
            mat[row_index(&lm)][j] = Q::from_integer(c as i128);
        }
    }

    let pivots = rref(&mut mat);
    let free: Vec<usize> = (0..cols.len()).filter(|c| !pivots.contains(c)).collect();

    let elements = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols.len()];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -mat[r][f];
            }
            let ints = primitive_integer_vector(&v);
            Polynomial::new(
                cols.iter()
                    .cloned()
                    .zip(ints)
                    .filter(|(_, c)| *c != 0)
                    .collect(),
            )
        })
        .collect();

    PolyBasis {
        ambient_dim,
        degree,
        kind: BasisKind::Harmonic,
        elements,
    }
}

/// In-place reduced row echelon form; returns pivot columns by row.
fn rref(mat: &mut [Vec<Q>]) -> Vec<usize> {
    let nrows = mat.len();
    let ncols = mat.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = mat[r][c].recip();
        for x in mat[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..nrows {
            if i != r && !mat[i][c].is_zero() {
                let factor = mat[i][c];
                for j in 0..ncols {
                    let sub = factor * mat[r][j];
                    mat[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Scales a rational vector to coprime integers with a positive leading entry.
fn primitive_integer_vector(v: &[Q]) -> Vec<i64> {
    let lcm = v
        .iter()
        .fold(1i128, |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<i128> = v.iter().map(|x| (x * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    if g > 1 {
        for x in ints.iter_mut() {
            *x /= g;
        }
    }
    if ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in ints.iter_mut() {
            *x = -*x;
        }
    }
    ints.into_iter().map(|x| x as i64).collect()
}

/// Image of a point set under a Veronese map.
#[derive(Debug, Clone, PartialEq)]
pub struct VeroneseImage {
    pub points: Vec<Vec<f64>>,
    pub source_points: Vec<Vec<f64>>,
    pub special_vector: Option<Vec<f64>>,
}

const UNIT_TOL: f64 = 1e-9;

pub fn evaluate_basis(
    basis: &PolyBasis,
    points: &[Vec<f64>],
) -> Result<VeroneseImage, VeroneseError> {
    for (index, p) in points.iter().enumerate() {
        if p.len() != basis.ambient_dim {
            return Err(VeroneseError::DimensionMismatch {
                index,
                got: p.len(),
                expected: basis.ambient_dim,
            });
        }
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(VeroneseError::NotUnit { index, norm });
        }
    }
    let image = points
        .iter()
        .map(|p| basis.elements.iter().map(|e| e.eval(p)).collect())
        .collect();
    Ok(VeroneseImage {
        points: image,
        source_points: points.to_vec(),
        special_vector: basis.special_vector(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn mono(e: &[u32]) -> Monomial {
        Monomial::new(e.to_vec())
    }

    #[test]
    fn circle_quadratic_harmonics() {
        let b = harmonic_basis(2, 2);
        assert_eq!(b.len(), 2);
        assert_eq!(
            b.elements[0],
            Polynomial::new(vec![(mono(&[2, 0]), 1), (mono(&[0, 2]), -1)])
        );
        assert_eq!(b.elements[1], Polynomial::new(vec![(mono(&[1, 1]), 1)]));
    }

    #[test]
    fn sphere_quadratic_harmonics_are_five() {
        assert_eq!(harmonic_basis(3, 2).len(), 5);
    }

    #[test]
    fn constants_are_harmonic() {
        let b = harmonic_basis(2, 0);
        assert_eq!(b.len(), 1);
        assert_eq!(b.elements[0], Polynomial::new(vec![(mono(&[0, 0]), 1)]));
    }

    #[test]
    fn full_quadratic_order_puts_squares_first() {
        let b = full_basis(3, 2);
        let exps: Vec<Vec<u32>> = b
            .elements
            .iter()
            .map(|e| e.terms[0].0.exponents.clone())
            .collect();
        assert_eq!(
            exps,
            vec![
                vec![2, 0, 0],
                vec![0, 2, 0],
                vec![0, 0, 2],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 1, 1]
            ]
        );
        assert_eq!(b.special_vector().unwrap(), vec![1., 1., 1., 0., 0., 0.]);
    }

    #[test]
    fn full_basis_counts() {
        let lin = full_basis(2, 1);
        assert_eq!(lin.len(), 2);
        assert_eq!(lin.elements[0].terms[0].0, mono(&[1, 0]));
        assert_eq!(lin.elements[1].terms[0].0, mono(&[0, 1]));
        assert_eq!(full_basis(4, 2).len(), 10);
    }

    #[test]
    fn dimension_formula_matches_null_space() {
        for dim in 1..=6 {
            for k in 0..=4 {
                let b = harmonic_basis(dim, k);
                assert_eq!(b.len(), harmonic_dim(dim, k), "dim={dim} k={k}");
                assert_eq!(full_basis(dim, k).len(), full_dim(dim, k));
            }
        }
        assert_eq!(harmonic_dim(2, 1), 2);
        assert_eq!(harmonic_dim(1, 2), 0);
    }

    #[test]
    fn harmonic_elements_are_exactly_harmonic_and_independent() {
        for dim in 1..=6 {
            for k in 0..=4 {
                let b = harmonic_basis(dim, k);
                for e in &b.elements {
                    assert!(e.laplacian().is_zero(), "dim={dim} k={k} {e:?}");
                }
                let cols = monomials(dim, k);
                let mut mat: Vec<Vec<Q>> = b
                    .elements
                    .iter()
                    .map(|e| {
                        cols.iter()
                            .map(|m| {
                                let c = e.terms.iter().find(|(t, _)| t == m).map_or(0, |t| t.1);
                                Q::from_integer(c as i128)
                            })
                            .collect()
                    })
                    .collect();
                assert_eq!(rref(&mut mat).len(), b.len(), "rank dim={dim} k={k}");
            }
        }
    }

    #[test]
    fn circle_map_doubles_angle() {
        let b = PolyBasis::from_elements(
            2,
            2,
            BasisKind::Harmonic,
            vec![
                Polynomial::new(vec![(mono(&[2, 0]), 1), (mono(&[0, 2]), -1)]),
                Polynomial::new(vec![(mono(&[1, 1]), 2)]),
            ],
        )
        .unwrap();
        for i in 0..12 {
            let phi = i as f64 * PI / 12.0;
            let img = evaluate_basis(&b, &[vec![phi.cos(), phi.sin()]]).unwrap();
            assert_abs_diff_eq!(img.points[0][0], (2.0 * phi).cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(img.points[0][1], (2.0 * phi).sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn full_map_examples() {
        let b = full_basis(3, 2);
        let img = evaluate_basis(&b, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(img.points[0], vec![1., 0., 0., 0., 0., 0.]);
        let s = 0.5f64.sqrt();
        let img = evaluate_basis(&b, &[vec![s, s, 0.0]]).unwrap();
        let expect = [0.5, 0.5, 0.0, 0.5, 0.0, 0.0];
        for (a, e) in img.points[0].iter().zip(expect) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn evaluate_rejects_bad_points() {
        let b = full_basis(3, 2);
        assert!(matches!(
            evaluate_basis(&b, &[vec![1.0, 0.0]]),
            Err(VeroneseError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            evaluate_basis(&b, &[vec![1.0, 1.0, 0.0]]),
            Err(VeroneseError::NotUnit { .. })
        ));
    }

    #[test]
    fn from_elements_rejects_inhomogeneous() {
        let bad = Polynomial::new(vec![(mono(&[2, 0]), 1), (mono(&[1, 0]), 1)]);
        assert!(PolyBasis::from_elements(2, 2, BasisKind::Harmonic, vec![bad]).is_err());
    }

    #[test]
    fn sphere_means_of_monomials() {
        assert_abs_diff_eq!(mono(&[2, 0, 0]).sphere_mean(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mono(&[4, 0, 0]).sphere_mean(), 1.0 / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mono(&[2, 2, 0]).sphere_mean(), 1.0 / 15.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mono(&[2, 0]).sphere_mean(), 0.5, epsilon = 1e-15);
        assert_eq!(mono(&[1, 1, 0]).sphere_mean(), 0.0);
    }
}
