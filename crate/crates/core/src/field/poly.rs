use super::{FieldElement, PrimeField};
use crate::error::{Error, Result};

/// Polynomial in monomial basis; `coeffs[i]` is the coefficient of `X^i`.
///
/// The leading coefficient may be zero, so the degree is at most `len - 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    field: PrimeField,
    coeffs: Vec<FieldElement>,
}

impl Polynomial {
    pub fn new(field: PrimeField, coeffs: Vec<FieldElement>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| c.field() != field) {
            return Err(Error::MismatchedField(field.modulus(), bad.field().modulus()));
        }
        Ok(Self { field, coeffs })
    }

    pub fn from_values(field: PrimeField, values: &[u64]) -> Self {
        Self {
            field,
            coeffs: values.iter().map(|&v| field.element(v)).collect(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// Actual degree, ignoring zero leading coefficients. `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: FieldElement) -> Result<FieldElement> {
        if x.field() != self.field {
            return Err(Error::MismatchedField(self.field.modulus(), x.field().modulus()));
        }
        Ok(self
            .coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, &c| acc * x + c))
    }
}

fn check_distinct(points: &[FieldElement]) -> Result<()> {
    for (i, a) in points.iter().enumerate() {
        if points[..i].contains(a) {
            return Err(Error::DuplicatePoint);
        }
    }
    Ok(())
}

/// Lagrange coefficients `c_j` with `p(target) = sum_j c_j p(points[j])` for every
/// polynomial of degree at most `points.len() - 1`.
pub fn lagrange_coeffs_at(points: &[FieldElement], target: FieldElement) -> Result<Vec<FieldElement>> {
    let field = target.field();
    if let Some(bad) = points.iter().find(|p| p.field() != field) {
        return Err(Error::MismatchedField(field.modulus(), bad.field().modulus()));
    }
    check_distinct(points)?;
    points
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let (num, den) = points.iter().enumerate().filter(|&(i, _)| i != j).fold(
                (field.one(), field.one()),
                |(num, den), (_, &xi)| (num * (target - xi), den * (xj - xi)),
            );
            num.checked_div(den)
        })
        .collect()
}

/// The unique polynomial of degree `< degree_bound` through the first
/// `degree_bound` points. Any further points must lie on it.
pub fn interpolate(points: &[(FieldElement, FieldElement)], degree_bound: usize) -> Result<Polynomial> {
    if degree_bound == 0 {
        return Err(Error::ParamViolation("degree bound must be at least 1".into()));
    }
    if points.len() < degree_bound {
        return Err(Error::NotEnoughPoints {
            needed: degree_bound,
            got: points.len(),
        });
    }
    let field = points[0].0.field();
    if let Some(bad) = points
        .iter()
        .flat_map(|(x, y)| [x, y])
        .find(|e| e.field() != field)
    {
        return Err(Error::MismatchedField(field.modulus(), bad.field().modulus()));
    }
    let xs: Vec<_> = points.iter().map(|p| p.0).collect();
    check_distinct(&xs)?;

    let (basis_pts, extras) = points.split_at(degree_bound);
    let mut coeffs = vec![field.zero(); degree_bound];
    for (j, &(xj, yj)) in basis_pts.iter().enumerate() {
        // numerator prod_{i != j} (X - x_i), built one linear factor at a time
        let mut numer = vec![field.one()];
        let mut denom = field.one();
        for (i, &(xi, _)) in basis_pts.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut next = vec![field.zero(); numer.len() + 1];
            for (k, &c) in numer.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * xi;
            }
            numer = next;
            denom *= xj - xi;
        }
        let scale = yj.checked_div(denom)?;
        for (acc, c) in coeffs.iter_mut().zip(numer) {
            *acc += c * scale;
        }
    }
    let poly = Polynomial { field, coeffs };
    for &(x, y) in extras {
        if poly.eval(x)? != y {
            return Err(Error::InconsistentPoints);
        }
    }
    Ok(poly)
}
