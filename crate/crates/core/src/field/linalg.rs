use super::{FieldElement, FieldVector, PrimeField};
use crate::error::{Error, Result};

/// Incrementally maintained row-echelon basis of a subspace of `F_q^d`.
///
/// Each stored row has a leading one at its pivot column and is zero at the
/// pivots of all rows inserted before it, so reducing a candidate against the
/// rows in insertion order leaves it zero exactly when it lies in the span.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    field: PrimeField,
    dim: usize,
    rows: Vec<(usize, Vec<FieldElement>)>,
}

impl EchelonBasis {
    pub fn new(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &FieldVector) -> Result<Vec<FieldElement>> {
        if v.field() != self.field {
            return Err(Error::MismatchedField(self.field.modulus(), v.field().modulus()));
        }
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        let mut w = v.coords().to_vec();
        for (pivot, row) in &self.rows {
            let c = w[*pivot];
            if c.is_zero() {
                continue;
            }
            for (x, &r) in w.iter_mut().zip(row) {
                *x -= c * r;
            }
        }
        Ok(w)
    }

    pub fn contains(&self, v: &FieldVector) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(|x| x.is_zero()))
    }

    /// Adds `v` if it is outside the current span. Returns whether it was added.
    pub fn insert(&mut self, v: &FieldVector) -> Result<bool> {
        let mut w = self.reduce(v)?;
        let Some(pivot) = w.iter().position(|x| !x.is_zero()) else {
            return Ok(false);
        };
        let scale = w[pivot].inv()?;
        for x in w.iter_mut() {
            *x *= scale;
        }
        self.rows.push((pivot, w));
        Ok(true)
    }
}

/// Rank of a set of vectors by Gaussian elimination.
pub fn rank(vectors: &[FieldVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let mut basis = EchelonBasis::new(first.field(), first.dim());
    for v in vectors {
        basis.insert(v)?;
    }
    Ok(basis.rank())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let f = PrimeField::new(5).unwrap();
        let a = FieldVector::from_values(f, &[1, 2, 3]);
        let b = FieldVector::from_values(f, &[2, 4, 2]);
        let c = &a + &b;
        assert_eq!(rank(std::slice::from_ref(&a)).unwrap(), 1);
        assert_eq!(rank(&[a.clone(), b.clone()]).unwrap(), 2);
        assert_eq!(rank(&[a.clone(), b.clone(), c.clone()]).unwrap(), 2);
        assert_eq!(rank(&[FieldVector::zero(f, 3)]).unwrap(), 0);
        let mut basis = EchelonBasis::new(f, 3);
        assert!(basis.insert(&a).unwrap());
        assert!(basis.insert(&b).unwrap());
        assert!(basis.contains(&c).unwrap());
        assert!(!basis.insert(&c).unwrap());
    }

    #[test]
    fn rank_matches_brute_force_f3() {
        // Independence oracle: no nontrivial coefficient tuple sums to zero.
        let f = PrimeField::new(3).unwrap();
        let all: Vec<FieldVector> = (0..9u64)
            .map(|code| FieldVector::from_values(f, &[code % 3, code / 3]))
            .collect();
        for a in &all {
            for b in &all {
                let independent = (0..9u64).filter(|&c| c != 0).all(|c| {
                    let (ca, cb) = (f.element(c % 3), f.element(c / 3));
                    !(&a.scale(ca).unwrap() + &b.scale(cb).unwrap()).is_zero()
                });
                assert_eq!(rank(&[a.clone(), b.clone()]).unwrap() == 2, independent);
            }
        }
    }
}
