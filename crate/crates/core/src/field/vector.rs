use std::ops::{Add, Sub};

use rand::RngCore;

use super::{FieldElement, PrimeField};
use crate::error::{Error, Result};

/// A vector over `F_q`; every coordinate lives in the same field.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldVector {
    field: PrimeField,
    coords: Vec<FieldElement>,
}

impl FieldVector {
    pub fn new(field: PrimeField, coords: Vec<FieldElement>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| c.field() != field) {
            return Err(Error::MismatchedField(field.modulus(), bad.field().modulus()));
        }
        Ok(Self { field, coords })
    }

    pub fn from_values(field: PrimeField, values: &[u64]) -> Self {
        Self {
            field,
            coords: values.iter().map(|&v| field.element(v)).collect(),
        }
    }

    pub fn zero(field: PrimeField, dim: usize) -> Self {
        Self {
            field,
            coords: vec![field.zero(); dim],
        }
    }

    /// Standard basis vector `e_i`.
    pub fn unit(field: PrimeField, dim: usize, i: usize) -> Self {
        let mut v = Self::zero(field, dim);
        v.coords[i] = field.one();
        v
    }

    pub fn random<R: RngCore + ?Sized>(field: PrimeField, dim: usize, rng: &mut R) -> Self {
        Self {
            field,
            coords: (0..dim).map(|_| field.sample(rng)).collect(),
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> FieldElement {
        self.coords[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &FieldElement> {
        self.coords.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MismatchedField(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(Self {
            field: self.field,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(Self {
            field: self.field,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.compatible(other)?;
        for (a, &b) in self.coords.iter_mut().zip(&other.coords) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&self, c: FieldElement) -> Result<Self> {
        if c.field() != self.field {
            return Err(Error::MismatchedField(self.field.modulus(), c.field().modulus()));
        }
        Ok(Self {
            field: self.field,
            coords: self.coords.iter().map(|&a| a * c).collect(),
        })
    }

    pub fn dot(&self, other: &Self) -> Result<FieldElement> {
        self.compatible(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(self.field.zero(), |acc, (&a, &b)| acc + a * b))
    }

    /// Sum of a non-empty list of vectors, or the zero vector of `dim` when empty.
    pub fn sum<'a, I>(field: PrimeField, dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a FieldVector>,
    {
        let mut acc = Self::zero(field, dim);
        for v in items {
            acc.add_assign(v)?;
        }
        Ok(acc)
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        for &c in &self.coords {
            self.field.encode_into(c, out);
        }
    }
}

impl Add for &FieldVector {
    type Output = FieldVector;
    fn add(self, rhs: Self) -> FieldVector {
        self.checked_add(rhs).expect("incompatible vectors in addition")
    }
}

impl Sub for &FieldVector {
    type Output = FieldVector;
    fn sub(self, rhs: Self) -> FieldVector {
        self.checked_sub(rhs).expect("incompatible vectors in subtraction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_errors() {
        let f = PrimeField::new(7).unwrap();
        let a = FieldVector::from_values(f, &[1, 2, 3]);
        let b = FieldVector::from_values(f, &[6, 6, 6]);
        assert_eq!(&a + &b, FieldVector::from_values(f, &[0, 1, 2]));
        assert_eq!(&a - &b, FieldVector::from_values(f, &[2, 3, 4]));
        assert_eq!(a.scale(f.element(3)).unwrap(), FieldVector::from_values(f, &[3, 6, 2]));
        assert_eq!(a.dot(&b).unwrap(), f.element(36));
        let short = FieldVector::from_values(f, &[1]);
        assert_eq!(
            a.checked_add(&short),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        );
        let other = FieldVector::from_values(PrimeField::new(11).unwrap(), &[1, 2, 3]);
        assert_eq!(a.checked_add(&other), Err(Error::MismatchedField(7, 11)));
        assert!(FieldVector::new(f, vec![PrimeField::new(11).unwrap().one()]).is_err());
    }
}
