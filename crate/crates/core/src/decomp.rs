//! Diagonal-equivalence decomposition `M = D1 * M1 * D2` and the involutory
//! certificate of a representative matrix.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::matlin::{DiagonalMatrix, SquareMatrix};
use crate::mdscheck::has_unit_border;

/// `(D1, M1, D2)` with `D2[0] = 1`, `M1` all-ones on its first row and column
/// and every diagonal entry nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTriple {
    d1: DiagonalMatrix,
    m1: SquareMatrix,
    d2: DiagonalMatrix,
}

impl DecompositionTriple {
    pub fn new(d1: DiagonalMatrix, m1: SquareMatrix, d2: DiagonalMatrix) -> Result<Self> {
        let n = m1.order();
        if d1.order() != n || d2.order() != n {
            return Err(Error::Dimension(format!(
                "diagonals of order {} and {} around a matrix of order {n}",
                d1.order(),
                d2.order()
            )));
        }
        if d1.field() != m1.field() || d2.field() != m1.field() {
            return Err(Error::FieldMismatch {
                left: d1.field().label().into(),
                right: m1.field().label().into(),
            });
        }
        if !d1.is_nonsingular() || !d2.is_nonsingular() {
            return Err(Error::usage("diagonal entries must be nonzero"));
        }
        if d2.diag()[0] != Elem::ONE {
            return Err(Error::usage("the first entry of D2 must be 1"));
        }
        if !has_unit_border(&m1) {
            return Err(Error::usage("M1 must have an all-ones first row and column"));
        }
        Ok(DecompositionTriple { d1, m1, d2 })
    }

    pub fn d1(&self) -> &DiagonalMatrix {
        &self.d1
    }

    pub fn m1(&self) -> &SquareMatrix {
        &self.m1
    }

    pub fn d2(&self) -> &DiagonalMatrix {
        &self.d2
    }

    pub fn compose(&self) -> SquareMatrix {
        self.m1.sandwich_unchecked(self.d1.diag(), self.d2.diag())
    }

    pub fn to_json(&self) -> Value {
        json!({"d1": self.d1.to_json(), "m1": self.m1.to_json()["rows"], "d2": self.d2.to_json()})
    }
}

/// Splits a matrix without zero entries into its unique triple:
/// `D1` is the first column, `D2 = (1, a11^-1 a12, ..., a11^-1 a1n)` and
/// `c_ij = a_i1^-1 a_ij a_11 a_1j^-1`.
pub fn decompose(m: &SquareMatrix) -> Result<DecompositionTriple> {
    if m.entries().iter().any(|e| e.is_zero()) {
        return Err(Error::domain("decomposition requires all entries nonzero"));
    }
    let f = m.field();
    let n = m.order();
    let a11 = m.get(0, 0);
    let a11_inv = f.inv(a11)?;
    let d1: Vec<Elem> = (0..n).map(|i| m.get(i, 0)).collect();
    let d2: Vec<Elem> = (0..n).map(|j| f.mul(a11_inv, m.get(0, j))).collect();
    let row_scale: Vec<Elem> = d1.iter().map(|&x| f.inv(x)).collect::<Result<_>>()?;
    let col_scale: Vec<Elem> = d2.iter().map(|&x| f.inv(x)).collect::<Result<_>>()?;
    let m1 = m.sandwich_unchecked(&row_scale, &col_scale);
    Ok(DecompositionTriple {
        d1: DiagonalMatrix::new(f.clone(), d1)?,
        m1,
        d2: DiagonalMatrix::new(f.clone(), d2)?,
    })
}

/// `sandwich(d1, m1, d2)` after checking the triple invariants.
pub fn compose(d1: &DiagonalMatrix, m1: &SquareMatrix, d2: &DiagonalMatrix) -> Result<SquareMatrix> {
    Ok(DecompositionTriple::new(d1.clone(), m1.clone(), d2.clone())?.compose())
}

/// Nonzero `alpha` with `d_ij = alpha_i alpha_j c_ij`, where `(d_ij)` is the
/// inverse of the representative `(c_ij)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvolutoryCertificate {
    field: Field,
    alphas: Vec<Elem>,
}

impl InvolutoryCertificate {
    pub fn new(field: Field, alphas: Vec<Elem>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|a| a.is_zero() || !field.contains(*a)) {
            return Err(Error::usage("certificate entries must be nonzero field elements"));
        }
        Ok(InvolutoryCertificate { field, alphas })
    }

    pub fn alphas(&self) -> &[Elem] {
        &self.alphas
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// `-alpha`, the other certificate for the same representative.
    pub fn negated(&self) -> InvolutoryCertificate {
        let alphas = self.alphas.iter().map(|&a| self.field.neg(a)).collect();
        InvolutoryCertificate { field: self.field.clone(), alphas }
    }

    /// The certificates of the representative: one in characteristic 2,
    /// `alpha` and `-alpha` otherwise. Their member families are disjoint,
    /// since a member's `(1,1)` entry is its `alpha_1`.
    pub fn sign_variants(&self) -> Vec<InvolutoryCertificate> {
        if self.field.characteristic() == 2 {
            vec![self.clone()]
        } else {
            vec![self.clone(), self.negated()]
        }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.alphas.iter().map(|&a| Value::String(self.field.format_elem(a))).collect())
    }
}

/// Why a representative has no certificate. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertRefusal {
    /// `d_ii / c_ii` is zero, undefined or a non-residue.
    NonQrDiagonal { i: usize },
    /// `d_ij c_ji != d_ji c_ij`.
    AsymmetricRatio { i: usize, j: usize },
    /// `d_ij != alpha_i alpha_j c_ij`.
    PairwiseMismatch { i: usize, j: usize },
}

impl CertRefusal {
    pub fn name(&self) -> &'static str {
        match self {
            CertRefusal::NonQrDiagonal { .. } => "non_qr_diagonal_ratio",
            CertRefusal::AsymmetricRatio { .. } => "asymmetric_ratio",
            CertRefusal::PairwiseMismatch { .. } => "pairwise_mismatch",
        }
    }

    /// Report form with 1-based indices.
    pub fn to_json(&self) -> Value {
        match *self {
            CertRefusal::NonQrDiagonal { i } => json!({"reason": self.name(), "i": i + 1}),
            CertRefusal::AsymmetricRatio { i, j } | CertRefusal::PairwiseMismatch { i, j } => {
                json!({"reason": self.name(), "i": i + 1, "j": j + 1})
            }
        }
    }
}

impl fmt::Display for CertRefusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CertRefusal::NonQrDiagonal { i } => write!(f, "d[{0}][{0}]/c[{0}][{0}] is not a quadratic residue", i + 1),
            CertRefusal::AsymmetricRatio { i, j } => {
                write!(f, "d[{i1}][{j1}]*c[{j1}][{i1}] != d[{j1}][{i1}]*c[{i1}][{j1}]", i1 = i + 1, j1 = j + 1)
            }
            CertRefusal::PairwiseMismatch { i, j } => {
                write!(f, "d[{i1}][{j1}] != alpha[{i1}]*alpha[{j1}]*c[{i1}][{j1}]", i1 = i + 1, j1 = j + 1)
            }
        }
    }
}

/// Certificate test on raw row-major `c` (representative) and `d` (its inverse).
pub(crate) fn certify_raw(f: &Field, n: usize, c: &[Elem], d: &[Elem]) -> std::result::Result<Vec<Elem>, CertRefusal> {
    for i in 0..n {
        let (dii, cii) = (d[i * n + i], c[i * n + i]);
        let residue = !dii.is_zero() && !cii.is_zero() && f.is_qr(f.div(dii, cii).unwrap_or(Elem::ZERO)).unwrap_or(false);
        if !residue {
            return Err(CertRefusal::NonQrDiagonal { i });
        }
    }
    let a1 = f.sqrt(d[0]).expect("residue has a root");
    let a1_inv = f.inv(a1).expect("nonzero root");
    let alphas: Vec<Elem> = (0..n).map(|j| if j == 0 { a1 } else { f.mul(d[j], a1_inv) }).collect();
    for i in 0..n {
        for j in i..n {
            let (dij, dji, cij, cji) = (d[i * n + j], d[j * n + i], c[i * n + j], c[j * n + i]);
            if i < j && f.mul(dij, cji) != f.mul(dji, cij) {
                return Err(CertRefusal::AsymmetricRatio { i, j });
            }
            if dij != f.mul(f.mul(alphas[i], alphas[j]), cij) {
                return Err(CertRefusal::PairwiseMismatch { i, j });
            }
        }
    }
    Ok(alphas)
}

fn require_representative(m1: &SquareMatrix) -> Result<()> {
    if !has_unit_border(m1) {
        return Err(Error::usage("expected a representative matrix (all-ones first row and column)"));
    }
    Ok(())
}

/// The certificate with `alpha_1 = sqrt(d_11)` and `alpha_j = d_1j / alpha_1`,
/// or the first failed condition. Singular input is a domain error.
pub fn certify(m1: &SquareMatrix) -> Result<std::result::Result<InvolutoryCertificate, CertRefusal>> {
    require_representative(m1)?;
    let inv = m1.inverse()?;
    let f = m1.field();
    Ok(certify_raw(f, m1.order(), m1.entries(), inv.entries())
        .map(|alphas| InvolutoryCertificate { field: f.clone(), alphas }))
}

pub fn involutory_certificate(m1: &SquareMatrix) -> Result<Option<InvolutoryCertificate>> {
    Ok(certify(m1)?.ok())
}

/// `D1 = (alpha_1, lambda_2, ..)`, `D2 = (1, alpha_2 / lambda_2, ..)`.
pub(crate) fn member_diagonals(f: &Field, alphas: &[Elem], lambdas: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
    let mut d1 = Vec::with_capacity(alphas.len());
    let mut d2 = Vec::with_capacity(alphas.len());
    d1.push(alphas[0]);
    d2.push(Elem::ONE);
    for (&a, &l) in alphas[1..].iter().zip(lambdas) {
        d1.push(l);
        d2.push(f.div(a, l).expect("nonzero lambda"));
    }
    (d1, d2)
}

/// The involutory matrix `D1 * M1 * D2` selected by `lambdas` (length `n - 1`).
pub fn involutory_member(m1: &SquareMatrix, cert: &InvolutoryCertificate, lambdas: &[Elem]) -> Result<SquareMatrix> {
    require_representative(m1)?;
    let f = m1.field();
    let n = m1.order();
    if cert.field() != f {
        return Err(Error::FieldMismatch { left: cert.field().label().into(), right: f.label().into() });
    }
    if cert.alphas.len() != n || lambdas.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "order {n} needs {n} alphas and {} lambdas (got {} and {})",
            n - 1,
            cert.alphas.len(),
            lambdas.len()
        )));
    }
    if let Some(l) = lambdas.iter().find(|l| !f.contains(**l)) {
        return Err(Error::usage(format!("code {} is not an element of {}", l.code(), f.label())));
    }
    if lambdas.iter().any(|l| l.is_zero()) {
        return Err(Error::domain("lambda entries must be nonzero"));
    }
    let inv = m1.inverse()?;
    let valid = (0..n).all(|i| {
        (0..n).all(|j| inv.get(i, j) == f.mul(f.mul(cert.alphas[i], cert.alphas[j]), m1.get(i, j)))
    });
    if !valid {
        return Err(Error::usage("certificate does not match the representative"));
    }
    let (d1, d2) = member_diagonals(f, &cert.alphas, lambdas);
    Ok(m1.sandwich_unchecked(&d1, &d2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdscheck::{is_involutory, is_mds};

    fn gf16() -> Field {
        Field::parse("2^4/0x13").unwrap()
    }

    fn codes(f: &Field, v: &[u64]) -> Vec<Elem> {
        v.iter().map(|&c| f.elem(c).unwrap()).collect()
    }

    #[test]
    fn representative_decomposes_to_itself() {
        let f = gf16();
        let m1 = SquareMatrix::from_codes(f.clone(), &[&[1, 1, 1], &[1, 5, 7], &[1, 9, 3]]).unwrap();
        let t = decompose(&m1).unwrap();
        assert_eq!(t.m1(), &m1);
        assert!(t.d1().diag().iter().chain(t.d2().diag()).all(|&e| e == Elem::ONE));
    }

    #[test]
    fn zero_entry_is_domain_error() {
        let f = gf16();
        let m = SquareMatrix::from_codes(f, &[&[1, 0], &[1, 1]]).unwrap();
        let err = decompose(&m).unwrap_err();
        assert!(err.to_string().contains("decomposition requires all entries nonzero"));
    }

    #[test]
    fn triple_validation() {
        let f = gf16();
        let m1 = SquareMatrix::from_codes(f.clone(), &[&[1, 1], &[1, 5]]).unwrap();
        let one = DiagonalMatrix::identity(f.clone(), 2);
        let bad_d2 = DiagonalMatrix::new(f.clone(), codes(&f, &[2, 1])).unwrap();
        assert!(compose(&one, &m1, &bad_d2).is_err());
        let not_rep = SquareMatrix::from_codes(f.clone(), &[&[1, 2], &[1, 5]]).unwrap();
        assert!(compose(&one, &not_rep, &one).is_err());
        let zero = DiagonalMatrix::new(f.clone(), codes(&f, &[0, 1])).unwrap();
        assert!(compose(&zero, &m1, &one).is_err());
    }

    #[test]
    fn certificate_refusal_over_odd_field() {
        // Over F_5 the 2x2 representative [[1,1],[1,a]] has d_11 = a/(a-1).
        let f = Field::prime(5).unwrap();
        for a in 2..5 {
            let m1 = SquareMatrix::from_codes(f.clone(), &[&[1, 1], &[1, a]]).unwrap();
            let d11 = f.div(f.elem(a).unwrap(), f.elem(a - 1).unwrap()).unwrap();
            let got = certify(&m1).unwrap();
            if !f.is_qr(d11).unwrap() {
                assert_eq!(got, Err(CertRefusal::NonQrDiagonal { i: 0 }));
            }
        }
    }

    #[test]
    fn members_are_involutory_and_mds() {
        let f = gf16();
        let m1 = SquareMatrix::from_codes(
            f.clone(),
            &[&[1, 1, 1, 1], &[1, 0xc, 0xd, 0x5], &[1, 0xd, 0x5, 0x7], &[1, 0x5, 0x7, 0x8]],
        )
        .unwrap();
        let cert = involutory_certificate(&m1).unwrap().unwrap();
        for l in 1..16 {
            let lambdas = codes(&f, &[l, 16 - l, (l * 7) % 15 + 1]);
            let m = involutory_member(&m1, &cert, &lambdas).unwrap();
            assert!(is_involutory(&m));
            assert!(is_mds(&m));
        }
        assert!(involutory_member(&m1, &cert, &codes(&f, &[1, 0, 1])).is_err());
    }
}
