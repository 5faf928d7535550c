//! Dense square matrices over a finite field.
//!
//! Indices are 0-based here; text meant for people uses 1-based indices.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareMatrix {
    field: Field,
    n: usize,
    entries: Vec<Elem>,
}

/// A diagonal matrix stored as its diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalMatrix {
    field: Field,
    diag: Vec<Elem>,
}

fn same_field(a: &Field, b: &Field) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::FieldMismatch { left: a.label().into(), right: b.label().into() })
    }
}

impl SquareMatrix {
    /// Row-major entries; `entries.len()` must be `n * n` with `n >= 1`.
    pub fn new(field: Field, n: usize, entries: Vec<Elem>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("matrix order must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension(format!("{} entries cannot form a {n}x{n} matrix", entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| !field.contains(**e)) {
            return Err(Error::usage(format!("code {} is not an element of {}", e.code(), field.label())));
        }
        Ok(SquareMatrix { field, n, entries })
    }

    pub(crate) fn new_unchecked(field: Field, n: usize, entries: Vec<Elem>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        SquareMatrix { field, n, entries }
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Elem>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("rows must all have length equal to the number of rows".into()));
        }
        SquareMatrix::new(field, n, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from raw codes.
    pub fn from_codes(field: Field, rows: &[&[u64]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&c| field.elem(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SquareMatrix::from_rows(field, rows)
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut entries = vec![Elem::ZERO; n * n];
        for i in 0..n {
            entries[i * n + i] = Elem::ONE;
        }
        SquareMatrix::new_unchecked(field, n, entries)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Elem] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Elem]> {
        self.entries.chunks(self.n)
    }

    fn check_compatible(&self, other: &SquareMatrix) -> Result<()> {
        same_field(&self.field, &other.field)?;
        if self.n != other.n {
            return Err(Error::Dimension(format!("order {} vs order {}", self.n, other.n)));
        }
        Ok(())
    }

    pub fn mat_mul(&self, other: &SquareMatrix) -> Result<SquareMatrix> {
        self.check_compatible(other)?;
        let (f, n) = (&self.field, self.n);
        let mut out = vec![Elem::ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = f.add(out[i * n + j], f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(SquareMatrix::new_unchecked(f.clone(), n, out))
    }

    pub fn det(&self) -> Elem {
        det_raw(&self.field, self.n, &self.entries)
    }

    pub fn is_singular(&self) -> bool {
        self.det().is_zero()
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<SquareMatrix> {
        let (f, n) = (&self.field, self.n);
        let w = 2 * n;
        let mut aug = vec![Elem::ZERO; n * w];
        for i in 0..n {
            aug[i * w..i * w + n].copy_from_slice(self.row(i));
            aug[i * w + n + i] = Elem::ONE;
        }
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !aug[r * w + col].is_zero())
                .ok_or_else(|| Error::domain("matrix is singular"))?;
            if pivot != col {
                for j in 0..w {
                    aug.swap(pivot * w + j, col * w + j);
                }
            }
            let scale = f.inv(aug[col * w + col])?;
            for j in 0..w {
                aug[col * w + j] = f.mul(aug[col * w + j], scale);
            }
            for r in 0..n {
                let factor = aug[r * w + col];
                if r == col || factor.is_zero() {
                    continue;
                }
                for j in 0..w {
                    let t = f.mul(factor, aug[col * w + j]);
                    aug[r * w + j] = f.sub(aug[r * w + j], t);
                }
            }
        }
        let entries = (0..n).flat_map(|i| aug[i * w + n..(i + 1) * w].to_vec()).collect();
        Ok(SquareMatrix::new_unchecked(f.clone(), n, entries))
    }

    /// Sub-matrix on the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<SquareMatrix> {
        if rows.len() != cols.len() || rows.is_empty() {
            return Err(Error::Dimension(format!(
                "minor needs equally sized non-empty index sets (got {} rows, {} columns)",
                rows.len(),
                cols.len()
            )));
        }
        if let Some(bad) = rows.iter().chain(cols).find(|&&i| i >= self.n) {
            return Err(Error::Dimension(format!("index {} out of range for order {}", bad + 1, self.n)));
        }
        let entries = rows.iter().flat_map(|&i| cols.iter().map(move |&j| self.get(i, j))).collect();
        Ok(SquareMatrix::new_unchecked(self.field.clone(), rows.len(), entries))
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<Elem> {
        Ok(self.submatrix(rows, cols)?.det())
    }

    /// `D1 * self * D2`, entrywise `d1_i * a_ij * d2_j`.
    pub fn sandwich(&self, d1: &DiagonalMatrix, d2: &DiagonalMatrix) -> Result<SquareMatrix> {
        same_field(&self.field, &d1.field)?;
        same_field(&self.field, &d2.field)?;
        if d1.order() != self.n || d2.order() != self.n {
            return Err(Error::Dimension("diagonal orders must match the matrix order".into()));
        }
        if !d1.is_nonsingular() || !d2.is_nonsingular() {
            return Err(Error::domain("diagonal matrices must be non-singular"));
        }
        Ok(self.sandwich_unchecked(&d1.diag, &d2.diag))
    }

    pub(crate) fn sandwich_unchecked(&self, left: &[Elem], right: &[Elem]) -> SquareMatrix {
        SquareMatrix::new_unchecked(self.field.clone(), self.n, sandwich_raw(&self.field, self.n, left, &self.entries, right))
    }

    /// Text form: rows separated by `;`, entries by `,`.
    pub fn to_text(&self) -> String {
        self.rows()
            .map(|r| r.iter().map(|&e| self.field.format_elem(e)).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_text(field: &Field, text: &str) -> Result<SquareMatrix> {
        let mut rows = Vec::new();
        let mut offset = 0;
        for row_text in text.split(';') {
            let mut row = Vec::new();
            let mut pos = offset;
            for cell in row_text.split(',') {
                let at = pos + (cell.len() - cell.trim_start().len());
                if cell.trim().is_empty() {
                    return Err(Error::parse(at, "empty matrix entry"));
                }
                let e = field.parse_elem(cell).map_err(|e| match e {
                    Error::Parse { msg, .. } => Error::parse(at, msg),
                    other => other,
                })?;
                row.push(e);
                pos += cell.len() + 1;
            }
            rows.push(row);
            offset += row_text.len() + 1;
        }
        let n = rows.len();
        if let Some(i) = rows.iter().position(|r| r.len() != n) {
            let at = text.split(';').take(i).map(|r| r.len() + 1).sum();
            return Err(Error::parse(
                at,
                format!("row {} has {} entries but the matrix has {n} rows", i + 1, rows[i].len()),
            ));
        }
        SquareMatrix::from_rows(field.clone(), rows)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(MatrixDoc {
            field: self.field.label().to_string(),
            rows: self
                .rows()
                .map(|r| r.iter().map(|&e| self.field.format_elem(e)).collect())
                .collect(),
        })
        .expect("plain data serializes")
    }

    /// Parses `{"field": "...", "rows": [[...], ...]}`.
    pub fn from_json(value: &Value) -> Result<SquareMatrix> {
        let doc: MatrixDoc = serde_json::from_value(value.clone())
            .map_err(|e| Error::parse(e.column(), format!("matrix JSON: {e}")))?;
        let field = Field::parse(&doc.field)?;
        let rows = doc
            .rows
            .iter()
            .map(|r| r.iter().map(|c| field.parse_elem(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SquareMatrix::from_rows(field, rows)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    field: String,
    rows: Vec<Vec<String>>,
}

impl DiagonalMatrix {
    pub fn new(field: Field, diag: Vec<Elem>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Dimension("diagonal matrix order must be at least 1".into()));
        }
        if let Some(e) = diag.iter().find(|e| !field.contains(**e)) {
            return Err(Error::usage(format!("code {} is not an element of {}", e.code(), field.label())));
        }
        Ok(DiagonalMatrix { field, diag })
    }

    pub fn identity(field: Field, n: usize) -> Self {
        DiagonalMatrix { field, diag: vec![Elem::ONE; n] }
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[Elem] {
        &self.diag
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_nonsingular(&self) -> bool {
        self.diag.iter().all(|d| !d.is_zero())
    }

    /// Product of the diagonal.
    pub fn det(&self) -> Elem {
        self.diag.iter().fold(Elem::ONE, |acc, &d| self.field.mul(acc, d))
    }

    pub fn to_matrix(&self) -> SquareMatrix {
        let n = self.order();
        let mut entries = vec![Elem::ZERO; n * n];
        for (i, &d) in self.diag.iter().enumerate() {
            entries[i * n + i] = d;
        }
        SquareMatrix::new_unchecked(self.field.clone(), n, entries)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.diag.iter().map(|&e| Value::String(self.field.format_elem(e))).collect())
    }
}

/// `diag(left) * a * diag(right)` on a row-major block.
pub(crate) fn sandwich_raw(f: &Field, n: usize, left: &[Elem], a: &[Elem], right: &[Elem]) -> Vec<Elem> {
    (0..n * n).map(|k| f.mul(f.mul(left[k / n], a[k]), right[k % n])).collect()
}

/// Determinant of a row-major `n x n` block by elimination, with closed
/// forms for `n <= 3`.
pub(crate) fn det_raw(f: &Field, n: usize, a: &[Elem]) -> Elem {
    match n {
        1 => a[0],
        2 => f.sub(f.mul(a[0], a[3]), f.mul(a[1], a[2])),
        3 => {
            let m = |x, y, z| f.mul(f.mul(x, y), z);
            let plus = f.add(f.add(m(a[0], a[4], a[8]), m(a[1], a[5], a[6])), m(a[2], a[3], a[7]));
            let minus = f.add(f.add(m(a[2], a[4], a[6]), m(a[0], a[5], a[7])), m(a[1], a[3], a[8]));
            f.sub(plus, minus)
        }
        _ => det_elimination(f, n, a.to_vec()),
    }
}

fn det_elimination(f: &Field, n: usize, mut a: Vec<Elem>) -> Elem {
    let mut det = Elem::ONE;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
            return Elem::ZERO;
        };
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
            }
            det = f.neg(det);
        }
        let p = a[col * n + col];
        det = f.mul(det, p);
        let p_inv = f.inv(p).expect("pivot is nonzero");
        for r in col + 1..n {
            let factor = f.mul(a[r * n + col], p_inv);
            if factor.is_zero() {
                continue;
            }
            for j in col..n {
                let t = f.mul(factor, a[col * n + j]);
                a[r * n + j] = f.sub(a[r * n + j], t);
            }
        }
    }
    det
}
