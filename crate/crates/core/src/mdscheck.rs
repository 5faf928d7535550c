//! MDS, involutory and representative-matrix predicates.
//!
//! A representative matrix has an all-ones first row and first column; its
//! lower-right `(n-1) x (n-1)` block is called the interior `R`. For
//! `n <= 4` the five interior conditions checked by [`check_r`] are necessary
//! and sufficient for the representative to be MDS. From `n = 5` on, minors
//! of middle order escape them and a full minor scan is still required.

use std::ops::ControlFlow;
use std::sync::LazyLock;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::matlin::{det_raw, SquareMatrix};

/// Index subsets by order: `SMALL_SUBSETS[n][k]` lists the `k`-subsets of
/// `0..n` in lexicographic order, for `n <= 4` (69 minors at `n = 4`).
static SMALL_SUBSETS: LazyLock<Vec<Vec<Vec<Vec<usize>>>>> =
    LazyLock::new(|| (0..=4).map(|n| (0..=n).map(|k| subsets(n, k)).collect()).collect());

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Visits every vanishing minor in ascending order, 1x1 first.
fn scan_minors(
    f: &Field,
    n: usize,
    a: &[Elem],
    mut on_zero: impl FnMut(&[usize], &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    // Order-1 minors are the entries; check them before building any table.
    for i in 0..n {
        for j in 0..n {
            if a[i * n + j].is_zero() {
                on_zero(&[i], &[j])?;
            }
        }
    }
    let mut buf = Vec::with_capacity(n * n);
    let mut scan_order = |sets: &[Vec<usize>]| -> ControlFlow<()> {
        for rows in sets {
            for cols in sets {
                buf.clear();
                for &i in rows {
                    buf.extend(cols.iter().map(|&j| a[i * n + j]));
                }
                if det_raw(f, rows.len(), &buf).is_zero() {
                    on_zero(rows, cols)?;
                }
            }
        }
        ControlFlow::Continue(())
    };
    for k in 2..=n {
        if n <= 4 {
            scan_order(&SMALL_SUBSETS[n][k])?;
        } else {
            scan_order(&subsets(n, k))?;
        }
    }
    ControlFlow::Continue(())
}

pub(crate) fn is_mds_raw(f: &Field, n: usize, a: &[Elem]) -> bool {
    scan_minors(f, n, a, |_, _| ControlFlow::Break(())).is_continue()
}

/// Every square sub-matrix, of every order, is non-singular.
pub fn is_mds(m: &SquareMatrix) -> bool {
    is_mds_raw(m.field(), m.order(), m.entries())
}

/// The first vanishing minor in evaluation order, as `(rows, cols)`.
pub fn first_zero_minor(m: &SquareMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut found = None;
    let _ = scan_minors(m.field(), m.order(), m.entries(), |r, c| {
        found = Some((r.to_vec(), c.to_vec()));
        ControlFlow::Break(())
    });
    found
}

/// `m * m == I`.
pub fn is_involutory(m: &SquareMatrix) -> bool {
    m.mat_mul(m).map(|sq| sq == SquareMatrix::identity(m.field().clone(), m.order())).unwrap_or(false)
}

/// The five interior conditions, numbered as in the classical statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RCondition {
    /// 1: R itself is MDS.
    NotMds,
    /// 2: replacing a row, a column, or both by all ones keeps R non-singular.
    ModifiedSingular,
    /// 3: no entry equals one.
    EntryOne,
    /// 4: entries within each row and each column are distinct.
    RepeatInRowOrCol,
    /// 5: R - U is non-singular, U the all-ones matrix.
    RMinusUSingular,
}

impl RCondition {
    pub fn number(self) -> u8 {
        match self {
            RCondition::NotMds => 1,
            RCondition::ModifiedSingular => 2,
            RCondition::EntryOne => 3,
            RCondition::RepeatInRowOrCol => 4,
            RCondition::RMinusUSingular => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RCondition::NotMds => "not_mds",
            RCondition::ModifiedSingular => "modified_singular",
            RCondition::EntryOne => "entry_one",
            RCondition::RepeatInRowOrCol => "repeat_in_row_or_col",
            RCondition::RMinusUSingular => "r_minus_u_singular",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Line {
    Row(usize),
    Col(usize),
}

/// Where a condition failed. Indices are 0-based into R.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Entry { row: usize, col: usize },
    Repeat { line: Line, first: usize, second: usize },
    Minor { rows: Vec<usize>, cols: Vec<usize> },
    Replacement { row: Option<usize>, col: Option<usize> },
    Whole,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RViolation {
    pub kind: RCondition,
    pub witness: Witness,
}

impl RViolation {
    /// Report form with 1-based indices.
    pub fn to_json(&self) -> Value {
        let one = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        let witness = match &self.witness {
            Witness::Entry { row, col } => json!({"entry": [row + 1, col + 1]}),
            Witness::Repeat { line, first, second } => {
                let (kind, idx) = match line {
                    Line::Row(i) => ("row", i),
                    Line::Col(j) => ("col", j),
                };
                json!({"repeat": {kind: idx + 1, "positions": [first + 1, second + 1]}})
            }
            Witness::Minor { rows, cols } => json!({"minor": {"rows": one(rows), "cols": one(cols)}}),
            Witness::Replacement { row, col } => {
                json!({"replaced": {"row": row.map(|i| i + 1), "col": col.map(|j| j + 1)}})
            }
            Witness::Whole => json!("R-U"),
        };
        json!({"condition": self.kind.number(), "kind": self.kind.name(), "witness": witness})
    }
}

/// Evaluates the interior conditions in fail-fast order 3, 4, 1, 5, 2. Every
/// violation of a failing class is reported, then evaluation stops.
fn scan_r(
    f: &Field,
    k: usize,
    r: &[Elem],
    mut sink: impl FnMut(RViolation) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut failed = false;
    let mut emit = |kind, witness, failed: &mut bool| {
        *failed = true;
        sink(RViolation { kind, witness })
    };

    for i in 0..k {
        for j in 0..k {
            if r[i * k + j] == Elem::ONE {
                emit(RCondition::EntryOne, Witness::Entry { row: i, col: j }, &mut failed)?;
            }
        }
    }
    if failed {
        return ControlFlow::Break(());
    }

    for line in 0..k {
        for a in 0..k {
            for b in a + 1..k {
                if r[line * k + a] == r[line * k + b] {
                    let w = Witness::Repeat { line: Line::Row(line), first: a, second: b };
                    emit(RCondition::RepeatInRowOrCol, w, &mut failed)?;
                }
                if r[a * k + line] == r[b * k + line] {
                    let w = Witness::Repeat { line: Line::Col(line), first: a, second: b };
                    emit(RCondition::RepeatInRowOrCol, w, &mut failed)?;
                }
            }
        }
    }
    if failed {
        return ControlFlow::Break(());
    }

    let mut minors = Vec::new();
    let _ = scan_minors(f, k, r, |rows, cols| {
        minors.push(Witness::Minor { rows: rows.to_vec(), cols: cols.to_vec() });
        ControlFlow::Continue(())
    });
    for w in minors {
        emit(RCondition::NotMds, w, &mut failed)?;
    }
    if failed {
        return ControlFlow::Break(());
    }

    let r_minus_u: Vec<Elem> = r.iter().map(|&x| f.sub(x, Elem::ONE)).collect();
    if det_raw(f, k, &r_minus_u).is_zero() {
        emit(RCondition::RMinusUSingular, Witness::Whole, &mut failed)?;
        return ControlFlow::Break(());
    }

    let mut modified = r.to_vec();
    let mut replaced_singular = |row: Option<usize>, col: Option<usize>| {
        modified.copy_from_slice(r);
        if let Some(i) = row {
            modified[i * k..(i + 1) * k].fill(Elem::ONE);
        }
        if let Some(j) = col {
            (0..k).for_each(|i| modified[i * k + j] = Elem::ONE);
        }
        det_raw(f, k, &modified).is_zero()
    };
    let cases = (0..k)
        .map(|i| (Some(i), None))
        .chain((0..k).map(|j| (None, Some(j))))
        .chain((0..k).flat_map(|i| (0..k).map(move |j| (Some(i), Some(j)))));
    for (row, col) in cases {
        if replaced_singular(row, col) {
            emit(RCondition::ModifiedSingular, Witness::Replacement { row, col }, &mut failed)?;
        }
    }
    if failed {
        ControlFlow::Break(())
    } else {
        ControlFlow::Continue(())
    }
}

pub(crate) fn passes_r_raw(f: &Field, k: usize, r: &[Elem]) -> bool {
    scan_r(f, k, r, |_| ControlFlow::Break(())).is_continue()
}

/// Violations of the interior conditions, empty when R passes.
pub fn check_r(r: &SquareMatrix) -> Vec<RViolation> {
    let mut out = Vec::new();
    let _ = scan_r(r.field(), r.order(), r.entries(), |v| {
        out.push(v);
        ControlFlow::Continue(())
    });
    out
}

/// Closed-form test that the 3x3 representative with interior
/// `[[a, b], [c, d]]` is MDS:
/// (i) no entry is 0 or 1, (ii) `b != a`, `c != a`, `d != b`, `d != c`,
/// `ad != bc`, and (iii) `(a - 1)(d - 1) != (b - 1)(c - 1)`.
///
/// In characteristic 2, (iii) is `d + 1 != (a + 1)^-1 (b + 1)(c + 1)`.
pub fn check_r_order2(f: &Field, a: Elem, b: Elem, c: Elem, d: Elem) -> bool {
    let bad = |x: Elem| x.is_zero() || x == Elem::ONE;
    if bad(a) || bad(b) || bad(c) || bad(d) {
        return false;
    }
    if b == a || c == a || d == b || d == c || f.mul(a, d) == f.mul(b, c) {
        return false;
    }
    let m1 = |x| f.sub(x, Elem::ONE);
    f.mul(m1(a), m1(d)) != f.mul(m1(b), m1(c))
}

/// First row and first column all ones.
pub fn has_unit_border(m: &SquareMatrix) -> bool {
    let n = m.order();
    (0..n).all(|i| m.get(0, i) == Elem::ONE && m.get(i, 0) == Elem::ONE)
}

/// The lower-right `(n-1) x (n-1)` block.
pub fn interior(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.order();
    if n < 2 {
        return Err(Error::Dimension("a representative matrix has order at least 2".into()));
    }
    let idx: Vec<usize> = (1..n).collect();
    m.submatrix(&idx, &idx)
}

/// Borders `r` with an all-ones first row and column.
pub fn representative_from_interior(r: &SquareMatrix) -> SquareMatrix {
    SquareMatrix::new_unchecked(r.field().clone(), r.order() + 1, bordered(r.order(), r.entries()))
}

pub(crate) fn bordered(k: usize, r: &[Elem]) -> Vec<Elem> {
    let n = k + 1;
    let mut out = vec![Elem::ONE; n * n];
    for i in 0..k {
        out[(i + 1) * n + 1..(i + 2) * n].copy_from_slice(&r[i * k..(i + 1) * k]);
    }
    out
}

/// MDS test for a representative matrix via its interior; order five and
/// above also runs the full minor scan.
pub fn is_representative_mds(m1: &SquareMatrix) -> Result<bool> {
    if m1.order() < 2 || !has_unit_border(m1) {
        return Err(Error::usage("expected a representative matrix (all-ones first row and column)"));
    }
    let r = interior(m1)?;
    let passes = passes_r_raw(r.field(), r.order(), r.entries());
    Ok(passes && (m1.order() <= 4 || is_mds(m1)))
}

/// Interior of a 4x4 representative in nested form: `R = D1 * M1' * D2` with
/// `M1' = [[1,1,1],[1,a,b],[1,c,d]]`, `D1 = diag(lambda)`, `D2 = diag(1, theta)`.
pub fn nested_interior(f: &Field, abcd: [Elem; 4], lambda: [Elem; 3], theta: [Elem; 2]) -> SquareMatrix {
    let [a, b, c, d] = abcd;
    let inner = [Elem::ONE, Elem::ONE, Elem::ONE, Elem::ONE, a, b, Elem::ONE, c, d];
    let d2 = [Elem::ONE, theta[0], theta[1]];
    SquareMatrix::new_unchecked(f.clone(), 3, crate::matlin::sandwich_raw(f, 3, &lambda, &inner, &d2))
}

/// `(row, col)` deleted from the 4x4 representative to obtain the 3x3 minor
/// matching each of the fifteen nested inequalities, 0-based.
pub const NESTED_INEQUALITY_MINORS: [(usize, usize); 15] = [
    (3, 3), (3, 2), (3, 1), (3, 0),
    (2, 3), (2, 2), (2, 1), (2, 0),
    (1, 3), (1, 2), (1, 1), (1, 0),
    (0, 3), (0, 2), (0, 1),
];

/// The fifteen characteristic-2 polynomials whose non-vanishing is the
/// row/column replacement condition on the nested 4x4 interior.
pub fn nested_inequalities(f: &Field, abcd: [Elem; 4], lambda: [Elem; 3], theta: [Elem; 2]) -> Result<[Elem; 15]> {
    if f.characteristic() != 2 {
        return Err(Error::domain("the nested inequalities are stated for characteristic 2"));
    }
    let [a, b, c, d] = abcd;
    let [l1, l2, l3] = lambda;
    let [t2, t3] = theta;
    let p = |xs: &[Elem]| xs.iter().fold(Elem::ONE, |acc, &x| f.mul(acc, x));
    let s = |xs: &[Elem]| xs.iter().fold(Elem::ZERO, |acc, &x| f.add(acc, x));
    let bc = f.mul(b, c);
    let ad = f.mul(a, d);
    Ok([
        s(&[p(&[a, l1, l2, t2]), p(&[a, l2, t2]), p(&[l1, l2, t2]), p(&[l1, t2]), l1, l2]),
        s(&[p(&[b, l1, l2, t3]), p(&[b, l2, t3]), p(&[l1, l2, t3]), p(&[l1, t3]), l1, l2]),
        s(&[p(&[a, l1, l2, t2, t3]), p(&[b, l1, l2, t2, t3]), p(&[a, l2, t2]), p(&[b, l2, t3]), p(&[l1, t2]), p(&[l1, t3])]),
        s(&[
            p(&[a, l1, l2, t2, t3]), p(&[b, l1, l2, t2, t3]), p(&[a, l1, l2, t2]),
            p(&[b, l1, l2, t3]), p(&[l1, l2, t2]), p(&[l1, l2, t3]),
        ]),
        s(&[p(&[c, l1, l3, t2]), p(&[c, l3, t2]), p(&[l1, l3, t2]), p(&[l1, t2]), l1, l3]),
        s(&[p(&[d, l1, l3, t3]), p(&[d, l3, t3]), p(&[l1, l3, t3]), p(&[l1, t3]), l1, l3]),
        s(&[p(&[c, l1, l3, t2, t3]), p(&[d, l1, l3, t2, t3]), p(&[c, l3, t2]), p(&[d, l3, t3]), p(&[l1, t2]), p(&[l1, t3])]),
        s(&[
            p(&[c, l1, l3, t2, t3]), p(&[d, l1, l3, t2, t3]), p(&[c, l1, l3, t2]),
            p(&[d, l1, l3, t3]), p(&[l1, l3, t2]), p(&[l1, l3, t3]),
        ]),
        s(&[p(&[a, l2, l3, t2]), p(&[c, l2, l3, t2]), p(&[a, l2, t2]), p(&[c, l3, t2]), l2, l3]),
        s(&[p(&[b, l2, l3, t3]), p(&[d, l2, l3, t3]), p(&[b, l2, t3]), p(&[d, l3, t3]), l2, l3]),
        s(&[p(&[bc, l2, l3, t2, t3]), p(&[ad, l2, l3, t2, t3]), p(&[a, l2, t2]), p(&[c, l3, t2]), p(&[b, l2, t3]), p(&[d, l3, t3])]),
        s(&[
            p(&[bc, l2, l3, t2, t3]), p(&[ad, l2, l3, t2, t3]), p(&[a, l2, l3, t2]),
            p(&[c, l2, l3, t2]), p(&[b, l2, l3, t3]), p(&[d, l2, l3, t3]),
        ]),
        s(&[p(&[a, l1, l2, t2]), p(&[c, l1, l3, t2]), p(&[a, l2, l3, t2]), p(&[c, l2, l3, t2]), p(&[l1, l2, t2]), p(&[l1, l3, t2])]),
        s(&[p(&[b, l1, l2, t3]), p(&[d, l1, l3, t3]), p(&[b, l2, l3, t3]), p(&[d, l2, l3, t3]), p(&[l1, l2, t3]), p(&[l1, l3, t3])]),
        s(&[
            p(&[bc, l2, l3, t2, t3]), p(&[ad, l2, l3, t2, t3]), p(&[a, l1, l2, t2, t3]),
            p(&[b, l1, l2, t2, t3]), p(&[c, l1, l3, t2, t3]), p(&[d, l1, l3, t2, t3]),
        ]),
    ])
}
