//! Enumeration and counting of representative, MDS and involutory MDS
//! matrices.
//!
//! Every MDS matrix is `D1 * M1 * D2` for a unique representative `M1`, so the
//! engine enumerates representatives (through their interiors `R`) and
//! expands them with diagonal pairs. Work is split into blocks of the outer
//! loop; counting runs blocks on worker threads and can checkpoint after
//! each one.
//!
//! Routes:
//! * order 2: `R = [[a]]`, one block per nonzero `a`;
//! * order 3: the closed-form test on `R = [[a, b], [c, d]]`, one block per
//!   tuple of `(F*)^4`;
//! * order 4: the nested parameterization `R = D1 * [[1,1,1],[1,a,b],[1,c,d]] * D2`,
//!   one block per admissible `(a, b, c, d)`;
//! * literal: every `R` in `(F*)^{(n-1)^2}`, one block per first row of `R`,
//!   with a full minor scan of `M1` from order 5 on.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decomp::{certify_raw, member_diagonals};
use crate::error::{Error, Result};
use crate::gf::{Elem, Field};
use crate::matlin::{sandwich_raw, SquareMatrix};
use crate::mdscheck::{bordered, check_r_order2, is_mds_raw, passes_r_raw};

/// Default bound on the number of matrices a stream may produce.
pub const DEFAULT_STREAM_LIMIT: u128 = 100_000_000;

/// Streams whose exact size is unknown are counted first when the counting
/// work stays below this many candidates; otherwise the upper bound decides.
const EXACT_GUARD_WORK: f64 = 1e9;

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Representatives,
    AllMds,
    AllInvolutory,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Representatives => "representatives",
            Kind::AllMds => "mds",
            Kind::AllInvolutory => "involutory",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "representatives" | "reps" => Ok(Kind::Representatives),
            "mds" | "all-mds" => Ok(Kind::AllMds),
            "involutory" | "all-involutory" => Ok(Kind::AllInvolutory),
            _ => Err(Error::usage(format!("unknown kind {s:?} (expected representatives, mds or involutory)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Stream,
    CountOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Fastest available route for the order.
    Auto,
    /// Scan every interior in `(F*)^{(n-1)^2}`.
    Literal,
}

#[derive(Clone, Debug)]
pub struct EnumSpec {
    pub field: Field,
    pub n: usize,
    pub kind: Kind,
    pub mode: Mode,
    pub route: Route,
    /// Stream cardinality bound.
    pub limit: u128,
}

impl EnumSpec {
    pub fn new(field: Field, n: usize, kind: Kind) -> Result<Self> {
        if n < 2 {
            return Err(Error::usage("order must be at least 2"));
        }
        Ok(EnumSpec { field, n, kind, mode: Mode::Stream, route: Route::Auto, limit: DEFAULT_STREAM_LIMIT })
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    pub fn with_limit(mut self, limit: u128) -> Self {
        self.limit = limit;
        self
    }

    fn plan_name(&self) -> &'static str {
        match plan_kind(self) {
            PlanKind::Order2 => "order2",
            PlanKind::Closed3 => "closed3",
            PlanKind::Nested4 => "nested4",
            PlanKind::Literal => "literal",
        }
    }

    /// Identifies the work split; checkpoints are tied to it.
    pub fn canonical(&self) -> String {
        format!("field={};n={};kind={};route={}", self.field.label(), self.n, self.kind, self.plan_name())
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PlanKind {
    Order2,
    Closed3,
    Nested4,
    Literal,
}

fn plan_kind(spec: &EnumSpec) -> PlanKind {
    match (spec.route, spec.n) {
        (Route::Literal, _) => PlanKind::Literal,
        (Route::Auto, 2) => PlanKind::Order2,
        (Route::Auto, 3) => PlanKind::Closed3,
        (Route::Auto, 4) if spec.field.order() - 1 <= 64 => PlanKind::Nested4,
        _ => PlanKind::Literal,
    }
}

/// One representative found by a block visit.
struct Found<'a> {
    /// Interior, row-major; present when requested.
    r: Option<&'a [Elem]>,
    /// Certificate with `alpha_1 = sqrt(d_11)`, when requested and it exists.
    cert: Option<&'a [Elem]>,
}

enum Plan {
    Order2,
    Closed3,
    Nested4(Box<Nested>),
    Literal,
}

struct Engine {
    field: Field,
    n: usize,
    plan: Plan,
    blocks: usize,
}

impl Engine {
    fn new(spec: &EnumSpec) -> Result<Self> {
        let f = spec.field.clone();
        let n = spec.n;
        let g = f.order() - 1;
        let pow = |e: usize| -> Result<usize> {
            u32::try_from(e)
                .ok()
                .and_then(|e| g.checked_pow(e))
                .and_then(|v| usize::try_from(v).ok())
                .ok_or_else(|| Error::Overflow(format!("block count for order {n} over {}", f.label())))
        };
        let (plan, blocks) = match plan_kind(spec) {
            PlanKind::Order2 => (Plan::Order2, pow(1)?),
            PlanKind::Closed3 => (Plan::Closed3, pow(4)?),
            PlanKind::Nested4 => {
                let nested = Nested::new(&f);
                let blocks = nested.blocks.len();
                (Plan::Nested4(Box::new(nested)), blocks)
            }
            PlanKind::Literal => (Plan::Literal, pow(n - 1)?),
        };
        Ok(Engine { field: f, n, plan, blocks })
    }

    /// Candidates examined by a full count, for guard decisions.
    fn work(&self) -> f64 {
        let g = (self.field.order() - 1) as f64;
        match self.plan {
            Plan::Order2 => g,
            Plan::Closed3 => g.powi(4),
            Plan::Nested4(_) => self.blocks as f64 * g.powi(5),
            Plan::Literal => g.powi(((self.n - 1) * (self.n - 1)) as i32),
        }
    }

    /// Interiors of block `idx` are visited in ascending order except on the
    /// nested route, whose callers sort when order matters.
    fn visit_block(&self, idx: usize, need_r: bool, need_cert: bool, out: &mut dyn FnMut(Found<'_>)) {
        let f = &self.field;
        let k = self.n - 1;
        let g = f.order() - 1;
        let mut cert_buf = Vec::new();
        let mut emit = |r: &[Elem], maybe_cert: bool, out: &mut dyn FnMut(Found<'_>)| {
            let cert = if need_cert && maybe_cert {
                certify_interior(f, k, r).map(|a| {
                    cert_buf = a;
                    cert_buf.as_slice()
                })
            } else {
                None
            };
            out(Found { r: need_r.then_some(r), cert });
        };
        match &self.plan {
            Plan::Order2 => {
                let r = [Elem::from_code(idx as u64 + 1)];
                if r[0] != Elem::ONE {
                    emit(&r, true, out);
                }
            }
            Plan::Closed3 => {
                let r = digits_to_elems(idx, g, 4);
                let ok = if f.characteristic() == 2 {
                    check_r_order2(f, r[0], r[1], r[2], r[3])
                } else {
                    passes_r_raw(f, 2, &r)
                };
                if ok {
                    emit(&r, true, out);
                }
            }
            Plan::Nested4(nested) => {
                let mut r = [Elem::ZERO; 9];
                nested.run(idx, &mut |hit| {
                    let wants_cert = need_cert && hit.cert_candidate;
                    if need_r || wants_cert {
                        nested.interior(idx, &hit, &mut r);
                        emit(&r, hit.cert_candidate, out);
                    } else {
                        out(Found { r: None, cert: None });
                    }
                });
            }
            Plan::Literal => {
                let mut r = vec![Elem::ONE; k * k];
                r[..k].copy_from_slice(&digits_to_elems(idx, g, k));
                let rest = k * k - k;
                let mut digits = vec![0u64; rest];
                loop {
                    for (slot, &d) in r[k..].iter_mut().zip(&digits) {
                        *slot = Elem::from_code(d + 1);
                    }
                    if passes_r_raw(f, k, &r) && (self.n <= 4 || is_mds_raw(f, self.n, &bordered(k, &r))) {
                        emit(&r, true, out);
                    }
                    // Odometer, last entry fastest.
                    let mut pos = rest;
                    loop {
                        if pos == 0 {
                            return;
                        }
                        pos -= 1;
                        digits[pos] += 1;
                        if digits[pos] < g {
                            break;
                        }
                        digits[pos] = 0;
                    }
                }
            }
        }
    }
}

/// `count` nonzero elements from the base-`(q-1)` digits of `idx`, most
/// significant first.
fn digits_to_elems(mut idx: usize, g: u64, count: usize) -> Vec<Elem> {
    let mut out = vec![Elem::ZERO; count];
    for slot in out.iter_mut().rev() {
        *slot = Elem::from_code(idx as u64 % g + 1);
        idx /= g as usize;
    }
    out
}

fn certify_interior(f: &Field, k: usize, r: &[Elem]) -> Option<Vec<Elem>> {
    let n = k + 1;
    let m1 = SquareMatrix::new_unchecked(f.clone(), n, bordered(k, r));
    let inv = m1.inverse().ok()?;
    certify_raw(f, n, m1.entries(), inv.entries()).ok()
}

/// A passing `(lambda, theta)` for one nested block, as discrete logs.
struct Hit {
    l: [usize; 3],
    t: [usize; 3],
    cert_candidate: bool,
}

/// Table-driven kernel for order 4, valid while `q - 1 <= 64` so that sets of
/// logs fit in a `u64` mask. All conditions are in log form: an interior
/// entry is `R_kj = lambda_k x_kj theta_j` with `x` the 3x3 block and
/// `theta_1 = 1`.
struct Nested {
    q: usize,
    g: usize,
    /// Code to log; `log[0]` unused.
    log: Vec<usize>,
    /// Log to code, three periods long so sums of three logs need no reduction.
    exp: Vec<u8>,
    add: Vec<u8>,
    neg: Vec<u8>,
    /// Admissible `(a, b, c, d)` codes, ascending.
    blocks: Vec<[u8; 4]>,
}

impl Nested {
    fn new(f: &Field) -> Nested {
        let q = f.order() as usize;
        let g = q - 1;
        let tables = f.tables().expect("small fields carry log tables");
        let log: Vec<usize> = tables.log.iter().map(|&l| l as usize).collect();
        let exp: Vec<u8> = (0..3 * g).map(|i| tables.exp[i % g] as u8).collect();
        let e = |c: usize| Elem::from_code(c as u64);
        let mut add = vec![0u8; q * q];
        for x in 0..q {
            for y in 0..q {
                add[x * q + y] = f.add(e(x), e(y)).code() as u8;
            }
        }
        let neg = (0..q).map(|x| f.neg(e(x)).code() as u8).collect();
        let mut blocks = Vec::new();
        for idx in 0..g.pow(4) {
            let r = digits_to_elems(idx, g as u64, 4);
            let ok = if f.characteristic() == 2 {
                check_r_order2(f, r[0], r[1], r[2], r[3])
            } else {
                passes_r_raw(f, 2, &r)
            };
            if ok {
                blocks.push([r[0], r[1], r[2], r[3]].map(|x| x.code() as u8));
            }
        }
        Nested { q, g, log, exp, add, neg, blocks }
    }

    #[inline]
    fn mul(&self, x: u8, y: u8) -> u8 {
        if x == 0 || y == 0 {
            0
        } else {
            self.exp[self.log[x as usize] + self.log[y as usize]]
        }
    }

    #[inline]
    fn sum(&self, x: u8, y: u8) -> u8 {
        self.add[x as usize * self.q + y as usize]
    }

    #[inline]
    fn sub(&self, x: u8, y: u8) -> u8 {
        self.sum(x, self.neg[y as usize])
    }

    #[inline]
    fn inv_log(&self, l: usize) -> usize {
        (self.g - l) % self.g
    }

    fn block_matrix(&self, idx: usize) -> [u8; 9] {
        let [a, b, c, d] = self.blocks[idx];
        [1, 1, 1, 1, a, b, 1, c, d]
    }

    fn interior(&self, idx: usize, hit: &Hit, out: &mut [Elem; 9]) {
        let x = self.block_matrix(idx);
        for k in 0..3 {
            for j in 0..3 {
                let lx = self.log[x[k * 3 + j] as usize];
                out[k * 3 + j] = Elem::from_code(self.exp[hit.l[k] + lx + hit.t[j]] as u64);
            }
        }
    }

    fn run(&self, idx: usize, visit: &mut dyn FnMut(Hit)) {
        let g = self.g;
        let x = self.block_matrix(idx);
        let lx: [usize; 9] = x.map(|c| self.log[c as usize]);

        // cof[k][j] = (-1)^{k+j} minor of x deleting row k and column j.
        let mut cof = [0u8; 9];
        for k in 0..3 {
            for j in 0..3 {
                let rows: Vec<usize> = (0..3).filter(|&i| i != k).collect();
                let cols: Vec<usize> = (0..3).filter(|&i| i != j).collect();
                let p = self.mul(x[rows[0] * 3 + cols[0]], x[rows[1] * 3 + cols[1]]);
                let s = self.mul(x[rows[0] * 3 + cols[1]], x[rows[1] * 3 + cols[0]]);
                let m = self.sub(p, s);
                cof[k * 3 + j] = if (k + j) % 2 == 0 { m } else { self.neg[m as usize] };
            }
        }

        // lambda-only conditions. Column j of R replaced by ones is
        // non-singular iff Q_j = lambda_j * sum_k cof[k][j] / lambda_k != 0.
        let mut lam_ok = vec![0u64; g * g];
        let mut lam2_ok = vec![0u64; g];
        let mut qv = vec![[0u8; 3]; g * g * g];
        for l1 in 1..g {
            for l2 in 1..g {
                if l2 == l1 {
                    continue;
                }
                for l3 in 1..g {
                    if l3 == l1 || l3 == l2 {
                        continue;
                    }
                    let c2 = [l1, (lx[4] + l2) % g, (lx[7] + l3) % g];
                    let c3 = [l1, (lx[5] + l2) % g, (lx[8] + l3) % g];
                    if c2[0] == c2[1] || c2[0] == c2[2] || c2[1] == c2[2] {
                        continue;
                    }
                    if c3[0] == c3[1] || c3[0] == c3[2] || c3[1] == c3[2] {
                        continue;
                    }
                    let l = [l1, l2, l3];
                    let mut q = [0u8; 3];
                    let mut ok = true;
                    for j in 0..3 {
                        let mut acc = 0u8;
                        for k in 0..3 {
                            acc = self.sum(acc, self.mul(cof[k * 3 + j], self.exp[self.inv_log(l[k])]));
                        }
                        q[j] = self.mul(acc, self.exp[l[j]]);
                        ok &= q[j] != 0;
                    }
                    if ok {
                        lam_ok[l1 * g + l2] |= 1 << l3;
                        lam2_ok[l1] |= 1 << l2;
                        qv[(l1 * g + l2) * g + l3] = q;
                    }
                }
            }
        }
        let lam1_any: u64 = (0..g).filter(|&l1| lam2_ok[l1] != 0).fold(0, |m, l1| m | 1 << l1);
        if lam1_any == 0 {
            return;
        }

        let minus_one = self.neg[1];
        // elog[k][l][j]: log of (R_kj - 1) for lambda_k = g^l; valid where row_ok.
        let mut elog = vec![[0usize; 3]; 3 * g];
        for t2 in 1..g {
            for t3 in 1..g {
                if t2 == t3 {
                    continue;
                }
                let t = [0, t2, t3];
                // Rows 2 and 3 of R, up to their lambda factor: (1, a t2, b t3), (1, c t2, d t3).
                let r1 = [0, (lx[4] + t2) % g, (lx[5] + t3) % g];
                let r2 = [0, (lx[7] + t2) % g, (lx[8] + t3) % g];
                if r1[1] == 0 || r1[2] == 0 || r1[1] == r1[2] || r2[1] == 0 || r2[2] == 0 || r2[1] == r2[2] {
                    continue;
                }
                // Row i of R replaced by ones: P_i = theta_i * sum_j cof[i][j] / theta_j.
                let mut pv = [0u8; 3];
                let mut p_ok = true;
                for i in 0..3 {
                    let mut acc = 0u8;
                    for j in 0..3 {
                        acc = self.sum(acc, self.mul(cof[i * 3 + j], self.exp[self.inv_log(t[j])]));
                    }
                    pv[i] = self.mul(acc, self.exp[t[i]]);
                    p_ok &= pv[i] != 0;
                }
                if !p_ok {
                    continue;
                }

                let mut row_ok = [0u64; 3];
                for k in 0..3 {
                    for l in 1..g {
                        let mut ok = true;
                        for j in 0..3 {
                            let rl = (l + lx[k * 3 + j] + t[j]) % g;
                            if rl == 0 {
                                ok = false;
                                break;
                            }
                            let e = self.sum(self.exp[rl], minus_one);
                            elog[k * g + l][j] = self.log[e as usize];
                        }
                        if ok {
                            row_ok[k] |= 1 << l;
                        }
                    }
                }
                // The 2x2 minors of E = R - U are the determinants of R with a
                // row and a column both replaced by ones.
                let minors_ok = |u: &[usize; 3], v: &[usize; 3]| {
                    (u[0] + v[1]) % g != (u[1] + v[0]) % g
                        && (u[0] + v[2]) % g != (u[2] + v[0]) % g
                        && (u[1] + v[2]) % g != (u[2] + v[1]) % g
                };
                let mut c12 = vec![0u64; g];
                for l2 in bits(row_ok[1]) {
                    for l3 in bits(row_ok[2]) {
                        if minors_ok(&elog[g + l2], &elog[2 * g + l3]) {
                            c12[l2] |= 1 << l3;
                        }
                    }
                }
                for l1 in bits(row_ok[0] & lam1_any) {
                    let e0 = elog[l1];
                    let mut c02 = 0u64;
                    for l3 in bits(row_ok[2]) {
                        if minors_ok(&e0, &elog[2 * g + l3]) {
                            c02 |= 1 << l3;
                        }
                    }
                    for l2 in bits(row_ok[1] & lam2_ok[l1]) {
                        let e1 = elog[g + l2];
                        if !minors_ok(&e0, &e1) {
                            continue;
                        }
                        let m3 = lam_ok[l1 * g + l2] & row_ok[2] & c02 & c12[l2];
                        if m3 == 0 {
                            continue;
                        }
                        // det(E) by expansion along row 3.
                        let m2x2 = |a: usize, b: usize| {
                            let p = self.exp[e0[a] + e1[b]];
                            let s = self.exp[e0[b] + e1[a]];
                            self.log[self.sub(p, s) as usize]
                        };
                        let (k0, k1, k2) = (m2x2(1, 2), m2x2(0, 2), m2x2(0, 1));
                        for l3 in bits(m3) {
                            let e2 = &elog[2 * g + l3];
                            let x0 = self.exp[e2[0] + k0];
                            let x1 = self.exp[e2[1] + k1];
                            let x2 = self.exp[e2[2] + k2];
                            if self.sum(x0, x2) == x1 {
                                continue;
                            }
                            // An involutory certificate forces d_{i,1} = d_{1,i},
                            // which here reads P_i = Q_i.
                            let cert_candidate = pv == qv[(l1 * g + l2) * g + l3];
                            visit(Hit { l: [l1, l2, l3], t, cert_candidate });
                        }
                    }
                }
            }
        }
    }
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Representative and certified-representative tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub representatives: u128,
    pub certified: u128,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        self.representatives += other.representatives;
        self.certified += other.certified;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
struct TallyDoc {
    representatives: String,
    certified: String,
}

impl From<Tally> for TallyDoc {
    fn from(t: Tally) -> Self {
        TallyDoc { representatives: t.representatives.to_string(), certified: t.certified.to_string() }
    }
}

impl TryFrom<&TallyDoc> for Tally {
    type Error = Error;

    fn try_from(d: &TallyDoc) -> Result<Self> {
        let parse = |s: &str| s.parse::<u128>().map_err(|_| Error::Checkpoint(format!("bad count {s:?}")));
        Ok(Tally { representatives: parse(&d.representatives)?, certified: parse(&d.certified)? })
    }
}

/// On-disk progress record of a count.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Canonical spec string the digest was taken over.
    pub spec: String,
    /// SHA-256 of `spec`, hex.
    pub digest: String,
    pub total_blocks: usize,
    /// Blocks `0..done_prefix` are complete.
    pub done_prefix: usize,
    /// Further completed blocks beyond the prefix.
    pub done_extra: BTreeSet<usize>,
    /// Counts carried over from earlier sessions.
    base: TallyDoc,
    /// Counts of the session that wrote the file, one per worker.
    workers: Vec<TallyDoc>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn completed(&self) -> usize {
        self.done_prefix + self.done_extra.len()
    }

    /// Sum of carried-over and per-worker counts.
    pub fn tally(&self) -> Result<Tally> {
        let mut t = Tally::try_from(&self.base)?;
        for w in &self.workers {
            t.merge(Tally::try_from(w)?);
        }
        Ok(t)
    }

    fn done_flags(&self) -> Result<Vec<bool>> {
        if self.done_prefix > self.total_blocks || self.done_extra.iter().any(|&b| b >= self.total_blocks) {
            return Err(Error::Checkpoint("block index out of range".into()));
        }
        let mut done = vec![false; self.total_blocks];
        done[..self.done_prefix].fill(true);
        for &b in &self.done_extra {
            done[b] = true;
        }
        Ok(done)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(self).expect("checkpoint serializes"))?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct CountOptions {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many blocks in this session, leaving the count
    /// incomplete; emulates an interrupted run.
    pub stop_after: Option<usize>,
}

impl CountOptions {
    pub fn workers(workers: usize) -> Self {
        CountOptions { workers, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub representatives: u128,
    /// Representatives with an involutory certificate.
    pub certified: u128,
    /// Matrices of the requested kind.
    pub total: u128,
    pub blocks: usize,
    pub blocks_done: usize,
    pub resumed: bool,
    pub complete: bool,
    pub elapsed: Duration,
}

/// Matrices of `kind` generated by the given tallies.
pub fn total_for(field: &Field, n: usize, kind: Kind, tally: Tally) -> Result<u128> {
    let g = (field.order() - 1) as u128;
    let overflow = || Error::Overflow(format!("{kind} total for order {n} over {}", field.label()));
    let pow = |e: usize| u32::try_from(e).ok().and_then(|e| g.checked_pow(e)).ok_or_else(overflow);
    match kind {
        Kind::Representatives => Ok(tally.representatives),
        Kind::AllMds => tally.representatives.checked_mul(pow(2 * n - 1)?).ok_or_else(overflow),
        Kind::AllInvolutory => {
            let signs = if field.characteristic() == 2 { 1 } else { 2 };
            tally.certified.checked_mul(pow(n - 1)?).and_then(|v| v.checked_mul(signs)).ok_or_else(overflow)
        }
    }
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

struct Progress {
    done: Vec<bool>,
    base: Tally,
    workers: Vec<Tally>,
}

impl Progress {
    fn checkpoint(&self, spec: &EnumSpec) -> Checkpoint {
        let done_prefix = self.done.iter().position(|d| !d).unwrap_or(self.done.len());
        let done_extra = (done_prefix..self.done.len()).filter(|&i| self.done[i]).collect();
        Checkpoint {
            version: CHECKPOINT_VERSION,
            spec: spec.canonical(),
            digest: spec.digest(),
            total_blocks: self.done.len(),
            done_prefix,
            done_extra,
            base: self.base.into(),
            workers: self.workers.iter().map(|&t| t.into()).collect(),
            timestamp: now_secs(),
        }
    }
}

/// Counts representatives and certified representatives, then derives the
/// total for the spec's kind. The result does not depend on the worker count
/// or on interruptions resumed from a checkpoint.
pub fn count(spec: &EnumSpec, opts: &CountOptions) -> Result<CountResult> {
    let start = Instant::now();
    let engine = Engine::new(spec)?;
    let workers = opts.workers.max(1);

    let mut resumed = false;
    let mut progress = Progress { done: vec![false; engine.blocks], base: Tally::default(), workers: vec![] };
    if let Some(path) = opts.checkpoint.as_deref().filter(|p| p.exists()) {
        let ck = Checkpoint::load(path)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        if ck.digest != spec.digest() || ck.total_blocks != engine.blocks {
            return Err(Error::Checkpoint(format!(
                "{} was written for a different task ({}); refusing to resume",
                path.display(),
                ck.spec
            )));
        }
        progress.done = ck.done_flags()?;
        progress.base = ck.tally()?;
        resumed = true;
    }
    progress.workers = vec![Tally::default(); workers];

    let pending: Vec<usize> = (0..engine.blocks).filter(|&b| !progress.done[b]).collect();
    let budget = opts.stop_after.map_or(pending.len(), |s| s.min(pending.len()));
    let next = AtomicUsize::new(0);
    let progress = Mutex::new(progress);
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for w in 0..workers {
            let (engine, pending, next, progress, failure) = (&engine, &pending, &next, &progress, &failure);
            scope.spawn(move || loop {
                let slot = next.fetch_add(1, Ordering::Relaxed);
                if slot >= budget || failure.lock().unwrap().is_some() {
                    return;
                }
                let block = pending[slot];
                let mut t = Tally::default();
                engine.visit_block(block, false, true, &mut |found| {
                    t.representatives += 1;
                    t.certified += found.cert.is_some() as u128;
                });
                let mut p = progress.lock().unwrap();
                p.workers[w].merge(t);
                p.done[block] = true;
                if let Some(path) = &opts.checkpoint {
                    if let Err(e) = p.checkpoint(spec).write(path) {
                        failure.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }

    let progress = progress.into_inner().unwrap();
    let mut tally = progress.base;
    progress.workers.iter().for_each(|&t| tally.merge(t));
    let blocks_done = progress.done.iter().filter(|&&d| d).count();
    Ok(CountResult {
        representatives: tally.representatives,
        certified: tally.certified,
        total: total_for(&spec.field, spec.n, spec.kind, tally)?,
        blocks: engine.blocks,
        blocks_done,
        resumed,
        complete: blocks_done == engine.blocks,
        elapsed: start.elapsed(),
    })
}

fn stream_guard(spec: &EnumSpec, engine: &Engine) -> Result<()> {
    let g = (spec.field.order() - 1) as f64;
    let multiplier = match spec.kind {
        Kind::Representatives => 1.0,
        Kind::AllMds => g.powi(2 * spec.n as i32 - 1),
        Kind::AllInvolutory => {
            let signs = if spec.field.characteristic() == 2 { 1.0 } else { 2.0 };
            signs * g.powi(spec.n as i32 - 1)
        }
    };
    // Interior entries avoid 0 and 1.
    let bound = (g - 1.0).max(0.0).powi(((spec.n - 1) * (spec.n - 1)) as i32) * multiplier;
    if bound <= spec.limit as f64 {
        return Ok(());
    }
    let cardinality = if engine.work() <= EXACT_GUARD_WORK {
        count(spec, &CountOptions::workers(1))?.total
    } else {
        bound.min(u128::MAX as f64) as u128
    };
    if cardinality > spec.limit {
        return Err(Error::CardinalityExceeded { cardinality, limit: spec.limit });
    }
    Ok(())
}

/// Calls `sink` on every matrix of the spec's kind in canonical order:
/// representatives ascending by interior (row-major codes); for each, either
/// its diagonal pairs (`D2` outer, `D1` inner, both lexicographic) or its
/// involutory members (certificate signs `alpha` then `-alpha`, each over
/// ascending `lambda`). Returns the number of matrices passed to `sink`.
pub fn stream(spec: &EnumSpec, sink: &mut dyn FnMut(SquareMatrix) -> ControlFlow<()>) -> Result<u128> {
    if spec.mode == Mode::CountOnly {
        return Err(Error::usage("spec is count-only; use count()"));
    }
    let engine = Engine::new(spec)?;
    stream_guard(spec, &engine)?;
    let f = &spec.field;
    let n = spec.n;
    let k = n - 1;
    let need_cert = spec.kind == Kind::AllInvolutory;
    let mut emitted = 0u128;

    let mut expand = |r: &[Elem], cert: Option<&[Elem]>, emitted: &mut u128| -> ControlFlow<()> {
        let m1 = bordered(k, r);
        let mut emit = |entries: Vec<Elem>| {
            *emitted += 1;
            sink(SquareMatrix::new_unchecked(f.clone(), n, entries))
        };
        match spec.kind {
            Kind::Representatives => emit(m1),
            Kind::AllMds => {
                let mut d2 = vec![Elem::ONE; n];
                for_each_nonzero_vector(f, k, &mut |tail| {
                    d2[1..].copy_from_slice(tail);
                    for_each_nonzero_vector(f, n, &mut |d1| emit(sandwich_raw(f, n, d1, &m1, &d2)))
                })
            }
            Kind::AllInvolutory => {
                let Some(alphas) = cert else { return ControlFlow::Continue(()) };
                let negated: Vec<Elem> = alphas.iter().map(|&a| f.neg(a)).collect();
                let mut variants = vec![alphas];
                if f.characteristic() != 2 {
                    variants.push(&negated);
                }
                for alphas in variants {
                    for_each_nonzero_vector(f, k, &mut |lambdas| {
                        let (d1, d2) = member_diagonals(f, alphas, lambdas);
                        emit(sandwich_raw(f, n, &d1, &m1, &d2))
                    })?;
                }
                ControlFlow::Continue(())
            }
        }
    };

    if let Plan::Nested4(_) = engine.plan {
        let mut found: Vec<(Vec<Elem>, Option<Vec<Elem>>)> = Vec::new();
        for b in 0..engine.blocks {
            engine.visit_block(b, true, need_cert, &mut |x| {
                found.push((x.r.expect("interior requested").to_vec(), x.cert.map(<[Elem]>::to_vec)));
            });
        }
        found.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        for (r, cert) in &found {
            if expand(r, cert.as_deref(), &mut emitted).is_break() {
                break;
            }
        }
    } else {
        let mut stop = false;
        for b in 0..engine.blocks {
            engine.visit_block(b, true, need_cert, &mut |x| {
                if !stop && expand(x.r.expect("interior requested"), x.cert, &mut emitted).is_break() {
                    stop = true;
                }
            });
            if stop {
                break;
            }
        }
    }
    Ok(emitted)
}

/// Every vector in `(F*)^len`, lexicographic by code.
fn for_each_nonzero_vector(f: &Field, len: usize, visit: &mut dyn FnMut(&[Elem]) -> ControlFlow<()>) -> ControlFlow<()> {
    let q = f.order();
    let mut v = vec![Elem::ONE; len];
    loop {
        visit(&v)?;
        let mut pos = len;
        loop {
            if pos == 0 {
                return ControlFlow::Continue(());
            }
            pos -= 1;
            let next = v[pos].code() + 1;
            if next < q {
                v[pos] = Elem::from_code(next);
                break;
            }
            v[pos] = Elem::ONE;
        }
    }
}

fn collect_kind(spec: &EnumSpec, kind: Kind) -> Result<Vec<SquareMatrix>> {
    if spec.kind != kind {
        return Err(Error::usage(format!("spec kind is {}, expected {kind}", spec.kind)));
    }
    let mut out = Vec::new();
    stream(spec, &mut |m| {
        out.push(m);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Representative MDS matrices of order `n`, ascending by interior.
pub fn enum_representatives(spec: &EnumSpec) -> Result<Vec<SquareMatrix>> {
    collect_kind(spec, Kind::Representatives)
}

/// All MDS matrices of order `n`.
pub fn enum_mds(spec: &EnumSpec) -> Result<Vec<SquareMatrix>> {
    collect_kind(spec, Kind::AllMds)
}

/// All involutory MDS matrices of order `n`.
pub fn enum_involutory(spec: &EnumSpec) -> Result<Vec<SquareMatrix>> {
    collect_kind(spec, Kind::AllInvolutory)
}

/// Order-independent digest of a set of matrices: the wrapping sum of the
/// first 128 bits of each member's SHA-256.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct SetDigest(pub u128);

impl SetDigest {
    pub fn insert(&mut self, m: &SquareMatrix) {
        self.insert_raw(m.field(), m.order(), m.entries());
    }

    fn insert_raw(&mut self, f: &Field, n: usize, entries: &[Elem]) {
        let mut h = Sha256::new();
        h.update(f.label().as_bytes());
        h.update((n as u64).to_le_bytes());
        for e in entries {
            h.update(e.code().to_le_bytes());
        }
        let bytes: [u8; 16] = h.finalize()[..16].try_into().expect("16 bytes");
        self.0 = self.0.wrapping_add(u128::from_le_bytes(bytes));
    }

    pub fn of<'a>(items: impl IntoIterator<Item = &'a SquareMatrix>) -> SetDigest {
        let mut d = SetDigest::default();
        items.into_iter().for_each(|m| d.insert(m));
        d
    }
}

impl fmt::Display for SetDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

/// Scans every `n x n` matrix over the field, zeros included, with a full
/// minor test. Refuses when `q^(n^2)` exceeds `2^30`.
pub fn brute_force_mds(field: &Field, n: usize) -> Result<(u128, SetDigest)> {
    let q = field.order();
    let cells = (n * n) as u32;
    let total = q.checked_pow(cells).filter(|&t| t <= 1 << 30).ok_or_else(|| {
        Error::usage(format!("brute force over {}^{} matrices is refused (limit 2^30)", q, cells))
    })?;
    let mut entries = vec![Elem::ZERO; n * n];
    let (mut count, mut digest) = (0u128, SetDigest::default());
    for mut idx in 0..total {
        for slot in entries.iter_mut().rev() {
            *slot = Elem::from_code(idx % q);
            idx /= q;
        }
        if is_mds_raw(field, n, &entries) {
            count += 1;
            digest.insert_raw(field, n, &entries);
        }
    }
    Ok((count, digest))
}
