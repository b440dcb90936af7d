//! Rank and border-rank lower-bound engines: basic and generalized
//! flattenings, the substitution method over finite fields, and
//! brute-force rank oracles for tiny instances.
//!
//! Every bound here is sound: a function either returns a value that is
//! provably a lower bound (or the exact rank, for the oracles) or it
//! refuses. Nothing is approximated.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{Cardinality, FieldSpec, Scalar};
use crate::matrix::ScalarMat;
use crate::tensor::{Decomposition, Tensor};

/// A linear map from the full tensor space into a matrix space, together
/// with a caller-certified bound on the rank it gives simple tensors.
/// The quotient rank(F(t)) / denominator lower-bounds border rank.
#[derive(Debug, Clone)]
pub struct FlatteningMap {
    /// (target_rows * target_cols) x (product of tensor dims), row-major
    /// on both sides.
    pub matrix: ScalarMat,
    pub target_rows: usize,
    pub target_cols: usize,
    /// Max rank of F on simple tensors, certified by the caller.
    pub denominator: usize,
}

impl FlatteningMap {
    pub fn new(matrix: ScalarMat, target_rows: usize, target_cols: usize, denominator: usize) -> Result<Self> {
        if matrix.rows() != target_rows * target_cols {
            return Err(Error::ShapeMismatch(
                "flattening map rows must equal target matrix size".into(),
            ));
        }
        if denominator == 0 {
            return Err(Error::InvalidParameter("denominator must be positive".into()));
        }
        Ok(FlatteningMap { matrix, target_rows, target_cols, denominator })
    }

    /// The basic flattening that groups `leg` against the rest, with
    /// denominator 1 (simple tensors map to rank <= 1 matrices).
    pub fn basic(t_dims: &[usize], leg: usize, field: &FieldSpec) -> Result<Self> {
        let total: usize = t_dims.iter().product();
        let rows = t_dims[leg];
        let cols = total / rows;
        // Permutation matrix realizing the index bijection of group_legs.
        let mut m = ScalarMat::zeros(field, total, total);
        let rest: Vec<usize> = (0..t_dims.len()).filter(|&l| l != leg).collect();
        let shape = crate::tensor::Shape::new(t_dims.to_vec())?;
        shape.for_each_index(|idx| {
            let mut col_part = 0;
            for &l in &rest {
                col_part = col_part * t_dims[l] + idx[l];
            }
            let out = idx[leg] * cols + col_part;
            let inp = shape.offset(idx);
            *m.at_mut(out, inp) = field.one();
        });
        FlatteningMap::new(m, rows, cols, 1)
    }

    /// Apply to a tensor (vectorized row-major), reshaping the image as a
    /// target_rows x target_cols matrix.
    pub fn apply(&self, t: &Tensor) -> Result<ScalarMat> {
        if self.matrix.cols() != t.entries().len() {
            return Err(Error::ShapeMismatch(format!(
                "flattening map expects {} entries, tensor has {}",
                self.matrix.cols(),
                t.entries().len()
            )));
        }
        if self.matrix.field() != t.field() {
            return Err(Error::FieldMismatch {
                expected: self.matrix.field().clone(),
                found: t.field().clone(),
            });
        }
        let image = self.matrix.mul_vec(t.entries());
        Ok(ScalarMat::from_fn(t.field(), self.target_rows, self.target_cols, |i, j| {
            image[i * self.target_cols + j].clone()
        }))
    }

    /// Kronecker combination acting on a tensor product: the block map
    /// sending t1 (x) t2 to F1(t1) (x) F2(t2) as a matrix Kronecker
    /// product. Built index by index to keep the two row-major
    /// reshapings honest.
    pub fn kronecker(&self, other: &FlatteningMap) -> Result<FlatteningMap> {
        let field = self.matrix.field().clone();
        let rows = self.target_rows * other.target_rows;
        let cols = self.target_cols * other.target_cols;
        let n1 = self.matrix.cols();
        let n2 = other.matrix.cols();
        let mut m = ScalarMat::zeros(&field, rows * cols, n1 * n2);
        for r1 in 0..self.target_rows {
            for c1 in 0..self.target_cols {
                for r2 in 0..other.target_rows {
                    for c2 in 0..other.target_cols {
                        let out_row =
                            (r1 * other.target_rows + r2) * cols + (c1 * other.target_cols + c2);
                        for x1 in 0..n1 {
                            let a = self.matrix.at(r1 * self.target_cols + c1, x1);
                            if a.is_zero() {
                                continue;
                            }
                            for x2 in 0..n2 {
                                let b = other.matrix.at(r2 * other.target_cols + c2, x2);
                                if b.is_zero() {
                                    continue;
                                }
                                *m.at_mut(out_row, x1 * n2 + x2) = a.mul(b);
                            }
                        }
                    }
                }
            }
        }
        FlatteningMap::new(m, rows, cols, self.denominator * other.denominator)
    }
}

/// Max over single-leg flattenings of the exact matrix rank; a border
/// rank lower bound.
pub fn flattening_lower_bound(t: &Tensor) -> Result<usize> {
    if t.order() < 2 {
        return Err(Error::InvalidParameter("flattening needs order >= 2".into()));
    }
    let mut best = 0;
    for leg in 0..t.order() {
        best = best.max(t.flatten_leg(leg)?.rank());
    }
    Ok(best)
}

/// Lower bound rank(F(t)) / denominator as an exact rational.
pub fn generalized_flattening_bound(t: &Tensor, f: &FlatteningMap) -> Result<BigRational> {
    let rank = f.apply(t)?.rank();
    Ok(BigRational::new(BigInt::from(rank), BigInt::from(f.denominator)))
}

/// Product of two generalized flattening bounds, valid for t1 (x) t2.
/// Also checks matrix-rank multiplicativity of the combined map as an
/// internal consistency assertion.
pub fn flattening_product_bound(
    t1: &Tensor,
    f1: &FlatteningMap,
    t2: &Tensor,
    f2: &FlatteningMap,
) -> Result<BigRational> {
    let r1 = f1.apply(t1)?.rank();
    let r2 = f2.apply(t2)?.rank();
    let combined = f1.kronecker(f2)?;
    let prod = t1.tensor_product(t2)?;
    let r12 = combined.apply(&prod)?.rank();
    if r12 != r1 * r2 {
        return Err(Error::InvalidCertificate(format!(
            "rank of combined flattening is {r12}, expected {r1}*{r2}"
        )));
    }
    Ok(BigRational::new(
        BigInt::from(r12),
        BigInt::from(f1.denominator * f2.denominator),
    ))
}

/// How a substitution bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    Exhaustive,
    FlatteningFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubstitutionBound {
    pub value: usize,
    pub mode: BoundMode,
}

/// Rank lower bound by the substitution method over a finite field.
///
/// One step: pick a leg and a nonzero basis slice; any decomposition must
/// spend a term on that slice, and for some substitution vector the slice
/// can be folded into the others while the rest of the decomposition
/// survives. Minimizing over all substitution vectors (the field is
/// finite, so the minimum is exhaustive) and adding 1 is therefore sound,
/// and so is maximizing over the (leg, slice) choice. Instances past the
/// node budget fall back to the flattening bound, tagged as such.
pub fn substitution_lower_bound(t: &Tensor) -> Result<SubstitutionBound> {
    substitution_lower_bound_with_budget(t, 2_000_000)
}

pub fn substitution_lower_bound_with_budget(t: &Tensor, budget: usize) -> Result<SubstitutionBound> {
    let Cardinality::Finite(p) = t.field().cardinality() else {
        return Err(Error::UnsupportedField(
            "substitution method enumerates field scalars; the field must be finite".into(),
        ));
    };
    if t.order() != 3 {
        return Err(Error::InvalidParameter("substitution method implemented for order 3".into()));
    }
    let mut ctx = SubstCtx { p, field: t.field().clone(), memo: HashMap::new(), nodes: 0, budget };
    match ctx.bound(&encode(t)) {
        Ok(value) => Ok(SubstitutionBound { value, mode: BoundMode::Exhaustive }),
        Err(Error::BudgetExceeded(_)) => Ok(SubstitutionBound {
            value: flattening_lower_bound(t)?,
            mode: BoundMode::FlatteningFallback,
        }),
        Err(e) => Err(e),
    }
}

/// Dense residue encoding of a small order-3 tensor over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Enc {
    dims: [usize; 3],
    vals: Vec<u64>,
}

fn encode(t: &Tensor) -> Enc {
    let d = t.dims();
    Enc {
        dims: [d[0], d[1], d[2]],
        vals: t.entries().iter().map(|e| e.residue().unwrap()).collect(),
    }
}

impl Enc {
    fn at(&self, i: usize, j: usize, k: usize) -> u64 {
        self.vals[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    fn is_zero(&self) -> bool {
        self.vals.iter().all(|&v| v == 0)
    }

    fn slice_is_zero(&self, leg: usize, index: usize) -> bool {
        for i in 0..self.dims[0] {
            for j in 0..self.dims[1] {
                for k in 0..self.dims[2] {
                    if [i, j, k][leg] == index && self.at(i, j, k) != 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Remove slice `drop` of `leg`, adding subs[i] * slice_drop to each
    /// remaining slice i.
    fn substitute(&self, leg: usize, drop: usize, subs: &[u64], p: u64) -> Enc {
        let mut dims = self.dims;
        dims[leg] -= 1;
        let mut vals = vec![0u64; dims[0] * dims[1] * dims[2]];
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let mut pos = [i, j, k];
                    let kept = pos[leg];
                    pos[leg] = if kept < drop { kept } else { kept + 1 };
                    let base = self.at(pos[0], pos[1], pos[2]);
                    pos[leg] = drop;
                    let dropped = self.at(pos[0], pos[1], pos[2]);
                    vals[(i * dims[1] + j) * dims[2] + k] = (base + subs[kept] * dropped) % p;
                }
            }
        }
        Enc { dims, vals }
    }

    /// Exact rank when one leg is 1-dimensional: matrix rank of the other
    /// two legs.
    fn matrix_rank_if_flat(&self, field: &FieldSpec) -> Option<usize> {
        let flat_leg = (0..3).find(|&l| self.dims[l] == 1)?;
        let (r_leg, c_leg) = match flat_leg {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut m = ScalarMat::zeros(field, self.dims[r_leg], self.dims[c_leg]);
        for i in 0..self.dims[0] {
            for j in 0..self.dims[1] {
                for k in 0..self.dims[2] {
                    let pos = [i, j, k];
                    *m.at_mut(pos[r_leg], pos[c_leg]) = field.element(self.at(i, j, k));
                }
            }
        }
        Some(m.rank())
    }
}

struct SubstCtx {
    p: u64,
    field: FieldSpec,
    memo: HashMap<Enc, usize>,
    nodes: usize,
    budget: usize,
}

impl SubstCtx {
    fn bound(&mut self, t: &Enc) -> Result<usize> {
        if t.is_zero() {
            return Ok(0);
        }
        if let Some(&v) = self.memo.get(t) {
            return Ok(v);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded("substitution recursion".into()));
        }
        if let Some(r) = t.matrix_rank_if_flat(&self.field) {
            self.memo.insert(t.clone(), r);
            return Ok(r);
        }
        let mut best = 1; // t is nonzero
        for leg in 0..3 {
            for slice in 0..t.dims[leg] {
                if t.slice_is_zero(leg, slice) {
                    continue;
                }
                let h = t.dims[leg];
                let mut min_sub = usize::MAX;
                let mut subs = vec![0u64; h - 1];
                'substitutions: loop {
                    let reduced = t.substitute(leg, slice, &subs, self.p);
                    min_sub = min_sub.min(self.bound(&reduced)?);
                    if min_sub == 0 {
                        break;
                    }
                    let mut pos = 0;
                    loop {
                        if pos == subs.len() {
                            break 'substitutions;
                        }
                        subs[pos] += 1;
                        if subs[pos] < self.p {
                            break;
                        }
                        subs[pos] = 0;
                        pos += 1;
                    }
                }
                best = best.max(1 + min_sub);
            }
        }
        self.memo.insert(t.clone(), best);
        Ok(best)
    }
}

/// Outcome of the exact brute-force rank search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSearch {
    Exact(usize),
    ExceedsRmax,
}

/// Minimal number of simple tensors summing to `t`, over a prime field,
/// up to `rmax`; `ExceedsRmax` when the search space is exhausted first.
///
/// Simple tensors are canonicalized projectively (first nonzero
/// coordinate of each factor scaled to 1) and the coefficients recovered
/// by linear algebra. Three equivalent exhaustive strategies are
/// dispatched on the instance shape:
/// - full-space breadth-first rank tables over F_2,
/// - grouping terms by projective direction on a 2-dimensional leg and
///   solving for the per-direction slice matrices,
/// - plain enumeration of projective simple-tensor subsets with a linear
///   solve for the coefficients.
pub fn brute_force_rank(t: &Tensor, rmax: usize) -> Result<RankSearch> {
    let Cardinality::Finite(p) = t.field().cardinality() else {
        return Err(Error::UnsupportedField("brute-force rank needs a finite field".into()));
    };
    if t.is_zero() {
        return Ok(RankSearch::Exact(0));
    }
    if t.order() == 1 {
        return Ok(RankSearch::Exact(1));
    }
    if t.order() == 2 {
        let r = t.flatten_leg(0)?.rank();
        return Ok(if r <= rmax { RankSearch::Exact(r) } else { RankSearch::ExceedsRmax });
    }
    if t.order() != 3 {
        return Err(Error::InvalidParameter("brute-force rank implemented for order <= 3".into()));
    }
    let total: usize = t.dims().iter().product();
    if p == 2 && total <= 20 {
        let table = rank_table_f2(t.dims())?;
        let r = table[f2_mask(t)] as usize;
        return Ok(if r <= rmax { RankSearch::Exact(r) } else { RankSearch::ExceedsRmax });
    }
    if let Some(leg) = (0..3).find(|&l| t.dims()[l] == 1) {
        // One flat leg: tensor rank equals the matrix rank of the other
        // two legs.
        let rest: Vec<usize> = (0..3).filter(|&l| l != leg).collect();
        let m = t.group_legs(&[vec![rest[0]], vec![rest[1], leg]])?;
        let r = m.flatten_leg(0)?.rank();
        return Ok(if r <= rmax { RankSearch::Exact(r) } else { RankSearch::ExceedsRmax });
    }
    if let Some(leg) = (0..3).find(|&l| t.dims()[l] == 2) {
        return direction_grouped_rank(t, leg, p, rmax);
    }
    subset_enumeration_rank(t, p, rmax)
}

fn f2_mask(t: &Tensor) -> usize {
    let mut mask = 0usize;
    for (off, e) in t.entries().iter().enumerate() {
        if !e.is_zero() {
            mask |= 1 << off;
        }
    }
    mask
}

/// Rank of every F_2 tensor of the given shape at once: breadth-first
/// closure of the simple tensors under addition, tensors encoded as
/// entry bitmasks in row-major order.
pub fn rank_table_f2(dims: &[usize]) -> Result<Vec<u8>> {
    let total: usize = dims.iter().product();
    if total > 24 {
        return Err(Error::BudgetExceeded(format!("F_2 rank table for {total} entries")));
    }
    let shape = crate::tensor::Shape::new(dims.to_vec())?;
    let mut simples: Vec<usize> = Vec::new();
    let mut stack: Vec<Vec<u64>> = Vec::new();
    enumerate_factor_tuples(dims, 2, &mut stack, &mut |factors| {
        let mut mask = 0usize;
        shape.for_each_index(|idx| {
            let mut v = 1u64;
            for (leg, &i) in idx.iter().enumerate() {
                v *= factors[leg][i];
            }
            if v % 2 == 1 {
                mask |= 1 << shape.offset(idx);
            }
        });
        simples.push(mask);
    });
    simples.sort_unstable();
    simples.dedup();
    let mut table = vec![u8::MAX; 1 << total];
    table[0] = 0;
    let mut frontier = vec![0usize];
    let mut rank = 0u8;
    while !frontier.is_empty() {
        rank += 1;
        let mut next = Vec::new();
        for &base in &frontier {
            for &s in &simples {
                let m = base ^ s;
                if table[m] == u8::MAX {
                    table[m] = rank;
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    Ok(table)
}

/// Call `f` for every tuple of nonzero vectors over F_p (one per leg).
fn enumerate_factor_tuples(
    dims: &[usize],
    p: u64,
    current: &mut Vec<Vec<u64>>,
    f: &mut impl FnMut(&[Vec<u64>]),
) {
    if current.len() == dims.len() {
        f(current);
        return;
    }
    let d = dims[current.len()];
    let mut v = vec![0u64; d];
    loop {
        let mut pos = 0;
        loop {
            if pos == d {
                return;
            }
            v[pos] += 1;
            if v[pos] < p {
                break;
            }
            v[pos] = 0;
            pos += 1;
        }
        if v.iter().any(|&x| x != 0) {
            current.push(v.clone());
            enumerate_factor_tuples(dims, p, current, f);
            current.pop();
        }
    }
}

/// Projective representatives of nonzero vectors in F_p^d (first nonzero
/// coordinate scaled to 1).
fn projective_vectors(field: &FieldSpec, d: usize, p: u64) -> Vec<Vec<Scalar>> {
    let mut out = Vec::new();
    let mut v = vec![0u64; d];
    loop {
        let mut pos = 0;
        loop {
            if pos == d {
                return out;
            }
            v[pos] += 1;
            if v[pos] < p {
                break;
            }
            v[pos] = 0;
            pos += 1;
        }
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v.iter().map(|&x| field.element(x)).collect());
        }
    }
}

/// Small dense matrix of residues; all the hot inner loops of the
/// direction-grouped search run on these.
#[derive(Clone)]
struct FpMat {
    p: u64,
    rows: usize,
    cols: usize,
    v: Vec<u64>,
}

impl FpMat {
    fn zeros(p: u64, rows: usize, cols: usize) -> FpMat {
        FpMat { p, rows, cols, v: vec![0; rows * cols] }
    }

    fn is_zero(&self) -> bool {
        self.v.iter().all(|&x| x == 0)
    }

    fn scaled(&self, c: u64) -> FpMat {
        let mut out = self.clone();
        for x in &mut out.v {
            *x = *x * c % self.p;
        }
        out
    }

    fn sub_scaled(&self, other: &FpMat, c: u64) -> FpMat {
        let mut out = self.clone();
        for (x, &y) in out.v.iter_mut().zip(other.v.iter()) {
            *x = (*x + (self.p - y % self.p) * c) % self.p;
        }
        out
    }

    fn combo(&self, ca: u64, other: &FpMat, cb: u64) -> FpMat {
        let mut out = FpMat::zeros(self.p, self.rows, self.cols);
        for i in 0..self.v.len() {
            out.v[i] = (self.v[i] * ca + other.v[i] * cb) % self.p;
        }
        out
    }

    fn rank(&self) -> usize {
        let p = self.p;
        let mut m = self.v.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for c in 0..cols {
            let Some(pivot) = (rank..rows).find(|&r| m[r * cols + c] != 0) else { continue };
            if pivot != rank {
                for j in 0..cols {
                    m.swap(pivot * cols + j, rank * cols + j);
                }
            }
            let inv = inv_mod_u64(m[rank * cols + c], p);
            for j in c..cols {
                m[rank * cols + j] = m[rank * cols + j] * inv % p;
            }
            for r in 0..rows {
                if r != rank && m[r * cols + c] != 0 {
                    let f = m[r * cols + c];
                    for j in c..cols {
                        m[r * cols + j] = (m[r * cols + j] + (p - m[rank * cols + j]) * f) % p;
                    }
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}

fn inv_mod_u64(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a nonzero mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Exact rank of an order-3 tensor with a 2-dimensional leg, grouping
/// decomposition terms by the p+1 projective directions on that leg.
///
/// For a direction subset of size s, the per-direction slice totals
/// satisfy two linear matrix equations, so s-2 of them are free; free
/// slots are enumerated over matrices of rank <= 1. Every decomposition
/// of total size r <= 5 has at least s-2 directions carrying a single
/// term (s <= 2 needs none, s = 3 needs one, s >= 4 needs two), so the
/// search is complete for ranks up to 4 and refusals are reported
/// honestly above that.
fn direction_grouped_rank(t: &Tensor, leg: usize, p: u64, rmax: usize) -> Result<RankSearch> {
    let rest: Vec<usize> = (0..3).filter(|&l| l != leg).collect();
    let t = t.group_legs(&[vec![leg], vec![rest[0]], vec![rest[1]]])?;
    let (n, m) = (t.dims()[1], t.dims()[2]);
    let mut a_mat = FpMat::zeros(p, n, m);
    let mut b_mat = FpMat::zeros(p, n, m);
    for i in 0..n {
        for j in 0..m {
            a_mat.v[i * m + j] = t.get(&[0, i, j]).residue().unwrap();
            b_mat.v[i * m + j] = t.get(&[1, i, j]).residue().unwrap();
        }
    }

    // P^1(F_p): (1, c) for each residue c, then the point at infinity.
    let mut directions: Vec<(u64, u64)> = (0..p).map(|c| (1, c)).collect();
    directions.push((0, 1));

    // All matrices of rank <= 1, zero first.
    let rank_one: Vec<FpMat> = {
        let mut out = vec![FpMat::zeros(p, n, m)];
        let vs = projective_residue_vectors(n, p);
        let ws = projective_residue_vectors(m, p);
        for v in &vs {
            for w in &ws {
                for lam in 1..p {
                    let mut g = FpMat::zeros(p, n, m);
                    for i in 0..n {
                        for j in 0..m {
                            g.v[i * m + j] = v[i] * w[j] % p * lam % p;
                        }
                    }
                    out.push(g);
                }
            }
        }
        out
    };
    let rank_one_ranks: Vec<usize> = rank_one.iter().map(FpMat::rank).collect();

    let solve_two = |u1: (u64, u64), u2: (u64, u64), a: &FpMat, b: &FpMat| -> (FpMat, FpMat) {
        let det = (u1.0 * u2.1 % p + p - u1.1 * u2.0 % p) % p;
        let det_inv = inv_mod_u64(det, p);
        let c11 = u2.1 * det_inv % p;
        let c12 = (p - u2.0 % p) % p * det_inv % p;
        let c21 = (p - u1.1 % p) % p * det_inv % p;
        let c22 = u1.0 * det_inv % p;
        (a.combo(c11, b, c12), a.combo(c21, b, c22))
    };

    let mut best = usize::MAX;

    // s = 1: both slices proportional to a single matrix.
    for &(a, b) in &directions {
        if a != 0 {
            let t1 = a_mat.scaled(inv_mod_u64(a, p));
            if b_mat.v == t1.scaled(b).v {
                best = best.min(t1.rank());
            }
        } else if a_mat.is_zero() {
            best = best.min(b_mat.rank());
        }
    }

    // s = 2: both slice totals determined.
    for i in 0..directions.len() {
        for j in (i + 1)..directions.len() {
            let (t1, t2) = solve_two(directions[i], directions[j], &a_mat, &b_mat);
            best = best.min(t1.rank() + t2.rank());
        }
    }

    // s = 3: one free slot over rank <= 1 matrices, the other two
    // determined; tried with each slot free.
    for combo in subsets(directions.len(), 3.min(directions.len())) {
        if combo.len() < 3 {
            break;
        }
        for free_pos in 0..3 {
            let free = combo[free_pos];
            let keep: Vec<usize> = combo.iter().copied().filter(|&d| d != free).collect();
            let (fa, fb) = directions[free];
            for (g, &g_rank) in rank_one.iter().zip(rank_one_ranks.iter()) {
                if g_rank + 2 > best {
                    continue;
                }
                let a_res = a_mat.sub_scaled(g, fa);
                let b_res = b_mat.sub_scaled(g, fb);
                let (t1, t2) = solve_two(directions[keep[0]], directions[keep[1]], &a_res, &b_res);
                best = best.min(g_rank + t1.rank() + t2.rank());
            }
        }
    }

    // s = 4, two free rank <= 1 slots (any two, tried over all pairs):
    // required only for totals 4 and 5 spread over four directions.
    if best > 4 && directions.len() >= 4 && rmax >= 4 {
        'outer: for combo in subsets(directions.len(), 4) {
            for free_pair in subsets(4, 2) {
                let f1 = combo[free_pair[0]];
                let f2 = combo[free_pair[1]];
                let keep: Vec<usize> =
                    combo.iter().copied().filter(|&d| d != f1 && d != f2).collect();
                for (g1, &r1) in rank_one.iter().zip(rank_one_ranks.iter()) {
                    if r1 + 3 > best.min(5) {
                        continue;
                    }
                    let a_r1 = a_mat.sub_scaled(g1, directions[f1].0);
                    let b_r1 = b_mat.sub_scaled(g1, directions[f1].1);
                    for (g2, &r2) in rank_one.iter().zip(rank_one_ranks.iter()) {
                        if r1 + r2 + 2 > best.min(5) {
                            continue;
                        }
                        let a_res = a_r1.sub_scaled(g2, directions[f2].0);
                        let b_res = b_r1.sub_scaled(g2, directions[f2].1);
                        let (t1, t2) =
                            solve_two(directions[keep[0]], directions[keep[1]], &a_res, &b_res);
                        best = best.min(r1 + r2 + t1.rank() + t2.rank());
                        if best <= 4 {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    if best <= 4 {
        return Ok(if best <= rmax { RankSearch::Exact(best) } else { RankSearch::ExceedsRmax });
    }
    if rmax <= 3 {
        return Ok(RankSearch::ExceedsRmax);
    }
    Err(Error::BudgetExceeded(format!(
        "direction-grouped search cannot certify a rank of {best} (> 4)"
    )))
}

fn projective_residue_vectors(d: usize, p: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut v = vec![0u64; d];
    loop {
        let mut pos = 0;
        loop {
            if pos == d {
                return out;
            }
            v[pos] += 1;
            if v[pos] < p {
                break;
            }
            v[pos] = 0;
            pos += 1;
        }
        if v.iter().find(|&&x| x != 0) == Some(&1) {
            out.push(v.clone());
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Plain subset search: choose r projective simple tensors, solve for
/// the coefficients. Only viable for very small instances.
fn subset_enumeration_rank(t: &Tensor, p: u64, rmax: usize) -> Result<RankSearch> {
    let field = t.field().clone();
    let dims = t.dims().to_vec();
    let per_leg: Vec<Vec<Vec<Scalar>>> =
        dims.iter().map(|&d| projective_vectors(&field, d, p)).collect();
    let count: usize = per_leg.iter().map(Vec::len).product();
    let mut work = 0usize;
    let mut choose = 1usize;
    for r in 1..=rmax.min(count) {
        choose = choose.saturating_mul(count.saturating_sub(r - 1)) / r;
        work = work.saturating_add(choose);
    }
    if count > 2000 || work > 5_000_000 {
        return Err(Error::BudgetExceeded(format!("{count} simple tensors, ~{work} subsets")));
    }
    let total: usize = dims.iter().product();
    let mut columns: Vec<Vec<Scalar>> = Vec::with_capacity(count);
    let mut pick = vec![0usize; dims.len()];
    'enumerate: loop {
        let factors: Vec<Vec<Scalar>> =
            pick.iter().enumerate().map(|(leg, &i)| per_leg[leg][i].clone()).collect();
        let simple = crate::tensor::SimpleTensor::new(factors).expand(&field)?;
        columns.push(simple.entries().to_vec());
        let mut leg = dims.len();
        loop {
            if leg == 0 {
                break 'enumerate;
            }
            leg -= 1;
            pick[leg] += 1;
            if pick[leg] < per_leg[leg].len() {
                break;
            }
            pick[leg] = 0;
        }
    }
    for r in 1..=rmax.min(columns.len()) {
        for combo in subsets(columns.len(), r) {
            let m = ScalarMat::from_fn(&field, total, r, |i, j| columns[combo[j]][i].clone());
            if m.solve(t.entries()).is_some() {
                return Ok(RankSearch::Exact(r));
            }
        }
    }
    Ok(RankSearch::ExceedsRmax)
}

/// Rank bracket for a tensor: a verified upper bound from a
/// decomposition and the best lower bound from the selected methods.
#[derive(Debug, Clone)]
pub struct RankBoundReport {
    pub upper: Option<usize>,
    pub lower: BigRational,
    pub lower_int: usize,
    pub methods: Vec<String>,
    pub determined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundMethod {
    Flattening,
    Substitution,
    BruteForce,
}

/// Verify that `dec` evaluates to `t` (when given) and report the rank
/// bracket from the selected lower-bound methods.
pub fn certify_rank(
    t: &Tensor,
    dec: Option<&Decomposition>,
    methods: &[LowerBoundMethod],
) -> Result<RankBoundReport> {
    let upper = match dec {
        Some(d) => {
            if d.eval()? != *t {
                return Err(Error::InvalidCertificate(
                    "decomposition does not evaluate to the target tensor".into(),
                ));
            }
            Some(d.len())
        }
        None => None,
    };
    let mut lower = BigRational::zero();
    let mut used = Vec::new();
    for method in methods {
        match method {
            LowerBoundMethod::Flattening => {
                let b = flattening_lower_bound(t)?;
                lower = lower.max(BigRational::from(BigInt::from(b)));
                used.push("flattening".to_string());
            }
            LowerBoundMethod::Substitution => {
                let b = substitution_lower_bound(t)?;
                lower = lower.max(BigRational::from(BigInt::from(b.value)));
                used.push(match b.mode {
                    BoundMode::Exhaustive => "substitution".to_string(),
                    BoundMode::FlatteningFallback => "substitution(fallback=flattening)".to_string(),
                });
            }
            LowerBoundMethod::BruteForce => {
                let rmax = upper.unwrap_or(6);
                if let RankSearch::Exact(r) = brute_force_rank(t, rmax)? {
                    lower = lower.max(BigRational::from(BigInt::from(r)));
                    used.push("brute-force".to_string());
                }
            }
        }
    }
    let lower_int = lower.ceil().to_integer().to_usize().unwrap_or(0);
    if let Some(u) = upper {
        if lower_int > u {
            return Err(Error::InvalidCertificate(format!(
                "inconsistency: lower bound {lower_int} exceeds verified upper bound {u}"
            )));
        }
    }
    Ok(RankBoundReport {
        determined: upper == Some(lower_int) && lower_int > 0,
        upper,
        lower,
        lower_int,
        methods: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{matmul_tensor, strassen_tensor, unit_tensor, w_tensor};
    use rand::SeedableRng;

    #[test]
    fn flattening_examples() {
        let f = FieldSpec::Rationals;
        assert_eq!(flattening_lower_bound(&unit_tensor(&f, 3, 3).unwrap()).unwrap(), 3);
        assert_eq!(flattening_lower_bound(&w_tensor(&f, 3).unwrap()).unwrap(), 2);
        assert_eq!(flattening_lower_bound(&matmul_tensor(&f, 2, 2, 2).unwrap()).unwrap(), 4);
    }

    #[test]
    fn each_w3_flattening_has_rank_2() {
        let f = FieldSpec::Rationals;
        let w3 = w_tensor(&f, 3).unwrap();
        for leg in 0..3 {
            assert_eq!(w3.flatten_leg(leg).unwrap().rank(), 2);
        }
    }

    #[test]
    fn generalized_flattening_examples() {
        let f = FieldSpec::prime(5).unwrap();
        let w3 = w_tensor(&f, 3).unwrap();
        let basic = FlatteningMap::basic(w3.dims(), 0, &f).unwrap();
        assert_eq!(
            generalized_flattening_bound(&w3, &basic).unwrap(),
            BigRational::from(BigInt::from(2))
        );

        let zero = Tensor::zeros(&f, vec![2, 2, 2]).unwrap();
        assert!(generalized_flattening_bound(&zero, &basic).unwrap().is_zero());

        // caller-certified denominator 2 halves the quotient
        let halved = FlatteningMap::new(basic.matrix.clone(), 2, 4, 2).unwrap();
        assert_eq!(
            generalized_flattening_bound(&w3, &halved).unwrap(),
            BigRational::new(BigInt::from(2), BigInt::from(2))
        );
    }

    #[test]
    fn basic_flattening_agrees_with_group_legs() {
        let f = FieldSpec::prime(7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let entries: Vec<Scalar> = (0..12).map(|_| f.random_scalar(&mut rng)).collect();
            let t = Tensor::from_entries(&f, vec![2, 3, 2], entries).unwrap();
            for leg in 0..3 {
                let fl = FlatteningMap::basic(t.dims(), leg, &f).unwrap();
                assert_eq!(fl.apply(&t).unwrap(), t.flatten_leg(leg).unwrap());
            }
        }
    }

    #[test]
    fn product_bound_examples() {
        let f = FieldSpec::Rationals;
        let w3 = w_tensor(&f, 3).unwrap();
        let fl = FlatteningMap::basic(w3.dims(), 0, &f).unwrap();
        assert_eq!(
            flattening_product_bound(&w3, &fl, &w3, &fl).unwrap(),
            BigRational::from(BigInt::from(4))
        );

        let one = unit_tensor(&f, 1, 3).unwrap();
        let fl1 = FlatteningMap::basic(one.dims(), 0, &f).unwrap();
        assert_eq!(
            flattening_product_bound(&w3, &fl, &one, &fl1).unwrap(),
            BigRational::from(BigInt::from(2))
        );

        let u2 = unit_tensor(&f, 2, 3).unwrap();
        let u3 = unit_tensor(&f, 3, 3).unwrap();
        let f2 = FlatteningMap::basic(u2.dims(), 0, &f).unwrap();
        let f3 = FlatteningMap::basic(u3.dims(), 0, &f).unwrap();
        assert_eq!(
            flattening_product_bound(&u2, &f2, &u3, &f3).unwrap(),
            BigRational::from(BigInt::from(6))
        );
    }

    #[test]
    fn substitution_examples() {
        let f5 = FieldSpec::prime(5).unwrap();
        let w3 = w_tensor(&f5, 3).unwrap();
        let b = substitution_lower_bound(&w3).unwrap();
        assert_eq!((b.value, b.mode), (3, BoundMode::Exhaustive));

        let s2 = strassen_tensor(&f5, 2, 3).unwrap();
        let b = substitution_lower_bound(&s2).unwrap();
        assert_eq!((b.value, b.mode), (4, BoundMode::Exhaustive));

        let f2 = FieldSpec::prime(2).unwrap();
        let u2 = unit_tensor(&f2, 2, 3).unwrap();
        assert_eq!(substitution_lower_bound(&u2).unwrap().value, 2);

        let wq = w_tensor(&FieldSpec::Rationals, 3).unwrap();
        assert!(matches!(substitution_lower_bound(&wq), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn substitution_falls_back_on_tiny_budget() {
        let f5 = FieldSpec::prime(5).unwrap();
        let s2 = strassen_tensor(&f5, 2, 3).unwrap();
        let b = substitution_lower_bound_with_budget(&s2, 3).unwrap();
        assert_eq!(b.mode, BoundMode::FlatteningFallback);
        assert_eq!(b.value, flattening_lower_bound(&s2).unwrap());
    }

    #[test]
    fn brute_force_examples() {
        let f2 = FieldSpec::prime(2).unwrap();
        let w3 = w_tensor(&f2, 3).unwrap();
        assert_eq!(brute_force_rank(&w3, 4).unwrap(), RankSearch::Exact(3));
        assert_eq!(
            brute_force_rank(&unit_tensor(&f2, 2, 3).unwrap(), 4).unwrap(),
            RankSearch::Exact(2)
        );
        let zero = Tensor::zeros(&f2, vec![2, 2, 2]).unwrap();
        assert_eq!(brute_force_rank(&zero, 4).unwrap(), RankSearch::Exact(0));
        assert_eq!(brute_force_rank(&w3, 2).unwrap(), RankSearch::ExceedsRmax);
    }

    #[test]
    fn brute_force_on_pencils_over_odd_fields() {
        let f3 = FieldSpec::prime(3).unwrap();
        let w3 = w_tensor(&f3, 3).unwrap();
        assert_eq!(brute_force_rank(&w3, 4).unwrap(), RankSearch::Exact(3));
        let f5 = FieldSpec::prime(5).unwrap();
        let w5 = w_tensor(&f5, 3).unwrap();
        assert_eq!(brute_force_rank(&w5, 4).unwrap(), RankSearch::Exact(3));
        let u3 = unit_tensor(&f5, 2, 3).unwrap();
        assert_eq!(brute_force_rank(&u3, 4).unwrap(), RankSearch::Exact(2));
    }

    #[test]
    fn brute_force_strassen_over_f3() {
        // 3x3x3 with no 2-dimensional leg: subset enumeration path.
        let f3 = FieldSpec::prime(3).unwrap();
        let s1 = strassen_tensor(&f3, 1, 3).unwrap();
        assert!(matches!(
            brute_force_rank(&s1, 2),
            Ok(RankSearch::Exact(2)) | Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn soundness_triangle_on_random_small_tensors() {
        let f2 = FieldSpec::prime(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..40 {
            let entries: Vec<Scalar> = (0..8).map(|_| f2.random_scalar(&mut rng)).collect();
            let t = Tensor::from_entries(&f2, vec![2, 2, 2], entries).unwrap();
            if t.is_zero() {
                continue;
            }
            let flat = flattening_lower_bound(&t).unwrap();
            let sub = substitution_lower_bound(&t).unwrap().value;
            let RankSearch::Exact(bf) = brute_force_rank(&t, 6).unwrap() else {
                panic!("2x2x2 rank exceeds 6?");
            };
            assert!(bf >= sub, "brute {bf} < substitution {sub} for {t:?}");
            assert!(sub >= flat, "substitution {sub} < flattening {flat} for {t:?}");
            let dec = Decomposition::from_nonzero_entries(&t);
            assert!(bf <= dec.len());
        }
    }

    #[test]
    fn lemma_quotient_no_larger_than_known_decomposition() {
        let f5 = FieldSpec::prime(5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let r = rand::Rng::gen_range(&mut rng, 1usize..5);
            let terms: Vec<crate::tensor::SimpleTensor> = (0..r)
                .map(|_| {
                    crate::tensor::SimpleTensor::new(
                        vec![2, 2, 3]
                            .into_iter()
                            .map(|d| (0..d).map(|_| f5.random_scalar(&mut rng)).collect())
                            .collect(),
                    )
                })
                .collect();
            let dec = Decomposition::new(f5.clone(), vec![2, 2, 3], terms).unwrap();
            let t = dec.eval().unwrap();
            for leg in 0..3 {
                let fl = FlatteningMap::basic(t.dims(), leg, &f5).unwrap();
                let bound = generalized_flattening_bound(&t, &fl).unwrap();
                assert!(bound <= BigRational::from(BigInt::from(r)));
            }
        }
    }

    #[test]
    fn certify_rank_reports() {
        let f = FieldSpec::prime(5).unwrap();
        let w3 = w_tensor(&f, 3).unwrap();
        let dec = Decomposition::from_nonzero_entries(&w3);
        let report = certify_rank(
            &w3,
            Some(&dec),
            &[LowerBoundMethod::Flattening, LowerBoundMethod::Substitution],
        )
        .unwrap();
        assert_eq!(report.upper, Some(3));
        assert_eq!(report.lower_int, 3);
        assert!(report.determined);

        let f2 = FieldSpec::prime(2).unwrap();
        let mm = matmul_tensor(&f2, 2, 2, 2).unwrap();
        let strassen = crate::tensor::strassen7_decomposition(&f2);
        let report = certify_rank(&mm, Some(&strassen), &[LowerBoundMethod::Flattening]).unwrap();
        assert_eq!(report.upper, Some(7));
        assert_eq!(report.lower_int, 4);
        assert!(!report.determined);

        let u = unit_tensor(&f, 3, 3).unwrap();
        let du = Decomposition::of_unit_tensor(&f, 3, 3).unwrap();
        let report = certify_rank(
            &u,
            Some(&du),
            &[LowerBoundMethod::Flattening],
        )
        .unwrap();
        assert!(report.determined);

        // a decomposition that does not evaluate to the target is rejected
        let wrong = Decomposition::of_unit_tensor(&f, 2, 3).unwrap();
        assert!(certify_rank(&w3, Some(&wrong), &[]).is_err());
    }

    #[test]
    fn w3_border_rank_lower_half_is_two() {
        // The matching upper half (the e=2 degeneration from unit(2,3))
        // is verified in the transform module.
        let f = FieldSpec::Rationals;
        let w3 = w_tensor(&f, 3).unwrap();
        assert_eq!(flattening_lower_bound(&w3).unwrap(), 2);
    }
}
