//! Dense exact tensors, the three product structures, and builders for
//! the named tensor families.
//!
//! Conventions used throughout:
//! - entries are stored row-major (last leg fastest);
//! - indices are 0-based internally, 1-based in external formats;
//! - a Kronecker-product leg pairs indices as `a * dim_b + b`, i.e. the
//!   left factor's index is the slow one. `group_legs` uses the same
//!   mixed-radix rule, first listed leg slowest, so grouping a tensor
//!   product with parts `{i, k+i}` reproduces the Kronecker product
//!   exactly.

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Scalar};
use crate::matrix::ScalarMat;

/// Leg dimensions of a tensor. Order k >= 1, every dimension >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Shape> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a tensor needs at least one leg".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch("leg dimensions must be positive".into()));
        }
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.order());
        let mut off = 0;
        for (i, &d) in idx.iter().zip(self.0.iter()) {
            debug_assert!(*i < d);
            off = off * d + i;
        }
        off
    }

    pub fn index_of(&self, mut off: usize) -> Vec<usize> {
        let mut idx = vec![0; self.order()];
        for (slot, &d) in idx.iter_mut().zip(self.0.iter()).rev() {
            let (_, _) = (slot, d);
        }
        for leg in (0..self.order()).rev() {
            idx[leg] = off % self.0[leg];
            off /= self.0[leg];
        }
        idx
    }

    /// Visit all multi-indices in row-major (offset) order.
    pub fn for_each_index(&self, mut f: impl FnMut(&[usize])) {
        let mut idx = vec![0usize; self.order()];
        loop {
            f(&idx);
            let mut leg = self.order();
            loop {
                if leg == 0 {
                    return;
                }
                leg -= 1;
                idx[leg] += 1;
                if idx[leg] < self.0[leg] {
                    break;
                }
                idx[leg] = 0;
            }
        }
    }
}

/// Dense order-k tensor over an exact field.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    field: FieldSpec,
    shape: Shape,
    entries: Vec<Scalar>,
}

impl Tensor {
    pub fn zeros(field: &FieldSpec, dims: Vec<usize>) -> Result<Tensor> {
        let shape = Shape::new(dims)?;
        let entries = vec![field.zero(); shape.total()];
        Ok(Tensor { field: field.clone(), shape, entries })
    }

    pub fn from_entries(field: &FieldSpec, dims: Vec<usize>, entries: Vec<Scalar>) -> Result<Tensor> {
        let shape = Shape::new(dims)?;
        if entries.len() != shape.total() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries, got {}",
                shape.total(),
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.field() != *field) {
            return Err(Error::ShapeMismatch("entry outside the stated field".into()));
        }
        Ok(Tensor { field: field.clone(), shape, entries })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn order(&self) -> usize {
        self.shape.order()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn get(&self, idx: &[usize]) -> &Scalar {
        &self.entries[self.shape.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Scalar) {
        let off = self.shape.offset(idx);
        self.entries[off] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.iter().filter(|e| !e.is_zero()).count()
    }

    /// Nonzero entries as (multi-index, value) pairs, offset order.
    pub fn nonzero_entries(&self) -> Vec<(Vec<usize>, Scalar)> {
        let mut out = Vec::new();
        for (off, e) in self.entries.iter().enumerate() {
            if !e.is_zero() {
                out.push((self.shape.index_of(off), e.clone()));
            }
        }
        out
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_field(other)?;
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("tensor addition needs equal shapes".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(Tensor { field: self.field.clone(), shape: self.shape.clone(), entries })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.check_field(other)?;
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch("tensor subtraction needs equal shapes".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.sub(b))
            .collect();
        Ok(Tensor { field: self.field.clone(), shape: self.shape.clone(), entries })
    }

    pub fn scale(&self, c: &Scalar) -> Tensor {
        Tensor {
            field: self.field.clone(),
            shape: self.shape.clone(),
            entries: self.entries.iter().map(|e| e.mul(c)).collect(),
        }
    }

    fn check_field(&self, other: &Tensor) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                expected: self.field.clone(),
                found: other.field.clone(),
            });
        }
        Ok(())
    }

    /// Tensor product: orders add, entry (i,j) = a[i] * b[j].
    pub fn tensor_product(&self, other: &Tensor) -> Result<Tensor> {
        self.check_field(other)?;
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(other.dims());
        let mut entries = Vec::with_capacity(self.entries.len() * other.entries.len());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a.mul(b));
            }
        }
        Tensor::from_entries(&self.field, dims, entries)
    }

    /// Kronecker product of equal-order tensors: dimensions multiply
    /// legwise, composite index a*dim_b + b.
    pub fn kronecker_product(&self, other: &Tensor) -> Result<Tensor> {
        self.check_field(other)?;
        if self.order() != other.order() {
            return Err(Error::ShapeMismatch(format!(
                "Kronecker product needs equal orders ({} vs {})",
                self.order(),
                other.order()
            )));
        }
        let k = self.order();
        let dims: Vec<usize> = (0..k).map(|i| self.dims()[i] * other.dims()[i]).collect();
        let mut result = Tensor::zeros(&self.field, dims)?;
        let mut idx = vec![0usize; k];
        self.shape.for_each_index(|ia| {
            let va = self.get(ia);
            if va.is_zero() {
                return;
            }
            other.shape.for_each_index(|ib| {
                let vb = other.get(ib);
                if vb.is_zero() {
                    return;
                }
                for leg in 0..k {
                    idx[leg] = ia[leg] * other.dims()[leg] + ib[leg];
                }
                let off = result.shape.offset(&idx);
                result.entries[off] = va.mul(vb);
            });
        });
        Ok(result)
    }

    /// Kronecker product computed the roundabout way: tensor product,
    /// then grouping legs {i, k+i}. Must agree with `kronecker_product`
    /// entry for entry; the redundancy is an index-map cross-check.
    pub fn kronecker_product_via_grouping(&self, other: &Tensor) -> Result<Tensor> {
        self.check_field(other)?;
        if self.order() != other.order() {
            return Err(Error::ShapeMismatch("Kronecker product needs equal orders".into()));
        }
        let k = self.order();
        let prod = self.tensor_product(other)?;
        let partition: Vec<Vec<usize>> = (0..k).map(|i| vec![i, k + i]).collect();
        prod.group_legs(&partition)
    }

    /// Regroup legs into an ordered partition; each part becomes one leg
    /// with mixed-radix index (first listed leg slowest). Entries are
    /// carried across by the induced index bijection.
    pub fn group_legs(&self, partition: &[Vec<usize>]) -> Result<Tensor> {
        let k = self.order();
        let mut seen = vec![false; k];
        for part in partition {
            if part.is_empty() {
                return Err(Error::InvalidPartition("empty part".into()));
            }
            for &leg in part {
                if leg >= k {
                    return Err(Error::InvalidPartition(format!("leg {leg} out of range")));
                }
                if seen[leg] {
                    return Err(Error::InvalidPartition(format!("leg {leg} listed twice")));
                }
                seen[leg] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::InvalidPartition("partition must cover every leg".into()));
        }
        let dims: Vec<usize> = partition
            .iter()
            .map(|part| part.iter().map(|&l| self.dims()[l]).product())
            .collect();
        let mut result = Tensor::zeros(&self.field, dims)?;
        let mut new_idx = vec![0usize; partition.len()];
        self.shape.for_each_index(|idx| {
            let v = self.get(idx);
            if v.is_zero() {
                return;
            }
            for (slot, part) in partition.iter().enumerate() {
                let mut composite = 0;
                for &leg in part {
                    composite = composite * self.dims()[leg] + idx[leg];
                }
                new_idx[slot] = composite;
            }
            let off = result.shape.offset(&new_idx);
            result.entries[off] = v.clone();
        });
        Ok(result)
    }

    /// Flatten one leg against all the others: rows indexed by `leg`,
    /// columns by the remaining legs in order.
    pub fn flatten_leg(&self, leg: usize) -> Result<ScalarMat> {
        let k = self.order();
        if leg >= k {
            return Err(Error::InvalidPartition(format!("leg {leg} out of range")));
        }
        let rest: Vec<usize> = (0..k).filter(|&l| l != leg).collect();
        let grouped = if k == 1 {
            self.group_legs(&[vec![0]])?
        } else {
            self.group_legs(&[vec![leg], rest])?
        };
        let rows = grouped.dims()[0];
        let cols = if k == 1 { 1 } else { grouped.dims()[1] };
        Ok(ScalarMat::from_fn(&self.field, rows, cols, |i, j| {
            grouped.entries[i * cols + j].clone()
        }))
    }

    /// Slice with the given leg fixed to `index`, as an order k-1 tensor
    /// (or a 1-leg tensor when k = 2... the caller keeps k >= 2).
    pub fn slice(&self, leg: usize, index: usize) -> Tensor {
        let dims: Vec<usize> = self
            .dims()
            .iter()
            .enumerate()
            .filter(|&(l, _)| l != leg)
            .map(|(_, &d)| d)
            .collect();
        let mut out = Tensor::zeros(&self.field, dims).expect("order >= 2 slice");
        let mut sub_idx = Vec::with_capacity(self.order() - 1);
        self.shape.for_each_index(|idx| {
            if idx[leg] != index {
                return;
            }
            let v = self.get(idx);
            if v.is_zero() {
                return;
            }
            sub_idx.clear();
            sub_idx.extend(idx.iter().enumerate().filter(|&(l, _)| l != leg).map(|(_, &i)| i));
            let off = out.shape.offset(&sub_idx);
            out.entries[off] = v.clone();
        });
        out
    }
}

/// Block-diagonal sum of tensors sharing the first leg: the first-leg
/// dimension stays, every other leg dimension is the sum over the
/// summands, and entries land at block offsets.
pub fn direct_sum_shared_first_leg(ts: &[Tensor]) -> Result<Tensor> {
    let first = ts
        .first()
        .ok_or_else(|| Error::ShapeMismatch("direct sum needs at least one summand".into()))?;
    let k = first.order();
    let d0 = first.dims()[0];
    for t in ts {
        if t.field() != first.field() {
            return Err(Error::FieldMismatch {
                expected: first.field().clone(),
                found: t.field().clone(),
            });
        }
        if t.order() != k || t.dims()[0] != d0 {
            return Err(Error::ShapeMismatch(
                "direct sum needs a common order and first-leg dimension".into(),
            ));
        }
    }
    let mut dims = vec![d0];
    for leg in 1..k {
        dims.push(ts.iter().map(|t| t.dims()[leg]).sum());
    }
    let mut result = Tensor::zeros(first.field(), dims)?;
    let mut offsets = vec![0usize; k];
    let mut idx = vec![0usize; k];
    for t in ts {
        t.shape.for_each_index(|i| {
            let v = t.get(i);
            if v.is_zero() {
                return;
            }
            idx[0] = i[0];
            for leg in 1..k {
                idx[leg] = offsets[leg] + i[leg];
            }
            let off = result.shape.offset(&idx);
            result.entries[off] = v.clone();
        });
        for leg in 1..k {
            offsets[leg] += t.dims()[leg];
        }
    }
    Ok(result)
}

/// The rank-r order-k unit tensor: 1 exactly where all indices agree.
pub fn unit_tensor(field: &FieldSpec, r: usize, k: usize) -> Result<Tensor> {
    if r < 1 || k < 1 {
        return Err(Error::InvalidParameter("unit tensor needs r >= 1, k >= 1".into()));
    }
    let mut t = Tensor::zeros(field, vec![r; k])?;
    for i in 0..r {
        t.set(&vec![i; k], field.one());
    }
    Ok(t)
}

/// W_k: order-k tensor on (F^2)^k with a 1 at every index holding a
/// single 2 (0-based: a single 1).
pub fn w_tensor(field: &FieldSpec, k: usize) -> Result<Tensor> {
    if k < 3 {
        return Err(Error::InvalidParameter("W_k needs k >= 3".into()));
    }
    let mut t = Tensor::zeros(field, vec![2; k])?;
    for pos in 0..k {
        let mut idx = vec![0usize; k];
        idx[pos] = 1;
        t.set(&idx, field.one());
    }
    Ok(t)
}

/// Str_q^k on (F^{q+1})^k: pairs (i,i,1,...) and (1,i,i,1,...) for
/// i = 2..q+1, 2q nonzero entries.
pub fn strassen_tensor(field: &FieldSpec, q: usize, k: usize) -> Result<Tensor> {
    if q < 1 || k < 3 {
        return Err(Error::InvalidParameter("Str_q^k needs q >= 1, k >= 3".into()));
    }
    let mut t = Tensor::zeros(field, vec![q + 1; k])?;
    for i in 1..=q {
        let mut idx = vec![0usize; k];
        idx[0] = i;
        idx[1] = i;
        t.set(&idx, field.one());
        let mut idx = vec![0usize; k];
        idx[1] = i;
        idx[2] = i;
        t.set(&idx, field.one());
    }
    Ok(t)
}

/// Matrix multiplication tensor <n1,n2,n3> with legs (n1*n2, n2*n3, n3*n1).
pub fn matmul_tensor(field: &FieldSpec, n1: usize, n2: usize, n3: usize) -> Result<Tensor> {
    if n1 < 1 || n2 < 1 || n3 < 1 {
        return Err(Error::InvalidParameter("matmul tensor needs positive sizes".into()));
    }
    let mut t = Tensor::zeros(field, vec![n1 * n2, n2 * n3, n3 * n1])?;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            for i3 in 0..n3 {
                t.set(&[i1 * n2 + i2, i2 * n3 + i3, i3 * n1 + i1], field.one());
            }
        }
    }
    Ok(t)
}

/// chi_d(k): 1 at every index tuple (a_1,..,a_k), 0 <= a_i <= d, with
/// sum d. Ambient dimension d+1 per leg, since the a_i range over [0..d].
pub fn chi_tensor(field: &FieldSpec, d: usize, k: usize) -> Result<Tensor> {
    if k < 1 {
        return Err(Error::InvalidParameter("chi tensor needs k >= 1".into()));
    }
    let mut t = Tensor::zeros(field, vec![d + 1; k])?;
    let mut count = 0usize;
    t.shape.clone().for_each_index(|idx| {
        if idx.iter().sum::<usize>() == d {
            count += 1;
        }
    });
    let shape = t.shape.clone();
    shape.for_each_index(|idx| {
        if idx.iter().sum::<usize>() == d {
            t.set(idx, field.one());
        }
    });
    Ok(t)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A simple (outer-product) tensor given by one vector per leg.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleTensor {
    pub factors: Vec<Vec<Scalar>>,
}

impl SimpleTensor {
    pub fn new(factors: Vec<Vec<Scalar>>) -> SimpleTensor {
        SimpleTensor { factors }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Vec::len).collect()
    }

    pub fn expand(&self, field: &FieldSpec) -> Result<Tensor> {
        let dims = self.dims();
        let mut t = Tensor::zeros(field, dims)?;
        let shape = t.shape.clone();
        shape.for_each_index(|idx| {
            let mut v = field.one();
            for (leg, &i) in idx.iter().enumerate() {
                v = v.mul(&self.factors[leg][i]);
            }
            if !v.is_zero() {
                t.set(idx, v);
            }
        });
        Ok(t)
    }

    /// Scale the term by folding a coefficient into the first factor.
    pub fn scaled(&self, c: &Scalar) -> SimpleTensor {
        let mut factors = self.factors.clone();
        for x in &mut factors[0] {
            *x = x.mul(c);
        }
        SimpleTensor { factors }
    }
}

/// A sum of simple tensors claimed to equal a target tensor; the term
/// count is the rank upper bound it witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub field: FieldSpec,
    pub target_dims: Vec<usize>,
    pub terms: Vec<SimpleTensor>,
}

impl Decomposition {
    pub fn new(field: FieldSpec, target_dims: Vec<usize>, terms: Vec<SimpleTensor>) -> Result<Decomposition> {
        for term in &terms {
            if term.dims() != target_dims {
                return Err(Error::ShapeMismatch(format!(
                    "term shape {:?} differs from target {:?}",
                    term.dims(),
                    target_dims
                )));
            }
        }
        Ok(Decomposition { field, target_dims, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of the expanded terms; the empty decomposition is the zero tensor.
    pub fn eval(&self) -> Result<Tensor> {
        let mut acc = Tensor::zeros(&self.field, self.target_dims.clone())?;
        for term in &self.terms {
            acc = acc.add(&term.expand(&self.field)?)?;
        }
        Ok(acc)
    }

    /// Drop terms with a zero factor; they contribute nothing.
    pub fn without_zero_terms(mut self) -> Decomposition {
        self.terms.retain(|t| t.factors.iter().all(|f| f.iter().any(|x| !x.is_zero())));
        self
    }

    /// The n(1)*n(2)-term decomposition of a tensor product obtained by
    /// concatenating factor lists termwise. Witnesses submultiplicativity
    /// of rank constructively.
    pub fn tensor_product(&self, other: &Decomposition) -> Result<Decomposition> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { expected: self.field.clone(), found: other.field.clone() });
        }
        let mut dims = self.target_dims.clone();
        dims.extend_from_slice(&other.target_dims);
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(SimpleTensor::new(factors));
            }
        }
        Decomposition::new(self.field.clone(), dims, terms)
    }

    /// Termwise Kronecker products of aligned factors.
    pub fn kronecker_product(&self, other: &Decomposition) -> Result<Decomposition> {
        if self.field != other.field {
            return Err(Error::FieldMismatch { expected: self.field.clone(), found: other.field.clone() });
        }
        if self.target_dims.len() != other.target_dims.len() {
            return Err(Error::ShapeMismatch("Kronecker product needs equal orders".into()));
        }
        let dims: Vec<usize> = self
            .target_dims
            .iter()
            .zip(other.target_dims.iter())
            .map(|(a, b)| a * b)
            .collect();
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                let factors = a
                    .factors
                    .iter()
                    .zip(b.factors.iter())
                    .map(|(u, v)| {
                        let mut w = Vec::with_capacity(u.len() * v.len());
                        for x in u {
                            for y in v {
                                w.push(x.mul(y));
                            }
                        }
                        w
                    })
                    .collect();
                terms.push(SimpleTensor::new(factors));
            }
        }
        Decomposition::new(self.field.clone(), dims, terms)
    }

    /// One simple term per nonzero entry: the trivial decomposition.
    pub fn from_nonzero_entries(t: &Tensor) -> Decomposition {
        let mut terms = Vec::new();
        for (idx, v) in t.nonzero_entries() {
            let factors = idx
                .iter()
                .enumerate()
                .map(|(leg, &i)| {
                    let mut e = vec![t.field().zero(); t.dims()[leg]];
                    e[i] = if leg == 0 { v.clone() } else { t.field().one() };
                    e
                })
                .collect();
            terms.push(SimpleTensor::new(factors));
        }
        Decomposition { field: t.field().clone(), target_dims: t.dims().to_vec(), terms }
    }

    /// The canonical r-term decomposition of the unit tensor <r>(k).
    pub fn of_unit_tensor(field: &FieldSpec, r: usize, k: usize) -> Result<Decomposition> {
        let t = unit_tensor(field, r, k)?;
        Ok(Decomposition::from_nonzero_entries(&t))
    }
}

/// Strassen's seven bilinear products as a decomposition of <2,2,2>.
pub fn strassen7_decomposition(field: &FieldSpec) -> Decomposition {
    // Each row: the A-side form, the B-side form, and where the product
    // lands in C (third leg indexed (k,i) for C[i,k]).
    let data: [([i64; 4], [i64; 4], [i64; 4]); 7] = [
        ([1, 0, 0, 1], [1, 0, 0, 1], [1, 0, 0, 1]),    // (A11+A22)(B11+B22) -> C11+C22
        ([0, 0, 1, 1], [1, 0, 0, 0], [0, 1, 0, -1]),   // (A21+A22)B11 -> C21-C22
        ([1, 0, 0, 0], [0, 1, 0, -1], [0, 0, 1, 1]),   // A11(B12-B22) -> C12+C22
        ([0, 0, 0, 1], [-1, 0, 1, 0], [1, 1, 0, 0]),   // A22(B21-B11) -> C11+C21
        ([1, 1, 0, 0], [0, 0, 0, 1], [-1, 0, 1, 0]),   // (A11+A12)B22 -> C12-C11
        ([-1, 0, 1, 0], [1, 1, 0, 0], [0, 0, 0, 1]),   // (A21-A11)(B11+B12) -> C22
        ([0, 1, 0, -1], [0, 0, 1, 1], [1, 0, 0, 0]),   // (A12-A22)(B21+B22) -> C11
    ];
    let terms = data
        .iter()
        .map(|(x, y, z)| {
            SimpleTensor::new(vec![
                x.iter().map(|&c| field.from_i64(c)).collect(),
                y.iter().map(|&c| field.from_i64(c)).collect(),
                z.iter().map(|&c| field.from_i64(c)).collect(),
            ])
        })
        .collect();
    Decomposition { field: field.clone(), target_dims: vec![4, 4, 4], terms }
}
