//! Restriction and degeneration certificates, their products and
//! truncations, and the interpolation machinery that turns degenerations
//! into explicit restrictions and power decompositions.
//!
//! A restriction certificate is one matrix per leg; applying it legwise
//! must reproduce the target exactly. A degeneration certificate is one
//! eps-polynomial matrix per leg; applying it yields
//! eps^d * target + higher-order error terms, with approximation degree
//! d and error degree e read off the expansion. Claimed degrees on a
//! certificate are advisory: verification recomputes them and rejects
//! mismatches.

use crate::error::{Error, Result};
use crate::field::{Cardinality, FieldSpec, Scalar};
use crate::matrix::{Entry, Mat, PolyMat, ScalarMat};
use crate::poly::{Poly, Valuation};
use crate::tensor::{
    chi_tensor, unit_tensor, w_tensor, Decomposition, SimpleTensor, Tensor,
};

/// Linear maps A_i: source leg i -> target leg i, stored target x source.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub field: FieldSpec,
    pub maps: Vec<ScalarMat>,
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
}

impl Restriction {
    pub fn new(field: FieldSpec, maps: Vec<ScalarMat>) -> Result<Restriction> {
        if maps.is_empty() {
            return Err(Error::ShapeMismatch("a restriction needs at least one leg".into()));
        }
        let source_dims = maps.iter().map(Mat::cols).collect();
        let target_dims = maps.iter().map(Mat::rows).collect();
        for m in &maps {
            if *m.field() != field {
                return Err(Error::FieldMismatch { expected: field, found: m.field().clone() });
            }
        }
        Ok(Restriction { field, maps, source_dims, target_dims })
    }

    pub fn identity(field: &FieldSpec, dims: &[usize]) -> Restriction {
        let maps = dims.iter().map(|&d| ScalarMat::identity(field, d)).collect();
        Restriction {
            field: field.clone(),
            maps,
            source_dims: dims.to_vec(),
            target_dims: dims.to_vec(),
        }
    }
}

/// Eps-polynomial maps A_i(eps) with claimed approximation and error
/// degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Degeneration {
    pub field: FieldSpec,
    pub maps: Vec<PolyMat>,
    pub claimed_d: usize,
    pub claimed_e: usize,
    pub source_dims: Vec<usize>,
    pub target_dims: Vec<usize>,
}

impl Degeneration {
    pub fn new(field: FieldSpec, maps: Vec<PolyMat>, claimed_d: usize, claimed_e: usize) -> Result<Degeneration> {
        if maps.is_empty() {
            return Err(Error::ShapeMismatch("a degeneration needs at least one leg".into()));
        }
        let source_dims = maps.iter().map(Mat::cols).collect();
        let target_dims = maps.iter().map(Mat::rows).collect();
        for m in &maps {
            if *m.field() != field {
                return Err(Error::FieldMismatch { expected: field, found: m.field().clone() });
            }
        }
        Ok(Degeneration { field, maps, claimed_d, claimed_e, source_dims, target_dims })
    }

    /// A restriction viewed as a degeneration with constant maps (d = e = 0).
    pub fn from_restriction(r: &Restriction) -> Degeneration {
        Degeneration {
            field: r.field.clone(),
            maps: r.maps.iter().map(PolyMat::from_scalar).collect(),
            claimed_d: 0,
            claimed_e: 0,
            source_dims: r.source_dims.clone(),
            target_dims: r.target_dims.clone(),
        }
    }

    pub fn order(&self) -> usize {
        self.maps.len()
    }

    pub fn max_entry_degree(&self) -> usize {
        self.maps.iter().filter_map(PolyMat::max_entry_degree).max().unwrap_or(0)
    }
}

/// Apply one matrix to one leg of a dense array of entries.
fn apply_leg<T: Entry>(
    dims: &[usize],
    entries: &[T],
    leg: usize,
    m: &Mat<T>,
    field: &FieldSpec,
) -> (Vec<usize>, Vec<T>) {
    let stride_post: usize = dims[leg + 1..].iter().product();
    let d_in = dims[leg];
    let d_out = m.rows();
    let blocks = entries.len() / (d_in * stride_post);
    let mut out = vec![T::zero_of(field); blocks * d_out * stride_post];
    for pre in 0..blocks {
        let in_base = pre * d_in * stride_post;
        let out_base = pre * d_out * stride_post;
        for j in 0..d_out {
            for i in 0..d_in {
                let coeff = m.at(j, i);
                if coeff.is_zero() {
                    continue;
                }
                for post in 0..stride_post {
                    let v = entries[in_base + i * stride_post + post].mul(coeff);
                    let slot = &mut out[out_base + j * stride_post + post];
                    *slot = slot.add(&v);
                }
            }
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[leg] = d_out;
    (new_dims, out)
}

fn check_source(field: &FieldSpec, source_dims: &[usize], t: &Tensor) -> Result<()> {
    if t.field() != field {
        return Err(Error::FieldMismatch { expected: field.clone(), found: t.field().clone() });
    }
    if t.dims() != source_dims {
        return Err(Error::ShapeMismatch(format!(
            "certificate expects source dims {:?}, tensor has {:?}",
            source_dims,
            t.dims()
        )));
    }
    Ok(())
}

/// (A_1 (x) ... (x) A_k) t, applied legwise.
pub fn apply_restriction(r: &Restriction, t: &Tensor) -> Result<Tensor> {
    check_source(&r.field, &r.source_dims, t)?;
    let mut dims = t.dims().to_vec();
    let mut entries = t.entries().to_vec();
    for (leg, m) in r.maps.iter().enumerate() {
        let (nd, ne) = apply_leg(&dims, &entries, leg, m, &r.field);
        dims = nd;
        entries = ne;
    }
    Tensor::from_entries(&r.field, dims, entries)
}

/// Full eps-expansion of a degeneration applied to a source tensor.
#[derive(Debug, Clone)]
pub struct DegenerationExpansion {
    /// Nonzero coefficient tensors by eps-degree, ascending.
    pub terms: Vec<(usize, Tensor)>,
    /// Approximation degree: the valuation of the expansion.
    pub d: usize,
    /// Error degree: top degree minus d.
    pub e: usize,
}

impl DegenerationExpansion {
    pub fn coefficient(&self, degree: usize) -> Option<&Tensor> {
        self.terms.iter().find(|(d, _)| *d == degree).map(|(_, t)| t)
    }
}

/// Expand (A_1(eps) (x) ... (x) A_k(eps)) t by eps-degree. Errors if the
/// result is identically zero (no valuation to read off).
pub fn apply_degeneration(g: &Degeneration, t: &Tensor) -> Result<DegenerationExpansion> {
    check_source(&g.field, &g.source_dims, t)?;
    let mut dims = t.dims().to_vec();
    let mut entries: Vec<Poly> = t.entries().iter().map(|e| Poly::constant(e.clone())).collect();
    for (leg, m) in g.maps.iter().enumerate() {
        let (nd, ne) = apply_leg(&dims, &entries, leg, m, &g.field);
        dims = nd;
        entries = ne;
    }
    let mut low = usize::MAX;
    let mut high = 0usize;
    for p in &entries {
        if let Valuation::Finite(v) = p.valuation() {
            low = low.min(v);
            high = high.max(p.degree().unwrap());
        }
    }
    if low == usize::MAX {
        return Err(Error::InvalidCertificate(
            "degeneration maps send the source to zero; no approximation degree".into(),
        ));
    }
    let mut terms = Vec::new();
    for deg in low..=high {
        let coeff: Vec<Scalar> = entries.iter().map(|p| p.coeff(deg)).collect();
        let tensor = Tensor::from_entries(&g.field, dims.clone(), coeff)?;
        if !tensor.is_zero() {
            terms.push((deg, tensor));
        }
    }
    Ok(DegenerationExpansion { terms, d: low, e: high - low })
}

/// Verify a restriction certificate: the applied source must equal the
/// target entry for entry. Reports the first mismatching index.
pub fn verify_restriction(r: &Restriction, source: &Tensor, target: &Tensor) -> Result<()> {
    let got = apply_restriction(r, source)?;
    expect_equal(&got, target)
}

fn expect_equal(got: &Tensor, target: &Tensor) -> Result<()> {
    if got.dims() != target.dims() {
        return Err(Error::InvalidCertificate(format!(
            "result dims {:?} differ from target {:?}",
            got.dims(),
            target.dims()
        )));
    }
    if got.field() != target.field() {
        return Err(Error::FieldMismatch {
            expected: target.field().clone(),
            found: got.field().clone(),
        });
    }
    let mut mismatch = None;
    got.shape().for_each_index(|idx| {
        if mismatch.is_none() && got.get(idx) != target.get(idx) {
            mismatch = Some((
                idx.iter().map(|i| i + 1).collect::<Vec<_>>(),
                got.get(idx).clone(),
                target.get(idx).clone(),
            ));
        }
    });
    match mismatch {
        None => Ok(()),
        Some((idx, got_v, want_v)) => Err(Error::InvalidCertificate(format!(
            "first mismatch at index {idx:?}: got {got_v}, expected {want_v}"
        ))),
    }
}

/// Verify a degeneration certificate against a source and target:
/// recomputes (d, e), requires the eps^d coefficient to equal the
/// target, d to match the claim, and e to stay within the claimed
/// error degree. Returns the recomputed (d, e).
pub fn verify_degeneration(g: &Degeneration, source: &Tensor, target: &Tensor) -> Result<(usize, usize)> {
    let expansion = apply_degeneration(g, source)?;
    if expansion.d != g.claimed_d {
        return Err(Error::InvalidCertificate(format!(
            "approximation degree is {}, certificate claims {}",
            expansion.d, g.claimed_d
        )));
    }
    if expansion.e > g.claimed_e {
        return Err(Error::InvalidCertificate(format!(
            "error degree is {}, certificate claims at most {}",
            expansion.e, g.claimed_e
        )));
    }
    let lead = expansion.coefficient(expansion.d).expect("valuation term present");
    expect_equal(lead, target).map_err(|e| match e {
        Error::InvalidCertificate(msg) => {
            Error::InvalidCertificate(format!("eps^{} coefficient: {msg}", expansion.d))
        }
        other => other,
    })?;
    Ok((expansion.d, expansion.e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    /// Concatenate legs; orders add.
    TensorProduct,
    /// Pair legs of equal-order certificates; dimensions multiply.
    KroneckerProduct,
}

/// Product of degenerations: degrees add in both modes.
pub fn degeneration_product(g1: &Degeneration, g2: &Degeneration, mode: ProductMode) -> Result<Degeneration> {
    if g1.field != g2.field {
        return Err(Error::FieldMismatch { expected: g1.field.clone(), found: g2.field.clone() });
    }
    let maps = match mode {
        ProductMode::TensorProduct => {
            let mut maps = g1.maps.clone();
            maps.extend(g2.maps.iter().cloned());
            maps
        }
        ProductMode::KroneckerProduct => {
            if g1.order() != g2.order() {
                return Err(Error::ShapeMismatch(
                    "Kronecker product of degenerations needs equal orders".into(),
                ));
            }
            g1.maps.iter().zip(g2.maps.iter()).map(|(a, b)| a.kronecker(b)).collect()
        }
    };
    Degeneration::new(
        g1.field.clone(),
        maps,
        g1.claimed_d + g2.claimed_d,
        g1.claimed_e + g2.claimed_e,
    )
}

/// Truncate every map entry to degree at most d (the verified
/// approximation degree). The eps^d coefficient is unchanged and the
/// new error degree is at most (k-1)d.
pub fn truncate_degeneration(g: &Degeneration, source: &Tensor) -> Result<Degeneration> {
    let expansion = apply_degeneration(g, source)?;
    let d = expansion.d;
    let maps = g.maps.iter().map(|m| m.truncate_entries(d)).collect();
    let k = g.order();
    let truncated = Degeneration::new(g.field.clone(), maps, d, (k - 1) * d)?;
    // The truncated certificate must still verify with the same leading
    // coefficient; recompute as a sanity gate.
    let re = apply_degeneration(&truncated, source)?;
    if re.d != d || re.coefficient(d) != expansion.coefficient(d) {
        return Err(Error::InvalidCertificate(
            "truncation changed the leading coefficient; input was not verified".into(),
        ));
    }
    Ok(truncated)
}

fn scalar_pow(s: &Scalar, n: usize) -> Scalar {
    let mut acc = s.field().one();
    for _ in 0..n {
        acc = acc.mul(s);
    }
    acc
}

fn default_alphas(field: &FieldSpec, count: usize) -> Result<Vec<Scalar>> {
    if let Cardinality::Finite(p) = field.cardinality() {
        if (p as usize) < count + 1 {
            return Err(Error::FieldTooSmall(format!(
                "need {count} distinct nonzero interpolation points, F_{p} has {}",
                p - 1
            )));
        }
    }
    Ok((1..=count as i64).map(|j| field.from_i64(j)).collect())
}

fn validate_alphas(field: &FieldSpec, alphas: &[Scalar], count: usize) -> Result<()> {
    if alphas.len() != count {
        return Err(Error::InvalidParameter(format!(
            "expected {count} interpolation points, got {}",
            alphas.len()
        )));
    }
    for (i, a) in alphas.iter().enumerate() {
        if a.field() != *field {
            return Err(Error::FieldMismatch { expected: field.clone(), found: a.field() });
        }
        if a.is_zero() {
            return Err(Error::InvalidParameter("interpolation points must be nonzero".into()));
        }
        for b in &alphas[..i] {
            if a == b {
                return Err(Error::InvalidParameter(format!(
                    "duplicate interpolation point {a}"
                )));
            }
        }
    }
    Ok(())
}

/// Convert a degeneration with error degree e into a restriction from
/// source (x) <e+1> to the target, by Lagrange interpolation at e+1
/// distinct nonzero points.
///
/// The interpolation weight beta_j = prod_{m != j} alpha_m / (alpha_m -
/// alpha_j) recovers the eps^0 value of eps^{-d} times the expansion.
/// Each weight enters the product of legs exactly once, folded into the
/// first leg's map together with alpha_j^{-d}; the remaining legs use
/// the plain evaluations A_i(alpha_j).
pub fn interpolate_to_restriction(g: &Degeneration, alphas: Option<&[Scalar]>) -> Result<Restriction> {
    let e = g.claimed_e;
    let d = g.claimed_d;
    let points = match alphas {
        Some(a) => {
            validate_alphas(&g.field, a, e + 1)?;
            a.to_vec()
        }
        None => default_alphas(&g.field, e + 1)?,
    };
    let mut betas = Vec::with_capacity(points.len());
    for (j, aj) in points.iter().enumerate() {
        let mut beta = g.field.one();
        for (m, am) in points.iter().enumerate() {
            if m != j {
                beta = beta.mul(&am.div(&am.sub(aj))?);
            }
        }
        betas.push(beta);
    }
    let n = points.len();
    let maps = g
        .maps
        .iter()
        .enumerate()
        .map(|(leg, a_of_eps)| {
            let rows = a_of_eps.rows();
            let cols = a_of_eps.cols();
            let mut b = ScalarMat::zeros(&g.field, rows, cols * n);
            for (j, aj) in points.iter().enumerate() {
                let evaluated = ScalarMat::eval_of(a_of_eps, aj);
                let coeff = if leg == 0 {
                    betas[j].mul(&scalar_pow(&aj.inv().expect("nonzero alpha"), d))
                } else {
                    g.field.one()
                };
                for v in 0..rows {
                    for u in 0..cols {
                        let val = evaluated.at(v, u).mul(&coeff);
                        if !val.is_zero() {
                            *b.at_mut(v, u * n + j) = val;
                        }
                    }
                }
            }
            b
        })
        .collect();
    Restriction::new(g.field.clone(), maps)
}

/// Convert a degeneration with approximation degree d and entry degrees
/// at most d into a restriction from source (x) chi_d(k) to the target:
/// leg maps B_i = sum_a A_{i,a} (x) b_a^*, so the chi tensor selects
/// exactly the eps-exponent tuples summing to d. Works over any field,
/// no size hypothesis.
pub fn chi_restriction(g: &Degeneration) -> Result<Restriction> {
    let d = g.claimed_d;
    if g.max_entry_degree() > d {
        return Err(Error::InvalidParameter(format!(
            "map entries have degree {} > d = {d}; truncate the degeneration first",
            g.max_entry_degree()
        )));
    }
    let n = d + 1;
    let maps = g
        .maps
        .iter()
        .map(|a_of_eps| {
            let rows = a_of_eps.rows();
            let cols = a_of_eps.cols();
            let mut b = ScalarMat::zeros(&g.field, rows, cols * n);
            for a in 0..n {
                let coeff_mat = a_of_eps.coeff_matrix(a);
                for v in 0..rows {
                    for u in 0..cols {
                        let val = coeff_mat.at(v, u);
                        if !val.is_zero() {
                            *b.at_mut(v, u * n + a) = val.clone();
                        }
                    }
                }
            }
            b
        })
        .collect();
    Restriction::new(g.field.clone(), maps)
}

/// The source tensor a chi-restriction acts on: source (x) chi_d(k).
pub fn chi_restriction_source(g: &Degeneration, source: &Tensor) -> Result<Tensor> {
    let chi = chi_tensor(&g.field, g.claimed_d, g.order())?;
    source.kronecker_product(&chi)
}

/// The source tensor a Lagrange restriction acts on: source (x) <e+1>.
pub fn interpolation_source(g: &Degeneration, source: &Tensor) -> Result<Tensor> {
    let unit = unit_tensor(&g.field, g.claimed_e + 1, g.order())?;
    source.kronecker_product(&unit)
}

/// Explicit decomposition of target^{(x) n} from a degeneration of the
/// target out of a unit tensor: n-fold product, Lagrange interpolation,
/// then pushing the canonical unit-tensor decomposition through the
/// restriction maps. At most (ne+1) r^n terms.
pub fn power_decomposition(
    g: &Degeneration,
    n: usize,
    alphas: Option<&[Scalar]>,
) -> Result<Decomposition> {
    if n == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let k = g.order();
    let r = g.source_dims[0];
    if g.source_dims.iter().any(|&dim| dim != r) {
        return Err(Error::InvalidParameter(
            "power decomposition needs a degeneration out of a unit tensor".into(),
        ));
    }
    let source = unit_tensor(&g.field, r, k)?;
    // Recompute the degrees; claimed values on imported certificates are
    // advisory only.
    let expansion = apply_degeneration(g, &source)?;
    let (d, e) = (expansion.d, expansion.e);

    let mut product = g.clone();
    product.claimed_d = d;
    product.claimed_e = e;
    let single = product.clone();
    for _ in 1..n {
        product = degeneration_product(&product, &single, ProductMode::TensorProduct)?;
    }
    let restriction = interpolate_to_restriction(&product, alphas)?;

    // Canonical decomposition of unit(r,k)^{(x)n} (x) <ne+1>(nk): one term
    // per (i_1..i_n, j); the factor on leg (m, l) is the basis vector
    // with composite index i_m * (ne+1) + j. Push each factor through the
    // matching restriction map.
    let points = e * n + 1;
    let mut terms = Vec::new();
    let mut word = vec![0usize; n];
    loop {
        for j in 0..points {
            let mut factors = Vec::with_capacity(n * k);
            for (global_leg, map) in restriction.maps.iter().enumerate() {
                let copy = global_leg / k;
                let composite = word[copy] * points + j;
                factors.push(map.col(composite));
            }
            terms.push(SimpleTensor::new(factors));
        }
        // next word in [r]^n
        let mut pos = 0;
        loop {
            if pos == n {
                let dims = restriction.target_dims.clone();
                let dec = Decomposition::new(g.field.clone(), dims, terms)?;
                return Ok(dec.without_zero_terms());
            }
            word[pos] += 1;
            if word[pos] < r {
                break;
            }
            word[pos] = 0;
            pos += 1;
        }
    }
}

/// The degeneration behind rank^{k-1}(W_k) <= 2: identical 2x2 maps
/// [[1, 1], [eps, 0]] on every leg, with a sign flip in the last one.
pub fn w_certificate(field: &FieldSpec, k: usize) -> Result<Degeneration> {
    if k < 3 {
        return Err(Error::InvalidParameter("W_k needs k >= 3".into()));
    }
    let eps = Poly::monomial(field.one(), 1);
    let plain = Mat::from_rows(
        field,
        vec![
            vec![Poly::one(field), Poly::one(field)],
            vec![eps.clone(), Poly::zero(field)],
        ],
    );
    let last = Mat::from_rows(
        field,
        vec![
            vec![Poly::one(field), Poly::constant(field.from_i64(-1))],
            vec![eps, Poly::zero(field)],
        ],
    );
    let mut maps = vec![plain; k - 1];
    maps.push(last);
    Degeneration::new(field.clone(), maps, 1, k - 1)
}

/// A (d, e) = (1, 1) degeneration of Str_q^k out of unit(q+1, k): q
/// point terms (b_1 + eps b_i) (x) b_i (x) (b_1 + eps b_i) plus one
/// correction term -b_1 (x) (sum_i b_i) (x) b_1, padded by b_1 on the
/// remaining legs. Accepted because it passes the expansion oracle, not
/// on faith.
pub fn str_certificate(field: &FieldSpec, q: usize, k: usize) -> Result<Degeneration> {
    if q < 1 || k < 3 {
        return Err(Error::InvalidParameter("Str_q^k needs q >= 1, k >= 3".into()));
    }
    let n = q + 1;
    let eps = Poly::monomial(field.one(), 1);
    let one = Poly::one(field);
    // Columns indexed by the unit-tensor diagonal m = 0..q.
    let mut a1 = PolyMat::zeros(field, n, n);
    let mut a2 = PolyMat::zeros(field, n, n);
    let mut a3 = PolyMat::zeros(field, n, n);
    for m in 0..q {
        *a1.at_mut(0, m) = one.clone();
        *a1.at_mut(m + 1, m) = eps.clone();
        *a2.at_mut(m + 1, m) = one.clone();
        *a3.at_mut(0, m) = one.clone();
        *a3.at_mut(m + 1, m) = eps.clone();
    }
    *a1.at_mut(0, q) = Poly::constant(field.from_i64(-1));
    for i in 1..=q {
        *a2.at_mut(i, q) = one.clone();
    }
    *a3.at_mut(0, q) = one.clone();
    let mut maps = vec![a1, a2, a3];
    for _ in 3..k {
        // Constant leg: every diagonal column lands on b_1.
        let mut pad = PolyMat::zeros(field, n, n);
        for m in 0..n {
            *pad.at_mut(0, m) = one.clone();
        }
        maps.push(pad);
    }
    let g = Degeneration::new(field.clone(), maps, 1, 1)?;
    // Oracle gate: the construction is only trusted through its expansion.
    let source = unit_tensor(field, n, k)?;
    let target = crate::tensor::strassen_tensor(field, q, k)?;
    verify_degeneration(&g, &source, &target)?;
    Ok(g)
}

/// The two-term decomposition of W_3 + c b_2 (x) b_2 (x) b_2 as a
/// difference of cubes, for any nonzero c with a square root in the
/// field; characteristic 2 is excluded (the leading 1/(2 sqrt c) needs
/// an invertible 2).
pub fn two_term_w3_plus(field: &FieldSpec, c: &Scalar) -> Result<Decomposition> {
    if field.characteristic() == 2 {
        return Err(Error::UnsupportedField("two-term trick needs characteristic != 2".into()));
    }
    if c.is_zero() {
        return Err(Error::InvalidParameter("c must be nonzero".into()));
    }
    let sqrt_c = field
        .sqrt(c)
        .ok_or_else(|| Error::NoSquareRoot(c.to_string()))?;
    let two = field.from_i64(2);
    let coeff = two.mul(&sqrt_c).inv()?;
    let plus = vec![field.one(), sqrt_c.clone()];
    let minus = vec![field.one(), sqrt_c.neg()];
    let term1 = SimpleTensor::new(vec![plus.clone(), plus.clone(), plus]).scaled(&coeff);
    let term2 = SimpleTensor::new(vec![minus.clone(), minus.clone(), minus]).scaled(&coeff.neg());
    Decomposition::new(field.clone(), vec![2, 2, 2], vec![term1, term2])
}

/// The target of `two_term_w3_plus`: W_3 + c b_2 (x) b_2 (x) b_2.
pub fn w3_plus_cube(field: &FieldSpec, c: &Scalar) -> Result<Tensor> {
    let mut t = w_tensor(field, 3)?;
    t.set(&[1, 1, 1], c.clone());
    Ok(t)
}

/// The eight-term decomposition of W_3 (x) W_3: square the two-term
/// decomposition of W_3 + b_2^3, then subtract the two cross terms built
/// from W_3 + (1/2) b_2^3. Needs sqrt(1/2) in the field.
pub fn w3_squared_decomposition(field: &FieldSpec) -> Result<Decomposition> {
    let one = field.one();
    let half = field.from_i64(2).inv().map_err(|_| {
        Error::UnsupportedField("characteristic 2 has no 1/2".into())
    })?;
    let d_one = two_term_w3_plus(field, &one)?;
    let d_half = two_term_w3_plus(field, &half)?;
    let b222 = cube_term_decomposition(field)?;
    let squared = d_one.tensor_product(&d_one)?;
    let cross1 = scale_decomposition(d_half.tensor_product(&b222)?, &field.from_i64(-1));
    let cross2 = scale_decomposition(b222.tensor_product(&d_half)?, &field.from_i64(-1));
    let mut terms = squared.terms;
    terms.extend(cross1.terms);
    terms.extend(cross2.terms);
    Decomposition::new(field.clone(), vec![2, 2, 2, 2, 2, 2], terms)
}

/// The 21-term decomposition of W_3 (x) W_3 (x) W_3, extending the
/// squared construction one level: with X = b_2^3,
/// W^3 = (W+X)^3 - (W+X/2)(W+X/2)X - (W+X/2)X(W+X/2) - X(W+X/2)(W+X/2)
///       - (1/4) X^3,
/// which costs 2^3 + 3 * 2^2 + 1 = 21 simple terms.
pub fn w3_cubed_decomposition(field: &FieldSpec) -> Result<Decomposition> {
    let one = field.one();
    let half = field.from_i64(2).inv().map_err(|_| {
        Error::UnsupportedField("characteristic 2 has no 1/2".into())
    })?;
    let minus_one = field.from_i64(-1);
    let d_one = two_term_w3_plus(field, &one)?;
    let d_half = two_term_w3_plus(field, &half)?;
    let x = cube_term_decomposition(field)?;
    let mut terms = d_one.tensor_product(&d_one)?.tensor_product(&d_one)?.terms;
    let hh = d_half.tensor_product(&d_half)?;
    terms.extend(scale_decomposition(hh.tensor_product(&x)?, &minus_one).terms);
    terms.extend(scale_decomposition(d_half.tensor_product(&x)?.tensor_product(&d_half)?, &minus_one).terms);
    terms.extend(scale_decomposition(x.tensor_product(&hh)?, &minus_one).terms);
    let quarter = field.from_i64(4).inv()?.neg();
    terms.extend(scale_decomposition(x.tensor_product(&x)?.tensor_product(&x)?, &quarter).terms);
    Decomposition::new(field.clone(), vec![2; 9], terms)
}

/// b_2 (x) b_2 (x) b_2 as a one-term decomposition.
fn cube_term_decomposition(field: &FieldSpec) -> Result<Decomposition> {
    let e2 = vec![field.zero(), field.one()];
    Decomposition::new(
        field.clone(),
        vec![2, 2, 2],
        vec![SimpleTensor::new(vec![e2.clone(), e2.clone(), e2])],
    )
}

fn scale_decomposition(dec: Decomposition, c: &Scalar) -> Decomposition {
    Decomposition { terms: dec.terms.into_iter().map(|t| t.scaled(c)).collect(), ..dec }
}
