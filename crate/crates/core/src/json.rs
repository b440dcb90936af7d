//! JSON formats for tensors, decompositions and certificates.
//!
//! Scalars travel as strings in the canonical text format, so round
//! trips are bit-exact. Tensor files list only nonzero entries with
//! 1-based comma-separated indices. Certificate files carry one matrix
//! per leg (scalar entries for restrictions, eps-polynomial entries for
//! degenerations) plus the claimed degrees, and may embed their source
//! and target tensors.
//!
//! Error discipline: anything wrong with the file itself (syntax,
//! fields, parse failures, inconsistent dims) is `Error::Malformed`;
//! a well-formed certificate that fails verification surfaces as
//! `Error::InvalidCertificate`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::matrix::{PolyMat, ScalarMat};
use crate::poly::Poly;
use crate::tensor::{Decomposition, SimpleTensor, Tensor};
use crate::transform::{
    verify_degeneration, verify_restriction, Degeneration, Restriction,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDto {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
}

pub fn field_to_dto(f: &FieldSpec) -> FieldDto {
    match f {
        FieldSpec::Rationals => FieldDto { kind: "rationals".into(), p: None, d: None },
        FieldSpec::Prime { p } => FieldDto { kind: "prime".into(), p: Some(*p), d: None },
        FieldSpec::Quadratic { d } => FieldDto { kind: "quadratic".into(), p: None, d: Some(*d) },
    }
}

pub fn field_from_dto(dto: &FieldDto) -> Result<FieldSpec> {
    match dto.kind.as_str() {
        "rationals" => Ok(FieldSpec::Rationals),
        "prime" => {
            let p = dto.p.ok_or_else(|| Error::Malformed("prime field needs \"p\"".into()))?;
            FieldSpec::prime(p).map_err(|e| Error::Malformed(e.to_string()))
        }
        "quadratic" => {
            let d = dto.d.ok_or_else(|| Error::Malformed("quadratic field needs \"d\"".into()))?;
            FieldSpec::quadratic(d).map_err(|e| Error::Malformed(e.to_string()))
        }
        other => Err(Error::Malformed(format!("unknown field kind {other:?}"))),
    }
}

/// Parse a `--field`-style tag: `q`, `fp:<p>` or `qsqrt:<D>`.
pub fn field_from_tag(tag: &str) -> Result<FieldSpec> {
    if tag == "q" {
        return Ok(FieldSpec::Rationals);
    }
    if let Some(p) = tag.strip_prefix("fp:") {
        let p = p.parse().map_err(|_| Error::Malformed(format!("bad modulus in {tag:?}")))?;
        return FieldSpec::prime(p);
    }
    if let Some(d) = tag.strip_prefix("qsqrt:") {
        let d = d.parse().map_err(|_| Error::Malformed(format!("bad discriminant in {tag:?}")))?;
        return FieldSpec::quadratic(d);
    }
    Err(Error::Malformed(format!(
        "unknown field tag {tag:?}; use q, fp:<p> or qsqrt:<D>"
    )))
}

pub fn field_tag(f: &FieldSpec) -> String {
    match f {
        FieldSpec::Rationals => "q".into(),
        FieldSpec::Prime { p } => format!("fp:{p}"),
        FieldSpec::Quadratic { d } => format!("qsqrt:{d}"),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorDto {
    pub field: FieldDto,
    pub dims: Vec<usize>,
    /// Nonzero entries: ["i1,i2,...", "scalar"] with 1-based indices.
    pub entries: Vec<(String, String)>,
}

pub fn tensor_to_dto(t: &Tensor) -> TensorDto {
    let entries = t
        .nonzero_entries()
        .into_iter()
        .map(|(idx, v)| {
            let key = idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            (key, v.to_string())
        })
        .collect();
    TensorDto { field: field_to_dto(t.field()), dims: t.dims().to_vec(), entries }
}

pub fn tensor_from_dto(dto: &TensorDto) -> Result<Tensor> {
    let field = field_from_dto(&dto.field)?;
    let mut t = Tensor::zeros(&field, dto.dims.clone()).map_err(|e| Error::Malformed(e.to_string()))?;
    for (key, value) in &dto.entries {
        let idx: Vec<usize> = key
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Malformed(format!("bad index {key:?}")))
            })
            .collect::<Result<_>>()?;
        if idx.len() != dto.dims.len() {
            return Err(Error::Malformed(format!("index {key:?} has wrong arity")));
        }
        let zero_based: Vec<usize> = idx
            .iter()
            .zip(dto.dims.iter())
            .map(|(&i, &d)| {
                if i == 0 || i > d {
                    Err(Error::Malformed(format!("index {key:?} out of range for dims {:?}", dto.dims)))
                } else {
                    Ok(i - 1)
                }
            })
            .collect::<Result<_>>()?;
        let scalar = field.parse_scalar(value).map_err(|e| Error::Malformed(e.to_string()))?;
        t.set(&zero_based, scalar);
    }
    Ok(t)
}

pub fn tensor_to_json(t: &Tensor) -> String {
    serde_json::to_string_pretty(&tensor_to_dto(t)).expect("serializable")
}

pub fn tensor_from_json(text: &str) -> Result<Tensor> {
    let dto: TensorDto =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    tensor_from_dto(&dto)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDto {
    pub field: FieldDto,
    pub dims: Vec<usize>,
    /// terms[t][leg] = factor vector as scalar strings.
    pub terms: Vec<Vec<Vec<String>>>,
}

pub fn decomposition_to_dto(dec: &Decomposition) -> DecompositionDto {
    DecompositionDto {
        field: field_to_dto(&dec.field),
        dims: dec.target_dims.clone(),
        terms: dec
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .map(|f| f.iter().map(ToString::to_string).collect())
                    .collect()
            })
            .collect(),
    }
}

pub fn decomposition_from_dto(dto: &DecompositionDto) -> Result<Decomposition> {
    let field = field_from_dto(&dto.field)?;
    let mut terms = Vec::with_capacity(dto.terms.len());
    for term in &dto.terms {
        if term.len() != dto.dims.len() {
            return Err(Error::Malformed("term has wrong number of legs".into()));
        }
        let factors: Vec<Vec<_>> = term
            .iter()
            .zip(dto.dims.iter())
            .map(|(f, &d)| {
                if f.len() != d {
                    return Err(Error::Malformed("factor vector has wrong length".into()));
                }
                f.iter()
                    .map(|s| field.parse_scalar(s).map_err(|e| Error::Malformed(e.to_string())))
                    .collect()
            })
            .collect::<Result<_>>()?;
        terms.push(SimpleTensor::new(factors));
    }
    Decomposition::new(field, dto.dims.clone(), terms).map_err(|e| Error::Malformed(e.to_string()))
}

/// On-disk certificate: a restriction, degeneration or decomposition,
/// optionally with its source and target tensors embedded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDto {
    #[serde(rename = "type")]
    pub kind: String,
    pub field: FieldDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_dims: Option<Vec<usize>>,
    pub target_dims: Vec<usize>,
    /// maps[leg][row] = entry strings (scalars, or polynomials in eps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_e: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<TensorDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TensorDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

/// A parsed certificate ready for verification.
#[derive(Debug, Clone)]
pub enum Certificate {
    Restriction(Restriction),
    Degeneration(Degeneration),
    Decomposition(Decomposition),
}

#[derive(Debug, Clone)]
pub struct CertificateFile {
    pub certificate: Certificate,
    pub source: Option<Tensor>,
    pub target: Option<Tensor>,
    pub meta: Option<serde_json::Value>,
}

fn parse_scalar_matrix(field: &FieldSpec, rows: &[Vec<String>]) -> Result<ScalarMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Malformed("ragged or empty matrix".into()));
    }
    let mut m = ScalarMat::zeros(field, r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            *m.at_mut(i, j) = field.parse_scalar(s).map_err(|e| Error::Malformed(e.to_string()))?;
        }
    }
    Ok(m)
}

fn parse_poly_matrix(field: &FieldSpec, rows: &[Vec<String>]) -> Result<PolyMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Malformed("ragged or empty matrix".into()));
    }
    let mut m = PolyMat::zeros(field, r, c);
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            *m.at_mut(i, j) =
                Poly::parse(s, field, "eps").map_err(|e| Error::Malformed(e.to_string()))?;
        }
    }
    Ok(m)
}

fn scalar_matrix_rows(m: &ScalarMat) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_string()).collect())
        .collect()
}

fn poly_matrix_rows(m: &PolyMat) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_string()).collect())
        .collect()
}

pub fn certificate_to_dto(
    cert: &Certificate,
    source: Option<&Tensor>,
    target: Option<&Tensor>,
    meta: Option<serde_json::Value>,
) -> CertificateDto {
    let (kind, field, source_dims, target_dims, maps, terms, claimed_d, claimed_e) = match cert {
        Certificate::Restriction(r) => (
            "restriction",
            r.field.clone(),
            Some(r.source_dims.clone()),
            r.target_dims.clone(),
            Some(r.maps.iter().map(scalar_matrix_rows).collect()),
            None,
            None,
            None,
        ),
        Certificate::Degeneration(g) => (
            "degeneration",
            g.field.clone(),
            Some(g.source_dims.clone()),
            g.target_dims.clone(),
            Some(g.maps.iter().map(poly_matrix_rows).collect()),
            None,
            Some(g.claimed_d),
            Some(g.claimed_e),
        ),
        Certificate::Decomposition(dec) => (
            "decomposition",
            dec.field.clone(),
            None,
            dec.target_dims.clone(),
            None,
            Some(decomposition_to_dto(dec).terms),
            None,
            None,
        ),
    };
    CertificateDto {
        kind: kind.into(),
        field: field_to_dto(&field),
        source_dims,
        target_dims,
        maps,
        terms,
        claimed_d,
        claimed_e,
        source: source.map(tensor_to_dto),
        target: target.map(tensor_to_dto),
        meta,
    }
}

pub fn certificate_from_dto(dto: &CertificateDto) -> Result<CertificateFile> {
    let field = field_from_dto(&dto.field)?;
    let certificate = match dto.kind.as_str() {
        "restriction" => {
            let maps = dto.maps.as_ref().ok_or_else(|| Error::Malformed("restriction needs maps".into()))?;
            let parsed: Vec<ScalarMat> =
                maps.iter().map(|m| parse_scalar_matrix(&field, m)).collect::<Result<_>>()?;
            let r = Restriction::new(field.clone(), parsed).map_err(|e| Error::Malformed(e.to_string()))?;
            if r.target_dims != dto.target_dims {
                return Err(Error::Malformed("maps do not match target_dims".into()));
            }
            if let Some(sd) = &dto.source_dims {
                if r.source_dims != *sd {
                    return Err(Error::Malformed("maps do not match source_dims".into()));
                }
            }
            Certificate::Restriction(r)
        }
        "degeneration" => {
            let maps = dto.maps.as_ref().ok_or_else(|| Error::Malformed("degeneration needs maps".into()))?;
            let parsed: Vec<PolyMat> =
                maps.iter().map(|m| parse_poly_matrix(&field, m)).collect::<Result<_>>()?;
            let d = dto.claimed_d.ok_or_else(|| Error::Malformed("degeneration needs claimed_d".into()))?;
            let e = dto.claimed_e.ok_or_else(|| Error::Malformed("degeneration needs claimed_e".into()))?;
            let g = Degeneration::new(field.clone(), parsed, d, e)
                .map_err(|e| Error::Malformed(e.to_string()))?;
            if g.target_dims != dto.target_dims {
                return Err(Error::Malformed("maps do not match target_dims".into()));
            }
            if let Some(sd) = &dto.source_dims {
                if g.source_dims != *sd {
                    return Err(Error::Malformed("maps do not match source_dims".into()));
                }
            }
            Certificate::Degeneration(g)
        }
        "decomposition" => {
            let terms = dto.terms.as_ref().ok_or_else(|| Error::Malformed("decomposition needs terms".into()))?;
            let inner = DecompositionDto {
                field: dto.field.clone(),
                dims: dto.target_dims.clone(),
                terms: terms.clone(),
            };
            Certificate::Decomposition(decomposition_from_dto(&inner)?)
        }
        other => return Err(Error::Malformed(format!("unknown certificate type {other:?}"))),
    };
    let source = dto.source.as_ref().map(tensor_from_dto).transpose()?;
    let target = dto.target.as_ref().map(tensor_from_dto).transpose()?;
    Ok(CertificateFile { certificate, source, target, meta: dto.meta.clone() })
}

pub fn certificate_to_json(
    cert: &Certificate,
    source: Option<&Tensor>,
    target: Option<&Tensor>,
    meta: Option<serde_json::Value>,
) -> String {
    serde_json::to_string_pretty(&certificate_to_dto(cert, source, target, meta))
        .expect("serializable")
}

pub fn certificate_from_json(text: &str) -> Result<CertificateFile> {
    let dto: CertificateDto =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    certificate_from_dto(&dto)
}

/// Result of verifying a certificate file.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<usize>,
    pub verified: bool,
    pub message: String,
}

/// Verify a parsed certificate against its source/target tensors;
/// explicit arguments override tensors embedded in the file. Missing
/// tensors are a malformed-input condition, not a failed verification.
pub fn verify_certificate(
    file: &CertificateFile,
    source_override: Option<&Tensor>,
    target_override: Option<&Tensor>,
) -> Result<VerifyReport> {
    let source = source_override.or(file.source.as_ref());
    let target = target_override
        .or(file.target.as_ref())
        .ok_or_else(|| Error::Malformed("no target tensor given or embedded".into()))?;
    match &file.certificate {
        Certificate::Restriction(r) => {
            let source = source.ok_or_else(|| Error::Malformed("restriction needs a source tensor".into()))?;
            verify_restriction(r, source, target)?;
            Ok(VerifyReport {
                kind: "restriction".into(),
                d: None,
                e: None,
                terms: None,
                verified: true,
                message: "restriction maps reproduce the target".into(),
            })
        }
        Certificate::Degeneration(g) => {
            let source = source.ok_or_else(|| Error::Malformed("degeneration needs a source tensor".into()))?;
            let (d, e) = verify_degeneration(g, source, target)?;
            Ok(VerifyReport {
                kind: "degeneration".into(),
                d: Some(d),
                e: Some(e),
                terms: None,
                verified: true,
                message: format!("degeneration verified with (d, e) = ({d}, {e})"),
            })
        }
        Certificate::Decomposition(dec) => {
            let value = dec.eval()?;
            if &value != target {
                // reuse the mismatch logged by the restriction path
                let id = Restriction::identity(&dec.field, target.dims());
                return match verify_restriction(&id, &value, target) {
                    Err(e) => Err(e),
                    Ok(()) => unreachable!("values differ"),
                };
            }
            Ok(VerifyReport {
                kind: "decomposition".into(),
                d: None,
                e: None,
                terms: Some(dec.len()),
                verified: true,
                message: format!("{}-term decomposition evaluates to the target", dec.len()),
            })
        }
    }
}

/// Canonical-form report for the pencil CLI output.
pub fn pencil_report(
    cf: &crate::pencil::PencilCanonicalForm,
    basis: &crate::pencil::BasisChange,
    rank: std::result::Result<usize, &Error>,
) -> serde_json::Value {
    let rank_field = match rank {
        Ok(r) => serde_json::json!(r),
        Err(_) => serde_json::Value::Null,
    };
    let note = match rank {
        Ok(_) => serde_json::Value::Null,
        Err(e) => serde_json::json!(e.to_string()),
    };
    serde_json::json!({
        "field": field_to_dto(&cf.field),
        "zero": [cf.zero_rows, cf.zero_cols],
        "eps": cf.eps_indices,
        "eta": cf.eta_indices,
        "invariant_factors": cf.invariant_factors.iter().map(|p| p.to_string_with_var("x")).collect::<Vec<_>>(),
        "ell": cf.ell(),
        "rank": rank_field,
        "rank_note": note,
        "basis_change": {
            "leg1": scalar_matrix_rows(&basis.leg1),
            "leg2": scalar_matrix_rows(&basis.leg2),
            "leg3": scalar_matrix_rows(&basis.leg3),
        },
    })
}

/// Rank bracket report as JSON.
pub fn rank_report_json(report: &crate::bounds::RankBoundReport) -> serde_json::Value {
    serde_json::json!({
        "upper": report.upper,
        "lower": report.lower.to_string(),
        "lower_int": report.lower_int,
        "methods": report.methods,
        "determined": report.determined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{unit_tensor, w_tensor};
    use crate::transform::w_certificate;
    use rand::SeedableRng;

    #[test]
    fn tensor_round_trip() {
        let f = FieldSpec::quadratic(2).unwrap();
        let mut t = Tensor::zeros(&f, vec![2, 3]).unwrap();
        t.set(&[0, 1], f.parse_scalar("1+1/2*sqrt(2)").unwrap());
        t.set(&[1, 2], f.from_i64(-3));
        let json = tensor_to_json(&t);
        assert_eq!(tensor_from_json(&json).unwrap(), t);
    }

    #[test]
    fn tensor_json_shape() {
        let f = FieldSpec::prime(5).unwrap();
        let w3 = w_tensor(&f, 3).unwrap();
        let json = tensor_to_json(&w3);
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["field"]["kind"], "prime");
        assert_eq!(value["field"]["p"], 5);
        assert_eq!(value["dims"], serde_json::json!([2, 2, 2]));
        assert_eq!(value["entries"].as_array().unwrap().len(), 3);
        // 1-based indices
        assert_eq!(value["entries"][0][0], "1,1,2");
    }

    #[test]
    fn malformed_tensor_files() {
        assert!(matches!(tensor_from_json("{"), Err(Error::Malformed(_))));
        let bad_index = r#"{"field":{"kind":"rationals"},"dims":[2,2],"entries":[["3,1","1"]]}"#;
        assert!(matches!(tensor_from_json(bad_index), Err(Error::Malformed(_))));
        let bad_scalar = r#"{"field":{"kind":"rationals"},"dims":[2,2],"entries":[["1,1","x"]]}"#;
        assert!(matches!(tensor_from_json(bad_scalar), Err(Error::Malformed(_))));
        let bad_field = r#"{"field":{"kind":"prime","p":6},"dims":[2],"entries":[]}"#;
        assert!(matches!(tensor_from_json(bad_field), Err(Error::Malformed(_))));
    }

    #[test]
    fn certificate_round_trip_and_verification() {
        let f = FieldSpec::Rationals;
        let g = w_certificate(&f, 3).unwrap();
        let source = unit_tensor(&f, 2, 3).unwrap();
        let target = w_tensor(&f, 3).unwrap();
        let json = certificate_to_json(
            &Certificate::Degeneration(g),
            Some(&source),
            Some(&target),
            Some(serde_json::json!({"family": "w", "params": {"k": 3}})),
        );
        let file = certificate_from_json(&json).unwrap();
        let report = verify_certificate(&file, None, None).unwrap();
        assert!(report.verified);
        assert_eq!((report.d, report.e), (Some(1), Some(2)));
    }

    #[test]
    fn tampered_certificate_is_invalid_not_malformed() {
        let f = FieldSpec::Rationals;
        let g = w_certificate(&f, 3).unwrap();
        let source = unit_tensor(&f, 2, 3).unwrap();
        let mut target = w_tensor(&f, 3).unwrap();
        target.set(&[0, 0, 1], f.from_i64(5));
        let json = certificate_to_json(&Certificate::Degeneration(g), Some(&source), Some(&target), None);
        let file = certificate_from_json(&json).unwrap();
        let err = verify_certificate(&file, None, None).unwrap_err();
        assert!(matches!(err, Error::InvalidCertificate(_)), "got {err:?}");
    }

    #[test]
    fn decomposition_certificate_verifies() {
        let f = FieldSpec::prime(2).unwrap();
        let dec = crate::tensor::strassen7_decomposition(&f);
        let target = crate::tensor::matmul_tensor(&f, 2, 2, 2).unwrap();
        let json = certificate_to_json(&Certificate::Decomposition(dec), None, Some(&target), None);
        let file = certificate_from_json(&json).unwrap();
        let report = verify_certificate(&file, None, None).unwrap();
        assert_eq!(report.terms, Some(7));

        // missing target is malformed, not invalid
        let file_no_target = {
            let mut dto: CertificateDto = serde_json::from_str(&json).unwrap();
            dto.target = None;
            certificate_from_dto(&dto).unwrap()
        };
        assert!(matches!(
            verify_certificate(&file_no_target, None, None),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn truncated_json_is_malformed() {
        let f = FieldSpec::Rationals;
        let g = w_certificate(&f, 3).unwrap();
        let json = certificate_to_json(&Certificate::Degeneration(g), None, None, None);
        let truncated = &json[..json.len() / 2];
        assert!(matches!(certificate_from_json(truncated), Err(Error::Malformed(_))));
    }

    #[test]
    fn restriction_certificate_round_trip() {
        let f = FieldSpec::prime(5).unwrap();
        let g = w_certificate(&f, 3).unwrap();
        let r = crate::transform::interpolate_to_restriction(&g, None).unwrap();
        let source =
            crate::transform::interpolation_source(&g, &unit_tensor(&f, 2, 3).unwrap()).unwrap();
        let target = w_tensor(&f, 3).unwrap();
        let json =
            certificate_to_json(&Certificate::Restriction(r), Some(&source), Some(&target), None);
        let file = certificate_from_json(&json).unwrap();
        let report = verify_certificate(&file, None, None).unwrap();
        assert!(report.verified);
    }

    #[test]
    fn field_tags() {
        assert_eq!(field_from_tag("q").unwrap(), FieldSpec::Rationals);
        assert_eq!(field_from_tag("fp:10007").unwrap(), FieldSpec::prime(10007).unwrap());
        assert_eq!(field_from_tag("qsqrt:2").unwrap(), FieldSpec::quadratic(2).unwrap());
        assert!(field_from_tag("fp:8").is_err());
        assert!(field_from_tag("banana").is_err());
        for f in [FieldSpec::Rationals, FieldSpec::prime(7).unwrap(), FieldSpec::quadratic(-1).unwrap()] {
            assert_eq!(field_from_tag(&field_tag(&f)).unwrap(), f);
        }
    }

    #[test]
    fn random_decomposition_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for field in [FieldSpec::Rationals, FieldSpec::prime(10007).unwrap(), FieldSpec::quadratic(2).unwrap()] {
            let terms: Vec<SimpleTensor> = (0..3)
                .map(|_| {
                    SimpleTensor::new(
                        vec![2, 3]
                            .into_iter()
                            .map(|d| (0..d).map(|_| field.random_scalar(&mut rng)).collect())
                            .collect(),
                    )
                })
                .collect();
            let dec = Decomposition::new(field.clone(), vec![2, 3], terms).unwrap();
            let dto = decomposition_to_dto(&dec);
            let json = serde_json::to_string(&dto).unwrap();
            let back = decomposition_from_dto(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, dec);
        }
    }
}
