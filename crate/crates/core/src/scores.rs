//! Local similarity scores over neighbor sets.
//!
//! Undirected scores (CN, AA, RA, Jaccard) read `Γ(x) = A(x) ∪ D(x)`.
//! The hierarchical scores read the out-neighbors `A(x)` (ancestors) and
//! in-neighbors `D(x)` (descendants):
//!
//! | kind         | score of `x → y`                                           |
//! |--------------|------------------------------------------------------------|
//! | `ded`        | `|A(x) ∩ D(y)| / |A(x)|`                                   |
//! | `ind`        | `|D(x) ∩ D(y)| / |D(x)|`                                   |
//! | `inf`        | `ded + ind`                                                |
//! | `inf_log`    | `ded·log|A(x)| + ind·log|D(x)|`                            |
//! | `inf_log_kd` | `k·ded·log|A(x)| + ind·log|D(x)|`                          |
//!
//! A proportion with an empty context (`|A(x)| = 0` or `|D(x)| = 0`) is 0.
//!
//! Every set-level function here is a thin wrapper that computes
//! intersection sizes and hands them to a `*_from_counts` / `*_term` kernel.
//! The engine accumulates the same counts by walking 2-hop paths and calls
//! the same kernels, so both routes evaluate identical floating-point
//! expressions in identical order.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("unknown score `{0}` (expected one of cn, aa, ra, jaccard, ded, ind, inf, inf_log, inf_log_kd)")]
    UnknownKind(String),
    #[error("k must be a positive finite number, got {0}")]
    InvalidK(f64),
    #[error("log base must be a finite number greater than 1, got {0}")]
    InvalidLogBase(f64),
    #[error("malformed score parameter `{0}`")]
    BadParameter(String),
    #[error("common neighbor {vertex} has undirected degree {degree}; a shared neighbor of two distinct vertices needs at least 2")]
    DegreeTooSmall { vertex: VertexId, degree: usize },
    #[error("score `{0}` is not a hierarchical (directed) score")]
    NotDirected(ScoreKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScoreKind {
    Cn,
    Aa,
    Ra,
    Jaccard,
    Ded,
    Ind,
    Inf,
    InfLog,
    InfLogKd,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 9] = [
        Self::Cn,
        Self::Aa,
        Self::Ra,
        Self::Jaccard,
        Self::Ded,
        Self::Ind,
        Self::Inf,
        Self::InfLog,
        Self::InfLogKd,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Self::Cn => "cn",
            Self::Aa => "aa",
            Self::Ra => "ra",
            Self::Jaccard => "jaccard",
            Self::Ded => "ded",
            Self::Ind => "ind",
            Self::Inf => "inf",
            Self::InfLog => "inf_log",
            Self::InfLogKd => "inf_log_kd",
        }
    }

    /// True for scores computed on the undirected view `Γ`.
    pub fn is_undirected(self) -> bool {
        matches!(self, Self::Cn | Self::Aa | Self::Ra | Self::Jaccard)
    }

    /// True when the score has a deductive (out-out path) component.
    pub fn uses_ded(self) -> bool {
        matches!(self, Self::Ded | Self::Inf | Self::InfLog | Self::InfLogKd)
    }

    /// True when the score has an inductive (in-out path) component.
    pub fn uses_ind(self) -> bool {
        matches!(self, Self::Ind | Self::Inf | Self::InfLog | Self::InfLogKd)
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ScoreKind {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| ScoreError::UnknownKind(s.to_owned()))
    }
}

/// Logarithm used by AA and the log-weighted hierarchical terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum LogBase {
    #[default]
    Natural,
    Base(f64),
}

impl LogBase {
    pub fn new(base: f64) -> Result<Self, ScoreError> {
        if base.is_finite() && base > 1.0 {
            Ok(Self::Base(base))
        } else {
            Err(ScoreError::InvalidLogBase(base))
        }
    }

    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            Self::Natural => x.ln(),
            Self::Base(b) => x.ln() / b.ln(),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Natural => f.write_str("e"),
            Self::Base(b) => write!(f, "{b}"),
        }
    }
}

impl FromStr for LogBase {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" | "ln" | "natural" => Ok(Self::Natural),
            _ => {
                let b: f64 = s.parse().map_err(|_| ScoreError::BadParameter(s.to_owned()))?;
                Self::new(b)
            }
        }
    }
}

/// A score kind together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreSpec {
    pub kind: ScoreKind,
    /// Multiplier on the deductive term; only `inf_log_kd` reads it.
    pub k: f64,
    pub log_base: LogBase,
}

impl ScoreSpec {
    pub const DEFAULT_K: f64 = 2.0;

    pub fn new(kind: ScoreKind) -> Self {
        Self { kind, k: Self::DEFAULT_K, log_base: LogBase::Natural }
    }

    pub fn with_k(mut self, k: f64) -> Result<Self, ScoreError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ScoreError::InvalidK(k));
        }
        self.k = k;
        Ok(self)
    }

    pub fn with_log_base(mut self, base: LogBase) -> Self {
        self.log_base = base;
        self
    }

    /// `INF_LOG_2D`, the hybrid score with `k = 2`.
    pub fn inf_log_2d() -> Self {
        Self::new(ScoreKind::InfLogKd)
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScoreKind::InfLogKd => write!(f, "{}:k={}", self.kind, self.k),
            kind => write!(f, "{kind}"),
        }
    }
}

/// Parses `cn`, `aa`, ..., `inf_log_kd`, optionally `inf_log_kd:k=<real>`.
/// `inf_log_2d` is accepted as shorthand for `inf_log_kd:k=2`.
impl FromStr for ScoreSpec {
    type Err = ScoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "inf_log_2d" {
            return Ok(Self::inf_log_2d());
        }
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s.as_str(), None),
        };
        let mut spec = Self::new(name.parse()?);
        if let Some(params) = params {
            for p in params.split(',') {
                let value = p
                    .strip_prefix("k=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| ScoreError::BadParameter(p.to_owned()))?;
                spec = spec.with_k(value)?;
            }
        }
        Ok(spec)
    }
}

/// How a hierarchical proportion is weighted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// `common / context`.
    Proportional,
    /// `common / context · log(context)`.
    LogWeighted,
}

/// Size of the intersection of two sorted, duplicate-free slices.
pub fn intersection_size(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Sorted intersection of two sorted, duplicate-free slices.
pub fn intersection(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Adamic–Adar contribution of one shared neighbor of undirected degree `degree`.
#[inline]
pub fn aa_term(degree: usize, base: LogBase) -> f64 {
    1.0 / base.log(degree as f64)
}

/// Resource-allocation contribution of one shared neighbor.
#[inline]
pub fn ra_term(degree: usize) -> f64 {
    1.0 / degree as f64
}

#[inline]
pub fn jaccard_from_counts(common: usize, len_x: usize, len_y: usize) -> f64 {
    let union = len_x + len_y - common;
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

/// One hierarchical term: `common` of `context` members of `A(x)` or `D(x)`
/// also link to `y`.
#[inline]
pub fn directed_term(common: usize, context: usize, weighting: Weighting, base: LogBase) -> f64 {
    if context == 0 {
        return 0.0;
    }
    let proportion = common as f64 / context as f64;
    match weighting {
        Weighting::Proportional => proportion,
        Weighting::LogWeighted => proportion * base.log(context as f64),
    }
}

/// Hierarchical score from intersection counts: `ded_common = |A(x) ∩ D(y)|`,
/// `ind_common = |D(x) ∩ D(y)|`.
#[inline]
pub fn hierarchical_from_counts(
    spec: &ScoreSpec,
    ded_common: usize,
    out_len: usize,
    ind_common: usize,
    in_len: usize,
) -> f64 {
    use Weighting::*;
    let base = spec.log_base;
    match spec.kind {
        ScoreKind::Ded => directed_term(ded_common, out_len, Proportional, base),
        ScoreKind::Ind => directed_term(ind_common, in_len, Proportional, base),
        ScoreKind::Inf => {
            directed_term(ded_common, out_len, Proportional, base)
                + directed_term(ind_common, in_len, Proportional, base)
        }
        ScoreKind::InfLog => {
            directed_term(ded_common, out_len, LogWeighted, base)
                + directed_term(ind_common, in_len, LogWeighted, base)
        }
        ScoreKind::InfLogKd => {
            spec.k * directed_term(ded_common, out_len, LogWeighted, base)
                + directed_term(ind_common, in_len, LogWeighted, base)
        }
        ScoreKind::Cn | ScoreKind::Aa | ScoreKind::Ra | ScoreKind::Jaccard => {
            unreachable!("undirected score passed to hierarchical kernel")
        }
    }
}

/// Common neighbors: `|Γ(x) ∩ Γ(y)|`.
pub fn score_cn(gamma_x: &[VertexId], gamma_y: &[VertexId]) -> f64 {
    intersection_size(gamma_x, gamma_y) as f64
}

fn checked_degree(vertex: VertexId, degree: usize) -> Result<usize, ScoreError> {
    if degree < 2 {
        Err(ScoreError::DegreeTooSmall { vertex, degree })
    } else {
        Ok(degree)
    }
}

/// Adamic–Adar: `Σ_{z ∈ common} 1 / log|Γ(z)|`, summed in the order of `common`.
pub fn score_aa(
    common: &[VertexId],
    degree_of: impl Fn(VertexId) -> usize,
    base: LogBase,
) -> Result<f64, ScoreError> {
    let mut s = 0.0;
    for &z in common {
        s += aa_term(checked_degree(z, degree_of(z))?, base);
    }
    Ok(s)
}

/// Resource allocation: `Σ_{z ∈ common} 1 / |Γ(z)|`.
pub fn score_ra(common: &[VertexId], degree_of: impl Fn(VertexId) -> usize) -> Result<f64, ScoreError> {
    let mut s = 0.0;
    for &z in common {
        s += ra_term(checked_degree(z, degree_of(z))?);
    }
    Ok(s)
}

/// Jaccard coefficient; 0 when both sets are empty.
pub fn score_jaccard(gamma_x: &[VertexId], gamma_y: &[VertexId]) -> f64 {
    jaccard_from_counts(intersection_size(gamma_x, gamma_y), gamma_x.len(), gamma_y.len())
}

/// Deductive sub-score from `A(x)` and `D(y)`.
pub fn score_ded(a_x: &[VertexId], d_y: &[VertexId], weighting: Weighting, base: LogBase) -> f64 {
    directed_term(intersection_size(a_x, d_y), a_x.len(), weighting, base)
}

/// Inductive sub-score from `D(x)` and `D(y)`.
pub fn score_ind(d_x: &[VertexId], d_y: &[VertexId], weighting: Weighting, base: LogBase) -> f64 {
    directed_term(intersection_size(d_x, d_y), d_x.len(), weighting, base)
}

/// Any hierarchical score (`ded`, `ind`, `inf`, `inf_log`, `inf_log_kd`) of
/// `x → y` from `A(x)`, `D(x)` and `D(y)`.
pub fn score_inf_family(
    a_x: &[VertexId],
    d_x: &[VertexId],
    d_y: &[VertexId],
    spec: &ScoreSpec,
) -> Result<f64, ScoreError> {
    if spec.kind.is_undirected() {
        return Err(ScoreError::NotDirected(spec.kind));
    }
    Ok(hierarchical_from_counts(
        spec,
        intersection_size(a_x, d_y),
        a_x.len(),
        intersection_size(d_x, d_y),
        d_x.len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN: LogBase = LogBase::Natural;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-6
    }

    #[test]
    fn cn_examples() {
        assert_eq!(score_cn(&[3, 4], &[3, 4]), 2.0);
        assert_eq!(score_cn(&[], &[1, 2]), 0.0);
        // brute force: {1,2,3} ∩ {2,3,5} = {2,3}
        let brute = [1u32, 2, 3].iter().filter(|v| [2u32, 3, 5].contains(v)).count();
        assert_eq!(score_cn(&[1, 2, 3], &[2, 3, 5]), brute as f64);
        assert_eq!(brute, 2);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn aa_examples() {
        assert_eq!(score_aa(&[], |_| 0, LN).unwrap(), 0.0);
        let one = score_aa(&[7], |_| 2, LN).unwrap();
        assert!(close(one, 1.442695), "{one}");
        let two = score_aa(&[7, 8], |z| if z == 7 { 2 } else { 4 }, LN).unwrap();
        assert!(close(two, 1.0 / 2f64.ln() + 1.0 / 4f64.ln()));
        assert!(close(two, 2.164043), "{two}");
    }

    #[test]
    fn aa_rejects_degree_below_two() {
        assert_eq!(
            score_aa(&[4], |_| 1, LN),
            Err(ScoreError::DegreeTooSmall { vertex: 4, degree: 1 })
        );
        assert!(score_ra(&[4], |_| 0).is_err());
    }

    #[test]
    fn ra_examples() {
        assert_eq!(score_ra(&[], |_| 0).unwrap(), 0.0);
        assert_eq!(score_ra(&[1], |_| 2).unwrap(), 0.5);
        let v = score_ra(&[1, 2], |z| if z == 1 { 2 } else { 5 }).unwrap();
        assert!(close(v, 0.7), "{v}");
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(score_jaccard(&[1, 2], &[1, 2]), 1.0);
        assert_eq!(score_jaccard(&[1, 2], &[3]), 0.0);
        assert_eq!(score_jaccard(&[1, 2, 3], &[2, 3, 5]), 0.5);
        assert_eq!(score_jaccard(&[], &[]), 0.0);
    }

    #[test]
    fn ded_examples() {
        // a=0, b=1
        assert_eq!(score_ded(&[0, 1], &[0], Weighting::Proportional, LN), 0.5);
        assert_eq!(score_ded(&[], &[0, 1], Weighting::Proportional, LN), 0.0);
        assert_eq!(score_ded(&[], &[0, 1], Weighting::LogWeighted, LN), 0.0);
        let v = score_ded(&[0, 1, 2, 3], &[0, 1, 2, 3], Weighting::LogWeighted, LN);
        assert!(close(v, 1.386294), "{v}");
    }

    #[test]
    fn ind_examples() {
        assert_eq!(score_ind(&[5, 6], &[5], Weighting::Proportional, LN), 0.5);
        assert_eq!(score_ind(&[], &[5], Weighting::Proportional, LN), 0.0);
        assert_eq!(score_ind(&[5], &[5], Weighting::LogWeighted, LN), 0.0);
    }

    #[test]
    fn inf_family_examples() {
        // A(x)={a,b}, D(y)={a}, D(x)={c}
        let inf = ScoreSpec::new(ScoreKind::Inf);
        assert_eq!(score_inf_family(&[0, 1], &[2], &[0], &inf).unwrap(), 0.5);

        for kind in [ScoreKind::Inf, ScoreKind::InfLog, ScoreKind::InfLogKd] {
            assert_eq!(score_inf_family(&[], &[], &[], &ScoreSpec::new(kind)).unwrap(), 0.0);
        }

        // A(x)={a,b,c,d} ⊆ D(y), D(x)={p,q} with p ∈ D(y)
        let (a, b, c, d, p, q) = (0, 1, 2, 3, 10, 11);
        let d_y = [a, b, c, d, p];
        let v = score_inf_family(&[a, b, c, d], &[p, q], &d_y, &ScoreSpec::inf_log_2d()).unwrap();
        let by_hand = 2.0 * (1.0 * 4f64.ln()) + 0.5 * 2f64.ln();
        assert_eq!(v, by_hand);
        assert!(close(v, 3.119162), "{v}");
    }

    #[test]
    fn inf_family_rejects_undirected_kinds() {
        assert_eq!(
            score_inf_family(&[], &[], &[], &ScoreSpec::new(ScoreKind::Cn)),
            Err(ScoreError::NotDirected(ScoreKind::Cn))
        );
    }

    #[test]
    fn log_base_rescales() {
        let two = ScoreSpec::new(ScoreKind::InfLog).with_log_base(LogBase::new(2.0).unwrap());
        let v = score_inf_family(&[0, 1, 2, 3], &[], &[0, 1, 2, 3], &two).unwrap();
        assert!(close(v, 2.0));
        assert!(LogBase::new(1.0).is_err());
        assert!(LogBase::new(f64::NAN).is_err());
    }

    #[test]
    fn spec_tokens() {
        for kind in ScoreKind::ALL {
            let spec: ScoreSpec = kind.token().parse().unwrap();
            assert_eq!(spec.kind, kind);
            assert_eq!(spec.to_string().parse::<ScoreSpec>().unwrap(), spec);
        }
        let s: ScoreSpec = "inf_log_kd:k=1.5".parse().unwrap();
        assert_eq!(s.k, 1.5);
        assert_eq!(s.to_string(), "inf_log_kd:k=1.5");
        assert_eq!("INF_LOG_2D".parse::<ScoreSpec>().unwrap(), ScoreSpec::inf_log_2d());
        assert!("katz".parse::<ScoreSpec>().is_err());
        assert!("inf_log_kd:k=0".parse::<ScoreSpec>().is_err());
        assert!("inf_log_kd:q=1".parse::<ScoreSpec>().is_err());
        assert!(ScoreSpec::new(ScoreKind::InfLogKd).with_k(-1.0).is_err());
        assert_eq!("e".parse::<LogBase>().unwrap(), LogBase::Natural);
        assert_eq!("10".parse::<LogBase>().unwrap(), LogBase::Base(10.0));
    }
}
