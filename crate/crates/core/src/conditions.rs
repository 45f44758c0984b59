//! Moment-based positivity tests for partially transposed states.
//!
//! Every check returns a [`ConditionReport`] whose `margin` is positive when
//! the inequality is violated, i.e. when the moments cannot come from a PSD
//! matrix and the state is therefore NPT.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectrum, symmetrize_hermitian, AsMatrix, CMatrix};

/// Margin above which a condition declares a violation in exact mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Power traces `p_1..p_k` of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    /// Panics on an empty vector.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "a moment vector needs at least p_1");
        Self { values }
    }

    /// Power sums of an explicit spectrum.
    pub fn from_spectrum(spectrum: &[f64], kmax: usize) -> Self {
        Self::new((1..=kmax).map(|k| spectrum.iter().map(|x| x.powi(k as i32)).sum()).collect())
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `p_k`, one-based.
    pub fn p(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.order() < needed {
            return Err(Error::InsufficientMoments { needed, available: self.order() });
        }
        Ok(())
    }

    /// Moments of `M / p_1`, i.e. `p_k / p_1^k`.
    pub fn normalized(&self) -> Result<Self> {
        let p1 = self.p(1);
        if p1 <= 0.0 {
            return Err(Error::OutOfRange(format!("cannot normalize moments with p_1 = {p1}")));
        }
        Ok(Self::new(self.values.iter().enumerate().map(|(i, v)| v / p1.powi(i as i32 + 1)).collect()))
    }

    /// Whether these look like moments of a normalized PT: `p_1 = 1` and `p_2 <= p_1^2`, to 1e-9.
    pub fn is_normalized_pt(&self) -> bool {
        (self.p(1) - 1.0).abs() <= 1e-9 && (self.order() < 2 || self.p(2) <= self.p(1).powi(2) + 1e-9)
    }
}

/// Elementary symmetric polynomials `e_0 = 1, e_1, ..., e_k` of a spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementarySymmetric {
    values: Vec<f64>,
}

impl ElementarySymmetric {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn e(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Newton's identities: `k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i`.
pub fn newton_elementary(p: &MomentVector) -> ElementarySymmetric {
    let mut e = vec![1.0];
    for k in 1..=p.order() {
        let mut acc = 0.0;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * p.p(i);
        }
        e.push(acc / k as f64);
    }
    ElementarySymmetric { values: e }
}

/// Closed-form `e_n` in terms of moments, for `n <= 4`.
pub fn closed_form_elementary(p: &MomentVector, n: usize) -> Result<f64> {
    p.require(n)?;
    let p1 = p.p(1);
    let v = match n {
        1 => p1,
        2 => (p1 * p1 - p.p(2)) / 2.0,
        3 => (p1.powi(3) - 3.0 * p1 * p.p(2) + 2.0 * p.p(3)) / 6.0,
        4 => {
            let (p2, p3, p4) = (p.p(2), p.p(3), p.p(4));
            (p1.powi(4) - 6.0 * p1 * p1 * p2 + 3.0 * p2 * p2 + 8.0 * p1 * p3 - 6.0 * p4) / 24.0
        }
        _ => return Err(Error::OutOfRange(format!("no closed form for e_{n}"))),
    };
    Ok(v)
}

/// Which inequality a report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `e_n >= 0` written in moments.
    Dn(usize),
    /// `p_3 p_1 >= p_2^2`.
    P3Ppt,
    /// 3x3 Hankel determinant of `p_1..p_5`.
    Stieltjes5,
    /// Tight lower bound on `p_3` given `p_2`.
    D3Opt,
    /// Exact reference from the spectrum.
    Negativity,
    /// Exact reference: smallest eigenvalue.
    MinEigenvalue,
}

impl Condition {
    /// Highest moment the condition reads; `None` for spectral references.
    pub fn required_order(&self) -> Option<usize> {
        match self {
            Condition::Dn(n) => Some(*n),
            Condition::P3Ppt | Condition::D3Opt => Some(3),
            Condition::Stieltjes5 => Some(5),
            Condition::Negativity | Condition::MinEigenvalue => None,
        }
    }

    pub fn is_spectral(&self) -> bool {
        self.required_order().is_none()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Dn(n) => write!(f, "D{n}"),
            Condition::P3Ppt => f.write_str("p3PPT"),
            Condition::Stieltjes5 => f.write_str("Stieltjes5"),
            Condition::D3Opt => f.write_str("D3opt"),
            Condition::Negativity => f.write_str("negativity"),
            Condition::MinEigenvalue => f.write_str("min_eigenvalue"),
        }
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let c = match lower.as_str() {
            "p3ppt" | "p3-ppt" => Condition::P3Ppt,
            "stieltjes5" | "stieltjes_5" => Condition::Stieltjes5,
            "d3opt" | "d3^opt" => Condition::D3Opt,
            "negativity" => Condition::Negativity,
            "min_eigenvalue" | "mineig" => Condition::MinEigenvalue,
            other => match other.strip_prefix('d').and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if n >= 1 => Condition::Dn(n),
                _ => return Err(Error::Config(format!("unknown condition '{s}'"))),
            },
        };
        Ok(c)
    }
}

/// A condition, optionally applied per charge sector (`SR-` prefix).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConditionSelector {
    pub condition: Condition,
    pub symmetry_resolved: bool,
}

impl fmt::Display for ConditionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symmetry_resolved {
            write!(f, "SR-{}", self.condition)
        } else {
            write!(f, "{}", self.condition)
        }
    }
}

impl FromStr for ConditionSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (sr, rest) = match t.get(..3) {
            Some(prefix) if prefix.eq_ignore_ascii_case("sr-") => (true, &t[3..]),
            _ => (false, t),
        };
        Ok(Self { condition: rest.parse()?, symmetry_resolved: sr })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Detected,
    NotDetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Detected => "detected",
            Verdict::NotDetected => "not_detected",
        })
    }
}

/// Outcome of one inequality. `margin > tolerance` means violated.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    pub sector: Option<i32>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl ConditionReport {
    pub fn new(condition: Condition, lhs: f64, rhs: f64, margin: f64) -> Self {
        let mut r = Self { condition, sector: None, lhs, rhs, margin, verdict: Verdict::NotDetected };
        r.set_tolerance(DEFAULT_TOLERANCE);
        r
    }

    /// Re-judge the margin against another tolerance (e.g. a confidence radius).
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.set_tolerance(tol);
        self
    }

    fn set_tolerance(&mut self, tol: f64) {
        self.verdict = if self.margin > tol { Verdict::Detected } else { Verdict::NotDetected };
    }

    pub fn in_sector(mut self, q: i32) -> Self {
        self.sector = Some(q);
        self
    }

    pub fn detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }

    /// `SR-` prefixed when a sector is attached.
    pub fn name(&self) -> String {
        ConditionSelector { condition: self.condition, symmetry_resolved: self.sector.is_some() }.to_string()
    }

    pub const CSV_HEADER: [&'static str; 6] = ["condition", "sector", "lhs", "rhs", "margin", "verdict"];

    pub fn csv_record(&self) -> [String; 6] {
        [
            self.name(),
            self.sector.map(|q| q.to_string()).unwrap_or_default(),
            format_float(self.lhs),
            format_float(self.rhs),
            format_float(self.margin),
            self.verdict.to_string(),
        ]
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `D_n`: `e_n >= 0` rewritten as `p_n` against lower-order moments.
///
/// With `R = sum_{i<n} (-1)^(i-1) e_{n-i} p_i` Newton gives
/// `n e_n = (-1)^(n-1) p_n + R`. For odd n the report compares `p_n >= -R`,
/// for even n `p_n <= R`; in both cases `margin = -n e_n`.
pub fn check_dn(p: &MomentVector, n: usize) -> Result<ConditionReport> {
    if n == 0 {
        return Err(Error::OutOfRange("D_n needs n >= 1".into()));
    }
    p.require(n)?;
    let pn = p.p(n);
    let r = if n <= 4 {
        let p1 = p.p(1);
        match n {
            1 => 0.0,
            2 => p1 * p1,
            3 => -(3.0 * p1 * p.p(2) - p1.powi(3)) / 2.0,
            _ => {
                let p2 = p.p(2);
                (p1.powi(4) - 6.0 * p1 * p1 * p2 + 3.0 * p2 * p2 + 8.0 * p1 * p.p(3)) / 6.0
            }
        }
    } else {
        let e = newton_elementary(p);
        (1..n).map(|i| if i % 2 == 1 { e.e(n - i) * p.p(i) } else { -e.e(n - i) * p.p(i) }).sum()
    };
    let report = if n % 2 == 1 {
        ConditionReport::new(Condition::Dn(n), pn, -r, -r - pn)
    } else {
        ConditionReport::new(Condition::Dn(n), pn, r, pn - r)
    };
    debug_assert!({
        let e = newton_elementary(&MomentVector::new(p.values()[..n].to_vec())).e(n);
        let scale = p.values()[..n]
            .iter()
            .enumerate()
            .fold(1.0f64, |m, (i, v)| m.max(v.abs().powf(n as f64 / (i + 1) as f64)));
        (report.margin + n as f64 * e).abs() <= 1e-8 * scale.max(1.0)
    });
    Ok(report)
}

/// `p_3 p_1 >= p_2^2`.
pub fn check_p3ppt(p: &MomentVector) -> Result<ConditionReport> {
    p.require(3)?;
    let lhs = p.p(3) * p.p(1);
    let rhs = p.p(2).powi(2);
    Ok(ConditionReport::new(Condition::P3Ppt, lhs, rhs, rhs - lhs))
}

/// Hankel matrices `A(n)[i,j] = m_{i+j}` and `B(n)[i,j] = m_{i+j+1}`, both
/// `(n+1) x (n+1)`, with `m_0` supplied and `m_k = p_k` otherwise.
pub fn stieltjes_hankel(p: &MomentVector, m0: f64, n: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    p.require(2 * n + 1)?;
    let m = |k: usize| if k == 0 { m0 } else { p.p(k) };
    let a = DMatrix::from_fn(n + 1, n + 1, |i, j| m(i + j));
    let b = DMatrix::from_fn(n + 1, n + 1, |i, j| m(i + j + 1));
    Ok((a, b))
}

fn det3(h: [[f64; 3]; 3]) -> f64 {
    h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
        + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
}

/// `det [[p1,p2,p3],[p2,p3,p4],[p3,p4,p5]] >= 0`.
pub fn check_stieltjes5(p: &MomentVector) -> Result<ConditionReport> {
    p.require(5)?;
    let v = |k| p.p(k);
    let det = det3([[v(1), v(2), v(3)], [v(2), v(3), v(4)], [v(3), v(4), v(5)]]);
    Ok(ConditionReport::new(Condition::Stieltjes5, det, 0.0, -det))
}

/// Result of the full Stieltjes test on all available Hankel orders.
#[derive(Clone, Debug, PartialEq)]
pub struct StieltjesOutcome {
    /// All `A(k)`, `B(k)` PSD to tolerance.
    pub hankel_psd: bool,
    /// Range conditions of the truncated moment problem; `None` when skipped.
    pub range_consistent: Option<bool>,
}

impl StieltjesOutcome {
    pub fn consistent(&self) -> bool {
        self.hankel_psd && self.range_consistent.unwrap_or(true)
    }
}

fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn in_range(m: &DMatrix<f64>, v: &nalgebra::DVector<f64>, tol: f64) -> bool {
    let svd = m.clone().svd(true, true);
    let eps = 1e-10 * svd.singular_values.max().max(1e-300);
    match svd.solve(v, eps) {
        Ok(x) => (m * x - v).norm() <= tol * v.norm().max(1.0),
        Err(_) => false,
    }
}

/// Truncated Stieltjes test on `m_0, p_1..p_d`.
///
/// Odd `d = 2k+1`: `A(k) >= 0`, `B(k) >= 0` and `(m_{k+1}..m_{2k+1})` in the range of `A(k)`.
/// Even `d = 2k`: `A(k) >= 0`, `B(k-1) >= 0` and `(m_{k+1}..m_{2k})` in the range of `B(k-1)`.
/// The range conditions are only evaluated when `exact` is set (least-squares residual <= 1e-8).
pub fn stieltjes_check(p: &MomentVector, m0: f64, tol: f64, exact: bool) -> StieltjesOutcome {
    let d = p.order();
    let m = |k: usize| if k == 0 { m0 } else { p.p(k) };
    let hankel = |n: usize, shift: usize| DMatrix::from_fn(n + 1, n + 1, |i, j| m(i + j + shift));
    let psd = |h: &DMatrix<f64>| min_sym_eigenvalue(h) >= -tol * h.norm().max(1.0);
    let k = d / 2;
    let (a, b) = if d % 2 == 1 { (hankel(k, 0), hankel(k, 1)) } else { (hankel(k, 0), hankel(k - 1, 1)) };
    let hankel_psd = psd(&a) && psd(&b);
    let range_consistent = exact.then(|| {
        if d % 2 == 1 {
            let v = nalgebra::DVector::from_fn(k + 1, |i, _| m(k + 1 + i));
            in_range(&a, &v, 1e-8)
        } else {
            let v = nalgebra::DVector::from_fn(k, |i, _| m(k + 1 + i));
            in_range(&b, &v, 1e-8)
        }
    });
    StieltjesOutcome { hankel_psd, range_consistent }
}

/// Smallest `p_3` of a PSD spectrum with `p_1 = 1` and the given `p_2`.
///
/// For `p_2 in [1/r, 1/(r-1)]` the minimizer has `r-1` equal eigenvalues `a`
/// and one smaller `b`, with `(r-1) a + b = 1` and `(r-1) a^2 + b^2 = p_2`.
pub fn d3opt_threshold(p2: f64) -> Result<f64> {
    if !(p2 > 0.0 && p2 <= 1.0 + 1e-9) {
        return Err(Error::OutOfRange(format!("d3opt threshold needs 0 < p2 <= 1, got {p2}")));
    }
    if p2 >= 1.0 {
        return Ok(1.0);
    }
    let r = (1.0 / p2).ceil();
    let inv = 1.0 / r;
    if p2 == inv {
        return Ok(inv * inv);
    }
    let s = ((r * p2 - 1.0) / (r - 1.0)).max(0.0).sqrt();
    let a = (1.0 + s) / r;
    let b = 1.0 - (r - 1.0) * a;
    Ok((r - 1.0) * a.powi(3) + b.powi(3))
}

/// `p_3 >= d3opt_threshold(p_2)` on the moments normalized by `p_1`.
pub fn check_d3opt(p: &MomentVector) -> Result<ConditionReport> {
    p.require(3)?;
    let q = p.normalized()?;
    let (q2, q3) = (q.p(2), q.p(3));
    if q2 > 1.0 + 1e-9 {
        return Err(Error::D2Violated(q2));
    }
    let threshold = d3opt_threshold(q2.min(1.0))?;
    Ok(ConditionReport::new(Condition::D3Opt, q3, threshold, threshold - q3))
}

/// [`check_d3opt`], except that a block whose normalized second moment exceeds
/// one is reported as detected with margin `q2 - 1` (`D_2` already fails there).
pub fn check_d3opt_or_d2(p: &MomentVector) -> Result<ConditionReport> {
    p.require(3)?;
    let (p1, p2) = (p.p(1), p.p(2));
    if p1 <= 0.0 {
        // A PSD block with p_1 <= 0 vanishes, so any weight in p_2 violates D_2.
        return Ok(ConditionReport::new(Condition::D3Opt, p.p(3), f64::NAN, p2 - p1 * p1));
    }
    match check_d3opt(p) {
        Err(Error::D2Violated(q2)) => {
            let q3 = p.p(3) / p.p(1).powi(3);
            Ok(ConditionReport::new(Condition::D3Opt, q3, f64::NAN, q2 - 1.0))
        }
        other => other,
    }
}

/// Dispatch a moment condition. Spectral references are rejected here; see [`evaluate_spectral`].
pub fn evaluate(condition: Condition, p: &MomentVector) -> Result<ConditionReport> {
    match condition {
        Condition::Dn(n) => check_dn(p, n),
        Condition::P3Ppt => check_p3ppt(p),
        Condition::Stieltjes5 => check_stieltjes5(p),
        Condition::D3Opt => check_d3opt(p),
        Condition::Negativity | Condition::MinEigenvalue => {
            Err(Error::InvalidSelection(format!("{condition} needs the spectrum, not moments")))
        }
    }
}

/// Negativity or minimum-eigenvalue report from an explicit spectrum.
pub fn evaluate_spectral(condition: Condition, spectrum: &[f64]) -> Result<ConditionReport> {
    match condition {
        Condition::Negativity => {
            let n = negativity_from_spectrum(spectrum);
            Ok(ConditionReport::new(condition, n, 0.0, n))
        }
        Condition::MinEigenvalue => {
            let m = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(ConditionReport::new(condition, m, 0.0, -m))
        }
        _ => Err(Error::InvalidSelection(format!("{condition} is not a spectral reference"))),
    }
}

/// Sum of `|lambda|` over negative eigenvalues.
pub fn negativity_from_spectrum(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|&l| (l.abs() - l) / 2.0).sum()
}

/// Negativity of a Hermitian matrix (typically a partial transpose). Any
/// anti-Hermitian residue is discarded first.
pub fn negativity<M: AsMatrix + ?Sized>(rho_gamma: &M) -> f64 {
    negativity_from_spectrum(&spectrum_of_hermitian_part(rho_gamma.as_matrix()))
}

pub(crate) fn spectrum_of_hermitian_part(m: &CMatrix) -> Vec<f64> {
    let mut h = m.clone();
    symmetrize_hermitian(&mut h);
    hermitian_spectrum(&h).expect("symmetrized matrix is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(v: &[f64]) -> MomentVector {
        MomentVector::new(v.to_vec())
    }

    const BELL: [f64; 4] = [0.5, 0.5, 0.5, -0.5];

    #[test]
    fn newton_examples() {
        assert_eq!(newton_elementary(&mv(&[6.0, 14.0, 36.0])).values(), &[1.0, 6.0, 11.0, 6.0]);
        assert_eq!(newton_elementary(&mv(&[1.0, 1.0, 1.0])).values(), &[1.0, 1.0, 0.0, 0.0]);
        assert_eq!(newton_elementary(&mv(&[0.0, 0.0, 0.0])).values(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn closed_forms_match_newton() {
        let p = MomentVector::from_spectrum(&[0.3, -0.7, 1.1, 0.25, 2.0], 4);
        let e = newton_elementary(&p);
        for n in 1..=4 {
            assert!((closed_form_elementary(&p, n).unwrap() - e.e(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn dn_examples() {
        let bell = MomentVector::from_spectrum(&BELL, 4);
        let d3 = check_dn(&bell, 3).unwrap();
        assert!((d3.rhs - 1.0).abs() < 1e-15);
        assert!((d3.lhs - 0.25).abs() < 1e-15);
        assert!(d3.detected());

        let d3 = check_dn(&mv(&[1.0, 0.25, 0.0625]), 3).unwrap();
        assert!((d3.rhs + 0.125).abs() < 1e-15);
        assert!(!d3.detected());

        let p = MomentVector::from_spectrum(&[3.0, 1.0, -2.0], 3);
        assert_eq!(newton_elementary(&p).e(3), -6.0);
        let d3 = check_dn(&p, 3).unwrap();
        assert!((d3.margin - 18.0).abs() < 1e-12);
        assert!(d3.detected());

        let d2 = check_dn(&mv(&[0.0, 0.5]), 2).unwrap();
        assert_eq!(d2.margin, 0.5);
        assert!(matches!(check_dn(&mv(&[1.0, 1.0]), 3), Err(Error::InsufficientMoments { needed: 3, available: 2 })));
    }

    #[test]
    fn dn_margin_is_minus_n_en_beyond_closed_forms() {
        let p = MomentVector::from_spectrum(&[0.4, 0.3, -0.1, 0.2, 0.15, 0.05], 6);
        let e = newton_elementary(&p);
        for n in 1..=6 {
            let r = check_dn(&p, n).unwrap();
            assert!((r.margin + n as f64 * e.e(n)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn p3ppt_examples() {
        let r = check_p3ppt(&MomentVector::from_spectrum(&BELL, 3)).unwrap();
        assert!((r.margin - 0.75).abs() < 1e-15);
        assert!(r.detected());
        assert!(!check_p3ppt(&mv(&[1.0, 0.25, 0.0625])).unwrap().detected());
        assert!(!check_p3ppt(&mv(&[1.0, 1.0, 1.0])).unwrap().detected());
        assert!(check_p3ppt(&mv(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn hankel_examples() {
        let (a, b) = stieltjes_hankel(&mv(&[1.0; 5]), 1.0, 1).unwrap();
        assert_eq!(a, DMatrix::from_element(2, 2, 1.0));
        assert_eq!(b, DMatrix::from_element(2, 2, 1.0));
        let (_, b) = stieltjes_hankel(&MomentVector::from_spectrum(&[1.0, 2.0, 3.0], 5), 3.0, 1).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 2, &[6.0, 14.0, 14.0, 36.0]));
        assert!((b.determinant() - 20.0).abs() < 1e-12);
        let (_, b) = stieltjes_hankel(&MomentVector::from_spectrum(&BELL, 3), 4.0, 1).unwrap();
        assert!((b.determinant() + 0.75).abs() < 1e-15);
        assert!(stieltjes_hankel(&mv(&[1.0, 1.0]), 1.0, 1).is_err());
    }

    #[test]
    fn stieltjes5_examples() {
        let flat = check_stieltjes5(&MomentVector::from_spectrum(&[0.25; 4], 5)).unwrap();
        assert!(flat.margin.abs() < 1e-15);
        assert!(!flat.detected());
        assert!(!check_stieltjes5(&MomentVector::from_spectrum(&[1.0, 2.0, 3.0], 5)).unwrap().detected());
        // Two distinct eigenvalues: the 3x3 Hankel has rank 2, so the Bell PT sits on the boundary.
        let bell = check_stieltjes5(&MomentVector::from_spectrum(&BELL, 5)).unwrap();
        assert!(bell.margin.abs() < 1e-15 && !bell.detected());
        let npt = check_stieltjes5(&MomentVector::from_spectrum(&[0.6, 0.3, 0.25, -0.15], 5)).unwrap();
        assert!(npt.detected());
    }

    #[test]
    fn stieltjes_full_check() {
        let psd = MomentVector::from_spectrum(&[0.5, 0.3, 0.2], 6);
        assert!(stieltjes_check(&psd, 3.0, 1e-10, true).consistent());
        let npt = MomentVector::from_spectrum(&BELL, 6);
        assert!(!stieltjes_check(&npt, 4.0, 1e-10, true).consistent());
        let atom = MomentVector::from_spectrum(&[1.0], 5);
        let out = stieltjes_check(&atom, 1.0, 1e-10, true);
        assert_eq!(out.range_consistent, Some(true));
        assert!(out.hankel_psd);
    }

    #[test]
    fn d3opt_threshold_examples() {
        assert_eq!(d3opt_threshold(1.0).unwrap(), 1.0);
        assert!((d3opt_threshold(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((d3opt_threshold(1.0 / 3.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        for p2 in [0.55, 0.7, 0.9] {
            assert!((d3opt_threshold(p2).unwrap() - (3.0 * p2 - 1.0) / 2.0).abs() < 1e-14);
        }
        assert!(d3opt_threshold(0.0).is_err());
        assert!(d3opt_threshold(1.5).is_err());
    }

    #[test]
    fn d3opt_slopes_jump_at_kinks() {
        for r in 2..6 {
            let x = 1.0 / r as f64;
            let h = 1e-6;
            let left = (d3opt_threshold(x).unwrap() - d3opt_threshold(x - h).unwrap()) / h;
            let right = (d3opt_threshold(x + h).unwrap() - d3opt_threshold(x).unwrap()) / h;
            assert!((d3opt_threshold(x + 1e-13).unwrap() - d3opt_threshold(x).unwrap()).abs() < 1e-6);
            assert!((right - left).abs() > 1e-2, "r={r}: {left} vs {right}");
        }
    }

    #[test]
    fn d3opt_examples() {
        let bell = check_d3opt(&MomentVector::from_spectrum(&BELL, 3)).unwrap();
        assert!(bell.detected());
        assert!((bell.rhs - 1.0).abs() < 1e-15);
        let flat = check_d3opt(&mv(&[1.0, 0.25, 0.0625])).unwrap();
        assert!(flat.margin.abs() < 1e-15 && !flat.detected());
        let r = check_d3opt(&mv(&[1.0, 0.4, 0.14])).unwrap();
        // r = 3 branch: a = (1 + sqrt(0.1)) / 3.
        let a = (1.0 + 0.1f64.sqrt()) / 3.0;
        let b = 1.0 - 2.0 * a;
        assert!((r.rhs - (2.0 * a.powi(3) + b.powi(3))).abs() < 1e-14);
        assert_eq!(r.detected(), 0.14 < r.rhs);
        assert!(matches!(check_d3opt(&mv(&[1.0, 1.2, 1.0])), Err(Error::D2Violated(_))));
        let scaled = check_d3opt(&MomentVector::from_spectrum(&[0.2, 0.1, 0.1], 3)).unwrap();
        let unit = check_d3opt(&MomentVector::from_spectrum(&[0.5, 0.25, 0.25], 3)).unwrap();
        assert!((scaled.margin - unit.margin).abs() < 1e-14);
    }

    #[test]
    fn negativity_examples() {
        assert_eq!(negativity_from_spectrum(&[0.25; 4]), 0.0);
        assert_eq!(negativity_from_spectrum(&BELL), 0.5);
        assert_eq!(negativity_from_spectrum(&[0.7, 0.3, 0.0]), 0.0);
        let r = evaluate_spectral(Condition::MinEigenvalue, &BELL).unwrap();
        assert_eq!(r.lhs, -0.5);
        assert!(r.detected());
    }

    #[test]
    fn parsing_and_csv() {
        assert_eq!("D3".parse::<Condition>().unwrap(), Condition::Dn(3));
        assert_eq!("p3ppt".parse::<Condition>().unwrap(), Condition::P3Ppt);
        assert!("D0".parse::<Condition>().is_err());
        assert!("nope".parse::<Condition>().is_err());
        let sel: ConditionSelector = "SR-D2".parse().unwrap();
        assert!(sel.symmetry_resolved);
        assert_eq!(sel.to_string(), "SR-D2");
        let r = check_dn(&mv(&[0.0, 0.5]), 2).unwrap().in_sector(0);
        assert_eq!(r.name(), "SR-D2");
        let rec = r.csv_record();
        assert_eq!(rec[1], "0");
        assert_eq!(rec[5], "detected");
        assert_eq!(rec[4].parse::<f64>().unwrap(), 0.5);
        let x = 0.1f64 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn tolerance_rejudges() {
        let r = check_p3ppt(&MomentVector::from_spectrum(&BELL, 3)).unwrap();
        assert!(!r.clone().with_tolerance(1.0).detected());
        assert!(r.with_tolerance(0.5).detected());
    }
}
