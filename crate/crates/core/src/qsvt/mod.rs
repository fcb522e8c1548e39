//! Bounded polynomials and their singular value transformations.
//!
//! Polynomials are stored as Chebyshev series and certified on a dense grid
//! before use. Transformations act on the singular values of an encoding's
//! normalised block.

pub mod chebyshev;
mod families;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockenc::{EncodingMetadata, VirtualBlockEncoding, ENCODABILITY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, spectral_norm};

pub use families::{inverse_polynomial, rectangle_polynomial, sign_polynomial};

/// Largest polynomial degree any construction may return.
pub const DEGREE_CAP: usize = 100_000;

/// Uniform points of the certification grid on `[-1, 1]`.
pub const GRID_POINTS: usize = 10_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolynomialFamily {
    Sign,
    Inverse,
    Rectangle,
    Monomial,
    Custom,
}

/// What the polynomial must do on a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BandTarget {
    /// `min <= P(x) <= max`.
    Range { min: f64, max: f64 },
    /// `|P(x) - 1/(scale x)| <= tol`.
    Reciprocal { scale: f64, tol: f64 },
}

/// A requirement on `lo <= x <= hi`, mirrored to `[-hi, -lo]` by parity
/// (odd polynomials mirror `Range` bounds with a sign flip).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub target: BandTarget,
}

/// Outcome of a successful grid certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub grid_points: usize,
    pub margin: f64,
    pub max_abs: f64,
    /// Smallest slack over all band constraints (non-negative).
    pub min_band_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedPolynomial {
    family: PolynomialFamily,
    parity: Option<Parity>,
    basis: String,
    coefficients: Vec<f64>,
    bands: Vec<Band>,
    accuracy: f64,
    parameters: BTreeMap<String, f64>,
    certificate: Option<Certificate>,
}

impl BoundedPolynomial {
    /// Uncertified polynomial from Chebyshev coefficients.
    pub fn from_chebyshev(
        family: PolynomialFamily,
        parity: Option<Parity>,
        coefficients: Vec<f64>,
        bands: Vec<Band>,
        accuracy: f64,
        parameters: BTreeMap<String, f64>,
    ) -> Self {
        Self {
            family,
            parity,
            basis: "chebyshev-t".into(),
            coefficients,
            bands,
            accuracy,
            parameters,
            certificate: None,
        }
    }

    /// `x^k`, certified with zero margin.
    pub fn monomial(k: usize) -> Self {
        // x T_m = (T_{m+1} + T_{|m-1|}) / 2
        let mut c = vec![0.0; k + 1];
        c[0] = 1.0;
        for _ in 0..k {
            let mut next = vec![0.0; k + 1];
            for (m, &v) in c.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                if m == 0 {
                    next[1] += v;
                } else {
                    next[m + 1] += v / 2.0;
                    next[m - 1] += v / 2.0;
                }
            }
            c = next;
        }
        let parity = if k % 2 == 0 { Parity::Even } else { Parity::Odd };
        let mut p = Self::from_chebyshev(
            PolynomialFamily::Monomial,
            Some(parity),
            c,
            Vec::new(),
            0.0,
            BTreeMap::from([("power".to_string(), k as f64)]),
        );
        p.certify(0.0).expect("monomials are bounded by one");
        p
    }

    pub fn family(&self) -> PolynomialFamily {
        self.family
    }

    pub fn parity(&self) -> Option<Parity> {
        self.parity
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    /// Band accuracy the construction guarantees.
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        chebyshev::evaluate(&self.coefficients, x)
    }

    /// Whether the coefficients have the declared parity exactly.
    pub fn parity_holds(&self) -> bool {
        match self.parity {
            None => true,
            Some(p) => {
                let wrong = if p == Parity::Odd { 0 } else { 1 };
                self.coefficients.iter().skip(wrong).step_by(2).all(|&c| c == 0.0)
            }
        }
    }

    fn band_slack(&self, band: &Band, x: f64, value: f64) -> Option<f64> {
        let ax = x.abs();
        if ax < band.lo || ax > band.hi {
            return None;
        }
        let mirrored = x < 0.0;
        if mirrored && self.parity.is_none() {
            return None;
        }
        let v = if mirrored && self.parity == Some(Parity::Odd) { -value } else { value };
        Some(match band.target {
            BandTarget::Range { min, max } => (v - min).min(max - v),
            BandTarget::Reciprocal { scale, tol } => tol - (v - 1.0 / (scale * ax)).abs(),
        })
    }

    /// Check parity, `|P| <= 1 - margin` and every band on the grid plus the
    /// band endpoints. Records a certificate on success.
    pub fn certify(&mut self, margin: f64) -> Result<()> {
        if !self.parity_holds() {
            return Err(Error::Certification(format!("{:?} polynomial breaks its declared parity", self.family)));
        }
        let mut xs: Vec<f64> = (0..GRID_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (GRID_POINTS - 1) as f64).collect();
        for b in &self.bands {
            xs.extend([b.lo, b.hi, -b.lo, -b.hi]);
        }
        let values: Vec<f64> = xs.par_iter().map(|&x| self.eval(x)).collect();
        let mut max_abs = 0.0f64;
        let mut min_slack = f64::INFINITY;
        for (&x, &v) in xs.iter().zip(&values) {
            if !v.is_finite() || v.abs() > 1.0 - margin {
                return Err(Error::Certification(format!(
                    "{:?} polynomial: |P({x})| = {} exceeds 1 - {margin}",
                    self.family,
                    v.abs()
                )));
            }
            max_abs = max_abs.max(v.abs());
            for band in &self.bands {
                if let Some(slack) = self.band_slack(band, x, v) {
                    if slack < 0.0 {
                        return Err(Error::Certification(format!(
                            "{:?} polynomial misses band [{}, {}] at x = {x} (P = {v}, short by {})",
                            self.family, band.lo, band.hi, -slack
                        )));
                    }
                    min_slack = min_slack.min(slack);
                }
            }
        }
        self.certificate = Some(Certificate {
            grid_points: xs.len(),
            margin,
            max_abs,
            min_band_slack: if min_slack.is_finite() { min_slack } else { 0.0 },
        });
        Ok(())
    }

    /// Same coefficients with the parity tag removed.
    pub fn without_parity(mut self) -> Self {
        self.parity = None;
        self
    }
}

/// `P^{SV}(A)`: odd `P` gives `U P(Σ) V^T`, even `P` gives `V P(Σ) V^T` over the full column space.
pub fn singular_value_transform(p: &BoundedPolynomial, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let parity = p.parity.ok_or_else(|| Error::Contract("polynomial parity must be declared".into()))?;
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return Ok(match parity {
            Parity::Odd => DMatrix::zeros(r, c),
            Parity::Even => DMatrix::identity(c, c) * p.eval(0.0),
        });
    }
    // P(H) on the dilation H = [0 A; A^T 0] carries U P(Σ) V^T in its upper-right
    // block for odd P and V P(Σ) V^T + P(0)(I - V V^T) in its lower-right block for even P
    let ph = linalg::spectral_function(&linalg::dilation(a), |v| p.eval(v.clamp(-1.0, 1.0)));
    Ok(match parity {
        Parity::Odd => ph.view((0, r), (r, c)).into_owned(),
        Parity::Even => {
            let block = ph.view((r, r), (c, c));
            (&block + block.transpose()) * 0.5
        }
    })
}

/// Result of a singular value transformation of an encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SvtResult {
    pub input: EncodingMetadata,
    pub family: PolynomialFamily,
    pub degree: usize,
    /// Certified approximation error of the polynomial itself.
    pub delta: f64,
    pub output: VirtualBlockEncoding,
}

/// `(1, a + 1, delta + 4 d sqrt(eps / alpha))` encoding of `P^{SV}(block / alpha)`.
pub fn apply_svt(u: &VirtualBlockEncoding, p: &BoundedPolynomial) -> Result<SvtResult> {
    if p.parity.is_none() {
        return Err(Error::Contract("polynomial parity must be declared".into()));
    }
    if p.certificate.is_none() {
        return Err(Error::Contract("polynomial must be certified before use".into()));
    }
    let ratio = u.normalized_norm();
    if ratio > 1.0 + u.eps() / u.alpha() + ENCODABILITY_TOL {
        return Err(Error::invariant("singular value transformation", format!("‖block‖/alpha = {ratio} exceeds 1")));
    }
    let block = singular_value_transform(p, &u.normalized())?;
    let d = p.degree();
    let eps = p.accuracy + robustness_term(d, u.eps() / u.alpha());
    let rows = if p.parity == Some(Parity::Odd) { u.rows() } else { u.cols() };
    Ok(SvtResult {
        input: u.metadata(),
        family: p.family,
        degree: d,
        delta: p.accuracy,
        output: VirtualBlockEncoding::from_parts(block, 1.0, u.ancillas() + 1, eps, rows, u.cols()),
    })
}

/// `4 d sqrt(distance)`.
pub fn robustness_term(degree: usize, distance: f64) -> f64 {
    if distance <= 0.0 {
        0.0
    } else {
        4.0 * degree as f64 * distance.sqrt()
    }
}

/// Encoding of `A^+` for a PSD `A = block` with nonzero eigenvalues above `gamma`:
/// scale `2 kappa / alpha` with `kappa = alpha / gamma`, error `eps_inv`.
pub fn pseudo_inverse_encoding(u: &VirtualBlockEncoding, gamma: f64, eps_inv: f64) -> Result<SvtResult> {
    let a = u.block();
    if a.nrows() != a.ncols() {
        return Err(Error::Input("pseudo-inverse encoding needs a square block".into()));
    }
    if !(gamma > 0.0) || !(eps_inv > 0.0) {
        return Err(Error::Input(format!("gamma and eps_inv must be positive; got {gamma}, {eps_inv}")));
    }
    let values = linalg::eigenvalues(a);
    let tol = linalg::zero_threshold(&values);
    if values.first().is_some_and(|&v| v < -tol) {
        return Err(Error::Input("pseudo-inverse encoding needs a positive-semidefinite block".into()));
    }
    let alpha = u.alpha();
    let kappa = alpha / gamma;
    let Some(lambda_min) = linalg::min_nonzero(&values) else {
        let scale = 2.0 * kappa.max(1.0) / alpha;
        return Ok(SvtResult {
            input: u.metadata(),
            family: PolynomialFamily::Inverse,
            degree: 0,
            delta: 0.0,
            output: VirtualBlockEncoding::from_parts(
                DMatrix::zeros(a.nrows(), a.ncols()),
                scale,
                u.ancillas() + 1,
                0.0,
                u.cols(),
                u.rows(),
            ),
        });
    };
    if gamma >= lambda_min {
        return Err(Error::CertifiedBound(format!(
            "gamma = {gamma} is not below the smallest nonzero eigenvalue {lambda_min}"
        )));
    }
    if kappa <= 1.0 {
        return Err(Error::Input(format!("kappa = alpha / gamma = {kappa} must exceed 1")));
    }
    let eps_prime = (alpha * eps_inv / 2.0).min(0.5);
    let p = inverse_polynomial(kappa, eps_prime)?;
    let svt = apply_svt(u, &p)?;
    let scale = 2.0 * kappa / alpha;
    let eps = eps_inv + scale * robustness_term(svt.degree, u.eps() / alpha);
    let block = svt.output.block() * scale;
    Ok(SvtResult {
        output: VirtualBlockEncoding::from_parts(block, scale, u.ancillas() + 1, eps, u.cols(), u.rows()),
        ..svt
    })
}

/// Outcome of checking `‖P^{SV}(A) - P^{SV}(Ã)‖ <= 4 d sqrt(‖A - Ã‖)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RobustnessCheck {
    Checked { measured: f64, bound: f64 },
    Skipped { reason: String },
}

impl RobustnessCheck {
    pub fn measured(&self) -> Option<f64> {
        match self {
            RobustnessCheck::Checked { measured, .. } => Some(*measured),
            RobustnessCheck::Skipped { .. } => None,
        }
    }
}

/// Measures both sides of the robustness inequality. Returns `Skipped` when
/// a precondition fails and a numerical error if the inequality is violated.
///
/// The conditions on `P` outside `[-1, 1]` and on the imaginary axis concern
/// the complex completion used by the circuit and are not checked here.
pub fn robustness_gap(p: &BoundedPolynomial, a: &DMatrix<f64>, a_tilde: &DMatrix<f64>) -> Result<RobustnessCheck> {
    let skip = |reason: &str| Ok(RobustnessCheck::Skipped { reason: reason.into() });
    if p.parity.is_none() || !p.parity_holds() {
        return skip("polynomial parity not declared");
    }
    if p.certificate.is_none() {
        return skip("polynomial not certified bounded on [-1, 1]");
    }
    if a.shape() != a_tilde.shape() {
        return skip("matrices have different shapes");
    }
    if spectral_norm(a) > 1.0 + ENCODABILITY_TOL || spectral_norm(a_tilde) > 1.0 + ENCODABILITY_TOL {
        return skip("operator norm exceeds one");
    }
    let measured = spectral_norm(&(singular_value_transform(p, a)? - singular_value_transform(p, a_tilde)?));
    let bound = 4.0 * p.degree() as f64 * spectral_norm(&(a - a_tilde)).sqrt();
    if measured > bound + 1e-12 {
        return Err(Error::Numerical(format!("robustness bound violated: {measured} > {bound}")));
    }
    Ok(RobustnessCheck::Checked { measured, bound })
}
