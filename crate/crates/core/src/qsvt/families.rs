//! Sign, rectangle and inverse polynomials built from smoothed targets.

use std::collections::BTreeMap;

use statrs::function::erf::{erf, erfc, erfc_inv};

use super::chebyshev::{interpolate, truncation_degree};
use super::{Band, BandTarget, BoundedPolynomial, Parity, PolynomialFamily, DEGREE_CAP};
use crate::error::{Error, Result};

const MAX_SAMPLES: usize = 1 << 18;

/// `|P| <= 1 - margin` is required on the certification grid.
pub(crate) fn default_margin(eps: f64) -> f64 {
    (eps / 8.0).min(1e-6)
}

/// Degree of a Chebyshev truncation of a function whose sharpest feature is
/// an `erf(k x)` edge, to accuracy `tau`.
fn predicted_degree(k: f64, tau: f64) -> f64 {
    2.0 * k * (2.0 / tau).ln().sqrt() + 10.0
}

struct Spec<'a> {
    family: PolynomialFamily,
    parity: Parity,
    k: f64,
    tau: f64,
    /// Names of the gap-like and accuracy-like parameters and their degree factors.
    gap: (&'a str, f64, f64),
    accuracy: (&'a str, f64, f64),
}

impl Spec<'_> {
    fn resource_error(&self, degree: f64) -> Error {
        let (gname, gval, gfactor) = self.gap;
        let (aname, aval, afactor) = self.accuracy;
        let binding = if gfactor >= afactor { format!("{gname} = {gval:e}") } else { format!("{aname} = {aval:e}") };
        Error::Resource(format!(
            "{:?} polynomial needs degree ~{degree:.0}, above the cap {DEGREE_CAP}; binding parameter: {binding}",
            self.family
        ))
    }

    /// Chebyshev coefficients of `target` truncated to accuracy `tau`, with the
    /// off-parity coefficients set to zero.
    fn coefficients(&self, target: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let predicted = predicted_degree(self.k, self.tau);
        let samples = ((2.0 * predicted) as usize + 64).next_power_of_two();
        if predicted > DEGREE_CAP as f64 * 1.25 || samples > MAX_SAMPLES {
            return Err(self.resource_error(predicted));
        }
        let mut c = interpolate(target, samples);
        let keep = match self.parity {
            Parity::Odd => 1,
            Parity::Even => 0,
        };
        for (i, ci) in c.iter_mut().enumerate() {
            if i % 2 != keep {
                *ci = 0.0;
            }
        }
        let (d, _) = truncation_degree(&c, self.tau);
        if d > DEGREE_CAP {
            return Err(self.resource_error(d as f64));
        }
        c.truncate(d + 1);
        if c.len() < 2 {
            c.resize(2, 0.0);
        }
        Ok(c)
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Odd polynomial with `|P(x) - sign(x)| <= eps` for `delta <= |x| <= 1`
/// and `|P| <= 1` on `[-1, 1]`. Smoothed target `erf(k x)`.
pub fn sign_polynomial(delta: f64, eps: f64) -> Result<BoundedPolynomial> {
    if !(delta > 0.0 && delta < 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Input(format!("sign polynomial needs 0 < delta, eps < 1; got {delta}, {eps}")));
    }
    let k = erfc_inv(eps / 4.0) / delta;
    let tau = eps / 8.0;
    let margin = default_margin(eps);
    let spec = Spec {
        family: PolynomialFamily::Sign,
        parity: Parity::Odd,
        k,
        tau,
        gap: ("delta", delta, 1.0 / delta),
        accuracy: ("eps", eps, (1.0 / eps).ln()),
    };
    let scale = (1.0 - margin) / (1.0 + tau);
    let c: Vec<f64> = spec.coefficients(|x| erf(k * x))?.into_iter().map(|v| v * scale).collect();
    let mut p = BoundedPolynomial::from_chebyshev(
        PolynomialFamily::Sign,
        Some(Parity::Odd),
        c,
        vec![Band { lo: delta, hi: 1.0, target: BandTarget::Range { min: 1.0 - eps, max: 1.0 } }],
        eps,
        params(&[("delta", delta), ("eps", eps), ("k", k)]),
    );
    p.certify(margin)?;
    Ok(p)
}

/// Even polynomial with values in `[1 - eps, 1]` on `|x| <= t - delta`,
/// in `[0, eps]` on `t + delta <= |x| <= 1`, and in `[0, 1]` everywhere on `[-1, 1]`.
pub fn rectangle_polynomial(t: f64, delta: f64, eps: f64) -> Result<BoundedPolynomial> {
    if !(delta > 0.0 && delta < t && t + delta <= 1.0) || !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Input(format!(
            "rectangle polynomial needs 0 < delta < t, t + delta <= 1, 0 < eps < 1/2; got t = {t}, delta = {delta}, eps = {eps}"
        )));
    }
    let k = erfc_inv(eps / 4.0) / delta;
    let tau = eps / 8.0;
    let margin = default_margin(eps);
    let spec = Spec {
        family: PolynomialFamily::Rectangle,
        parity: Parity::Even,
        k,
        tau,
        gap: ("delta", delta, 1.0 / delta),
        accuracy: ("eps", eps, (1.0 / eps).ln()),
    };
    let mut c = spec.coefficients(|x| 0.5 * (erf(k * (x + t)) - erf(k * (x - t))))?;
    // lift by tau so the truncation stays non-negative, then shrink into [0, 1 - margin]
    c[0] += tau;
    let scale = (1.0 - margin) / (1.0 + 2.0 * tau);
    c.iter_mut().for_each(|v| *v *= scale);
    let bands = vec![
        Band { lo: 0.0, hi: t - delta, target: BandTarget::Range { min: 1.0 - eps, max: 1.0 } },
        Band { lo: t + delta, hi: 1.0, target: BandTarget::Range { min: 0.0, max: eps } },
        Band { lo: 0.0, hi: 1.0, target: BandTarget::Range { min: 0.0, max: 1.0 } },
    ];
    let mut p = BoundedPolynomial::from_chebyshev(
        PolynomialFamily::Rectangle,
        Some(Parity::Even),
        c,
        bands,
        eps,
        params(&[("delta", delta), ("eps", eps), ("k", k), ("t", t)]),
    );
    p.certify(margin)?;
    Ok(p)
}

/// Odd polynomial with `|P(x) - 1/(2 kappa x)| <= eps_prime / (2 kappa)` for
/// `1/kappa <= |x| <= 1`, `|P| <= 1` on `[-1, 1]` and `P(0) = 0`.
///
/// The target is `E(x) / (2 kappa x)` with `E` an even smoothed high-pass
/// step from 0 to 1 centred at `3/(4 kappa)`.
pub fn inverse_polynomial(kappa: f64, eps_prime: f64) -> Result<BoundedPolynomial> {
    if !(kappa > 1.0 && kappa.is_finite()) || !(eps_prime > 0.0 && eps_prime <= 1.0) {
        return Err(Error::Input(format!(
            "inverse polynomial needs kappa > 1 and 0 < eps' <= 1; got {kappa}, {eps_prime}"
        )));
    }
    let target_tol = eps_prime / (2.0 * kappa);
    let centre = 0.75 / kappa;
    let half_width = 0.25 / kappa;
    let k = erfc_inv(target_tol) / half_width;
    let tau = target_tol / 4.0;
    let floor = erfc(k * centre);
    let step = move |x: f64| 0.5 * (erfc(k * (centre - x)) + erfc(k * (centre + x))) - floor;
    let target = move |x: f64| if x == 0.0 { 0.0 } else { step(x) / (2.0 * kappa * x) };
    let spec = Spec {
        family: PolynomialFamily::Inverse,
        parity: Parity::Odd,
        k,
        tau,
        gap: ("kappa", kappa, kappa),
        accuracy: ("eps_prime", eps_prime, (1.0 / eps_prime).ln()),
    };
    let c = spec.coefficients(target)?;
    let mut p = BoundedPolynomial::from_chebyshev(
        PolynomialFamily::Inverse,
        Some(Parity::Odd),
        c,
        vec![Band { lo: 1.0 / kappa, hi: 1.0, target: BandTarget::Reciprocal { scale: 2.0 * kappa, tol: target_tol } }],
        target_tol,
        params(&[("eps_prime", eps_prime), ("k", k), ("kappa", kappa)]),
    );
    p.certify(1e-6)?;
    Ok(p)
}
