//! End-to-end simulation of persistent Betti number estimation: simplex-state
//! preparation, persistent-Laplacian encoding, projector, block-measurement
//! and sampling, with the classical answer as reference.

use nalgebra::{DMatrix, DVector};
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blockenc::{
    encode_boundary, linear_combine, product, restrict_submatrix, EncodingMetadata, HammingSpace, LcuPlan,
    SubspaceFilter, VirtualBlockEncoding,
};
use crate::complex::{binomial, simplex_density, SimplicialComplex, SimplicialPair};
use crate::error::{Error, Result};
use crate::homology::{self, GapBound, SpectralGapBounds};
use crate::linalg;
use crate::qsvt::{
    apply_svt, pseudo_inverse_encoding, rectangle_polynomial, robustness_gap, sign_polynomial, RobustnessCheck,
};

/// Largest vertex count for state-vector simulation.
pub const MAX_QUANTUM_VERTICES: usize = 14;

/// Smallest `eps_inv` tried when tightening the inverse accuracy.
pub const EPS_INV_FLOOR: f64 = 1e-10;

/// `P_q |0^n>`: uniform amplitudes on the weight-`(q+1)` basis states.
/// Basis state `x` has bit `i` set when vertex `i` is present.
pub fn dicke_state(n: usize, q: usize) -> Result<DVector<f64>> {
    if n > MAX_QUANTUM_VERTICES {
        return Err(Error::Resource(format!("{n} qubits exceed the {MAX_QUANTUM_VERTICES}-qubit state-vector cap")));
    }
    if q >= n {
        return Err(Error::Input(format!("q = {q} must be below n = {n}")));
    }
    let amp = 1.0 / (binomial(n, q + 1) as f64).sqrt();
    Ok(DVector::from_iterator(
        1 << n,
        (0..1u64 << n).map(|x| if x.count_ones() as usize == q + 1 { amp } else { 0.0 }),
    ))
}

/// Ideal and prepared mixed states on `W_q`, both diagonal in the computational basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexStateEnsemble {
    pub q: usize,
    pub density: f64,
    /// Diagonal of `rho`: `1/n_q^K` on the q-simplices of `K`.
    pub ideal: Vec<f64>,
    /// Diagonal of `rho~ = a^2 rho + b^2 (uniform over non-simplices)`.
    pub prepared: Vec<f64>,
    /// Amplitude on the good subspace after amplification.
    pub amplitude: f64,
    pub eps_sign: f64,
    pub trace_distance: f64,
    pub trace_distance_bound: f64,
    /// Degree of the amplification polynomial (uses of the marking unitary).
    pub amplification_degree: usize,
}

impl SimplexStateEnsemble {
    /// The exact state, with no amplification error.
    pub fn ideal(complex: &SimplicialComplex, q: usize) -> Result<Self> {
        let (density, ideal) = ideal_weights(complex, q)?;
        Ok(Self {
            q,
            density,
            prepared: ideal.clone(),
            ideal,
            amplitude: 1.0,
            eps_sign: 0.0,
            trace_distance: 0.0,
            trace_distance_bound: 0.0,
            amplification_degree: 0,
        })
    }

    pub fn leakage(&self) -> f64 {
        self.prepared.iter().zip(&self.ideal).filter(|(_, &i)| i == 0.0).map(|(p, _)| p).sum()
    }
}

fn ideal_weights(complex: &SimplicialComplex, q: usize) -> Result<(f64, Vec<f64>)> {
    let n = complex.n_vertices();
    let density = simplex_density(complex, q)?;
    let count = complex.count(q)?;
    if count == 0 {
        return Err(Error::Undefined(format!("K has no {q}-simplices; the normalised Betti number is undefined")));
    }
    let w = HammingSpace::for_dimension(n, q)?;
    let f = complex.membership();
    let ideal = w.states().iter().map(|&b| if f.contains_bits(b, q) { 1.0 / count as f64 } else { 0.0 }).collect();
    Ok((density, ideal))
}

/// Marks q-simplices in the Dicke state and amplifies the marked part with the
/// sign polynomial at gap `sqrt(d)`. Copying and tracing out the register then
/// leaves `a^2 rho + b^2 sigma` with `sigma` uniform over non-simplices.
pub fn prepare_simplex_ensemble(complex: &SimplicialComplex, q: usize, eps_sign: f64) -> Result<SimplexStateEnsemble> {
    if complex.n_vertices() > MAX_QUANTUM_VERTICES {
        return Err(Error::Resource(format!(
            "{} vertices exceed the {MAX_QUANTUM_VERTICES}-vertex cap for state preparation",
            complex.n_vertices()
        )));
    }
    if !(eps_sign > 0.0 && eps_sign < 1.0) {
        return Err(Error::Input(format!("eps_sign must lie in (0, 1), got {eps_sign}")));
    }
    let (density, ideal) = ideal_weights(complex, q)?;
    let overlap = density.sqrt();
    let (amplitude, degree) = if overlap >= 1.0 {
        (1.0, 0)
    } else {
        let p = sign_polynomial(overlap, eps_sign * eps_sign / 2.0)?;
        (p.eval(overlap).min(1.0), p.degree())
    };
    let good = amplitude * amplitude;
    let bad = 1.0 - good;
    let others = ideal.iter().filter(|&&w| w == 0.0).count();
    let prepared: Vec<f64> =
        ideal.iter().map(|&w| if w > 0.0 { good * w } else if others > 0 { bad / others as f64 } else { 0.0 }).collect();
    let trace_distance = ideal.iter().zip(&prepared).map(|(a, b)| (a - b).abs()).sum();
    Ok(SimplexStateEnsemble {
        q,
        density,
        ideal,
        prepared,
        amplitude,
        eps_sign,
        trace_distance,
        trace_distance_bound: 2.0 * eps_sign * eps_sign,
        amplification_degree: degree,
    })
}

/// The assembled encoding of the persistent Laplacian on `W_q`.
#[derive(Debug, Clone)]
pub struct LaplacianEncoding {
    pub encoding: VirtualBlockEncoding,
    /// `alpha_0` (up-Laplacian of L), `alpha_1` (Schur correction), `alpha_2` (down-Laplacian of K).
    pub alphas: [f64; 3],
    pub inverse_degree: Option<usize>,
    pub kappa: Option<f64>,
    pub eps_inv: f64,
}

impl LaplacianEncoding {
    pub fn beta(&self) -> f64 {
        self.encoding.alpha()
    }
}

/// How the pseudo-inverse of `Δ4` is realised.
#[derive(Debug, Clone, Copy, PartialEq)]
enum InverseRoute {
    Polynomial(f64),
    Dense,
}

/// `V1 - V2 V4^+ V3 + Δ_down`, each term encoded from the membership functions.
pub fn assemble_persistent_laplacian_encoding(
    pair: &SimplicialPair,
    q: usize,
    bounds: &SpectralGapBounds,
    eps_inv: f64,
) -> Result<LaplacianEncoding> {
    assemble(pair, q, bounds, InverseRoute::Polynomial(eps_inv))
}

fn assemble(pair: &SimplicialPair, q: usize, bounds: &SpectralGapBounds, route: InverseRoute) -> Result<LaplacianEncoding> {
    let (k, l) = (pair.small(), pair.large());
    let dk = encode_boundary(k, q)?;
    let down = product(&dk.adjoint(), &dk)?;
    let dl = encode_boundary(l, q + 1)?;
    let up = product(&dl, &dl.adjoint())?;
    let fk = k.membership();
    let inside = SubspaceFilter::Members(fk, q);
    let outside = SubspaceFilter::NonMembers(fk, q);
    let v1 = restrict_submatrix(&up, &inside, &inside)?;
    let (alpha0, alpha2) = (up.alpha(), down.alpha());
    if k.count(q)? == l.count(q)? {
        let plan = LcuPlan::new().add(1.0, v1).add(1.0, down);
        return Ok(LaplacianEncoding {
            encoding: linear_combine(&plan)?,
            alphas: [alpha0, 0.0, alpha2],
            inverse_degree: None,
            kappa: None,
            eps_inv: 0.0,
        });
    }
    let v2 = restrict_submatrix(&up, &inside, &outside)?;
    let v3 = restrict_submatrix(&up, &outside, &inside)?;
    let v4 = restrict_submatrix(&up, &outside, &outside)?;
    let gamma = bounds.gamma_q();
    let kappa = alpha0 / gamma;
    let (pinv, degree, eps_inv) = match route {
        InverseRoute::Polynomial(eps_inv) => {
            let r = pseudo_inverse_encoding(&v4, gamma, eps_inv)
                .map_err(|e| annotate(e, "pseudo-inverse of Δ4"))?;
            let degree = r.degree;
            (r.output, Some(degree), eps_inv)
        }
        InverseRoute::Dense => {
            let scale = 2.0 * kappa / alpha0;
            let exact = linalg::pseudo_inverse(v4.block());
            let enc = VirtualBlockEncoding::new("dense pseudo-inverse of Δ4", exact, scale, v4.ancillas() + 1, 0.0, v4.cols(), v4.rows())?;
            (enc, None, 0.0)
        }
    };
    let correction = product(&product(&v2, &pinv)?, &v3)?;
    let alpha1 = correction.alpha();
    let plan = LcuPlan::new().add(1.0, v1).add(-1.0, correction).add(1.0, down);
    let encoding = linear_combine(&plan)?;
    Ok(LaplacianEncoding { encoding, alphas: [alpha0, alpha1, alpha2], inverse_degree: degree, kappa: Some(kappa), eps_inv })
}

fn annotate(e: Error, stage: &str) -> Error {
    match e {
        Error::Invariant { message, .. } => Error::invariant(stage, message),
        other => other,
    }
}

/// `λ_min` and `λ_q` used for the rectangle; an all-zero spectrum uses 2 and 1.
fn lambda_pair(bounds: &SpectralGapBounds) -> (f64, f64) {
    match bounds.lambda {
        GapBound::Measured { minimum, bound } => (minimum, bound),
        GapBound::AllZero | GapBound::NotApplicable => (2.0, 1.0),
    }
}

/// The projector encoding and the parameters that produced it.
#[derive(Debug, Clone)]
pub struct ProjectorEncoding {
    pub encoding: VirtualBlockEncoding,
    pub degree: usize,
    pub t: f64,
    pub delta: f64,
    pub eps_rect: f64,
    /// `eps_rect + 4 d sqrt(eps_in / beta)` with the encoding's inherited error.
    pub eps_pi_formula: f64,
}

/// Rectangle transform of `Δ~/β` with `t = λ_min/(2β)`, `δ = λ_q/(2β)`.
pub fn projector_encoding(
    delta_enc: &VirtualBlockEncoding,
    bounds: &SpectralGapBounds,
    eps_rect: f64,
) -> Result<ProjectorEncoding> {
    let beta = delta_enc.alpha();
    let (lambda_min, lambda_q) = lambda_pair(bounds);
    let t = lambda_min / (2.0 * beta);
    let delta = lambda_q / (2.0 * beta);
    let p = rectangle_polynomial(t, delta, eps_rect)?;
    let svt = apply_svt(delta_enc, &p)?;
    Ok(ProjectorEncoding {
        eps_pi_formula: svt.output.eps(),
        encoding: svt.output,
        degree: svt.degree,
        t,
        delta,
        eps_rect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockMeasurement {
    /// `Tr[Π ρ]` with the exact projector and ideal state.
    pub p1_ideal: f64,
    /// `Tr[A^T A ρ~]` with the approximate block and prepared state.
    pub p1_tilde: f64,
}

/// Outcome-1 probabilities of the block-measurement channel.
pub fn block_measurement_probability(
    proj: &VirtualBlockEncoding,
    ensemble: &SimplexStateEnsemble,
    exact_projector: &DMatrix<f64>,
) -> Result<BlockMeasurement> {
    let dim = ensemble.ideal.len();
    if proj.block().shape() != (dim, dim) || exact_projector.shape() != (dim, dim) {
        return Err(Error::Input(format!(
            "projector is {:?} but the ensemble lives in dimension {dim}",
            proj.block().shape()
        )));
    }
    let a = proj.normalized();
    let ata = a.transpose() * &a;
    let p1_tilde = (0..dim).map(|i| ensemble.prepared[i] * ata[(i, i)]).sum::<f64>();
    let p1_ideal = (0..dim).map(|i| ensemble.ideal[i] * exact_projector[(i, i)]).sum::<f64>();
    Ok(BlockMeasurement { p1_ideal, p1_tilde: p1_tilde.clamp(0.0, 1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleEstimate {
    pub p1_tilde: f64,
    pub eps: f64,
    pub eta: f64,
    pub seed: u64,
    pub samples: u64,
    pub successes: u64,
    pub mean: f64,
}

/// `N = ceil(ln(2/eta) / (2 eps^2))`.
pub fn hoeffding_samples(eps: f64, eta: f64) -> u64 {
    ((2.0 / eta).ln() / (2.0 * eps * eps)).ceil() as u64
}

/// Mean of `N` seeded Bernoulli(`p1_tilde`) draws.
pub fn sample_estimate(p1_tilde: f64, eps: f64, eta: f64, seed: u64) -> Result<SampleEstimate> {
    if !(eps > 0.0) || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Input(format!("need eps > 0 and 0 < eta < 1; got {eps}, {eta}")));
    }
    let samples = hoeffding_samples(eps, eta);
    let p = p1_tilde.clamp(0.0, 1.0);
    let dist = Bernoulli::new(p).map_err(|e| Error::Input(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = (0..samples).filter(|_| dist.sample(&mut rng)).count() as u64;
    Ok(SampleEstimate { p1_tilde, eps, eta, seed, samples, successes, mean: successes as f64 / samples as f64 })
}

/// Measured values behind the three promises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PromiseReport {
    /// P1: q-simplex density of K.
    pub density: f64,
    /// P2: smallest nonzero eigenvalue of Δ4.
    pub gamma_min: Option<f64>,
    /// P3: smallest nonzero eigenvalue of the persistent Laplacian.
    pub lambda_min: Option<f64>,
    pub dense: bool,
}

pub fn check_promises(pair: &SimplicialPair, q: usize) -> Result<PromiseReport> {
    let density = simplex_density(pair.small(), q)?;
    let bounds = homology::spectral_bounds(pair, q)?;
    Ok(PromiseReport {
        density,
        gamma_min: bounds.gamma.minimum(),
        lambda_min: bounds.lambda.minimum(),
        dense: density > 0.0,
    })
}

/// Accuracy targets for the three approximate stages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub target: f64,
    pub eps_sign: f64,
    pub eps_inv: f64,
    pub eps_rect: f64,
}

impl ErrorBudget {
    /// `eps_rect = eps/4`, `eps_sign = sqrt(eps/8)`, `eps_inv = 1e-3 eps` (tightened later if needed).
    pub fn from_target(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Input(format!("target accuracy must lie in (0, 1), got {eps}")));
        }
        Ok(Self { target: eps, eps_sign: (eps / 8.0).sqrt(), eps_inv: 1e-3 * eps, eps_rect: eps / 4.0 })
    }

    /// `8 sqrt(2) eps_pi + 2 eps_sign^2`.
    pub fn bound(&self, eps_pi: f64) -> f64 {
        8.0 * 2f64.sqrt() * eps_pi + 2.0 * self.eps_sign * self.eps_sign
    }
}

/// Evaluated cost expressions (constants set to one, logarithms floored at one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    pub oracle_calls_k: f64,
    pub oracle_calls_l: f64,
    pub gates: f64,
    pub state_preparation_calls: f64,
    pub qubits: usize,
}

fn log_floor(x: f64) -> f64 {
    (1.0 / x).ln().max(1.0)
}

/// Cost formulas at the instance parameters. `ancillas` is the projector
/// encoding's ancilla count.
pub fn cost_report(
    n: usize,
    q: usize,
    density: f64,
    gamma_q: f64,
    lambda_q: f64,
    budget: &ErrorBudget,
    ancillas: usize,
) -> CostReport {
    let (nf, qf) = (n as f64, q.max(1) as f64);
    let prep = (1.0 / density).sqrt() * log_floor(budget.eps_sign);
    let core = qf.powi(4) / (gamma_q * gamma_q * lambda_q) * log_floor(budget.eps_rect) * log_floor(gamma_q * budget.eps_inv);
    CostReport {
        oracle_calls_k: prep + core * nf.powi(6),
        oracle_calls_l: core * nf.powi(6),
        gates: qf * nf * nf * prep + core * nf.powi(8),
        state_preparation_calls: prep,
        qubits: n + ancillas + n + 1,
    }
}

/// Exact replacements for the approximate stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Surrogates {
    pub dense_inverse: bool,
    pub exact_projector: bool,
    pub ideal_ensemble: bool,
}

impl Surrogates {
    pub fn all() -> Self {
        Self { dense_inverse: true, exact_projector: true, ideal_ensemble: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub eps: f64,
    pub eta: f64,
    pub seed: u64,
    pub surrogates: Surrogates,
    /// Overrides for the gap bounds; must lie below the measured minima.
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    /// Overrides for the default budget split.
    pub budget: Option<ErrorBudget>,
    /// Keep `eps_inv` fixed instead of tightening it.
    pub fixed_eps_inv: bool,
}

impl PipelineConfig {
    pub fn new(eps: f64, eta: f64, seed: u64) -> Self {
        Self { eps, eta, seed, surrogates: Surrogates::default(), gamma: None, lambda: None, budget: None, fixed_eps_inv: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetReport {
    pub budget: ErrorBudget,
    pub eps_pi: f64,
    pub eps_pi_formula: f64,
    pub robustness_measured: f64,
    pub robustness_bound: f64,
    pub projector_error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EncodingReport {
    pub beta: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub laplacian: EncodingMetadata,
    pub projector: EncodingMetadata,
    pub laplacian_error: f64,
    pub amplification_degree: usize,
    pub inverse_degree: Option<usize>,
    pub rectangle_degree: Option<usize>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub n_vertices: usize,
    pub q: usize,
    pub n_q_k: usize,
    pub n_q_l: usize,
    pub betti: usize,
    pub betti_rank_oracle: usize,
    pub p1_exact: f64,
    pub p1_ideal: f64,
    pub p1_tilde: f64,
    pub discrepancy: f64,
    pub within_budget: bool,
    pub estimate: SampleEstimate,
    pub estimate_error: f64,
    pub budget: BudgetReport,
    pub encoding: EncodingReport,
    pub gaps: SpectralGapBounds,
    pub promises: PromiseReport,
    pub cost: CostReport,
    pub surrogates: Surrogates,
}

/// `E M E^T`: a matrix on `C_q(K)` placed in `W_q`.
fn pad(space: &HammingSpace, complex: &SimplicialComplex, q: usize, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let e = space.embedding(complex, q)?;
    Ok(&e * m * e.transpose())
}

/// Orthogonal projector onto the kernel of a symmetric matrix.
pub fn kernel_projector(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = linalg::symmetric_eigen(m);
    let tol = linalg::zero_threshold(values.as_slice());
    let mut p = DMatrix::zeros(m.nrows(), m.ncols());
    for (j, &v) in values.iter().enumerate() {
        if v.abs() < tol {
            let c = vectors.column(j);
            p += &c * c.transpose();
        }
    }
    p
}

/// Runs every stage and compares against the classical answer.
pub fn run_pipeline(pair: &SimplicialPair, q: usize, config: &PipelineConfig) -> Result<EstimationReport> {
    let n = pair.n_vertices();
    if n > MAX_QUANTUM_VERTICES {
        return Err(Error::Resource(format!("{n} vertices exceed the {MAX_QUANTUM_VERTICES}-vertex cap for quantum simulation")));
    }
    let (k, l) = (pair.small(), pair.large());
    let (n_q_k, n_q_l) = (k.count(q)?, l.count(q)?);
    if n_q_k == 0 {
        return Err(Error::Undefined(format!("K has no {q}-simplices; the normalised Betti number is undefined")));
    }
    let budget = match config.budget {
        Some(b) => b,
        None => ErrorBudget::from_target(config.eps)?,
    };

    let laplacian = homology::persistent_laplacian(pair, q)?;
    let betti = laplacian.nullity();
    let betti_rank_oracle = homology::persistent_betti_rank(pair, q)?;
    if betti != betti_rank_oracle {
        return Err(Error::invariant(
            "classical persistent Betti",
            format!("spectral nullity {betti} disagrees with the rank oracle {betti_rank_oracle}"),
        ));
    }
    let p1_exact = betti as f64 / n_q_k as f64;

    let mut gaps = homology::spectral_bounds(pair, q)?;
    if let Some(g) = config.gamma {
        gaps.gamma = gaps.gamma.with_bound(g, "gamma")?;
    }
    if let Some(lq) = config.lambda {
        gaps.lambda = gaps.lambda.with_bound(lq, "lambda")?;
    }

    let space = HammingSpace::for_dimension(n, q)?;
    let exact_delta = pad(&space, k, q, &laplacian.matrix)?;
    let exact_projector = pad(&space, k, q, &kernel_projector(&laplacian.matrix))?;

    let ensemble = if config.surrogates.ideal_ensemble {
        SimplexStateEnsemble::ideal(k, q)?
    } else {
        prepare_simplex_ensemble(k, q, budget.eps_sign)?
    };

    let route = if config.surrogates.dense_inverse { InverseRoute::Dense } else { InverseRoute::Polynomial(budget.eps_inv) };
    let mut assembled = assemble(pair, q, &gaps, route)?;
    let beta = assembled.beta();

    let (proj_block, projector_meta, rect_degree, eps_pi_formula, robustness, budget) = if config.surrogates.exact_projector {
        let p = kernel_projector(assembled.encoding.block());
        let enc = VirtualBlockEncoding::new(
            "exact projector",
            p,
            1.0,
            assembled.encoding.ancillas() + 1,
            0.0,
            space.label(),
            space.label(),
        )?;
        let meta = enc.metadata();
        (enc, meta, None, 0.0, RobustnessCheck::Checked { measured: 0.0, bound: 0.0 }, budget)
    } else {
        let (lambda_min, lambda_q) = lambda_pair(&gaps);
        let rect = rectangle_polynomial(lambda_min / (2.0 * beta), lambda_q / (2.0 * beta), budget.eps_rect)?;
        let mut budget = budget;
        loop {
            let robustness = robustness_gap(&rect, &(&exact_delta / beta), &assembled.encoding.normalized())?;
            let measured = robustness.measured().unwrap_or(f64::INFINITY);
            let tighten = matches!(route, InverseRoute::Polynomial(_))
                && n_q_k != n_q_l
                && !config.fixed_eps_inv
                && measured > budget.target / 4.0
                && budget.eps_inv / 10.0 >= EPS_INV_FLOOR;
            if !tighten {
                let svt = apply_svt(&assembled.encoding, &rect)?;
                let meta = svt.output.metadata();
                break (svt.output.clone(), meta, Some(svt.degree), svt.output.eps(), robustness, budget);
            }
            log::debug!("robustness gap {measured:.3e} above target/4; eps_inv -> {:.1e}", budget.eps_inv / 10.0);
            budget.eps_inv /= 10.0;
            assembled = assemble(pair, q, &gaps, InverseRoute::Polynomial(budget.eps_inv))?;
        }
    };

    let measurement = block_measurement_probability(&proj_block, &ensemble, &exact_projector)?;
    let (robustness_measured, robustness_bound) = match robustness {
        RobustnessCheck::Checked { measured, bound } => (measured, bound),
        RobustnessCheck::Skipped { .. } => (f64::NAN, f64::NAN),
    };
    let eps_pi = if config.surrogates.exact_projector { 0.0 } else { budget.eps_rect + robustness_measured };
    let effective = ErrorBudget {
        eps_sign: if config.surrogates.ideal_ensemble { 0.0 } else { budget.eps_sign },
        ..budget
    };
    let bound = effective.bound(eps_pi);
    let discrepancy = (measurement.p1_tilde - p1_exact).abs();
    let estimate = sample_estimate(measurement.p1_tilde, config.eps, config.eta, config.seed)?;
    let promises = check_promises(pair, q)?;
    let cost = cost_report(n, q, ensemble.density, gaps.gamma_q(), gaps.lambda_q(), &budget, projector_meta.ancillas);
    let laplacian_error = linalg::spectral_norm(&(assembled.encoding.block() - &exact_delta));

    Ok(EstimationReport {
        n_vertices: n,
        q,
        n_q_k,
        n_q_l,
        betti,
        betti_rank_oracle,
        p1_exact,
        p1_ideal: measurement.p1_ideal,
        p1_tilde: measurement.p1_tilde,
        discrepancy,
        within_budget: discrepancy <= bound + 1e-12,
        estimate_error: (estimate.mean - p1_exact).abs(),
        estimate,
        budget: BudgetReport {
            budget: effective,
            eps_pi,
            eps_pi_formula,
            robustness_measured,
            robustness_bound,
            projector_error: linalg::spectral_norm(&(proj_block.normalized() - &exact_projector)),
            bound,
        },
        encoding: EncodingReport {
            beta,
            alpha0: assembled.alphas[0],
            alpha1: assembled.alphas[1],
            alpha2: assembled.alphas[2],
            laplacian: assembled.encoding.metadata(),
            projector: projector_meta,
            laplacian_error,
            amplification_degree: ensemble.amplification_degree,
            inverse_degree: assembled.inverse_degree,
            rectangle_degree: rect_degree,
            kappa: assembled.kappa,
        },
        gaps,
        promises,
        cost,
        surrogates: config.surrogates,
    })
}
