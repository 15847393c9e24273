//! Continuity of the solution in the nonlinearity:
//! `‖u₁ - u₂‖ ≤ σ/(2M(1-σ)) (‖u0‖+1) ‖g₁ - g₂‖_{C¹(I)}`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::expr::Expr;
use crate::grid::VectorGridFunction;
use crate::norms::{c1_norm_over_ball, norm_h1_vector, C1Estimate, NormError};
use crate::problem::{certify, compute_sigma, Certificate, ProblemError, ProblemSpec};
use crate::solver::{iterate, SolveOptions, Solution, SolverError, TauMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensitivityError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("g distance: {0}")]
    Norm(#[from] NormError),
    #[error("nonlinearity {which}: {source}")]
    Solve { which: usize, source: SolverError },
    #[error("nonlinearity {which} is not certified with the shared M; pass force to compare anyway")]
    Uncertified { which: usize, certificate: Box<Certificate> },
    #[error("the two nonlinearities have {0} and {1} components")]
    Shape(usize, usize),
}

/// `‖g₁ - g₂‖_{C¹(I)}` through the symbolic difference.
pub fn c1_distance(g1: &[Expr], g2: &[Expr], radius: f64) -> Result<C1Estimate, SensitivityError> {
    if g1.len() != g2.len() {
        return Err(SensitivityError::Shape(g1.len(), g2.len()));
    }
    let diff: Vec<Expr> = g1.iter().zip(g2).map(|(a, b)| Expr::sub(a.clone(), b.clone())).collect();
    Ok(c1_norm_over_ball(&diff, radius)?)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SensitivityReport {
    pub g_distance: f64,
    pub g_distance_sampled: bool,
    /// `‖u_{p,1} - u_{p,2}‖_{H¹}`.
    pub lhs: f64,
    /// `σ/(2M(1-σ)) (‖u0‖+1) g_distance`.
    pub rhs: f64,
    /// `c_a/(1-σ) (‖u0‖+1)² Q g_distance`.
    pub p1p2_bound: f64,
    /// `|rhs - p1p2_bound| / max(|rhs|, |p1p2_bound|)`, 0 when both vanish.
    pub identity_gap: f64,
    pub margin: f64,
    /// `lhs ≤ rhs + 1e-6 (1 + rhs)`.
    pub holds: bool,
    pub sigma_used: f64,
    pub m_used: f64,
    pub c_a: f64,
    pub q: f64,
    pub u0_h1: f64,
    /// `‖u_{p,2} - τ_{g₁} u_{p,2}‖_{H¹}`.
    pub eta_gap: f64,
    /// `c_a Q (‖u0‖+1)² g_distance`.
    pub eta_bound: f64,
    pub certificates: [Certificate; 2],
    pub solutions: [Solution; 2],
}

/// Solve with `g1` and with `g2` under one `M` (the larger of the two
/// estimates) and compare against the continuity bound.
pub fn compare_g(
    p: &ProblemSpec,
    g1: &[Expr],
    g2: &[Expr],
    opts: &SolveOptions,
) -> Result<SensitivityReport, SensitivityError> {
    if g1.len() != g2.len() {
        return Err(SensitivityError::Shape(g1.len(), g2.len()));
    }
    let p1 = p.with_nonlinearity(g1.to_vec())?;
    let p2 = p.with_nonlinearity(g2.to_vec())?;
    let m = match p.options().m_override {
        Some(m) => m,
        None => certify(&p1)?.m.max(certify(&p2)?.m),
    };
    let shared = |q: &ProblemSpec| -> Result<ProblemSpec, ProblemError> {
        q.with_options(crate::problem::ProblemOptions {
            m_override: Some(m),
            ..*q.options()
        })
    };
    let (p1, p2) = (shared(&p1)?, shared(&p2)?);
    let certificates = [certify(&p1)?, certify(&p2)?];
    if !opts.force {
        if let Some(which) = certificates.iter().position(|c| !c.passed()) {
            return Err(SensitivityError::Uncertified {
                which: which + 1,
                certificate: Box::new(certificates[which].clone()),
            });
        }
    }

    let tau1 = TauMap::new(&p1, &certificates[0], opts.force).map_err(|source| SensitivityError::Solve { which: 1, source })?;
    let tau2 = tau1
        .with_nonlinearity(g2.to_vec())
        .map_err(|source| SensitivityError::Solve { which: 2, source })?;
    let zero = VectorGridFunction::zeros(*p.grid(), p.len());
    let solve = |tau: &TauMap, which: usize, cert: &Certificate| {
        let mut notes = Vec::new();
        if !cert.passed() {
            notes.push(alloc::string::String::from(
                "forced run: hypotheses not certified, no contraction or uniqueness claim",
            ));
        }
        iterate(tau, &zero, opts, notes).map_err(|source| SensitivityError::Solve { which, source })
    };
    let s1 = solve(&tau1, 1, &certificates[0])?;
    let s2 = solve(&tau2, 2, &certificates[1])?;

    let c = &certificates[0];
    let (c_a, q, u0_h1) = (c.c_a, c.q, c.u0_h1);
    let sigma = compute_sigma(c_a, q, m, u0_h1);
    let distance = c1_distance(g1, g2, c.ball_radius)?;
    let g_distance = distance.value;
    let lhs = norm_h1_vector(&s1.u_p.sub(&s2.u_p).expect("same shape"));
    let rhs = sigma / (2.0 * m * (1.0 - sigma)) * (u0_h1 + 1.0) * g_distance;
    let p1p2_bound = c_a / (1.0 - sigma) * (u0_h1 + 1.0) * (u0_h1 + 1.0) * q * g_distance;
    let scale = rhs.abs().max(p1p2_bound.abs());
    let identity_gap = if scale > 0.0 { (rhs - p1p2_bound).abs() / scale } else { 0.0 };

    // η = τ_{g₁} u_{p,2}; u_{p,2} - η = τ_{g₂}u_{p,2} - τ_{g₁}u_{p,2}.
    let eta = tau1
        .apply(&s2.u_p)
        .map_err(|source| SensitivityError::Solve { which: 1, source })?;
    let eta_gap = norm_h1_vector(&s2.u_p.sub(&eta).expect("same shape"));
    let eta_bound = c_a * q * (u0_h1 + 1.0) * (u0_h1 + 1.0) * g_distance;

    Ok(SensitivityReport {
        g_distance,
        g_distance_sampled: distance.lower_estimate,
        lhs,
        rhs,
        p1p2_bound,
        identity_gap,
        margin: rhs - lhs,
        holds: lhs <= rhs + 1e-6 * (1.0 + rhs),
        sigma_used: sigma,
        m_used: m,
        c_a,
        q,
        u0_h1,
        eta_gap,
        eta_bound,
        certificates,
        solutions: [s1, s2],
    })
}
