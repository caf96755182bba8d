//! Random evaluation points shared by every identity test of one run.
//!
//! Each point is an independent uniform parameter assignment with its
//! covariance matrix. A circuit over σ symbols is declared identically zero
//! only if it vanishes at every point.

use crate::covariance::{sample_assignment, sigma_matrix, ParamAssignment, SigmaMatrix};
use crate::error::PitError;
use crate::fastp::expr::{Evaluator, Expr};
use crate::model::TreeScm;
use crate::pit::{FieldElem, PitSession, PrimeField};
use crate::ring::Ring;

pub struct Probe {
    field: PrimeField,
    assignments: Vec<ParamAssignment<FieldElem>>,
    sigmas: Vec<SigmaMatrix<FieldElem>>,
    caches: Vec<Evaluator<PrimeField>>,
    /// Degree of any σ entry in the model parameters.
    sigma_degree: u64,
}

impl Probe {
    /// Draws one assignment per repetition configured in the session.
    pub fn sample(m: &TreeScm, session: &mut PitSession) -> Result<Self, PitError> {
        let field = *session.field();
        let mut assignments = Vec::new();
        let mut sigmas = Vec::new();
        for _ in 0..session.repetitions() {
            let a = sample_assignment(m, session)?;
            sigmas.push(sigma_matrix(&field, m, &a));
            assignments.push(a);
        }
        let max_depth = (0..=m.n()).map(|v| m.depth(v)).max().unwrap_or(0) as u64;
        Ok(Self::build(field, assignments, sigmas, 2 * max_depth + 1))
    }

    /// Probe over caller-provided covariance matrices.
    pub fn from_sigmas(
        field: PrimeField,
        sigmas: Vec<SigmaMatrix<FieldElem>>,
        sigma_degree: u64,
    ) -> Self {
        Self::build(field, Vec::new(), sigmas, sigma_degree)
    }

    /// Probe with `points` empty covariance matrices, for circuits made of
    /// constants only.
    pub fn constant_only(field: PrimeField, points: usize) -> Self {
        let sigmas = (0..points).map(|_| SigmaMatrix::from_rows(Vec::new())).collect();
        Self::build(field, Vec::new(), sigmas, 0)
    }

    fn build(
        field: PrimeField,
        assignments: Vec<ParamAssignment<FieldElem>>,
        sigmas: Vec<SigmaMatrix<FieldElem>>,
        sigma_degree: u64,
    ) -> Self {
        let caches = sigmas.iter().map(|_| Evaluator::new()).collect();
        Self {
            field,
            assignments,
            sigmas,
            caches,
            sigma_degree,
        }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn points(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigma(&self, point: usize) -> &SigmaMatrix<FieldElem> {
        &self.sigmas[point]
    }

    /// Ground-truth assignment behind a point (empty for caller-built probes).
    pub fn assignment(&self, point: usize) -> Option<&ParamAssignment<FieldElem>> {
        self.assignments.get(point)
    }

    pub fn sigma_degree(&self) -> u64 {
        self.sigma_degree
    }

    /// Degree in the model parameters of a circuit over σ.
    pub fn param_degree(&self, e: &Expr) -> u64 {
        (e.degree() as u64 * self.sigma_degree).max(1)
    }

    pub fn eval(&mut self, point: usize, e: &Expr) -> FieldElem {
        let sigma = &self.sigmas[point];
        let lookup = |i: usize, j: usize| *sigma.get(i, j);
        self.caches[point].eval(&self.field, &lookup, e)
    }

    /// Identity test of one circuit; charges a single verdict.
    pub fn is_zero(&mut self, session: &mut PitSession, e: &Expr) -> Result<bool, PitError> {
        session.charge(self.param_degree(e))?;
        for k in 0..self.points() {
            if !self.eval(k, e).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Joint test that all circuits vanish; charges one verdict per circuit.
    pub fn all_zero(&mut self, session: &mut PitSession, es: &[Expr]) -> Result<bool, PitError> {
        for e in es {
            if !self.is_zero(session, e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Value of a σ entry at a point, as a field element.
    pub fn sigma_value(&self, point: usize, i: usize, j: usize) -> FieldElem {
        *self.sigmas[point].get(i, j)
    }

    pub fn ring(&self) -> &PrimeField {
        &self.field
    }

    /// Whether a numeric quantity vanishes at every point.
    pub fn vanishes_everywhere(&self, values: &[FieldElem]) -> bool {
        values.iter().all(|v| self.field.is_zero(v))
    }
}
