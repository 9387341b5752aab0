//! Deterministic inference mechanisms: how P2 grows his perceived subset of
//! P1's actions after observing P1 play.
//!
//! Both mechanisms only ever add actions. Observing `a` puts `a` itself in the
//! perceived set; `Closure` may add further implied actions. P2's own moves are
//! not observations of P1 and never reach these functions.

use thiserror::Error;

use crate::game::{ActionId, ActionSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InferenceError {
    #[error("action {0} is not a P1 action")]
    NotInAlphabet(ActionId),
    #[error("closure of action {0} must contain the action itself")]
    ClosureMissingSelf(ActionId),
    #[error("closure of action {0} mentions actions outside P1's alphabet")]
    ClosureOutsideAlphabet(ActionId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MechanismKind {
    /// `X ∪ {a}`.
    Union,
    /// `X ∪ closure(a)`, indexed by action id. Missing entries mean `{a}`.
    Closure(Vec<ActionSet>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InferenceMechanism {
    alphabet: ActionSet,
    kind: MechanismKind,
}

impl InferenceMechanism {
    pub fn union(alphabet: ActionSet) -> Self {
        Self { alphabet, kind: MechanismKind::Union }
    }

    pub fn closure(
        alphabet: ActionSet,
        map: impl IntoIterator<Item = (ActionId, ActionSet)>,
    ) -> Result<Self, InferenceError> {
        let mut table: Vec<ActionSet> = Vec::new();
        for (a, implied) in map {
            if !alphabet.contains(a) {
                return Err(InferenceError::NotInAlphabet(a));
            }
            if !implied.contains(a) {
                return Err(InferenceError::ClosureMissingSelf(a));
            }
            if !implied.is_subset(alphabet) {
                return Err(InferenceError::ClosureOutsideAlphabet(a));
            }
            if table.len() <= a.index() {
                table.resize(a.index() + 1, ActionSet::EMPTY);
            }
            table[a.index()] = table[a.index()].union(implied);
        }
        Ok(Self { alphabet, kind: MechanismKind::Closure(table) })
    }

    /// Closure where observing any action in `triggers` reveals the whole
    /// alphabet and every other action reveals only itself.
    pub fn reveal_all_on(alphabet: ActionSet, triggers: ActionSet) -> Result<Self, InferenceError> {
        Self::closure(alphabet, triggers.iter().map(|a| (a, alphabet)))
    }

    pub fn alphabet(&self) -> ActionSet {
        self.alphabet
    }

    pub fn kind(&self) -> &MechanismKind {
        &self.kind
    }

    /// Actions P2 learns from one observation of `a`.
    pub fn implied(&self, a: ActionId) -> ActionSet {
        match &self.kind {
            MechanismKind::Union => ActionSet::singleton(a),
            MechanismKind::Closure(table) => table
                .get(a.index())
                .copied()
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| ActionSet::singleton(a)),
        }
    }

    pub fn infer_step(&self, x: ActionSet, a: ActionId) -> Result<ActionSet, InferenceError> {
        if !self.alphabet.contains(a) {
            return Err(InferenceError::NotInAlphabet(a));
        }
        Ok(x.union(self.implied(a)))
    }

    /// Left fold of [`infer_step`](Self::infer_step) over an observed history.
    pub fn infer_history(&self, x0: ActionSet, alpha: &[ActionId]) -> Result<ActionSet, InferenceError> {
        alpha.iter().try_fold(x0, |x, &a| self.infer_step(x, a))
    }
}
