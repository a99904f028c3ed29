//! Labeled multi-Bernoulli prediction and per-sensor update in SMC form.

mod predict;
mod update;

pub use predict::predict;
pub use update::{
    compute_pseudo_likelihood, enumerate_hypotheses, local_update, AssociationMap, Enumeration,
    PseudoLikelihood, UpdateConfig, UpdateHypothesis,
};
