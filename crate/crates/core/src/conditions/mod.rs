//! Sampled certificates for the Kannan, Pata, and generalized Kannan-type
//! contractive conditions, plus the embeddings between them.

mod checks;
mod embed;
mod params;

pub use checks::{
    check_generalized, check_kannan, check_pata, fit_contraction_ratio, fit_lambda, LambdaFit,
};
pub use embed::{bernoulli_check, embed_kannan_threshold, embed_kannan_to_pata};
pub use params::{EpsilonGrid, KannanParams, PataParams, PsiFunction};
