//! Feature-space shrinkage: univariate K-best selection, PCA and a
//! tied-weight autoencoder whose latent space feeds the classifiers.

mod autoencoder;
mod pca;
mod select;

pub use autoencoder::{ae_encode, ae_train, AeConfig, AeGradients, AeModel};
pub use pca::{pca_fit, pca_inverse_transform, pca_transform, PcaModel};
pub use select::{chi_square_scores, select_k_best_fit, select_transform, Scorer, SelectionModel};
