//! Closed-form laws of nearest-neighbor scores, quantile inversion and
//! supporting numerics.

mod knn;
mod laws;
pub mod quadrature;
pub mod special;

pub use knn::{
    knn_conditional_pdf, knn_extended_pdf, knn_joint_pdf, knn_kth_cdf, knn_kth_pdf,
    knn_kth_pdf_deriv, KnnConditionalLaw, KnnKthLaw, KnnMixtureLaw, MIXTURE_TRUNCATION,
};
pub use laws::{invert_cdf, poisson_tail_bound, GammaLaw, OracleLaw, QUANTILE_TOLERANCE};
pub use special::unit_ball_volume;

/// The `p`-quantile of `law`.
pub fn quantile<L: OracleLaw + ?Sized>(law: &L, p: f64) -> crate::Result<f64> {
    law.quantile(p)
}
