//! Monte-Carlo estimators of time constants, one-arm and crossing
//! probabilities, quasi-independence, the multiscale comparison inequality
//! and the limit ball shape.
//!
//! Every estimator draws its replicas from streams labelled by task and
//! parameter (e.g. `mu/n32`), so points of a curve are independent and any
//! single point can be regenerated alone.

mod ball;
mod crossing;
mod ind;
mod model;
mod mu;
mod one_arm;
mod renorm;

pub use ball::{ball_shape, chamfer_unit_ball, convex_hull, hausdorff, BallAtScale, BallParams, BallRegime, NormBallFit, Point};
pub use crossing::estimate_crossing;
pub use ind::{estimate_ind, event_covariance, CovarianceDefect, EventPair};
pub use model::{GaussianSampler, GridParams, ModelKind, ModelSpec, Sampling};
pub use mu::{estimate_mu, MuCurve, MuPoint, SubadditivityCheck, TRIANGLE_SLACK};
pub use one_arm::{estimate_one_arm, fit_exponent, OneArmCurve, ONE_ARM_INNER};
pub use renorm::{check_renormalization, shell_counts, sphere_cover_count, RenormReport, Verdict};
