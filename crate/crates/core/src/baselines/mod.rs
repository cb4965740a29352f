//! Comparison estimators: CoCoLasso (max-norm calibration + lasso) and the
//! nonconvex lasso solved by projected gradient over an l1 ball.

mod admm;
mod cocolasso;
mod l1ball;
mod ncl;

pub use admm::{nearest_pd_maxnorm, AdmmDiagnostics, AdmmParams, AdmmResiduals, BUpdate, NearestPdAdmm};
pub use cocolasso::{cocolasso_calibrate, cocolasso_fit, cocolasso_lasso, CocoCalibrated};
pub use l1ball::{l1_ball_project, l1_ball_project_slice, matrix_l1_ball_project};
pub use ncl::{ncl_fit, NclFit, NclParams, StepRule};
