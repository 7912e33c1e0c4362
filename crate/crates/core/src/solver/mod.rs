//! LP engine, bisection scaffold and Euclidean-norm cutting planes.

mod bisect;
mod cutting_plane;
mod lp;
mod simplex;

pub use bisect::bisect_max;
pub use cutting_plane::{cutting_plane_norm2, CuttingPlaneOptions, CuttingPlaneSolution, SocRow};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus, Row};
