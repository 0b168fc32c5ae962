//! Independent computation of the Stokes data from the original system.
//!
//! Sector solutions are anchored with the optimally truncated formal series
//! and transported with Taylor steps; Laplace integrals evaluate single
//! columns from the Fuchsian side.

pub mod formal;
pub mod laplace;
pub mod sector;

pub use formal::{formal_series, FormalSeries};
pub use laplace::{laplace_column, laplace_loop_column};
pub use sector::{
    sector_solution, stokes_direct, stokes_direct_with, transport_around_origin, SectorPoint, SectorSolution,
    StokesEstimate,
};
