//! Monodromy, homology, periods and Neron-Severi lattices of elliptic surfaces.

pub mod cli_io;
pub mod continuation;
pub mod griffiths_dwork;
pub mod homology;
pub mod modp;
pub mod morsification;
pub mod neron_severi;
pub mod periods;
pub mod poly;
mod serde_util;
pub mod sl2z;
pub mod zlattice;

pub use griffiths_dwork::{CubicPencil, DiffOperator, PencilError};
pub use homology::{PrimaryBasis, SurfaceHomology};
pub use morsification::{MonodromyRep, MorsifiedRep};
pub use neron_severi::{MWReport, NSReport};
pub use periods::{HolomorphicFormBasis, PeriodMatrix, PeriodsError};
pub use poly::QPoly;
pub use sl2z::{KodairaType, Mat2Z};
pub use zlattice::{FgAbelianGroup, GramLattice, IntMatrix, RatMatrix};
