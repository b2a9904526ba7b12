//! Geometric simplicial Weisfeiler-Lehman refinement, exact Euler
//! characteristic transforms, and lookup-table simplicial message passing on
//! embedded simplicial complexes.
//!
//! ```
//! use gswl_core::{equivalent, generators::grid_triangulation, ColorInterner, RefinementConfig};
//!
//! let a = grid_triangulation(3, 3, 1.0).unwrap();
//! let b = grid_triangulation(3, 3, 2.0).unwrap();
//! let mut interner = ColorInterner::new();
//! assert!(equivalent(&a, &b, &RefinementConfig::swl(4), &mut interner).unwrap());
//! assert!(!equivalent(&a, &b, &RefinementConfig::gswl(0), &mut interner).unwrap());
//! ```

pub mod complex;
pub mod ect;
pub mod error;
pub mod generators;
pub mod harness;
pub mod io;
pub mod mpsn;
pub mod refine;

pub use complex::{
    build_complex, embedded_isomorphic, euler_characteristic, quantize, AbstractComplex, EmbeddedComplex, Embedding,
    HasseAdjacency, Simplex, DEFAULT_QUANTIZATION_DIGITS,
};
pub use ect::{ecc_curve, ect_distance, sampled_ect, sphere_quadrature, Direction, EccCurve, Quadrature, SampledEct};
pub use error::{Error, Result};
pub use io::{load_complex, save_complex};
pub use mpsn::{construct_ect_readout, construct_realizer, forward, readout, upper_bound_check, MpsnModel};
pub use refine::{
    equivalent, equivalent_at, refine, Adjacency, Color, ColorInterner, Coloring, Mode, PhiMode, RefinementConfig,
};
