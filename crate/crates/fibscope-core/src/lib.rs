//! Symbolic and numerical study of polynomial mappings `C^n -> C^(n-1)`:
//! Milnor sets, asymptotic value estimation, fibration certificates and
//! exportable point clouds of the associated singular varieties.
//!
//! The pipeline, bottom to top:
//!
//! * [`mapspec`] parses the textual description of a mapping, its
//!   weight function and optional chart functions.
//! * [`poly`] is the exact arithmetic layer: sparse polynomials in
//!   complex variables and their conjugates over complex rationals,
//!   plus realification into real polynomial maps.
//! * [`milnor`] builds the Milnor set symbolically, as the single
//!   mixed equation `h = 0` and as the maximal minors of the real
//!   Jacobian of `(G, rho)`, and cross-checks the two numerically.
//! * [`numeric`] samples the Milnor set on spheres, estimates the
//!   asymptotic set and the asymptotic critical values across growing
//!   radii, and probes for critical points.
//! * [`certify`] grades the evidence into a fibration certificate;
//!   [`vg`] embeds sample clouds into the associated singular variety;
//!   [`export`] writes CSV, PLY and SVG artifacts.

pub mod certify;
pub mod export;
pub mod mapspec;
pub mod milnor;
pub mod numeric;
pub mod poly;
pub mod rational;
pub mod vg;

pub use certify::{certify, decay_normalize, leading_rank, Certificate, ConclusionGrade};
pub use export::{write_cloud_csv, write_vg_csv, write_vg_ply, write_vg_svg, ExportError};
pub use mapspec::{format_spec, parse_mapping, parse_poly, ChartExpr, MappingSpec, SpecError};
pub use milnor::{
    cofactor_field, complex_jacobian, milnor_h, smoothness_probe, verify_equivalence,
    CofactorField, MilnorError, MilnorPresentation,
};
pub use numeric::{
    estimate_asymptotic_set, estimate_asymptotic_with_cloud, estimate_kinf,
    estimate_kinf_with_cloud, k0_probe, newton_on_milnor, numerical_rank,
    tangent_cone_directions, AsymptoticReport, Cluster, K0Report, NewtonParams, NumericError,
    RadiusSchedule, SampleCloud, Verdict,
};
pub use poly::{MixedPoly, PolyError, PolyMap, RealPoly, WeightVector};
pub use rational::{CRat, Rat};
pub use vg::{embed_vg, EmbedParams, VGCloud, VgError};
