//! Stationary supersolution u = u_smooth + u_step: box layout, parameter scaling, the flat
//! profile built from the cell solution, the percolation step and the residual certificate.

mod certificate;
mod flat;
mod layout;
mod scaling;
mod step;

pub use certificate::{compose_and_verify, sample_certificate_field, CertificateOptions, SupersolutionBundle, Verification};
pub use flat::{
    build_g_flat, build_smooth, build_u_flat, eval_g_flat, intersection_gaps, Kink, PinnedSelection, Selected, UFlat,
};
pub use layout::BoxLayout;
pub use scaling::{
    c_infinity, choose_params, f_star_at, step_c0, step_c1, step_c2, strong_intensity_for, Conclusion, ScalingInputs, ScalingParams,
};
pub use step::{build_u_step, StepFunction};
