//! Per-vertex Julia sets: backward-orbit clouds, polynomial roots, repelling
//! fixed points of loop words, filled-in sets and the structural checks that
//! rest on them.

mod checks;
mod cloud;
mod fixed_points;
pub mod geometry;
mod roots;

pub use checks::{
    check_backward_separating, check_kernel_empty, filled_set_membership, filled_set_membership_with_budget,
    nonconstancy_mask, render_filled_set, self_similarity_defect, KernelVerdict, Membership, MembershipVerdict,
    Separation, Witness, CONTACT_THRESHOLD, DEFAULT_MIN_MARGIN,
};
pub use cloud::{
    backward_orbit_cloud, backward_spread, clouds_for_all, preimage_cloud, CloudParams, PointCloud, Sampler,
};
pub use fixed_points::{loop_words, repelling_fixed_points, word_fixed_points, FixedPointSearch, RepellingPoint};
pub use roots::{aberth, root_radius, roots, Roots};
