//! 3D shape descriptors: spherical-harmonics energies for model queries and
//! light-field silhouettes for model and sketch queries.

mod contour;
mod harmonics;
mod lightfield;
mod normalize;
pub mod primitives;
mod silhouette;
mod zernike;

pub use contour::{fourier_contour, trace_contour, CONTOUR_SAMPLES, FOURIER_LEN};
pub use harmonics::{
    real_harmonics, sh_descriptor, sh_energies, shell_samples, voxelize, DensityGrid, VoxelGrid,
    ANGULAR, MAX_DEGREE, SHELLS, SH_LEN, SMOOTHING_SIGMA, VOXEL_GRID,
};
pub use lightfield::{
    lightfield_descriptor, lightfield_distance, otsu_threshold, sketch_distance, sketch_silhouette,
    sketch_to_lightfield_query, view_descriptor, view_distance, LightFieldDescriptor, VIEW_DESCRIPTOR_LEN,
};
pub use normalize::{normalize_mesh, NormalizedMesh};
pub use silhouette::{
    image_basis, lightfield_projections, render_silhouette, rotation_group, view_directions, BinaryImage,
    VIEWS, VIEW_SIZE,
};
pub use zernike::{zernike_magnitudes, zernike_orders, ZERNIKE_LEN, ZERNIKE_ORDER};
