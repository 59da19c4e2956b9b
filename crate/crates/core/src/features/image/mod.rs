//! Image and video-keyframe descriptors. Sketches go through the same extractors.

mod bow;
mod color;
mod edge;
mod hog;
mod surf;

pub use bow::{bow_histogram, nearest_centroid, train_codebook, Codebook, KMEANS_MAX_ITERATIONS};
pub use color::{average_color_grid, cell_mean_rgb, srgb_to_lab, GRID};
pub use edge::{classify_block, edge_histogram, EdgeType, EDGE_THRESHOLD};
pub use hog::{hog_cell_histograms, hog_descriptor, hog_gradients, HOG_LEN};
pub use surf::{detect_keypoints, detect_local_descriptors, Keypoint, SURF_THRESHOLD};

/// `[start, end)` of the `i`-th of `n` near-equal partitions of `len`, never empty.
pub(crate) fn partition(len: usize, n: usize, i: usize) -> (usize, usize) {
    let start = (i * len / n).min(len - 1);
    let end = ((i + 1) * len / n).max(start + 1).min(len);
    (start, end)
}
