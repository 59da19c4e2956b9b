use crate::features::l2_normalize;

pub const SHINGLE_WIDTH: usize = 30;
pub const SHINGLE_HOP: usize = 10;

/// Concatenates `width` consecutive frames every `hop` frames into unit vectors.
/// Fewer than `width` frames yields no shingles.
pub fn shingle<F: AsRef<[f64]>>(frames: &[F], width: usize, hop: usize) -> Vec<Vec<f64>> {
    if width == 0 || hop == 0 || frames.len() < width {
        return Vec::new();
    }
    (0..=frames.len() - width)
        .step_by(hop)
        .map(|start| {
            let mut v: Vec<f64> = frames[start..start + width]
                .iter()
                .flat_map(|f| f.as_ref().iter().copied())
                .collect();
            l2_normalize(&mut v);
            v
        })
        .collect()
}
