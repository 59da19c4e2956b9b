use super::silhouette::BinaryImage;
use crate::error::{Error, Result};

pub const ZERNIKE_ORDER: usize = 10;
pub const ZERNIKE_LEN: usize = 35;

/// `(n, m)` with `n ≤ 10`, `0 ≤ m ≤ n`, `n − m` even, excluding `(0, 0)`.
pub fn zernike_orders() -> Vec<(usize, usize)> {
    (0..=ZERNIKE_ORDER)
        .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| (n, m)))
        .filter(|&nm| nm != (0, 0))
        .collect()
}

/// Radial polynomials `R_n^m(ρ)` for all `m ≤ n ≤ 10`, via
/// `R_n^m = ρ (R_{n−1}^{|m−1|} + R_{n−1}^{m+1}) − R_{n−2}^m`.
pub(crate) fn radial_table(rho: f64) -> [[f64; ZERNIKE_ORDER + 2]; ZERNIKE_ORDER + 1] {
    let mut r = [[0.0; ZERNIKE_ORDER + 2]; ZERNIKE_ORDER + 1];
    r[0][0] = 1.0;
    for n in 1..=ZERNIKE_ORDER {
        for m in (n % 2..=n).step_by(2) {
            let prev = r[n - 1][m.abs_diff(1)] + r[n - 1][m + 1];
            let back = if n >= 2 && m <= n - 2 { r[n - 2][m] } else { 0.0 };
            r[n][m] = rho * prev - back;
        }
    }
    r
}

/// Centroid and bounding radius of the set pixels, or `EmptyImage`.
pub(crate) fn disc_frame(img: &BinaryImage) -> Result<(f64, f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) {
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyImage);
    }
    let (cx, cy) = (sx / n as f64, sy / n as f64);
    // Bounding radius over pixel extents: centre distance plus half a pixel.
    let mut radius: f64 = 0.5;
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) {
                radius = radius.max((x as f64 - cx).hypot(y as f64 - cy) + 0.5);
            }
        }
    }
    Ok((cx, cy, radius))
}

/// `|A_{n,m}|` after mapping the shape's centroid to the origin and its
/// bounding radius to the unit circle.
pub fn zernike_magnitudes(img: &BinaryImage) -> Result<Vec<f64>> {
    let (cx, cy, radius) = disc_frame(img)?;
    let orders = zernike_orders();
    let mut re = vec![0.0; orders.len()];
    let mut im = vec![0.0; orders.len()];
    for y in 0..img.height {
        for x in 0..img.width {
            if !img.get(x, y) {
                continue;
            }
            let (dx, dy) = ((x as f64 - cx) / radius, (cy - y as f64) / radius);
            let rho = (dx * dx + dy * dy).sqrt();
            let theta = dy.atan2(dx);
            let r = radial_table(rho);
            for (i, &(n, m)) in orders.iter().enumerate() {
                let (s, c) = (m as f64 * theta).sin_cos();
                // Conjugate basis: e^{−imθ}.
                re[i] += r[n][m] * c;
                im[i] -= r[n][m] * s;
            }
        }
    }
    let pixel_area = 1.0 / (radius * radius);
    Ok(orders
        .iter()
        .enumerate()
        .map(|(i, &(n, _))| (n as f64 + 1.0) / std::f64::consts::PI * pixel_area * re[i].hypot(im[i]))
        .collect())
}
