//! Derived media served for result tiles.

use polyseek::features::shape::{normalize_mesh, render_silhouette, view_directions};
use polyseek::media::{encode_png, encode_wav, load_audio, load_image, load_mesh, load_video_manifest, MediaType, RasterImage};
use polyseek::store::Store;
use polyseek::{Error, Result};

/// Longest side of image, keyframe and mesh previews.
pub const THUMBNAIL_SIDE: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preview {
    pub content_type: &'static str,
    pub bytes: Vec<u8>,
}

/// Scales `img` so its longer side is exactly [`THUMBNAIL_SIDE`].
pub fn thumbnail(img: &RasterImage) -> RasterImage {
    let (w, h) = (img.width(), img.height());
    let scaled = |a: usize, b: usize| ((a * THUMBNAIL_SIDE) as f64 / b as f64).round().max(1.0) as usize;
    let (tw, th) = if w >= h { (THUMBNAIL_SIDE, scaled(h, w)) } else { (scaled(w, h), THUMBNAIL_SIDE) };
    img.resize(tw, th)
}

fn png(img: &RasterImage) -> Preview {
    Preview { content_type: "image/png", bytes: encode_png(&thumbnail(img)) }
}

/// Builds the preview of a segment from its source file.
pub fn segment_preview(store: &Store, segment_id: &str) -> Result<Preview> {
    let catalog = store.catalog();
    let segment = catalog.segment(segment_id).ok_or_else(|| Error::UnknownSegment(segment_id.to_string()))?;
    let object = catalog.object(&segment.object_id).ok_or_else(|| Error::UnknownId(segment.object_id.clone()))?;
    match object.media_type {
        MediaType::Image => Ok(png(&load_image(&object.path)?)),
        MediaType::Video => {
            let video = load_video_manifest(&object.path)?;
            let keyframe = video.frame(((segment.start + segment.end) / 2) as usize)?;
            Ok(png(&keyframe))
        }
        MediaType::Audio => {
            let audio = load_audio(&object.path)?;
            let end = (segment.end as usize).min(audio.len());
            let start = (segment.start as usize).min(end);
            Ok(Preview { content_type: "audio/wav", bytes: encode_wav(&audio.slice(start, end)) })
        }
        MediaType::Model3d => {
            let nm = normalize_mesh(&load_mesh(&object.path)?)?;
            let view = render_silhouette(&nm.mesh, view_directions()[0]);
            let img = RasterImage::from_fn(view.width, view.height, |x, y| if view.get(x, y) { [0; 3] } else { [255; 3] });
            Ok(png(&img))
        }
    }
}
