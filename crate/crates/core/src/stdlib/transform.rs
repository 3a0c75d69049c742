//! Nearest-neighbour rescaling.

use crate::execution::{args, OpError};
use crate::registry::{Binding, BindingTable};
use crate::types::{Image, Value};

/// Height that keeps the aspect ratio for a new width, at least 1.
pub fn aspect_height(src_w: usize, src_h: usize, width: usize) -> usize {
    ((width as f64 * src_h as f64 / src_w as f64).round() as usize).max(1)
}

/// Output pixel `(x, y)` samples source pixel `(x * sw / w, y * sh / h)`.
pub fn rescale(img: &Image<f64>, width: usize, height: usize) -> Image<f64> {
    let (sw, sh) = img.dims();
    Image::from_fn(width, height, |x, y| *img.get(x * sw / width, y * sh / height))
}

fn dimension(inputs: &[&Value], i: usize, name: &str) -> Result<usize, OpError> {
    let v = args::integer(inputs, i)?;
    if v < 1 {
        return Err(OpError::Precondition(format!("{name} must be at least 1, got {v}")));
    }
    usize::try_from(v).map_err(|_| OpError::Precondition(format!("{name} is too large")))
}

pub(super) fn register(t: &mut BindingTable) {
    t.insert(
        "builtin:transform/rescale2d_f64",
        Binding::function(2..=3, |inputs, _| {
            let img = args::image_f64(inputs, 0)?;
            let (sw, sh) = img.dims();
            if sw == 0 || sh == 0 {
                return Err(OpError::Precondition("source image is empty".into()));
            }
            let width = dimension(inputs, 1, "width")?;
            let height = match args::optional(inputs, 2) {
                Some(_) => dimension(inputs, 2, "height")?,
                None => aspect_height(sw, sh, width),
            };
            Ok(Value::image_f64(rescale(img, width, height)))
        }),
    );
}
