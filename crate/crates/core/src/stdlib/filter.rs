//! Gaussian blur, difference of Gaussians and the fft placeholder.

use crate::execution::{args, Callable, ExecContext, OpError};
use crate::registry::{BindError, Binding, BindingTable, OpKind};
use crate::types::{Image, Payload, Value};

/// Images with fewer pixels than this are blurred on the calling thread.
const PARALLEL_MIN_PIXELS: usize = 64 * 64;

/// Normalized kernel of radius `ceil(3 sigma)`; index `r` is the centre.
pub fn gauss_kernel(sigma: f64) -> Result<Vec<f64>, OpError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(OpError::Precondition(format!("sigma must be positive, got {sigma}")));
    }
    let r = (3.0 * sigma).ceil() as i64;
    let mut w: Vec<f64> = (-r..=r)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    for x in &mut w {
        *x /= sum;
    }
    Ok(w)
}

fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Separable blur: horizontal pass, then vertical pass. Each output pixel
/// is summed in the same order whatever the thread count.
pub fn gauss_blur(img: &Image<f64>, sigma: f64, ctx: &ExecContext<'_>) -> Result<Image<f64>, OpError> {
    let kernel = gauss_kernel(sigma)?;
    let (w, h) = img.dims();
    if w == 0 || h == 0 {
        ctx.task("filter.gauss", "blur", 0).finish();
        return Ok(img.clone());
    }
    if w == 1 && h == 1 {
        // every tap reads the same pixel
        let task = ctx.task("filter.gauss", "blur", 1);
        task.step();
        task.finish();
        return Ok(img.clone());
    }
    let r = (kernel.len() / 2) as i64;
    let src = img.data();
    let parallel = w * h >= PARALLEL_MIN_PIXELS;
    let rows = |f: &(dyn Fn(usize) -> Vec<f64> + Sync)| -> Vec<Vec<f64>> {
        if parallel {
            ctx.pool().map_indexed(h, f)
        } else {
            (0..h).map(f).collect()
        }
    };

    let horizontal = rows(&|y| {
        let row = &src[y * w..(y + 1) * w];
        (0..w)
            .map(|x| {
                kernel
                    .iter()
                    .enumerate()
                    .map(|(k, wk)| wk * row[clamp_index(x as i64 + k as i64 - r, w)])
                    .sum()
            })
            .collect()
    });

    let task = ctx.task("filter.gauss", "blur", h);
    let vertical = rows(&|y| {
        let out = (0..w)
            .map(|x| {
                kernel
                    .iter()
                    .enumerate()
                    .map(|(k, wk)| wk * horizontal[clamp_index(y as i64 + k as i64 - r, h)][x])
                    .sum()
            })
            .collect();
        task.step();
        out
    });
    task.finish();
    Image::new(w, h, vertical.concat()).map_err(|e| OpError::Failed(e.to_string()))
}

fn check_container(input: &Image<f64>, out: &Value) -> Result<(), OpError> {
    let target = out.as_image_f64().ok_or_else(|| OpError::payload(2, "ImageF64", out))?;
    if target.dims() != input.dims() {
        return Err(OpError::Dimension(format!(
            "input is {}x{} but the container is {}x{}",
            input.width(),
            input.height(),
            target.width(),
            target.height()
        )));
    }
    Ok(())
}

fn dog(deps: Vec<Callable>) -> Result<Callable, BindError> {
    let [g1, g2, sub]: [Callable; 3] = deps.try_into().map_err(|d: Vec<Callable>| BindError::Invalid {
        source_uri: "builtin:filter/dog_f64".into(),
        message: format!("expected 3 dependencies, got {}", d.len()),
    })?;
    Ok(Callable::computer(move |inputs, out, ctx| {
        let img = args::image_f64(inputs, 0)?;
        check_container(img, out)?;
        let (w, h) = img.dims();
        let mut a = Value::image_f64(Image::zeros(w, h));
        g1.compute(&[inputs[0], inputs[1]], &mut a, ctx)?;
        let mut b = Value::image_f64(Image::zeros(w, h));
        g2.compute(&[inputs[0], inputs[2]], &mut b, ctx)?;
        sub.compute(&[&a, &b], out, ctx)
    }))
}

pub(super) fn register(t: &mut BindingTable) {
    t.insert(
        "builtin:filter/gauss_f64",
        Binding::computer(2..=2, |inputs, out, ctx| {
            let img = args::image_f64(inputs, 0)?;
            let sigma = args::real(inputs, 1)?;
            check_container(img, out)?;
            let blurred = gauss_blur(img, sigma, ctx)?;
            out.set_payload(Payload::ImageF64(blurred));
            Ok(())
        }),
    );
    t.insert(
        "builtin:filter/dog_f64",
        Binding::op(OpKind::Computer, 3..=3, |_, deps| dog(deps)),
    );
    t.insert(
        "builtin:filter/fft_stub",
        Binding::function(2..=4, |_, _| Err(OpError::NotImplemented("filter.fft".into()))),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::execution::{ComputePool, ProgressHub};
    use crate::types::DescriptorTable;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        for sigma in [0.5, 1.0, 2.0, 5.0] {
            let w = gauss_kernel(sigma).unwrap();
            let r = (3.0f64 * sigma).ceil() as usize;
            assert_eq!(w.len(), 2 * r + 1);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for k in 0..=r {
                assert_eq!(w[r - k], w[r + k]);
            }
        }
    }

    #[test]
    fn bad_sigma_is_rejected() {
        for s in [0.0, -1.0, f64::NAN] {
            assert!(matches!(gauss_kernel(s), Err(OpError::Precondition(_))));
        }
    }

    #[test]
    fn parallel_and_serial_agree_bitwise() {
        let img = Image::from_fn(80, 70, |x, y| ((x * 31 + y * 17) % 23) as f64);
        let hub = ProgressHub::new();
        let table = DescriptorTable::new();
        let one = ComputePool::new(1);
        let four = ComputePool::new(4);
        let a = gauss_blur(&img, 1.5, &ExecContext::new(&hub, &one, &table)).unwrap();
        let b = gauss_blur(&img, 1.5, &ExecContext::new(&hub, &four, &table)).unwrap();
        assert_eq!(a.data(), b.data());
    }
}
