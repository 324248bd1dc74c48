use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{FeatureError, FeatureMatrix};

pub const MAX_CHANNELS: usize = 3;

/// An `H x W x C` tensor with values in `[0, 1]`, stored row-major as `(h, w, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub data: Vec<f32>,
    pub channel_names: Vec<String>,
    /// Per-channel `(min, max)` of the resized values before scaling.
    pub scaling: Vec<(f64, f64)>,
}

impl FeatureMap {
    pub fn new(
        height: usize,
        width: usize,
        channel_names: Vec<String>,
        data: Vec<f32>,
    ) -> Result<Self, FeatureError> {
        let channels = channel_names.len();
        if channels == 0 || channels > MAX_CHANNELS {
            return Err(FeatureError::TooManyChannels(channels));
        }
        if height == 0 || width == 0 {
            return Err(FeatureError::InvalidParams {
                field: "size",
                reason: "height and width must be positive",
            });
        }
        if data.len() != height * width * channels {
            return Err(FeatureError::InvalidParams {
                field: "data",
                reason: "length must equal height * width * channels",
            });
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
            scaling: alloc::vec![(0.0, 1.0); channels],
            channel_names,
        })
    }

    #[inline]
    pub fn index(&self, h: usize, w: usize, c: usize) -> usize {
        (h * self.width + w) * self.channels + c
    }

    #[inline]
    pub fn get(&self, h: usize, w: usize, c: usize) -> f32 {
        self.data[self.index(h, w, c)]
    }

    #[inline]
    pub fn set(&mut self, h: usize, w: usize, c: usize, v: f32) {
        let i = self.index(h, w, c);
        self.data[i] = v;
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    /// One channel as `f64`, row-major `H x W`.
    pub fn channel(&self, c: usize) -> Vec<f64> {
        (0..self.height * self.width)
            .map(|i| self.data[i * self.channels + c] as f64)
            .collect()
    }

    /// Min-max scale `values` into channel `c` (a constant channel becomes 0.5).
    pub fn set_channel_scaled(&mut self, c: usize, values: &[f64]) {
        let (lo, hi) = scale_into(values, |i, v| {
            let idx = i * self.channels + c;
            self.data[idx] = v;
        });
        self.scaling[c] = (lo, hi);
    }
}

fn scale_into(values: &[f64], mut put: impl FnMut(usize, f32)) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    for (i, &v) in values.iter().enumerate() {
        let s = if range > 0.0 {
            ((v - lo) / range).clamp(0.0, 1.0)
        } else {
            0.5
        };
        put(i, s as f32);
    }
    (lo, hi)
}

/// Bilinear resize of a `rows x cols` row-major grid to `h x w` with corners aligned.
pub fn resize_bilinear(src: &[f64], rows: usize, cols: usize, h: usize, w: usize) -> Vec<f64> {
    assert_eq!(src.len(), rows * cols, "resize input size mismatch");
    let coord = |i: usize, out: usize, inp: usize| -> (usize, usize, f64) {
        if out <= 1 || inp <= 1 {
            return (0, 0, 0.0);
        }
        let x = i as f64 * (inp - 1) as f64 / (out - 1) as f64;
        let i0 = (x as usize).min(inp - 1);
        let i1 = (i0 + 1).min(inp - 1);
        (i0, i1, x - i0 as f64)
    };
    let ys: Vec<_> = (0..h).map(|i| coord(i, h, rows)).collect();
    let xs: Vec<_> = (0..w).map(|j| coord(j, w, cols)).collect();
    let mut out = Vec::with_capacity(h * w);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let a = src[y0 * cols + x0];
            let b = src[y0 * cols + x1];
            let c = src[y1 * cols + x0];
            let d = src[y1 * cols + x1];
            let top = if fx == 0.0 { a } else { a + (b - a) * fx };
            let bot = if fx == 0.0 { c } else { c + (d - c) * fx };
            out.push(if fy == 0.0 { top } else { top + (bot - top) * fy });
        }
    }
    out
}

/// Resize each matrix to `h x w`, min-max scale it and stack the results as channels.
pub fn assemble_map(channels: &[FeatureMatrix], h: usize, w: usize) -> Result<FeatureMap, FeatureError> {
    if channels.is_empty() || channels.len() > MAX_CHANNELS {
        return Err(FeatureError::TooManyChannels(channels.len()));
    }
    let names = channels.iter().map(|m| m.kind.name().to_string()).collect();
    let mut map = FeatureMap::new(h, w, names, alloc::vec![0.0; h * w * channels.len()])?;
    for (c, m) in channels.iter().enumerate() {
        if m.rows == 0 || m.cols == 0 {
            return Err(FeatureError::InvalidParams {
                field: "channels",
                reason: "feature matrix is empty",
            });
        }
        let resized = resize_bilinear(&m.values, m.rows, m.cols, h, w);
        map.set_channel_scaled(c, &resized);
    }
    Ok(map)
}
