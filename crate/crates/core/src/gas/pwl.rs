use alloc::vec::Vec;

/// Uniform breakpoints of `x|x|` over `[−gf_max, gf_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlGrid {
    pub breakpoints: Vec<f64>,
    pub images: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum PwlError {
    #[error("flow bound must be finite and positive, got {0}")]
    FlowBound(f64),
    #[error("at least one segment is required")]
    NoSegments,
}

fn signed_square(x: f64) -> f64 {
    x * x.abs()
}

pub fn make_pwl_grid(gf_max: f64, seg: usize) -> Result<PwlGrid, PwlError> {
    if !(gf_max.is_finite() && gf_max > 0.0) {
        return Err(PwlError::FlowBound(gf_max));
    }
    if seg == 0 {
        return Err(PwlError::NoSegments);
    }
    let step = 2.0 * gf_max / seg as f64;
    let breakpoints: Vec<f64> = (0..=seg)
        .map(|k| if k == seg { gf_max } else { -gf_max + k as f64 * step })
        .collect();
    let images = breakpoints.iter().map(|&b| signed_square(b)).collect();
    Ok(PwlGrid { breakpoints, images })
}

impl PwlGrid {
    pub fn segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn gf_max(&self) -> f64 {
        self.breakpoints[self.segments()]
    }

    /// Flow and image for segment fills `δ`.
    pub fn evaluate(&self, fill: &[f64]) -> (f64, f64) {
        let mut x = self.breakpoints[0];
        let mut y = self.images[0];
        for (k, d) in fill.iter().enumerate() {
            x += d * (self.breakpoints[k + 1] - self.breakpoints[k]);
            y += d * (self.images[k + 1] - self.images[k]);
        }
        (x, y)
    }

    /// Image of the interpolant at flow `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        let k = b.partition_point(|&z| z <= x).clamp(1, b.len() - 1);
        let s = (x - b[k - 1]) / (b[k] - b[k - 1]);
        self.images[k - 1] + s * (self.images[k] - self.images[k - 1])
    }

    /// Flow at which the interpolant reaches image `y` (the interpolant is increasing).
    pub fn invert(&self, y: f64) -> f64 {
        let f = &self.images;
        let k = f.partition_point(|&z| z <= y).clamp(1, f.len() - 1);
        let s = (y - f[k - 1]) / (f[k] - f[k - 1]);
        self.breakpoints[k - 1] + s * (self.breakpoints[k] - self.breakpoints[k - 1])
    }

    /// Largest |invert(y) − sign(y)·√|y|| over the image range.
    ///
    /// Per segment the gap is quadratic in the analytic root on each side of
    /// zero, so its extremes sit at a stationary point or an endpoint.
    pub fn max_flow_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.segments() {
            let (a, b) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let slope = (self.images[k + 1] - self.images[k]) / (b - a);
            // x_pwl(y) = a + (y − f(a)) / slope; analytic root r = ±√|y|.
            let gap = |r: f64| (a + (signed_square(r) - signed_square(a)) / slope - r).abs();
            let mut candidates = alloc::vec![a, b];
            for r in [slope / 2.0, -slope / 2.0] {
                if r > a && r < b {
                    candidates.push(r);
                }
            }
            if a < 0.0 && b > 0.0 {
                candidates.push(0.0);
            }
            for r in candidates {
                worst = worst.max(gap(r));
            }
        }
        worst
    }
}
