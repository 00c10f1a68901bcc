//! Good-Turing adjusted counts and the Simple Good-Turing count-of-counts
//! smoother (Gale and Sampson).

use crate::counts::CountOfCounts;
use crate::error::{LmError, Result};

/// Critical value for switching from Turing to fitted estimates.
const SWITCH_Z: f64 = 1.65;

/// Unsmoothed `r* = (r+1) n_{r+1} / n_r`. `n0` supplies the number of unseen
/// items when `r == 0`.
pub fn gt_adjusted_count(r: u64, coc: &CountOfCounts, n0: u64) -> Result<f64> {
    let nr = if r == 0 { n0 } else { coc.get(r) };
    let next = coc.get(r + 1);
    if nr == 0 {
        return Err(LmError::UndefinedEstimate {
            r,
            reason: "n_r is zero".into(),
        });
    }
    if next == 0 {
        return Err(LmError::UndefinedEstimate {
            r,
            reason: format!("n_{} is zero", r + 1),
        });
    }
    Ok((r + 1) as f64 * next as f64 / nr as f64)
}

/// Total unsmoothed probability of all items seen `r` times in training:
/// `(r+1) n_{r+1} / N`. For `r == 0` this is `n_1 / N`.
pub fn class_mass(r: u64, coc: &CountOfCounts) -> f64 {
    if coc.total() == 0 {
        return 0.0;
    }
    (r + 1) as f64 * coc.get(r + 1) as f64 / coc.total() as f64
}

pub fn zero_count_mass(coc: &CountOfCounts) -> f64 {
    class_mass(0, coc)
}

/// Simple Good-Turing fit of a count-of-counts table.
#[derive(Debug, Clone)]
pub struct GoodTuring {
    raw: CountOfCounts,
    intercept: f64,
    slope: f64,
    first: u64,
    switch: u64,
    p0: f64,
    norm: f64,
}

impl GoodTuring {
    pub fn fit(coc: &CountOfCounts) -> Result<Self> {
        if coc.nonzero() < 2 {
            return Err(LmError::CannotSmooth(format!(
                "need at least two nonzero n_r, have {}",
                coc.nonzero()
            )));
        }
        let pts: Vec<(u64, u64)> = coc.iter().collect();
        let mut xs = Vec::with_capacity(pts.len());
        let mut ys = Vec::with_capacity(pts.len());
        for (j, &(r, n)) in pts.iter().enumerate() {
            let q = if j == 0 { 0 } else { pts[j - 1].0 };
            let t = if j + 1 < pts.len() {
                pts[j + 1].0
            } else {
                2 * r - q
            };
            xs.push((r as f64).ln());
            ys.push((2.0 * n as f64 / (t - q) as f64).ln());
        }
        let (intercept, slope) = least_squares(&xs, &ys);

        let mut gt = GoodTuring {
            raw: coc.clone(),
            intercept,
            slope,
            first: pts[0].0,
            switch: pts[pts.len() - 1].0,
            p0: zero_count_mass(coc),
            norm: 1.0,
        };
        for &(r, n) in &pts {
            let next = coc.get(r + 1);
            if next == 0 {
                gt.switch = r;
                break;
            }
            let (nr, n1) = (n as f64, next as f64);
            let rf = (r + 1) as f64;
            let x = rf * n1 / nr;
            let y = rf * gt.fitted(r + 1) / gt.fitted(r);
            let sd = (rf * rf * n1 / (nr * nr) * (1.0 + n1 / nr)).sqrt();
            if (x - y).abs() <= SWITCH_Z * sd {
                gt.switch = r;
                break;
            }
        }
        let weighted: f64 = pts.iter().map(|&(r, n)| n as f64 * gt.adjusted(r)).sum();
        gt.norm = weighted;
        Ok(gt)
    }

    /// The fitted power law `S(r)`.
    pub fn fitted(&self, r: u64) -> f64 {
        (self.intercept + self.slope * (r as f64).ln()).exp()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Smallest `r` at which fitted estimates replace Turing estimates.
    pub fn switch_point(&self) -> u64 {
        self.switch
    }

    /// Smoothed `Z_r` for `r >= 1`: the raw `n_r` up to the switch point,
    /// the scaled power law beyond it.
    pub fn smoothed_n(&self, r: u64) -> f64 {
        assert!(r >= 1, "smoothed n_r is defined for r >= 1");
        if r < self.first {
            let a = self.raw.get(self.first) as f64;
            return a * self.fitted(r) / self.fitted(self.first);
        }
        if r <= self.switch {
            let n = self.raw.get(r);
            if n > 0 {
                return n as f64;
            }
        }
        let a = self.raw.get(self.switch) as f64;
        a * self.fitted(r) / self.fitted(self.switch)
    }

    /// Adjusted count `r* = (r+1) Z_{r+1} / Z_r` for `r >= 1`.
    pub fn adjusted(&self, r: u64) -> f64 {
        (r + 1) as f64 * self.smoothed_n(r + 1) / self.smoothed_n(r)
    }

    /// Probability mass reserved for unseen items, `n_1 / N`.
    pub fn zero_mass(&self) -> f64 {
        self.p0
    }

    /// Probability of one item seen `r >= 1` times, renormalized so the seen
    /// classes share `1 - n_1/N`.
    pub fn prob(&self, r: u64) -> f64 {
        (1.0 - self.p0) * self.adjusted(r) / self.norm
    }

    /// Count corresponding to [`GoodTuring::prob`], on the scale of `N`.
    pub fn renormalized_count(&self, r: u64) -> f64 {
        self.prob(r) * self.raw.total() as f64
    }

    pub fn raw(&self) -> &CountOfCounts {
        &self.raw
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}
