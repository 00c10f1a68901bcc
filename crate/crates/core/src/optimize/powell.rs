//! Powell's direction-set minimization inside a box, with golden-section line
//! searches. No gradients are needed.

use crate::error::{LmError, Result};

const GOLDEN: f64 = 0.381_966_011_250_105_1;
const GROW: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowellOptions {
    /// Stop when a sweep lowers the objective by less than this fraction.
    pub ftol: f64,
    /// Line searches stop when the bracket is narrower than this, in units of
    /// the search direction.
    pub xtol: f64,
    pub max_sweeps: usize,
    /// Initial step along each coordinate, relative to `1 + |x|`.
    pub step: f64,
}

impl Default for PowellOptions {
    fn default() -> Self {
        PowellOptions {
            ftol: 1e-4,
            xtol: 1e-6,
            max_sweeps: 50,
            step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowellResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub sweeps: usize,
}

struct Objective<'f, F> {
    f: &'f mut F,
    bounds: &'f [(f64, f64)],
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Objective<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(LmError::NonFiniteObjective {
                value: v,
                point: x.to_vec(),
            });
        }
        Ok(v)
    }

    /// Feasible range of `t` for `x + t d`.
    fn span(&self, x: &[f64], d: &[f64]) -> (f64, f64) {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for ((&xi, &di), &(l, u)) in x.iter().zip(d).zip(self.bounds) {
            if di > 0.0 {
                lo = lo.max((l - xi) / di);
                hi = hi.min((u - xi) / di);
            } else if di < 0.0 {
                lo = lo.max((u - xi) / di);
                hi = hi.min((l - xi) / di);
            }
        }
        (lo.min(0.0), hi.max(0.0))
    }

    fn point(&self, x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
        x.iter()
            .zip(d)
            .zip(self.bounds)
            .map(|((a, b), &(l, u))| (a + t * b).clamp(l, u))
            .collect()
    }

    fn at(&mut self, x: &[f64], d: &[f64], t: f64) -> Result<f64> {
        let p = self.point(x, d, t);
        self.eval(&p)
    }

    /// Minimize along `d` from `x` (value `fx`); returns the best `t` and value.
    fn line(&mut self, x: &[f64], d: &[f64], fx: f64, xtol: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.span(x, d);
        if hi - lo <= 0.0 {
            return Ok((0.0, fx));
        }
        let mut best = (0.0, fx);
        let consider = |t: f64, v: f64, best: &mut (f64, f64)| {
            if v < best.1 {
                *best = (t, v);
            }
        };

        // bracket [a, c] around the best point b
        let forward = if hi > 0.0 { 1.0f64.min(hi) } else { 0.0 };
        let (mut a, mut b, mut c);
        let (mut fb, mut fc);
        let f1 = if forward > 0.0 { self.at(x, d, forward)? } else { f64::INFINITY };
        if f1 < fx {
            consider(forward, f1, &mut best);
            a = 0.0;
            b = forward;
            fb = f1;
            loop {
                c = (b + GROW * (b - a)).min(hi);
                if c <= b {
                    c = b;
                    break;
                }
                fc = self.at(x, d, c)?;
                consider(c, fc, &mut best);
                if fc >= fb {
                    break;
                }
                a = b;
                b = c;
                fb = fc;
            }
        } else {
            let backward = if lo < 0.0 { (-1.0f64).max(lo) } else { 0.0 };
            let f2 = if backward < 0.0 { self.at(x, d, backward)? } else { f64::INFINITY };
            if f2 < fx {
                consider(backward, f2, &mut best);
                a = 0.0;
                b = backward;
                fb = f2;
                loop {
                    c = (b + GROW * (b - a)).max(lo);
                    if c >= b {
                        c = b;
                        break;
                    }
                    fc = self.at(x, d, c)?;
                    consider(c, fc, &mut best);
                    if fc >= fb {
                        break;
                    }
                    a = b;
                    b = c;
                    fb = fc;
                }
            } else {
                a = backward;
                c = forward;
            }
        }
        let (mut l, mut r) = if a < c { (a, c) } else { (c, a) };

        // golden section on [l, r]
        let mut m1 = l + GOLDEN * (r - l);
        let mut m2 = r - GOLDEN * (r - l);
        let mut f1 = self.at(x, d, m1)?;
        let mut f2 = self.at(x, d, m2)?;
        consider(m1, f1, &mut best);
        consider(m2, f2, &mut best);
        while r - l > xtol {
            if f1 <= f2 {
                r = m2;
                m2 = m1;
                f2 = f1;
                m1 = l + GOLDEN * (r - l);
                f1 = self.at(x, d, m1)?;
                consider(m1, f1, &mut best);
            } else {
                l = m1;
                m1 = m2;
                f1 = f2;
                m2 = r - GOLDEN * (r - l);
                f2 = self.at(x, d, m2)?;
                consider(m2, f2, &mut best);
            }
        }
        Ok(best)
    }
}

/// Minimize `f` over the box `bounds` starting from `x0`.
///
/// The returned point is never worse than `x0`. A non-finite objective value
/// aborts the search with [`LmError::NonFiniteObjective`].
pub fn powell_minimize<F>(
    mut f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    opts: PowellOptions,
) -> Result<PowellResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    if bounds.len() != n {
        return Err(LmError::invalid("one bound pair per parameter is required"));
    }
    for (&x, &(l, u)) in x0.iter().zip(bounds) {
        if !(l <= u && x.is_finite() && l <= x && x <= u) {
            return Err(LmError::invalid(format!("start {x} outside [{l}, {u}]")));
        }
    }
    let mut obj = Objective {
        f: &mut f,
        bounds,
        evaluations: 0,
    };
    let mut x = x0.to_vec();
    let mut fx = obj.eval(&x)?;
    if n == 0 {
        return Ok(PowellResult {
            x,
            value: fx,
            evaluations: obj.evaluations,
            sweeps: 0,
        });
    }
    let mut dirs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut d = vec![0.0; n];
            d[i] = opts.step * (1.0 + x0[i].abs());
            d
        })
        .collect();

    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let start = x.clone();
        let f_start = fx;
        let (mut big, mut big_drop) = (0, 0.0);
        for (i, d) in dirs.iter().enumerate() {
            let before = fx;
            let (t, v) = obj.line(&x, d, fx, opts.xtol)?;
            if v < fx {
                x = obj.point(&x, d, t);
                fx = v;
            }
            if before - fx > big_drop {
                big_drop = before - fx;
                big = i;
            }
        }
        if 2.0 * (f_start - fx) <= opts.ftol * (f_start.abs() + fx.abs()) + 1e-20 {
            break;
        }
        // try the net displacement as a new direction
        let shift: Vec<f64> = x.iter().zip(&start).map(|(a, b)| a - b).collect();
        let (lo, hi) = obj.span(&x, &shift);
        if hi >= 1.0 && lo <= 0.0 {
            let fe = obj.at(&x, &shift, 1.0)?;
            if fe < f_start {
                let t = 2.0 * (f_start - 2.0 * fx + fe) * (f_start - fx - big_drop).powi(2)
                    - big_drop * (f_start - fe).powi(2);
                if t < 0.0 {
                    let (s, v) = obj.line(&x, &shift, fx, opts.xtol)?;
                    if v < fx {
                        x = obj.point(&x, &shift, s);
                        fx = v;
                    }
                    dirs[big] = dirs[n - 1].clone();
                    dirs[n - 1] = shift;
                }
            }
        }
    }
    Ok(PowellResult {
        x,
        value: fx,
        evaluations: obj.evaluations,
        sweeps,
    })
}
