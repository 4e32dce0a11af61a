//! Shared line-search machinery: Armijo backtracking for the gradient
//! methods and a bracketing + Brent derivative-free minimizer for Powell.

use crate::cost::Purpose;

use super::{CountingCost, StepResult};

pub(crate) struct Line<'a, 'b> {
    cost: &'a mut CountingCost<'b>,
    x: &'a [f64],
    dir: &'a [f64],
    buf: Vec<f64>,
}

impl<'a, 'b> Line<'a, 'b> {
    pub fn new(cost: &'a mut CountingCost<'b>, x: &'a [f64], dir: &'a [f64]) -> Self {
        Line { cost, x, dir, buf: vec![0.0; x.len()] }
    }

    pub fn at(&mut self, t: f64) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.dir)
            .map(|(xi, di)| xi + t * di)
            .collect()
    }

    pub fn eval(&mut self, t: f64) -> StepResult<f64> {
        for ((b, xi), di) in self.buf.iter_mut().zip(self.x).zip(self.dir) {
            *b = xi + t * di;
        }
        let point = std::mem::take(&mut self.buf);
        let v = self.cost.eval(&point, Purpose::Objective);
        self.buf = point;
        v
    }
}

const ARMIJO_C1: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_MAX_TRIES: usize = 25;

/// Backtracking Armijo search: largest t in {t0, t0/2, ...} with
/// f(x + t d) <= f0 + c1 t g.d. Returns None when no such step exists.
pub(crate) fn armijo_backtracking(
    cost: &mut CountingCost<'_>,
    x: &[f64],
    dir: &[f64],
    f0: f64,
    directional_derivative: f64,
    t0: f64,
) -> StepResult<Option<(f64, f64)>> {
    let mut line = Line::new(cost, x, dir);
    let mut t = t0;
    for _ in 0..ARMIJO_MAX_TRIES {
        let ft = line.eval(t)?;
        if ft <= f0 + ARMIJO_C1 * t * directional_derivative {
            return Ok(Some((t, ft)));
        }
        t *= ARMIJO_SHRINK;
    }
    Ok(None)
}

const GOLDEN: f64 = 1.618_033_988_749_895;
const BRACKET_GROW_LIMIT: f64 = 110.0;
const BRACKET_MAX_STEPS: usize = 50;

/// Brackets a minimum of f along the line starting from t = 0 with initial
/// step `step`, then refines it with Brent. Returns (t_min, f_min).
pub(crate) fn brent_line_min(
    cost: &mut CountingCost<'_>,
    x: &[f64],
    dir: &[f64],
    f0: f64,
    step: f64,
    tol: f64,
    max_iter: usize,
) -> StepResult<(f64, f64)> {
    let mut line = Line::new(cost, x, dir);

    // downhill bracketing (numerical-recipes style golden expansion)
    let mut ta = 0.0;
    let mut fa = f0;
    let mut tb = step;
    let mut fb = line.eval(tb)?;
    if fb > fa {
        std::mem::swap(&mut ta, &mut tb);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut tc = tb + GOLDEN * (tb - ta);
    let mut fc = line.eval(tc)?;
    let mut steps = 0;
    while fb > fc {
        if steps >= BRACKET_MAX_STEPS {
            break;
        }
        steps += 1;
        // parabolic extrapolation from (ta, tb, tc)
        let r = (tb - ta) * (fb - fc);
        let q = (tb - tc) * (fb - fa);
        let denom = 2.0 * (q - r).abs().max(1e-21) * (q - r).signum_or_one();
        let mut tu = tb - ((tb - tc) * q - (tb - ta) * r) / denom;
        let ulim = tb + BRACKET_GROW_LIMIT * (tc - tb);
        let mut fu;
        if (tb - tu) * (tu - tc) > 0.0 {
            fu = line.eval(tu)?;
            if fu < fc {
                ta = tb;
                tb = tu;
                fa = fb;
                fb = fu;
                continue;
            } else if fu > fb {
                tc = tu;
                fc = fu;
                continue;
            }
            tu = tc + GOLDEN * (tc - tb);
            fu = line.eval(tu)?;
        } else if (tc - tu) * (tu - ulim) > 0.0 {
            fu = line.eval(tu)?;
            if fu < fc {
                tb = tc;
                tc = tu;
                tu = tc + GOLDEN * (tc - tb);
                fb = fc;
                fc = fu;
                fu = line.eval(tu)?;
            }
        } else if (tu - ulim) * (ulim - tc) >= 0.0 {
            tu = ulim;
            fu = line.eval(tu)?;
        } else {
            tu = tc + GOLDEN * (tc - tb);
            fu = line.eval(tu)?;
        }
        ta = tb;
        tb = tc;
        tc = tu;
        fa = fb;
        fb = fc;
        fc = fu;
    }
    let _ = fa;

    // Brent refinement on [lo, hi] around tb
    let (mut lo, mut hi) = if ta < tc { (ta, tc) } else { (tc, ta) };
    let mut v = tb;
    let mut w = tb;
    let mut t_cur = tb;
    let mut fv = fb;
    let mut fw = fb;
    let mut f_cur = fb;
    let mut d = 0.0;
    let mut e: f64 = 0.0;
    const CGOLD: f64 = 0.381_966_011_250_105;
    const ZEPS: f64 = 1e-12;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let tol1 = tol * t_cur.abs() + ZEPS;
        let tol2 = 2.0 * tol1;
        if (t_cur - mid).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (t_cur - w) * (f_cur - fv);
            let mut q = (t_cur - v) * (f_cur - fw);
            let mut p = (t_cur - v) * q - (t_cur - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (lo - t_cur) && p < q * (hi - t_cur) {
                d = p / q;
                let u = t_cur + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(mid - t_cur);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if t_cur >= mid { lo - t_cur } else { hi - t_cur };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { t_cur + d } else { t_cur + tol1.copysign(d) };
        let fu = line.eval(u)?;
        if fu <= f_cur {
            if u >= t_cur {
                lo = t_cur;
            } else {
                hi = t_cur;
            }
            v = w;
            w = t_cur;
            t_cur = u;
            fv = fw;
            fw = f_cur;
            f_cur = fu;
        } else {
            if u < t_cur {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == t_cur {
                v = w;
                w = u;
                fv = fw;
                fw = fu;
            } else if fu <= fv || v == t_cur || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok((t_cur, f_cur))
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self == 0.0 {
            1.0
        } else {
            self.signum()
        }
    }
}
