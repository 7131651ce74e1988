use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::rule::gk15;
use super::{unit_sphere_area, CompensatedSum, Method, QuadratureResult};
use crate::error::{Error, Result};

/// Settings for the globally adaptive 1-D integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Function-evaluation budget.
    pub max_evals: u64,
    pub max_depth: u32,
    /// Ratio of consecutive graded cells toward a singular point.
    pub grading_ratio: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 0.0, max_evals: 2_000_000, max_depth: 60, grading_ratio: 0.25 }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rel_tol: tol, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if !(self.rel_tol >= 0.0 && self.abs_tol >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be non-negative".into()));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grading ratio must lie in (0,1), got {}",
                self.grading_ratio
            )));
        }
        Ok(())
    }
}

type Integrand<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

#[derive(Debug, Clone, Copy)]
struct Tail {
    anchor: f64,
    inner: f64,
    last: f64,
    prev: Option<f64>,
    prev_ratio: Option<f64>,
}

impl Tail {
    /// Geometric extrapolation `c r / (1 - r)` of the cells left between
    /// `anchor` and `inner`.
    fn estimate(&self) -> (f64, f64) {
        let Some(prev) = self.prev else {
            return (0.0, f64::INFINITY);
        };
        if prev == 0.0 {
            return if self.last == 0.0 { (0.0, 0.0) } else { (0.0, f64::INFINITY) };
        }
        let r = self.last / prev;
        if !r.is_finite() {
            (0.0, f64::INFINITY)
        } else if (0.0..1.0).contains(&r) {
            let v = self.last * r / (1.0 - r);
            // ratio drift measures how far the cells are from geometric
            let drift = match self.prev_ratio {
                Some(q) if q.is_finite() => ((r - q).abs() / (1.0 - r)).clamp(1e-2, 1.0),
                _ => 1.0,
            };
            (v, v.abs() * drift)
        } else if r >= 1.0 {
            (0.0, f64::INFINITY)
        } else {
            (0.0, self.last.abs() + prev.abs())
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Plain { depth: u32 },
    Tail(Tail),
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    kind: Kind,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

struct Engine<'a> {
    pieces: Vec<Integrand<'a>>,
    heap: BinaryHeap<Cell>,
    frozen: CompensatedSum,
    frozen_err: f64,
    evals: u64,
    opts: QuadOptions,
    depth_hits: usize,
    stuck_tails: usize,
    run_value: f64,
    run_err: f64,
    inf_cells: usize,
}

impl<'a> Engine<'a> {
    fn new(opts: QuadOptions) -> Self {
        Self {
            pieces: Vec::new(),
            heap: BinaryHeap::new(),
            frozen: CompensatedSum::default(),
            frozen_err: 0.0,
            evals: 0,
            opts,
            depth_hits: 0,
            stuck_tails: 0,
            run_value: 0.0,
            run_err: 0.0,
            inf_cells: 0,
        }
    }

    fn push(&mut self, cell: Cell) {
        self.run_value += cell.value;
        if cell.err.is_finite() {
            self.run_err += cell.err;
        } else {
            self.inf_cells += 1;
        }
        self.heap.push(cell);
    }

    fn pop(&mut self) -> Option<Cell> {
        let cell = self.heap.pop()?;
        self.run_value -= cell.value;
        if cell.err.is_finite() {
            self.run_err -= cell.err;
        } else {
            self.inf_cells -= 1;
        }
        Some(cell)
    }

    fn plain(&mut self, piece: usize, a: f64, b: f64, depth: u32) -> Cell {
        let (value, err) = gk15(&*self.pieces[piece], a, b);
        self.evals += 15;
        let err = if value.is_finite() { err } else { f64::INFINITY };
        Cell { piece, a, b, value, err, kind: Kind::Plain { depth } }
    }

    fn tail_cell(piece: usize, tail: Tail) -> Cell {
        let (value, err) = tail.estimate();
        let (a, b) = if tail.anchor < tail.inner { (tail.anchor, tail.inner) } else { (tail.inner, tail.anchor) };
        Cell { piece, a, b, value, err, kind: Kind::Tail(tail) }
    }

    /// Adds `[a, b]` of `piece`, graded toward the flagged endpoints.
    fn add_segment(&mut self, piece: usize, a: f64, b: f64, sing_a: bool, sing_b: bool) {
        if !(b > a) {
            return;
        }
        match (sing_a, sing_b) {
            (false, false) => {
                let m = 0.5 * (a + b);
                let c1 = self.plain(piece, a, m, 1);
                let c2 = self.plain(piece, m, b, 1);
                self.push(c1);
                self.push(c2);
            }
            (true, false) => self.add_graded(piece, a, b),
            (false, true) => self.add_graded(piece, b, a),
            (true, true) => {
                let m = 0.5 * (a + b);
                self.add_graded(piece, a, m);
                self.add_graded(piece, b, m);
            }
        }
    }

    fn add_graded(&mut self, piece: usize, anchor: f64, far: f64) {
        let mut tail = Tail { anchor, inner: far, last: 0.0, prev: None, prev_ratio: None };
        let mut first = true;
        for _ in 0..3 {
            match self.extend(piece, tail, first) {
                Some(t) => tail = t,
                None => break,
            }
            first = false;
        }
        self.push(Self::tail_cell(piece, tail));
    }

    /// Peels one graded cell off the tail; `None` when the grading can no
    /// longer be refined in floating point.
    fn extend(&mut self, piece: usize, mut tail: Tail, first: bool) -> Option<Tail> {
        let nb = tail.anchor + (tail.inner - tail.anchor) * self.opts.grading_ratio;
        if nb == tail.anchor || nb == tail.inner {
            return None;
        }
        let (a, b) = if nb < tail.inner { (nb, tail.inner) } else { (tail.inner, nb) };
        let cell = self.plain(piece, a, b, 0);
        if first {
            tail.prev = None;
        } else {
            tail.prev_ratio = tail.prev.map(|p| tail.last / p);
            tail.prev = Some(tail.last);
        }
        tail.last = cell.value;
        tail.inner = nb;
        self.push(cell);
        Some(tail)
    }

    fn totals(&self) -> (f64, f64) {
        let mut v = self.frozen;
        let mut e = self.frozen_err;
        for c in self.heap.iter() {
            v.add(c.value);
            e += c.err;
        }
        (v.total(), e)
    }

    fn resync(&mut self) {
        let mut v = CompensatedSum::default();
        let mut e = 0.0;
        for c in self.heap.iter() {
            v.add(c.value);
            if c.err.is_finite() {
                e += c.err;
            }
        }
        self.run_value = v.total();
        self.run_err = e;
    }

    fn run(mut self, method: Method) -> QuadratureResult {
        let (mut value, mut err) = self.totals();
        let mut iter = 0u64;
        loop {
            let target = self.opts.abs_tol.max(self.opts.rel_tol * value.abs());
            if err <= target || self.evals >= self.opts.max_evals {
                break;
            }
            let Some(cell) = self.pop() else { break };
            match cell.kind {
                Kind::Plain { depth } => {
                    let m = 0.5 * (cell.a + cell.b);
                    if depth >= self.opts.max_depth || !(m > cell.a && m < cell.b) {
                        self.depth_hits += 1;
                        self.freeze(cell);
                    } else {
                        let c1 = self.plain(cell.piece, cell.a, m, depth + 1);
                        let c2 = self.plain(cell.piece, m, cell.b, depth + 1);
                        self.push(c1);
                        self.push(c2);
                    }
                }
                Kind::Tail(tail) => match self.extend(cell.piece, tail, false) {
                    Some(t) => self.push(Self::tail_cell(cell.piece, t)),
                    None => {
                        if cell.err > 0.0 {
                            self.stuck_tails += 1;
                        }
                        self.freeze(cell);
                    }
                },
            }
            iter += 1;
            if iter % 256 == 0 {
                (value, err) = self.totals();
                self.resync();
            } else {
                value = self.frozen.total() + self.run_value;
                err = if self.inf_cells > 0 { f64::INFINITY } else { self.frozen_err + self.run_err.max(0.0) };
            }
        }
        let (value, mut err) = self.totals();
        let mut warnings = Vec::new();
        let target = self.opts.abs_tol.max(self.opts.rel_tol * value.abs());
        if self.depth_hits > 0 {
            warnings.push(format!("{} cells hit the subdivision limit", self.depth_hits));
        }
        if self.stuck_tails > 0 && err > target {
            warnings.push(format!("{} singular tails could not be resolved", self.stuck_tails));
        }
        if !value.is_finite() {
            warnings.push("integrand produced non-finite values".into());
        }
        if err > target {
            warnings.push(format!("not converged: error estimate {err:.3e} exceeds target {target:.3e}"));
            err *= 10.0;
        }
        QuadratureResult {
            value,
            error_estimate: err,
            method,
            evaluations: self.evals.max(1),
            seed: None,
            warnings,
        }
    }

    fn freeze(&mut self, cell: Cell) {
        self.frozen.add(cell.value);
        self.frozen_err += cell.err;
    }
}

/// Integrates `f` over `(a, b)`, grading the mesh geometrically toward each
/// point in `singular`. Either bound may be infinite. Singular points outside
/// `[a, b]` are ignored.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, singular: &[f64], opts: &QuadOptions) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    opts.check()?;
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidParameter("integration bounds must not be NaN".into()));
    }
    if a > b {
        return Err(Error::InvalidParameter(format!("lower bound {a} exceeds upper bound {b}")));
    }
    if a == b {
        return Ok(QuadratureResult { evaluations: 1, method: Method::Adaptive1d, ..QuadratureResult::exact(0.0) });
    }
    let mut sing: Vec<f64> = singular
        .iter()
        .copied()
        .filter(|s| s.is_finite() && *s >= a && *s <= b)
        .collect();
    sing.sort_by(f64::total_cmp);
    sing.dedup();
    let is_sing = |x: f64| sing.binary_search_by(|s| s.total_cmp(&x)).is_ok();

    let mut pts = sing.clone();
    if a.is_finite() {
        pts.push(a);
    }
    if b.is_finite() {
        pts.push(b);
    }
    if pts.is_empty() {
        pts.push(0.0);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let scale = if hi > lo { hi - lo } else { hi.abs().max(1.0) };

    let f = &f;
    let mut eng = Engine::new(*opts);
    eng.pieces.push(Box::new(move |x| f(x)));
    for w in pts.windows(2) {
        eng.add_segment(0, w[0], w[1], is_sing(w[0]), is_sing(w[1]));
    }
    if b == f64::INFINITY {
        // x = hi + L (1 - t) / t
        let idx = eng.pieces.len();
        eng.pieces.push(Box::new(move |t: f64| {
            let x = hi + scale * (1.0 - t) / t;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (t * t)
            }
        }));
        eng.add_segment(idx, 0.0, 1.0, true, is_sing(hi));
    }
    if a == f64::NEG_INFINITY {
        let idx = eng.pieces.len();
        eng.pieces.push(Box::new(move |t: f64| {
            let x = lo - scale * (1.0 - t) / t;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (t * t)
            }
        }));
        eng.add_segment(idx, 0.0, 1.0, true, is_sing(lo));
    }
    Ok(eng.run(Method::Adaptive1d))
}

/// [`integrate_1d`] with default options and relative tolerance `tol`.
pub fn integrate_1d_singular<F>(f: F, a: f64, b: f64, singular: &[f64], tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    integrate_1d(f, a, b, singular, &QuadOptions::with_tol(tol))
}

/// `|S^{d-1}| * int_0^R g(rho) rho^(d-1) drho` for a radial integrand `g(|x|)`.
pub fn integrate_radial<G>(g: G, d: usize, radius: f64, breaks: &[f64], opts: &QuadOptions) -> Result<QuadratureResult>
where
    G: Fn(f64) -> f64,
{
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let mut sing = vec![0.0];
    sing.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < radius));
    let k = d as i32 - 1;
    let r = integrate_1d(
        |rho| {
            let v = g(rho);
            if v == 0.0 {
                0.0
            } else {
                v * rho.powi(k)
            }
        },
        0.0,
        radius,
        &sing,
        opts,
    )?;
    let mut out = r.scale(unit_sphere_area(d));
    out.method = Method::PolarRadial;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(r: &QuadratureResult, exact: f64, rel: f64) {
        assert!(
            (r.value - exact).abs() <= rel * exact.abs().max(1e-300),
            "{} vs {exact} (err {})",
            r.value,
            r.error_estimate
        );
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
    }

    #[test]
    fn inverse_sqrt() {
        let r = integrate_1d_singular(|x: f64| x.powf(-0.5), 0.0, 1.0, &[0.0], 1e-10).unwrap();
        close(&r, 2.0, 1e-9);
        assert!(r.error_estimate <= 1e-9);
    }

    #[test]
    fn log_integral() {
        let r = integrate_1d_singular(|x: f64| -x.ln(), 0.0, 1.0, &[0.0], 1e-10).unwrap();
        close(&r, 1.0, 1e-9);
    }

    #[test]
    fn power_log_integral() {
        let f = |x: f64| x.powf(-0.75) * (-x.ln()).powf(1.5);
        let r = integrate_1d_singular(f, 0.0, 1.0, &[0.0], 1e-10).unwrap();
        close(&r, libm::tgamma(2.5) * 32.0, 1e-8);
    }

    #[test]
    fn interior_singularity_and_infinite_range() {
        // interior singularities are limited by the spacing of doubles near 0.3
        let r = integrate_1d_singular(|x: f64| (x - 0.3).abs().powf(-0.5), 0.0, 1.0, &[0.3], 1e-8).unwrap();
        close(&r, 2.0 * (0.3f64.sqrt() + 0.7f64.sqrt()), 1e-8);
        let r = integrate_1d_singular(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &[], 1e-10).unwrap();
        close(&r, PI.sqrt(), 1e-9);
        let r = integrate_1d_singular(|x: f64| 1.0 / (x * x), 1.0, f64::INFINITY, &[], 1e-10).unwrap();
        close(&r, 1.0, 1e-9);
    }

    #[test]
    fn divergent_integral_is_flagged() {
        let r = integrate_1d(|x: f64| 1.0 / x, 0.0, 1.0, &[0.0], &QuadOptions { max_evals: 200_000, ..Default::default() }).unwrap();
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn radial_examples() {
        let o = QuadOptions::default();
        close(&integrate_radial(|_| 1.0, 2, 1.0, &[], &o).unwrap(), PI, 1e-12);
        close(&integrate_radial(|_| 1.0, 3, 1.0, &[], &o).unwrap(), 4.0 * PI / 3.0, 1e-12);
        close(&integrate_radial(|r: f64| 1.0 / r, 2, 1.0, &[], &o).unwrap(), 2.0 * PI, 1e-12);
    }

    #[test]
    fn zero_integrand() {
        let r = integrate_1d_singular(|_| 0.0, 0.0, 1.0, &[0.0], 1e-10).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.error_estimate, 0.0);
        assert!(r.evaluations > 0);
    }
}
