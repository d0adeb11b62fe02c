//! Numerical kernels: bracketed root finding, bracket expansion, fixed-grid
//! quadrature, a classical RK4 sweep and a Sturm-sequence eigenvalue
//! extractor for symmetric tridiagonal matrices.
//!
//! Every kernel is deterministic and allocation-light. No adaptive step
//! control is used anywhere, so results are reproducible bit-for-bit.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("bracket [{lo}, {hi}] does not straddle a sign change (f = {f_lo}, {f_hi})")]
    InvalidBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence after {iterations} iterations; final interval [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },
    #[error("no sign change found before reaching {limit}")]
    NotFound { limit: f64 },
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("ODE state overflowed at x = {x}")]
    Overflow { x: f64, last: Vec<f64> },
    #[error("invalid argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Stopping rule shared by the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_x: f64,
    pub abs_f: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_x: f64, abs_f: f64, max_iter: usize) -> Result<Self> {
        if !(abs_x > 0.0 && abs_f > 0.0 && abs_x.is_finite() && abs_f.is_finite()) || max_iter < 1
        {
            return Err(NumericsError::Argument(format!(
                "tolerances must be positive and max_iter >= 1 (got {abs_x}, {abs_f}, {max_iter})"
            )));
        }
        Ok(Self { abs_x, abs_f, max_iter })
    }

    /// Interval-only tolerance; the residual test is effectively disabled.
    pub fn abs(abs_x: f64) -> Self {
        Self { abs_x, abs_f: f64::MIN_POSITIVE, max_iter: 400 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::abs(1e-12)
    }
}

/// An interval with cached endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let f_lo = f(lo);
        let f_hi = f(hi);
        if !f_lo.is_finite() {
            return Err(NumericsError::NonFinite { x: lo });
        }
        if !f_hi.is_finite() {
            return Err(NumericsError::NonFinite { x: hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    pub fn straddles(&self) -> bool {
        self.f_lo == 0.0 || self.f_hi == 0.0 || (self.f_lo < 0.0) != (self.f_hi < 0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection on a sign-changing bracket.
///
/// Terminates when the interval is narrower than `tol.abs_x`, when
/// `|f(mid)| < tol.abs_f`, or when the midpoint can no longer be split in
/// floating point. Hitting `tol.max_iter` first is an error.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: Tolerance) -> Result<f64> {
    if !bracket.straddles() {
        return Err(NumericsError::InvalidBracket {
            lo: bracket.lo,
            hi: bracket.hi,
            f_lo: bracket.f_lo,
            f_hi: bracket.f_hi,
        });
    }
    if bracket.f_lo == 0.0 {
        return Ok(bracket.lo);
    }
    if bracket.f_hi == 0.0 {
        return Ok(bracket.hi);
    }
    let lo_negative = bracket.f_lo < 0.0;
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    for _ in 0..tol.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol.abs_x || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(NumericsError::NonFinite { x: mid });
        }
        if fm == 0.0 || fm.abs() < tol.abs_f {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol.abs_x {
        return Ok(lo + 0.5 * (hi - lo));
    }
    Err(NumericsError::NoConvergence { iterations: tol.max_iter, lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

/// Geometric bracket search starting at `seed`.
///
/// The probe offset from the seed starts at `max(|seed|, 1)` and is
/// multiplied by `growth` until `f` changes sign or the probe passes
/// `limit` (an absolute abscissa bound in the search direction).
pub fn expand_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    seed: f64,
    direction: Direction,
    growth: f64,
    limit: f64,
) -> Result<Bracket> {
    if !(growth > 1.0) {
        return Err(NumericsError::Argument(format!("growth must exceed 1 (got {growth})")));
    }
    let f_seed = f(seed);
    if !f_seed.is_finite() {
        return Err(NumericsError::NonFinite { x: seed });
    }
    let sign = match direction {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    let past_limit = |x: f64| match direction {
        Direction::Up => x > limit,
        Direction::Down => x < limit,
    };
    let mut step = seed.abs().max(1.0);
    let (mut prev, mut f_prev) = (seed, f_seed);
    loop {
        let mut probe = seed + sign * step;
        let last = past_limit(probe);
        if last {
            probe = limit;
        }
        let fp = f(probe);
        if !fp.is_finite() {
            return Err(NumericsError::NonFinite { x: probe });
        }
        if fp == 0.0 || (fp < 0.0) != (f_prev < 0.0) {
            let (lo, hi, f_lo, f_hi) = if prev < probe {
                (prev, probe, f_prev, fp)
            } else {
                (probe, prev, fp, f_prev)
            };
            return Ok(Bracket { lo, hi, f_lo, f_hi });
        }
        if last || probe == prev {
            return Err(NumericsError::NotFound { limit });
        }
        prev = probe;
        f_prev = fp;
        step *= growth;
    }
}

/// Composite Simpson rule on `panels` equal panels (`panels` even, ≥ 2).
pub fn integrate_simpson<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, panels: usize) -> Result<f64> {
    if panels < 2 || panels % 2 != 0 {
        return Err(NumericsError::Argument(format!(
            "Simpson needs an even panel count >= 2 (got {panels})"
        )));
    }
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let v = g(a + h * i as f64);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    let sum = g(a) + g(b) + 4.0 * odd + 2.0 * even;
    let value = sum * h / 3.0;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(NumericsError::NonFinite { x: f64::NAN })
    }
}

/// Composite trapezoid rule; kept for comparison with the Simpson default.
pub fn integrate_trapezoid<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, panels: usize) -> Result<f64> {
    if panels < 1 {
        return Err(NumericsError::Argument("trapezoid needs at least one panel".into()));
    }
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels).map(|i| g(a + h * i as f64)).sum();
    let value = h * (0.5 * (g(a) + g(b)) + inner);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(NumericsError::NonFinite { x: f64::NAN })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    #[default]
    Simpson,
    Trapezoid,
}

impl QuadratureRule {
    pub fn integrate<G: FnMut(f64) -> f64>(self, g: G, a: f64, b: f64, panels: usize) -> Result<f64> {
        match self {
            QuadratureRule::Simpson => integrate_simpson(g, a, b, panels),
            QuadratureRule::Trapezoid => integrate_trapezoid(g, a, b, panels),
        }
    }
}

/// Fixed-step classical RK4 from `a` to `b`.
///
/// `observer` is called with the initial point and then once per accepted
/// step. A non-finite state aborts the sweep with [`NumericsError::Overflow`]
/// carrying the abscissa and the last finite state.
pub fn rk4_sweep<const N: usize, D, O>(
    mut deriv: D,
    state0: [f64; N],
    a: f64,
    b: f64,
    steps: usize,
    mut observer: O,
) -> Result<[f64; N]>
where
    D: FnMut(f64, &[f64; N]) -> [f64; N],
    O: FnMut(f64, &[f64; N]),
{
    if steps < 1 {
        return Err(NumericsError::Argument("rk4_sweep needs at least one step".into()));
    }
    let h = (b - a) / steps as f64;
    let mut y = state0;
    observer(a, &y);
    for i in 0..steps {
        let x = a + h * i as f64;
        let k1 = deriv(x, &y);
        let k2 = deriv(x + 0.5 * h, &axpy(&y, 0.5 * h, &k1));
        let k3 = deriv(x + 0.5 * h, &axpy(&y, 0.5 * h, &k2));
        let k4 = deriv(x + h, &axpy(&y, h, &k3));
        let mut next = y;
        for j in 0..N {
            next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let x_next = if i + 1 == steps { b } else { a + h * (i + 1) as f64 };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Overflow { x: x_next, last: y.to_vec() });
        }
        y = next;
        observer(x_next, &y);
    }
    Ok(y)
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for j in 0..N {
        out[j] += h * k[j];
    }
    out
}

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(NumericsError::Argument("matrix must have at least one row".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(NumericsError::Argument(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(offdiag.iter()).any(|v| !v.is_finite()) {
            return Err(NumericsError::Argument("matrix entries must be finite".into()));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// Gershgorin interval enclosing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence / LDLᵀ inertia).
    pub fn sturm_count(&self, x: f64) -> usize {
        let (lo, hi) = self.gershgorin();
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * lo.abs().max(hi.abs()));
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            let e = self.offdiag[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// The `k` smallest eigenvalues in ascending order.
pub fn tridiag_eigenvalues(m: &TridiagonalMatrix, k: usize) -> Result<Vec<f64>> {
    let (lo, hi) = m.gershgorin();
    let scale = lo.abs().max(hi.abs()).max(1.0);
    tridiag_eigenvalues_tol(m, k, 4.0 * f64::EPSILON * scale)
}

/// As [`tridiag_eigenvalues`], bisecting each eigenvalue until its bracket is
/// narrower than `abs_tol` or can no longer be split.
pub fn tridiag_eigenvalues_tol(m: &TridiagonalMatrix, k: usize, abs_tol: f64) -> Result<Vec<f64>> {
    if k < 1 || k > m.dim() {
        return Err(NumericsError::Argument(format!(
            "requested {k} eigenvalues of a {}x{} matrix",
            m.dim(),
            m.dim()
        )));
    }
    let (g_lo, g_hi) = m.gershgorin();
    let pad = 1e-12 * g_lo.abs().max(g_hi.abs()).max(1.0);
    let (g_lo, g_hi) = (g_lo - pad, g_hi + pad);
    let mut out = Vec::with_capacity(k);
    let mut floor = g_lo;
    for j in 0..k {
        // invariant: count(lo) <= j < count(hi)
        let mut lo = floor;
        let mut hi = g_hi;
        loop {
            let mid = lo + 0.5 * (hi - lo);
            if hi - lo <= abs_tol || mid <= lo || mid >= hi {
                break;
            }
            if m.sturm_count(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = lo + 0.5 * (hi - lo);
        out.push(value);
        floor = lo;
    }
    Ok(out)
}
