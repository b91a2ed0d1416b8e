//! Deterministic scalar minimization: uniform grid scan followed by
//! golden-section refinement around the best grid point.
//!
//! Both stages are branch-deterministic, so repeated calls with the same
//! inputs return bit-identical results regardless of thread or call order.

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9; // 1/phi

#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalarMin {
    pub x: f64,
    pub value: f64,
}

/// Minimizes `f` over `[lo, hi]`.
///
/// Ties on the grid keep the smallest abscissa; the golden-section stage only
/// replaces the grid point on a strict improvement. `f` may return
/// `f64::INFINITY` at excluded endpoints (the refinement never evaluates the
/// bracket endpoints themselves).
pub(crate) fn grid_golden_min(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    golden_iters: usize,
) -> ScalarMin {
    debug_assert!(grid_points >= 2 && hi > lo);
    let step = (hi - lo) / (grid_points - 1) as f64;

    let mut best_i = 0usize;
    let mut best_x = lo;
    let mut best_v = f(lo);
    for i in 1..grid_points {
        // Recompute from the index so the grid is exactly reproducible.
        let x = if i == grid_points - 1 { hi } else { lo + step * i as f64 };
        let v = f(x);
        if v < best_v {
            best_i = i;
            best_x = x;
            best_v = v;
        }
    }

    let mut a = if best_i == 0 { lo } else { lo + step * (best_i - 1) as f64 };
    let mut b = if best_i + 1 >= grid_points { hi } else { lo + step * (best_i + 1) as f64 };

    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..golden_iters {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
        }
    }

    let (rx, rv) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if rv < best_v {
        ScalarMin { x: rx, value: rv }
    } else {
        ScalarMin { x: best_x, value: best_v }
    }
}

/// Maximizes `f` over `[lo, hi]` with the same determinism guarantees.
pub(crate) fn grid_golden_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    golden_iters: usize,
) -> ScalarMin {
    let m = grid_golden_min(|x| -f(x), lo, hi, grid_points, golden_iters);
    ScalarMin { x: m.x, value: -m.value }
}
