//! Adaptive 2-D integration of a density over a rectangle.
//!
//! Each cell uses the tensor product of the 15-point Kronrod rule with its
//! embedded 7-point Gauss rule. The Kronrod value is returned and
//! `|K15 - G7|` serves as the cell error. Cells whose error exceeds their
//! area share of the tolerance are bisected along the longer side; all
//! cells of a pass are evaluated in parallel and summed in a fixed order, so
//! results do not depend on the thread count.

use crate::model::Rectangle;
use crate::numeric::CompensatedSum;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Initial subdivision per axis.
const INITIAL_SPLITS: usize = 4;

/// `(node, kronrod weight, gauss weight)` on `[-1, 1]`.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        out[i] = (-XGK[i], WGK[i], wg);
        out[14 - i] = (XGK[i], WGK[i], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_cells: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_cells: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub cells_used: usize,
    pub converged: bool,
}

/// Kronrod value and `|K - G|` on one cell.
pub fn integrate_cell<F, E>(f: &F, cell: &Rectangle) -> Result<(f64, f64), E>
where
    F: Fn(Complex64) -> Result<f64, E>,
{
    let rule = rule();
    let (cx, cy) = ((cell.x_min + cell.x_max) / 2.0, (cell.y_min + cell.y_max) / 2.0);
    let (hx, hy) = (cell.width() / 2.0, cell.height() / 2.0);
    let mut kronrod = CompensatedSum::new();
    let mut gauss = CompensatedSum::new();
    for &(ty, wky, wgy) in &rule {
        for &(tx, wkx, wgx) in &rule {
            let v = f(Complex64::new(cx + hx * tx, cy + hy * ty))?;
            kronrod.add(wkx * wky * v);
            if wgx != 0.0 && wgy != 0.0 {
                gauss.add(wgx * wgy * v);
            }
        }
    }
    let jac = hx * hy;
    let k = kronrod.value() * jac;
    let g = gauss.value() * jac;
    Ok((k, (k - g).abs()))
}

/// Integrates `f` over `region` until the summed cell error is within
/// `max(abs_tol, rel_tol * |value|)` or `max_cells` would be exceeded.
/// Evaluation errors abort the integration.
pub fn integrate_density<F, E>(
    f: F,
    region: &Rectangle,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult, E>
where
    F: Fn(Complex64) -> Result<f64, E> + Sync,
    E: Send,
{
    let mut cells = Vec::with_capacity(INITIAL_SPLITS * INITIAL_SPLITS);
    let (dx, dy) = (region.width() / INITIAL_SPLITS as f64, region.height() / INITIAL_SPLITS as f64);
    for iy in 0..INITIAL_SPLITS {
        for ix in 0..INITIAL_SPLITS {
            let x0 = region.x_min + ix as f64 * dx;
            let y0 = region.y_min + iy as f64 * dy;
            let x1 = if ix + 1 == INITIAL_SPLITS { region.x_max } else { x0 + dx };
            let y1 = if iy + 1 == INITIAL_SPLITS { region.y_max } else { y0 + dy };
            cells.push(Rectangle { x_min: x0, x_max: x1, y_min: y0, y_max: y1 });
        }
    }
    let total_area = region.area();
    let mut done: Vec<(f64, f64)> = Vec::new();
    let mut active: Vec<(Rectangle, f64, f64)> = evaluate(&f, cells)?;

    loop {
        let mut value = CompensatedSum::new();
        let mut error = CompensatedSum::new();
        let pending = active.iter().map(|&(_, v, e)| (v, e));
        for (v, e) in done.iter().copied().chain(pending) {
            value.add(v);
            error.add(e);
        }
        let (value, error) = (value.value(), error.value());
        let cells_used = done.len() + active.len();
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= tol {
            return Ok(QuadratureResult { value, error_estimate: error, cells_used, converged: true });
        }

        let mut refine = Vec::new();
        for (cell, v, e) in active {
            if e > tol * cell.area() / total_area {
                refine.push(cell);
            } else {
                done.push((v, e));
            }
        }
        if refine.is_empty() || cells_used + refine.len() > opts.max_cells {
            return Ok(QuadratureResult { value, error_estimate: error, cells_used, converged: false });
        }
        let children: Vec<Rectangle> = refine
            .iter()
            .flat_map(|c| {
                let (a, b) = c.bisect();
                [a, b]
            })
            .collect();
        active = evaluate(&f, children)?;
    }
}

fn evaluate<F, E>(f: &F, cells: Vec<Rectangle>) -> Result<Vec<(Rectangle, f64, f64)>, E>
where
    F: Fn(Complex64) -> Result<f64, E> + Sync,
    E: Send,
{
    cells
        .into_par_iter()
        .map(|c| integrate_cell(f, &c).map(|(v, e)| (c, v, e)))
        .collect()
}
