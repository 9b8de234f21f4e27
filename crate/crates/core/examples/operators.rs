//! Applies every fractional operator to u(t) = t² and compares the left
//! operators with their closed forms.

use fracplap::{apply, build_operators, gamma, make_grid, FracParams, GridFunction, OpKind};

fn main() -> fracplap::Result<()> {
    let alpha = 0.5;
    let grid = make_grid(1.0, 512)?;
    let ops = build_operators(&FracParams::new(alpha, 2.0, 1.0)?, &grid);
    let u = GridFunction::free(grid.sample(|t| t * t));

    let exact_deriv = |t: f64| 2.0 / gamma(3.0 - alpha).unwrap() * t.powf(2.0 - alpha);
    let exact_int = |t: f64| 2.0 / gamma(3.0 + alpha).unwrap() * t.powf(2.0 + alpha);

    for kind in OpKind::ALL {
        let v = apply(&ops, kind, &u)?;
        let mid = grid.n / 2;
        let exact = match kind {
            OpKind::LeftDeriv | OpKind::CaputoLeft => Some(exact_deriv(grid.node(mid))),
            OpKind::LeftInt => Some(exact_int(grid.node(mid))),
            _ => None,
        };
        match exact {
            Some(e) => println!("{kind:?}: value at t=0.5 {:.8} (exact {e:.8})", v.values[mid]),
            None => println!("{kind:?}: value at t=0.5 {:.8}", v.values[mid]),
        }
    }
    Ok(())
}
