use nalgebra::DMatrix;

use super::statespace::StateSpace;
use crate::error::{Error, Result};

/// Plant `P` under the feedback `u = r_u + K (r_y - y)`.
///
/// The plant sees `u + w`; the measured output is `y = P(u + w) + η`.
/// State `[x_P; x_K]`, inputs `[r_u; r_y; w; η]`, outputs `[u; y]`.
pub fn closed_loop_assemble(p: &StateSpace, k: &StateSpace) -> Result<StateSpace> {
    if p.d.iter().any(|&v| v != 0.0) {
        return Err(Error::AlgebraicLoop);
    }
    let (np, m, l) = (p.states(), p.inputs(), p.outputs());
    let nk = k.states();
    if k.inputs() != l || k.outputs() != m {
        return Err(Error::Dimension(format!(
            "controller is {}x{}, plant needs {m}x{l}",
            k.outputs(),
            k.inputs()
        )));
    }
    let n = np + nk;
    let bp_dk = &p.b * &k.d;
    let dk_cp = &k.d * &p.c;

    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(&(&p.a - &p.b * &dk_cp));
    a.view_mut((0, np), (np, nk)).copy_from(&(&p.b * &k.c));
    a.view_mut((np, 0), (nk, np)).copy_from(&(-&k.b * &p.c));
    a.view_mut((np, np), (nk, nk)).copy_from(&k.a);

    let nin = 2 * (m + l);
    let mut b = DMatrix::zeros(n, nin);
    // columns: r_u [0, m), r_y [m, m+l), w [m+l, 2m+l), η [2m+l, 2m+2l)
    b.view_mut((0, 0), (np, m)).copy_from(&p.b);
    b.view_mut((0, m), (np, l)).copy_from(&bp_dk);
    b.view_mut((0, m + l), (np, m)).copy_from(&p.b);
    b.view_mut((0, 2 * m + l), (np, l)).copy_from(&(-&bp_dk));
    b.view_mut((np, m), (nk, l)).copy_from(&k.b);
    b.view_mut((np, 2 * m + l), (nk, l)).copy_from(&(-&k.b));

    let mut c = DMatrix::zeros(m + l, n);
    c.view_mut((0, 0), (m, np)).copy_from(&(-&dk_cp));
    c.view_mut((0, np), (m, nk)).copy_from(&k.c);
    c.view_mut((m, 0), (l, np)).copy_from(&p.c);

    let mut d = DMatrix::zeros(m + l, nin);
    d.view_mut((0, 0), (m, m)).fill_with_identity();
    d.view_mut((0, m), (m, l)).copy_from(&k.d);
    d.view_mut((0, 2 * m + l), (m, l)).copy_from(&(-&k.d));
    d.view_mut((m, 2 * m + l), (l, l)).fill_with_identity();

    StateSpace::new(a, b, c, d)
}
