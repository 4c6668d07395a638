use crate::error::Result;
use crate::lp::{sum_of_products, Field, Padded};
use crate::solver::state::State;

/// Relative sup-norm residual of `m_t + 3 m u_x + u m_x + rho rho_x` with
/// `m = u - u_xx` and `m_t` induced from `du`.
pub fn m_form_residual(state: &State, du: &Field, _drho: &Field) -> Result<f64> {
    let m = state.u.helmholtz();
    let mt = du.helmholtz();
    let pu = Padded::new(&state.u);
    let pux = Padded::new(&state.u.derivative());
    let pm = Padded::new(&m);
    let pmx = Padded::new(&m.derivative());
    let pr = Padded::new(&state.rho);
    let prx = Padded::new(&state.rho.derivative());
    let a = sum_of_products(&[(3.0, &pm, &pux)])?;
    let b = sum_of_products(&[(1.0, &pu, &pmx)])?;
    let c = sum_of_products(&[(1.0, &pr, &prx)])?;
    let total = mt.add(&a)?.add(&b)?.add(&c)?;
    let scale = [&mt, &a, &b, &c]
        .iter()
        .map(|f| f.node_values().linf())
        .sum::<f64>();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(total.node_values().linf() / scale)
}
