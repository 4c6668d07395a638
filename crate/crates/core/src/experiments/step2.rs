use crate::error::Result;
use crate::lp::{sum_of_products, Field, Padded};
use crate::solver::{rhs_terms, State};

/// `E_t + u E_x` computed from `rho_t`, compared against the closed form
/// `G = -(1/2) u H(rho^2) - (1/2) H(-u rho^2 - d(3 u_x rho^2))`, `H = (1 - d^2)^{-1}`.
/// Returns the relative sup-norm discrepancy.
pub fn step2_g_identity_check(state: &State) -> Result<f64> {
    let terms = rhs_terms(state, true, true)?;
    let (direct, closed) = g_both_ways(state, &terms.e, &terms.drho)?;
    let scale = direct.node_values().linf().max(closed.node_values().linf());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(direct.sub(&closed)?.node_values().linf() / scale)
}

fn g_both_ways(state: &State, e: &Field, drho: &Field) -> Result<(Field, Field)> {
    let u = &state.u;
    let pu = Padded::new(u);
    let pux = Padded::new(&u.derivative());
    let pr = Padded::new(&state.rho);
    let prt = Padded::new(drho);
    let pex = Padded::new(&e.derivative());

    // E_t = -(1/2) d H (2 rho rho_t)
    let et = sum_of_products(&[(1.0, &pr, &prt)])?
        .dx_helmholtz_inverse()
        .scale(-1.0);
    let direct = et.add(&sum_of_products(&[(1.0, &pu, &pex)])?)?;

    let rho2 = sum_of_products(&[(1.0, &pr, &pr)])?;
    let p_rho2 = Padded::new(&rho2);
    let u_h = sum_of_products(&[(1.0, &pu, &Padded::new(&rho2.helmholtz_inverse()))])?;
    let u_rho2 = sum_of_products(&[(1.0, &pu, &p_rho2)])?;
    let ux_rho2 = sum_of_products(&[(3.0, &pux, &p_rho2)])?;
    let inner = u_rho2.add(&ux_rho2.derivative())?.scale(-1.0);
    let closed = u_h
        .scale(-0.5)
        .sub(&inner.helmholtz_inverse().scale(0.5))?;
    Ok((direct, closed))
}
