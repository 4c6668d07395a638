use crate::error::{Error, Result};
use crate::lp::{sum_of_products, Field, Padded};
use crate::solver::state::State;

/// Time derivatives together with the intermediate terms the diagnostics reuse.
#[derive(Debug, Clone)]
pub struct RhsTerms {
    pub du: Field,
    pub drho: Field,
    /// Projected `u u_x`.
    pub u_ux: Field,
    /// `F = -(3/2) d (1 - d^2)^{-1} u^2`.
    pub f: Field,
    /// `E = -(1/2) d (1 - d^2)^{-1} rho^2`.
    pub e: Field,
}

fn padded(f: &Field, dealias: bool) -> Padded {
    if dealias {
        Padded::new(f)
    } else {
        Padded::aliased(f)
    }
}

/// Right-hand side of
/// `u_t = -u u_x - d(1 - d^2)^{-1}(3/2 u^2 + 1/2 rho^2)`,
/// `rho_t = -u rho_x - 2 u_x rho`.
pub fn rhs_terms(state: &State, coupling: bool, dealias: bool) -> Result<RhsTerms> {
    let ux = state.u.derivative();
    let rx = state.rho.derivative();
    let pu = padded(&state.u, dealias);
    let pux = padded(&ux, dealias);
    let pr = padded(&state.rho, dealias);
    let prx = padded(&rx, dealias);

    let u_ux = sum_of_products(&[(1.0, &pu, &pux)])?;
    let f = sum_of_products(&[(1.0, &pu, &pu)])?
        .dx_helmholtz_inverse()
        .scale(-1.5);
    let e = if coupling {
        sum_of_products(&[(1.0, &pr, &pr)])?
            .dx_helmholtz_inverse()
            .scale(-0.5)
    } else {
        Field::zeros(*state.u.grid())
    };
    let du = f.add(&e)?.sub(&u_ux)?;
    let drho = sum_of_products(&[(1.0, &pu, &prx), (2.0, &pux, &pr)])?.scale(-1.0);

    if !du.is_finite() || !drho.is_finite() {
        return Err(Error::BlowUp {
            t: state.t,
            what: "non-finite right-hand side".into(),
        });
    }
    Ok(RhsTerms {
        du,
        drho,
        u_ux,
        f,
        e,
    })
}

pub fn rhs(state: &State) -> Result<(Field, Field)> {
    let r = rhs_terms(state, true, true)?;
    Ok((r.du, r.drho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn zero_is_a_fixed_point() {
        let g = GridSpec::new(32, PI).unwrap();
        let s = State::new(0.0, Field::zeros(g), Field::zeros(g)).unwrap();
        let (du, dr) = rhs(&s).unwrap();
        assert!(du.is_zero() && dr.is_zero());
    }

    #[test]
    fn cosine_velocity_golden() {
        // u = cos x, rho = 0:
        // -u u_x = sin(2x)/2,
        // u^2 = (1 + cos 2x)/2, d(1-d^2)^{-1} cos 2x = -2 sin(2x)/5,
        // so -(3/2) d(1-d^2)^{-1} u^2 = (3/2)(1/2)(2/5) sin 2x = (3/10) sin 2x.
        // Total: (1/2 + 3/10) sin 2x = (4/5) sin 2x.
        let g = GridSpec::new(32, PI).unwrap();
        let s = State::new(0.0, Field::from_fn(g, f64::cos), Field::zeros(g)).unwrap();
        let (du, dr) = rhs(&s).unwrap();
        let v = du.values().unwrap();
        for (i, x) in g.nodes().into_iter().enumerate() {
            assert!((v[i] - 0.8 * (2.0 * x).sin()).abs() < 1e-14);
        }
        assert!(dr.linf() < 1e-15);
    }

    #[test]
    fn nonlocal_forcing_from_density() {
        // u = 0, rho = cos x: du = -(1/2) d(1-d^2)^{-1} (1 + cos 2x)/2 = (1/10) sin 2x
        let g = GridSpec::new(32, PI).unwrap();
        let s = State::new(0.0, Field::zeros(g), Field::from_fn(g, f64::cos)).unwrap();
        let r = rhs_terms(&s, true, true).unwrap();
        let v = r.du.values().unwrap();
        for (i, x) in g.nodes().into_iter().enumerate() {
            assert!((v[i] - 0.1 * (2.0 * x).sin()).abs() < 1e-14);
        }
        assert!(r.drho.is_zero());
        let off = rhs_terms(&s, false, true).unwrap();
        assert!(off.du.is_zero());
    }
}
