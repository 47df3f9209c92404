//! Fixed-step explicit Runge-Kutta.

/// One classical fourth-order Runge-Kutta step of `dx/dt = f(x)`.
pub fn rk4_step<const N: usize, E>(
    x: &[f64; N],
    dt: f64,
    mut f: impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
) -> Result<[f64; N], E> {
    let offset = |base: &[f64; N], k: &[f64; N], h: f64| {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * ki;
        }
        out
    };
    let k1 = f(x)?;
    let k2 = f(&offset(x, &k1, 0.5 * dt))?;
    let k3 = f(&offset(x, &k2, 0.5 * dt))?;
    let k4 = f(&offset(x, &k3, dt))?;
    let mut out = *x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}
