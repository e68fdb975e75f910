#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// Excited-state loss of a two-level system under
/// `H = g (e^{i delta t} |e><g| + h.c.)` after time `t`, starting in `|e>`.
/// Plain RK4 on the two amplitudes, independent of the library integrator.
pub fn two_level_transfer(g: f64, delta: f64, t: f64) -> f64 {
    let w = (4.0 * g * g + delta * delta).sqrt().max(g.abs()).max(delta.abs());
    let steps = ((w * t * 40.0).ceil() as usize).max(2000);
    let dt = t / steps as f64;
    let mi = C64::new(0.0, -1.0);
    let rhs = |tt: f64, y: [C64; 2]| -> [C64; 2] {
        let up = C64::from_polar(g, delta * tt);
        // y[0] = excited, y[1] = ground
        [mi * up * y[1], mi * up.conj() * y[0]]
    };
    let mut y = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let mut tt = 0.0;
    for _ in 0..steps {
        let k1 = rhs(tt, y);
        let k2 = rhs(tt + dt / 2.0, [y[0] + k1[0] * (dt / 2.0), y[1] + k1[1] * (dt / 2.0)]);
        let k3 = rhs(tt + dt / 2.0, [y[0] + k2[0] * (dt / 2.0), y[1] + k2[1] * (dt / 2.0)]);
        let k4 = rhs(tt + dt, [y[0] + k3[0] * dt, y[1] + k3[1] * dt]);
        for i in 0..2 {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
        tt += dt;
    }
    y[1].norm_sqr()
}
