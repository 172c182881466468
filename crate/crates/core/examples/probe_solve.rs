use qls_core::energy::*;
use qls_core::grid::{Field, Grid};
use qls_core::potentials::{MSet, Potentials, RegionO};
use qls_core::shooting::{find_ground_state, ShootConfig};
use qls_core::solver::*;
use qls_core::transform::DualTransform;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let scfg = ShootConfig {
        profile_nodes: 6000, r_max: 600.0, rtol: 1.0e-10, tol_amplitude: 1.0e-12,
        ..ShootConfig::new(5, 4.0, 1.0)
    };
    let shoot = find_ground_state(&scfg).unwrap();
    let gs = shoot.ground_state();
    println!("C_m = {:.6}", shoot.c_m());
    let pots = Potentials {
        v: Arc::new(|_: &[f64; 3]| 1.0e-12),
        k: Arc::new(|_: &[f64; 3]| 1.0),
        m: 1.0, k0: 1.01, v0: 1.0e-12,
        mset: MSet::Point { at: [0.0; 3] },
    };
    let pen = Penalization::new(1.0, RegionO::Ball { radius: 1000.0 }, 9.9, shoot.dirichlet, 5, &[0.0;3]).unwrap();
    let eps = 0.1f64;
    let kappa = eps.powf(1.6);
    let grid = Grid::radial_geometric(5, 1e-3, 0.95 * 1000.0 / eps, 3000).unwrap();
    let asm = Assembled::new(grid.clone(), pots, pen, kappa, eps, DualTransform::standard(), 4.0).unwrap();

    let cfg = SolveConfig { gradient_tolerance: 1.0e-6, max_iterations: 2000, trace_every: 1, ..Default::default() };
    let t0 = Instant::now();
    let out = solve(&cfg, &asm, &gs).unwrap();
    println!("elapsed {:?} iters={} conv={} |g|={:.3e} dual={:.3e} G={:.6}",
        t0.elapsed(), out.iterations, out.converged, out.report.gradient_norm, out.dual_norm, out.report.gamma_eps);
    let k = out.trace.len();
    for row in out.trace.iter().step_by((k/12).max(1)) {
        println!("it {:4} G={:.8} |g|={:.3e} a={:.2e} t={:.6}", row.iteration, row.gamma, row.gradient_norm, row.step, row.fiber_t);
    }
    let u_field = Field::from_fn(grid.clone(), |pos| gs.eval(pos[0])).unwrap();
    println!("d12 distance = {:.4e}", out.field.d12_distance(&u_field).unwrap());
    println!("Q = {:.3e}, pohozaev = {:.3e}", out.report.q_eps, out.report.pohozaev_residual);
}
