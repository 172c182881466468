use qls_core::energy::*;
use qls_core::grid::Grid;
use qls_core::potentials::{MSet, Potentials, RegionO};
use qls_core::shooting::{find_ground_state, ShootConfig};
use qls_core::solver::*;
use qls_core::transform::DualTransform;
use std::sync::Arc;

fn main() {
    let scfg = ShootConfig {
        profile_nodes: 6000, r_max: 600.0, rtol: 1.0e-10, tol_amplitude: 1.0e-12,
        ..ShootConfig::new(5, 4.0, 1.0)
    };
    let shoot = find_ground_state(&scfg).unwrap();
    let gs = shoot.ground_state();
    let pots = Potentials {
        v: Arc::new(|_: &[f64; 3]| 1.0e-12),
        k: Arc::new(|_: &[f64; 3]| 1.0),
        m: 1.0, k0: 1.01, v0: 1.0e-12,
        mset: MSet::Point { at: [0.0; 3] },
    };
    let pen = Penalization::new(1.0, RegionO::Ball { radius: 1000.0 }, 9.9, shoot.dirichlet, 5, &[0.0;3]).unwrap();
    let eps = 0.05f64;
    let kappa = eps.powf(1.6);
    let grid = Grid::radial_geometric(5, 1e-3, 0.95 * 1000.0 / eps, 4000).unwrap();
    let asm = Assembled::new(grid.clone(), pots, pen, kappa, eps, DualTransform::standard(), 4.0).unwrap();

    // run into the frozen zone
    let cfg = SolveConfig { gradient_tolerance: 1.0e-9, max_iterations: 900, ..Default::default() };
    let out = solve(&cfg, &asm, &gs).unwrap();
    let v = out.field.values().to_vec();
    let gamma = asm.gamma(&v);
    let g = asm.gradient(&v);
    // rebuild preconditioner direction the same way solve does: use energy API pieces
    // (mimic: tridiag solve not public; approximate with many CG? just test raw gradient dir too)
    // Direction 1: raw gradient
    println!("gamma = {gamma:.10}  |g|_l2w = {:.3e}", asm.l2w_norm(&g));
    // verify the preconditioner solves its system
    let d_pc = preconditioned_direction(&asm, &g);
    let lap = grid.weak_neg_laplacian(&d_pc);
    let mut worst = 0.0f64; let mut gn = 0.0f64;
    for i in 0..d_pc.len()-1 {
        let res = lap[i] + kappa * 1.0e-12 * d_pc[i] - g[i];
        worst = worst.max(res.abs()); gn = gn.max(g[i].abs());
    }
    println!("precond residual linf = {:.3e} (|g|_inf {:.3e})", worst, gn);
    {
        // locate the residual gradient
        let mut worst = (0usize, 0.0f64);
        for i in 0..g.len() {
            let c = grid.weight(i) * g[i] * g[i];
            if c > worst.1 { worst = (i, c); }
        }
        let i = worst.0;
        println!("residual peak at node {i}: r={:.4e} v={:.4e} g={:.4e} d={:.4e} wg2={:.3e}",
            grid.node_radius(i), v[i], g[i], d_pc[i], worst.1);
        // top-contribution radii histogram
        let mut tot = 0.0; for i in 0..g.len() { tot += grid.weight(i)*g[i]*g[i]; }
        for lim in [(0.0,1.0),(1.0,10.0),(10.0,100.0),(100.0,1000.0),(1000.0,40000.0)] {
            let s: f64 = (0..g.len()).filter(|&i| grid.node_radius(i) > lim.0 && grid.node_radius(i) <= lim.1)
                .map(|i| grid.weight(i)*g[i]*g[i]).sum();
            println!("  |g|2w in r=({},{}]: {:.3e} ({:.1}%)", lim.0, lim.1, s, 100.0*s/tot);
        }
        // does a step change v at all?
        let mut cand: Vec<f64> = (0..v.len()).map(|i| v[i] - 1.0 * d_pc[i]).collect();
        for x in cand.iter_mut() { if *x < 0.0 { *x = 0.0; } }
        let nn = cand.len(); cand[nn-1] = 0.0;
        let diff: f64 = (0..nn).map(|i| (cand[i]-v[i]).abs()).fold(0.0, f64::max);
        println!("max |step change| at alpha=1: {:.3e},  Gamma(cand)-Gamma = {:.6e}", diff, asm.gamma(&cand)-gamma);
        let parts0 = asm.energy_parts(&v);
        for k in [0i32, 4, 8] {
            let alpha = 2.0f64.powi(-k);
            let mut cand: Vec<f64> = (0..v.len()).map(|i| v[i] - alpha * d_pc[i]).collect();
            for x in cand.iter_mut() { if *x < 0.0 { *x = 0.0; } }
            let n = cand.len(); cand[n-1] = 0.0;
            let parts = asm.energy_parts(&cand);
            println!("a=2^-{k}: dD={:+.4e} dMass={:+.4e} dSrc={:+.4e} dQm={:+.4e} dQ={:+.4e}",
                parts.dirichlet - parts0.dirichlet,
                0.5*kappa*(parts.mass - parts0.mass),
                -(parts.source - parts0.source)/4.0,
                parts.q_mass - parts0.q_mass,
                parts.q_eps - parts0.q_eps);
        }
        // where is d big?
        for lim in [3.0, 30.0, 300.0, 3000.0, 19200.0] {
            let mut sup = 0.0f64;
            for i in 0..d_pc.len() { if grid.node_radius(i) <= lim { sup = sup.max(d_pc[i].abs()); } }
            println!("sup|d| r<{lim}: {:.3e}", sup);
        }
    }
    for dir_name in ["preconditioned", "raw-gradient"] {
        let d: Vec<f64> = if dir_name == "preconditioned" { d_pc.clone() } else { g.clone() };
        let descent: f64 = grid.integrate(|i| g[i] * d[i]);
        println!("direction {dir_name}: descent = {descent:.6e}");
        for k in 0..14 {
            let alpha = 2.0f64.powi(-k);
            let mut cand: Vec<f64> = (0..v.len()).map(|i| v[i] - alpha * d[i]).collect();
            for x in cand.iter_mut() { if *x < 0.0 { *x = 0.0; } }
            let n = cand.len(); cand[n-1] = 0.0;
            let gn = asm.gamma(&cand);
            let model = gamma - 1e-4 * alpha * descent;
            println!("  a=2^-{k:<2} dG={:+.6e}  need<={:+.6e} {}",
                gn - gamma, model - gamma, if gn <= model {"ACCEPT"} else {"reject"});
        }
    }
}
