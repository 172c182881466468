use qls_core::energy::*;
use qls_core::grid::Grid;
use qls_core::potentials::{MSet, Potentials, RegionO};
use qls_core::semiclassical::*;
use qls_core::shooting::GroundState;
use qls_core::solver::*;
use qls_core::transform::DualTransform;
use std::sync::Arc;
use std::time::Instant;

// Auxiliary radial profile at dimension 2 for the given kappa (V=v0, K=m).
fn aux_profile(kappa: f64, v0: f64, m: f64, p: f64) -> (GroundState, f64) {
    let grid = Grid::radial_geometric(2, 1e-3, 30.0, 1200).unwrap();
    let pots = Potentials::constant(v0, m);
    let pen = Penalization::new(1.0, RegionO::Ball { radius: 1000.0 }, 9.0, 1.0, 2, &[0.0; 3]).unwrap();
    let asm = Assembled::new(grid.clone(), pots, pen, kappa, 1e-3, DualTransform::standard(), p).unwrap();
    // Gaussian seed; fiber remax fixes the amplitude.
    let width = 1.0 / (kappa * v0).sqrt();
    let radii = match &*grid { Grid::Radial(rg) => rg.nodes().to_vec(), _ => unreachable!() };
    let seed_vals: Vec<f64> = radii.iter().map(|r| 2.0 * (-(r * r) / (2.0 * width * width)).exp()).collect();
    let seed = GroundState::from_profile(radii.clone(), seed_vals.clone(), 2, 0.0, 1.0).unwrap();
    let cfg = SolveConfig { gradient_tolerance: 1e-7, fiber: FiberStrategy::Amplitude, max_iterations: 3000, ..Default::default() };
    let out = solve_from(&cfg, &asm, &seed, seed_vals).unwrap();
    assert!(out.converged, "aux solve failed: |g|={:.2e}", out.report.gradient_norm);
    let d = out.field.dirichlet_energy();
    let gamma = out.report.gamma_eps;
    println!("  aux kappa={kappa:.4}: peak={:.4} D={:.4} gamma={:.4} iters={}", out.field.max_value(), d, gamma, out.iterations);
    (GroundState::from_profile(radii, out.field.values().to_vec(), 2, 0.0, d).unwrap(), gamma)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let ck: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1.6);
    let cap: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.5);

    let (gamma_, p) = (2.0f64, 6.0f64);
    let (v0, m) = (2.0, 1.0);
    let half_width = 16.0;
    let n_axis = 201usize;
    let region = RegionO::Ball { radius: 200.0 };
    let mset = MSet::Sphere { radius: 1.0 };
    let t_all = Instant::now();

    for hbar in [0.71637f64, 0.59955, 0.5] {
        let map = RescaleMap::new(hbar, gamma_, p).unwrap();
        let (kappa, eps) = (map.kappa(), map.eps());
        let ring = 1.0 / eps;
        println!("hbar={hbar}: kappa={kappa:.4} eps={eps:.4} ring_y={ring:.4}");
        let (ground, aux_gamma) = aux_profile(kappa, v0, m, p);
        let grid = Grid::tensor(2, half_width, n_axis).unwrap();
        let pots = Potentials {
            v: Arc::new(move |_x: &[f64; 3]| v0),
            k: Arc::new(move |x: &[f64; 3]| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1.0e-9);
                m * (1.0 - ck * (r.ln() * r.ln()).min(cap))
            }),
            m, k0: 1.01, v0,
            mset: mset.clone(),
        };
        let pen = Penalization::new(1.0, region.clone(), 1.9, 1.0, 2, &[1.0, 0.0, 0.0]).unwrap();
        let asm = Assembled::new(grid.clone(), pots, pen, kappa, eps, DualTransform::standard(), p).unwrap();
        let cfg = SolveConfig {
            gradient_tolerance: 3e-5,
            init_center: [1.0, 0.0, 0.0],
            fiber: FiberStrategy::Amplitude,
            max_iterations: 2000,
            ..Default::default()
        };
        let t0 = Instant::now();
        let out = solve(&cfg, &asm, &ground).unwrap();
        let rep = concentration_report(&out, &asm, hbar, &ground, aux_gamma).unwrap();
        println!("  solve: {:?} iters={} conv={} |g|={:.2e}", t0.elapsed(), out.iterations, out.converged, out.report.gradient_norm);
        println!("  x_hbar={:?} |x|={:.5} dist_to_M={:.5} cell={:.4} prof_err={:.4}",
            rep.x_hbar, rep.x_hbar_norm, rep.dist_to_m, eps * 0.16, rep.profile_error_d12);
    }
    println!("total {:?}", t_all.elapsed());
}
