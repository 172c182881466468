use qls_core::energy::*;
use qls_core::grid::Grid;
use qls_core::potentials::{MSet, Potentials, RegionO};
use qls_core::semiclassical::*;
use qls_core::shooting::GroundState;
use qls_core::solver::*;
use qls_core::transform::DualTransform;
use std::sync::Arc;

fn aux_profile(kappa: f64, v0: f64, m: f64, p: f64) -> (GroundState, f64) {
    let grid = Grid::radial_geometric(2, 1e-3, 30.0, 1200).unwrap();
    let pots = Potentials::constant(v0, m);
    let pen = Penalization::new(1.0, RegionO::Ball { radius: 1000.0 }, 9.0, 1.0, 2, &[0.0; 3]).unwrap();
    let asm = Assembled::new(grid.clone(), pots, pen, kappa, 1e-3, DualTransform::standard(), p).unwrap();
    let width = 1.0 / (kappa * v0).sqrt();
    let radii = match &*grid { Grid::Radial(rg) => rg.nodes().to_vec(), _ => unreachable!() };
    let seed_vals: Vec<f64> = radii.iter().map(|r| 2.0 * (-(r * r) / (2.0 * width * width)).exp()).collect();
    let seed = GroundState::from_profile(radii.clone(), seed_vals.clone(), 2, 0.0, 1.0).unwrap();
    let cfg = SolveConfig { gradient_tolerance: 1e-7, fiber: FiberStrategy::Amplitude, max_iterations: 3000, ..Default::default() };
    let out = solve_from(&cfg, &asm, &seed, seed_vals).unwrap();
    let d = out.field.dirichlet_energy();
    let g = out.report.gamma_eps;
    (GroundState::from_profile(radii, out.field.values().to_vec(), 2, 0.0, d).unwrap(), g)
}

fn main() {
    let (gamma_, p) = (2.0f64, 6.0f64);
    let (v0, m) = (2.0, 1.0);
    let half_width = 16.0;
    let n_axis = 201usize;
    let h = 2.0 * half_width / (n_axis as f64 - 1.0);
    for ring in [2.72f64, 4.0, 4.64, 5.28, 5.92, 6.4, 8.0] {
        let hbar = (1.0 / ring).powf(1.0 / 3.0);
        let map = RescaleMap::new(hbar, gamma_, p).unwrap();
        let (kappa, eps) = (map.kappa(), map.eps());
        let (ground, _) = aux_profile(kappa, v0, m, p);
        let grid = Grid::tensor(2, half_width, n_axis).unwrap();
        let pots = Potentials {
            v: Arc::new(move |_x: &[f64; 3]| v0),
            k: Arc::new(move |x: &[f64; 3]| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt().max(1.0e-9);
                m * (1.0 - 3.2 * (r.ln() * r.ln()).min(0.5))
            }),
            m, k0: 1.01, v0,
            mset: MSet::Sphere { radius: 1.0 },
        };
        let pen = Penalization::new(1.0, RegionO::Ball { radius: 200.0 }, 1.9, 1.0, 2, &[1.0, 0.0, 0.0]).unwrap();
        let asm = Assembled::new(grid.clone(), pots, pen, kappa, eps, DualTransform::standard(), p).unwrap();
        let cfg = SolveConfig {
            gradient_tolerance: 3e-5,
            init_center: [1.0, 0.0, 0.0],
            fiber: FiberStrategy::Amplitude,
            max_iterations: 2000,
            ..Default::default()
        };
        let out = solve(&cfg, &asm, &ground).unwrap();
        let idx = out.field.argmax();
        let pos = grid.position(idx);
        let nodes_off = (pos[0] - ring) / h;
        println!("ring={ring:.2} hbar={hbar:.5} eps={eps:.4}: argmax_y=({:.3},{:.3}) offset={nodes_off:+.1} nodes dist_x={:.5}",
            pos[0], pos[1], (eps * (pos[0]*pos[0]+pos[1]*pos[1]).sqrt() - 1.0).abs());
    }
}
