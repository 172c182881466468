use qls_core::shooting::*;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let cfg = ShootConfig::new(5, 4.0, 1.0); // defaults: r_max 1e3, 1e4 nodes, tol 1e-12
    let gs = find_ground_state(&cfg).unwrap();
    println!("elapsed: {:?}", t0.elapsed());
    println!("a*        = {:.12}", gs.amplitude);
    println!("decay_c   = {:.8} (slope route {:.8})", gs.decay_c, gs.decay_c_slope);
    println!("plateau   = {:.3e}", gs.plateau_variation);
    println!("dirichlet = {:.10}", gs.dirichlet);
    println!("lp_mass   = {:.10}", gs.lp_mass);
    println!("L_m       = {:.10}", gs.level);
    println!("C_m=D/N   = {:.10}", gs.c_m());
    println!("pohozaev  = {:.3e}", gs.pohozaev_residual);
    println!("r end     = {:.2}", gs.r.last().unwrap());
    println!("trace len = {}", gs.classification_trace.len());
    // integral quantities for problem design
    let g = gs.ground_state();
    println!("U(1)={:.6} U(5)={:.6} U(20)={:.6}", g.eval(1.0), g.eval(5.0), g.eval(20.0));
    // ∫ U² (for the V-term magnitude estimate):
    let grid = qls_core::grid::Grid::radial_geometric(5, 1e-4, 1e3, 20000).unwrap();
    let l2: f64 = grid.integrate(|i| g.eval(grid.node_radius(i)).powi(2));
    println!("int U^2   = {:.6}", l2);
    let tr = qls_core::transform::DualTransform::standard();
    let l2g: f64 = grid.integrate(|i| tr.invert(g.eval(grid.node_radius(i))).powi(2));
    println!("int G-1(U)^2 = {:.6}", l2g);
}
