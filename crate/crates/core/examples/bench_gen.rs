fn main() {
    use fracrb_core::fem::{assemble, unit_square_mesh, FeOrder};
    use fracrb_core::linalg::gen_eig;
    let mesh = unit_square_mesh(32).unwrap();
    let (m, a) = assemble(&mesh, FeOrder::P1).unwrap();
    let t = std::time::Instant::now();
    let basis = gen_eig(&a, &m).unwrap();
    println!("N={} gen_eig took {:?} lam_min={}", m.dim(), t.elapsed(), basis.eigenvalues[0]);
}
