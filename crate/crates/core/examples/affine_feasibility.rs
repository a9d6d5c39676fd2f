//! Fixed-point existence for `T(x) = Xx + u` at two coupling strengths.

use asymap::prelude::*;

fn affine(c: f64) -> Result<AffineMapping> {
    let x = Matrix::from_row_slice(2, 2, &[0.0, c, c, 0.0]);
    AffineMapping::new(x, PositiveVector::new(vec![1.0, 1.0])?)
}

fn main() -> Result<()> {
    let cfg = SolverConfig::default();
    for c in [0.5, 1.5] {
        let t = affine(c)?;
        let v = feasibility_check(&t, &exact_asymptotic_affine(&t), true, &cfg)?;
        println!("coupling {c}: rho = {:.6}, feasible = {}", v.rho, v.feasible);
        if let Some(x) = &v.fixed_point {
            println!("  fixed point {:?}", x.as_slice());
        }
    }
    Ok(())
}
