//! Conditional eigenpairs and the unit-ball location test.

use asymap::prelude::*;

fn main() -> Result<()> {
    let cfg = SolverConfig::default();
    let x = Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
    for u in [1.0, 0.2] {
        let t = AffineMapping::new(x.clone(), PositiveVector::new(vec![u, u])?)?;
        let a = exact_asymptotic_affine(&t);
        for norm in [MonotoneNorm::max(), MonotoneNorm::sum()] {
            let e = conditional_eigen(EigenTarget::Asymptotic(&a), &norm, &cfg)?;
            println!(
                "u = {u}, {norm}: T_inf eigenpair lambda {:.6}, x {:?}",
                e.pair.lambda,
                e.pair.x.as_slice()
            );
        }
        let (e, inside) = unit_ball_fixed_point_test(&t, &MonotoneNorm::max(), &cfg)?;
        println!(
            "u = {u}: lambda' = {:.6}, fixed point in unit ball: {inside}",
            e.pair.lambda
        );
    }
    Ok(())
}
